#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tropprod/exactgeom.hpp"

namespace tropprod {

using ConeId = std::string;

// Embedding of the cone `sub` onto a face of the cone `super`.
struct FaceMap {
  ConeId sub;
  ConeId super;
  LinearMap map;
};

// Cones glued along faces, with a finite automorphism group per cone.
//
// Face maps are all embeddings of one cone onto a proper face of another;
// the set is closed under composition and under pre- and post-composition
// with automorphisms. Identities are automorphisms, never face maps.
class AbstractConeComplex {
 public:
  // The identity is added to `auts` when missing.
  void add_cone(const ConeId& id, RationalCone cone, std::vector<LinearMap> auts = {});
  // Returns false when the face map was already present.
  bool add_face(const ConeId& sub, const ConeId& super, const LinearMap& map);
  // Adds compositions and automorphism conjugates until the face set is closed.
  void close_faces();

  bool has_cone(const ConeId& id) const { return cones_.count(id) > 0; }
  const RationalCone& cone(const ConeId& id) const;
  const std::map<ConeId, RationalCone>& cones() const { return cones_; }
  const std::vector<FaceMap>& faces() const { return faces_; }
  std::vector<const FaceMap*> faces_into(const ConeId& super) const;
  std::vector<const FaceMap*> faces_between(const ConeId& sub, const ConeId& super) const;
  const std::vector<LinearMap>& auts(const ConeId& id) const;
  bool has_face(const ConeId& sub, const ConeId& super, const LinearMap& map) const;

  // Cones that are not a face of any other cone.
  std::vector<ConeId> maximal_cones() const;
  std::size_t size() const { return cones_.size(); }

 private:
  std::map<ConeId, RationalCone> cones_;
  std::map<ConeId, std::vector<LinearMap>> auts_;
  std::vector<FaceMap> faces_;
  std::map<ConeId, std::vector<std::size_t>> faces_into_;
  std::set<std::tuple<ConeId, ConeId, LinearMap>> face_set_;
};

struct Violation {
  ConeId cone;
  std::string message;
};

std::vector<Violation> validate_complex(const AbstractConeComplex& c);

// Complex of a single fan in R^rank: all faces of the given cones, taken up to
// the action of `group` (linear maps of R^rank preserving the fan).
AbstractConeComplex fan_complex(std::size_t rank, const std::vector<RationalCone>& cones,
                                const std::vector<LinearMap>& group = {});

struct ConeImage {
  ConeId target;
  LinearMap map;
};

struct ComplexMorphism {
  std::shared_ptr<const AbstractConeComplex> source;
  std::shared_ptr<const AbstractConeComplex> target;
  std::map<ConeId, ConeImage> images;
};

// Each cone must land inside its target cone and the assignment must be
// compatible with face maps up to target face maps and automorphisms.
std::vector<Violation> validate_morphism(const ComplexMorphism& f);

// g after f.
ComplexMorphism compose(const ComplexMorphism& g, const ComplexMorphism& f);

// Subsets given as cones inside host cones.
struct ConicalPiece {
  ConeId host;
  RationalCone cone;
};

struct ConicalSubset {
  std::vector<ConicalPiece> pieces;
  // The pieces together with all their faces.
  std::vector<ConicalPiece> closure() const;
};

// Refinement of `original`. Every refined cone lives in the ambient lattice of
// its host cone and projects to it by the identity; refined cones are taken up
// to the host's automorphisms.
struct SubdivisionOf {
  std::shared_ptr<const AbstractConeComplex> original;
  std::shared_ptr<const AbstractConeComplex> refined;
  ComplexMorphism proj;

  // Full-dimensional cells covering the host cone (all of them, not only
  // orbit representatives).
  std::vector<RationalCone> cells(const ConeId& host) const;
  // Every cell inside the host cone, including lower-dimensional ones and
  // cells lying on proper faces, in host coordinates.
  std::vector<RationalCone> all_cells(const ConeId& host) const;
  bool is_identity() const;
};

// Builds a subdivision from the full-dimensional cells of each original cone.
// Hosts missing from `cells` stay unrefined. Throws std::logic_error if the
// cells do not tile, are not invariant or do not glue across faces.
SubdivisionOf assemble_subdivision(std::shared_ptr<const AbstractConeComplex> original,
                                   const std::map<ConeId, std::vector<RationalCone>>& cells);

SubdivisionOf identity_subdivision(std::shared_ptr<const AbstractConeComplex> original);

// Subdivision of `outer.original` whose cells are those of `inner`
// (a subdivision of outer.refined).
SubdivisionOf compose(const SubdivisionOf& outer, const SubdivisionOf& inner);

// Smallest refined cell containing `cone` (given in coordinates of `host`),
// with the linear map from host coordinates to that cell's coordinates.
struct CellLocation {
  ConeId cell;
  LinearMap map;
};
CellLocation locate_cell(const SubdivisionOf& s, const ConeId& host, const RationalCone& cone);

SubdivisionOf stellar_subdivide(std::shared_ptr<const AbstractConeComplex> c, const ConeId& id,
                                const IntVector& ray);

SubdivisionOf hyperplane_refine(std::shared_ptr<const AbstractConeComplex> c,
                                const std::map<ConeId, std::vector<IntVector>>& covectors);

SubdivisionOf common_refinement(const SubdivisionOf& s1, const SubdivisionOf& s2);

struct PullbackResult {
  SubdivisionOf subdivision;
  // Refined source -> refined target, each cone into a single cone.
  ComplexMorphism induced;
};
PullbackResult pullback_subdivision(const ComplexMorphism& f, const SubdivisionOf& s);

struct UnionCheck {
  bool ok = true;
  std::size_t piece = 0;
  ConeId host;
  IntVector witness;
};
UnionCheck is_union_of_cones(const AbstractConeComplex& c, const ConicalSubset& s);
// Same question for a subset of s.original against the cells of s.
UnionCheck is_union_of_cones(const SubdivisionOf& s, const ConicalSubset& subset);

SubdivisionOf refine_until_conical(std::shared_ptr<const AbstractConeComplex> c, const ConicalSubset& s,
                                   bool unimodularize = false);

// Repeated stellar subdivision until every cell is unimodular.
SubdivisionOf unimodularize(const SubdivisionOf& s);

struct ConeCheck {
  ConeId cone;
  bool onto = true;
  bool lattice = true;
  IntVector witness;
};

struct SemistableReport {
  std::vector<ConeCheck> cones;
  bool ok() const;
  std::size_t failures() const;
};

SemistableReport check_weak_semistable(const ComplexMorphism& f);

// Orbit representative helpers shared by the subdivision code.
std::vector<IntVector> transformed_rays(const LinearMap& a, const RationalCone& c);
RationalCone transform(const LinearMap& a, const RationalCone& c);
// Inverse of an automorphism inside a finite group.
LinearMap group_inverse(const std::vector<LinearMap>& group, const LinearMap& a);

}  // namespace tropprod
