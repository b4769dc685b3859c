#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tropprod/complexes.hpp"
#include "tropprod/curves.hpp"

namespace tropprod {

// Genus, number of markings and one slope vector per target factor.
// No factors at all means the smooth-target convention (maps are constant).
struct ContactData {
  int g = 0;
  int n = 0;
  std::vector<std::vector<long>> factors;

  long degree(std::size_t factor) const;
  // Throws InvalidInput on wrong lengths or nonzero sums, Unstable outside
  // the stable range.
  void validate() const;
  ContactData single(std::size_t factor) const;
};

// Combinatorial type of a balanced piecewise linear map to R^k.
// slopes[i][e] is the slope of edge e in factor i measured from its tail to
// its head, so h(head) - h(tail) = slope * length. leg_slopes[i][j] is the
// outgoing slope of leg j+1.
struct RubberMapType {
  DualGraph graph;
  std::vector<std::vector<long>> slopes;
  std::vector<std::vector<long>> leg_slopes;

  std::size_t num_factors() const { return slopes.size(); }
  EdgeLabels edge_labels() const;
  bool is_balanced() const;
  // A cycle on which every factor has slope zero.
  bool has_contracted_cycle() const;
  std::string to_string() const;

  friend bool operator==(const RubberMapType&, const RubberMapType&) = default;
};

struct CanonicalType {
  RubberMapType type;
  CanonicalForm form;  // of the graph with slope labels
  std::string key;
};
CanonicalType canonical_type(const RubberMapType& t);

// One row per independent cycle per factor (fundamental cycles of the
// spanning tree chosen greedily in edge order). Zero rows are kept.
std::vector<IntVector> cycle_equations(const RubberMapType& t);

struct ModuliCone {
  RationalCone cone;
  std::vector<IntVector> equations;
  bool empty_interior = false;  // zero cone although edges exist
};
ModuliCone moduli_cone(const RubberMapType& t);

// True iff the moduli cone contains a point with all edge lengths positive.
bool meets_open_orthant(const RubberMapType& t);

// Heights of the vertices at an edge-length point satisfying the cycle
// equations, measured from vertex 0; nullopt if path dependent.
std::optional<std::vector<std::vector<Rat>>> vertex_heights(const RubberMapType& t, const IntVector& lengths);

// Types with stable underlying graph for one factor, sorted by key.
std::vector<RubberMapType> enumerate_rubber_types(const ContactData& c, std::size_t factor);
// Types carrying all factors of c at once on stable graphs.
std::vector<RubberMapType> enumerate_joint_types(const ContactData& c);

struct StableImage {
  ConeId host;           // cone id of the stabilized graph in the curve complex
  LinearMap map;         // edge lengths of the type -> host coordinates
  RationalCone image;    // image of the moduli cone
};
StableImage forgetful_image(const RubberMapType& t);

// Identification of the stabilized graph of tY with that of tX:
// vertex, edge and flip data from Y's stable graph to X's stable graph.
using GraphIdentification = GraphAutomorphism;

struct ProductType {
  RubberMapType type;
  RationalCone cone;
  LinearMap to_x;  // product edge lengths -> edge lengths of tX
  LinearMap to_y;
};

std::vector<ProductType> superimpose(const RubberMapType& tx, const RubberMapType& ty,
                                     const GraphIdentification& identification);

struct MapModuliComplex {
  std::shared_ptr<AbstractConeComplex> complex;
  std::map<ConeId, RubberMapType> types;
  ComplexMorphism forgetful;
};

// Closes the types under contraction faces and attaches the forgetful
// morphism to the curve moduli complex.
MapModuliComplex build_map_complex(const std::vector<RubberMapType>& types, const CurveModuliComplex& base);

}  // namespace tropprod
