#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tropprod/complexes.hpp"
#include "tropprod/curves.hpp"
#include "tropprod/tropmaps.hpp"

namespace tropprod {

// One mapping space: its types, their cone complex and the images of its
// cones in the curve moduli complex.
struct FactorRun {
  std::string name;
  ContactData contact;
  std::vector<RubberMapType> types;
  MapModuliComplex complex;
  ConicalSubset images;
  std::size_t contracted_cycle_types = 0;
};

ConicalSubset image_family(const MapModuliComplex& m);
FactorRun build_factor(std::string name, const std::vector<RubberMapType>& types, const CurveModuliComplex& base,
                       const ContactData& contact);

// Refines the base until every image family is a union of cones; throws
// std::logic_error if the result fails that check for any family.
SubdivisionOf build_gamma_subdivision(const CurveModuliComplex& base, const std::vector<ConicalSubset>& images,
                                      bool unimodularize = false);

std::vector<PullbackResult> pullback_map_complexes(const std::vector<const MapModuliComplex*>& complexes,
                                                   const SubdivisionOf& base);

struct CheckResult {
  std::string name;
  bool ok = true;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string detail;
};

struct SubdivisionSummary {
  std::string method;
  std::size_t cones_before = 0;
  std::size_t cones_after = 0;
  std::size_t maximal_before = 0;
  std::size_t maximal_after = 0;
  std::vector<std::pair<ConeId, IntVector>> new_rays;  // host and ray, orbit representatives
};

SubdivisionSummary summarize(const SubdivisionOf& s, std::string method);

struct Report {
  std::string title;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::optional<SubdivisionSummary> subdivision;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  std::optional<double> seconds;

  bool ok() const;
  CheckResult& add(CheckResult c);
};

extern const char* const kScopeStatement;

// Tropical part of the degree-one argument: over each base cell, the product
// types cut each fiber product cone of X and Y types into cells with disjoint
// interiors covering it, and every Z type arises this way.
struct NuResult {
  CheckResult check;
  std::size_t fiber_cones = 0;
};
NuResult check_nu(const FactorRun& x, const FactorRun& y, const FactorRun& z, const CurveModuliComplex& base,
                  const SubdivisionOf& s);

// Runs semistability on pulled-back forgetful morphisms and, for two factors,
// the fiber product check. `runs` holds X, then optionally Y and Z.
void verify_theorem_hypotheses(const std::vector<const FactorRun*>& runs, const CurveModuliComplex& base,
                               const SubdivisionOf& s, Report& report);

Report product_check(const ContactData& c, bool unimodularize = false);

struct SupportCone {
  ConeId host;
  ConeId type;
  RationalCone cone;
  std::size_t host_dim = 0;
  std::size_t codim = 0;
};

struct DrSupport {
  FactorRun run;
  SubdivisionOf base;
  std::vector<SupportCone> cones;
  Report report;
};
DrSupport dr_support(const ContactData& c, std::size_t factor, bool unimodularize = false);

RubberMapType figure1_type();
Report figure1_demo();

}  // namespace tropprod
