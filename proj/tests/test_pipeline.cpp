#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tropprod/pipeline.hpp"

using namespace tropprod;

namespace {

const CheckResult* find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

ConicalSubset induced_images(const ComplexMorphism& f) {
  ConicalSubset out;
  for (const auto& [id, img] : f.images) out.pieces.push_back({img.target, f.source->cone(id).image(img.map)});
  return out;
}

}  // namespace

TEST_CASE("build_gamma_subdivision") {
  CurveModuliComplex m12 = build_moduli_complex(1, 2);
  CHECK(build_gamma_subdivision(m12, {}).is_identity());

  CurveModuliComplex m22 = build_moduli_complex(2, 2);
  StableImage fig = forgetful_image(figure1_type());
  ConicalSubset diag{{{fig.host, fig.image}}};
  SubdivisionOf s = build_gamma_subdivision(m22, {diag});
  CHECK(is_union_of_cones(s, diag).ok);
  std::mt19937_64 rng(31);
  CHECK(oracle::check_partition(s, rng, 10) == "");

  ContactData c{1, 2, {{2, -2}, {2, -2}}};
  FactorRun x = build_factor("X", enumerate_rubber_types(c, 0), m12, c.single(0));
  FactorRun y = build_factor("Y", enumerate_rubber_types(c, 1), m12, c.single(1));
  FactorRun z = build_factor("Z", enumerate_joint_types(c), m12, c);
  SubdivisionOf g = build_gamma_subdivision(m12, {x.images, y.images, z.images});
  CHECK(is_union_of_cones(g, x.images).ok);
  CHECK(is_union_of_cones(g, y.images).ok);
  CHECK(is_union_of_cones(g, z.images).ok);
  CHECK(oracle::check_partition(g, rng, 20) == "");
}

TEST_CASE("build_gamma_subdivision is idempotent") {
  CurveModuliComplex m13 = build_moduli_complex(1, 3);
  ContactData c{1, 3, {{2, -1, -1}}};
  FactorRun x = build_factor("X", enumerate_rubber_types(c, 0), m13, c);
  SubdivisionOf s = build_gamma_subdivision(m13, {x.images});
  auto pulled = pullback_map_complexes({&x.complex}, s);
  REQUIRE(pulled.size() == 1);
  CurveModuliComplex refined{1, 3, std::const_pointer_cast<AbstractConeComplex>(s.refined), {}};
  CHECK(build_gamma_subdivision(refined, {induced_images(pulled[0].induced)}).is_identity());
}

TEST_CASE("pullback_map_complexes") {
  CurveModuliComplex m04 = build_moduli_complex(0, 4);
  ContactData c{0, 4, {{1, 1, -1, -1}}};
  FactorRun x = build_factor("X", enumerate_rubber_types(c, 0), m04, c);
  auto same = pullback_map_complexes({&x.complex}, identity_subdivision(m04.complex));
  CHECK(same[0].subdivision.is_identity());
  CHECK(same[0].induced.source->size() == x.complex.complex->size());

  CurveModuliComplex m22 = build_moduli_complex(2, 2);
  FactorRun fig = build_factor("X", {figure1_type()}, m22, {2, 2, {{3, -3}}});
  StableImage img = forgetful_image(figure1_type());
  SubdivisionOf st = stellar_subdivide(m22.complex, img.host, img.image.rays().at(0));
  auto pr = pullback_map_complexes({&fig.complex}, st);
  CHECK(validate_complex(*pr[0].subdivision.refined).empty());
  CHECK(validate_morphism(pr[0].induced).empty());
  CHECK(check_weak_semistable(pr[0].induced).ok());
  for (const auto& [id, im] : pr[0].induced.images)
    CHECK(pr[0].induced.target->cone(im.target).dim() == pr[0].induced.source->cone(id).dim());

  CurveModuliComplex m12 = build_moduli_complex(1, 2);
  ContactData two{1, 2, {{2, -2}, {1, -1}}};
  FactorRun a = build_factor("X", enumerate_rubber_types(two, 0), m12, two.single(0));
  FactorRun b = build_factor("Y", enumerate_rubber_types(two, 1), m12, two.single(1));
  FactorRun z = build_factor("Z", enumerate_joint_types(two), m12, two);
  SubdivisionOf s = build_gamma_subdivision(m12, {a.images, b.images, z.images});
  for (const auto& p : pullback_map_complexes({&a.complex, &b.complex, &z.complex}, s)) {
    CHECK(validate_complex(*p.subdivision.refined).empty());
    CHECK(validate_morphism(p.induced).empty());
  }
}

TEST_CASE("verify_theorem_hypotheses") {
  Report one = product_check({1, 2, {{2, -2}}});
  CHECK(one.ok());
  CHECK(find_check(one, "fiber_product_tiling") != nullptr);

  Report fig = figure1_demo();
  CHECK(fig.ok());
  CHECK(find_check(fig, "cone_onto_cone_fails_before")->ok);
  CHECK(find_check(fig, "cone_onto_cone[X]")->ok);
  CHECK(find_check(fig, "lattice_surjective[X]")->ok);

  Report two = product_check({1, 2, {{2, -2}, {1, -1}}});
  CHECK(two.ok());
  for (const auto& c : two.checks) {
    CAPTURE(c.name);
    CHECK(c.ok);
    CHECK(c.checked > 0);
  }
}

TEST_CASE("unrefined base fails cone onto cone in genus one") {
  CurveModuliComplex m12 = build_moduli_complex(1, 2);
  ContactData c{1, 2, {{2, -2}}};
  FactorRun x = build_factor("X", enumerate_rubber_types(c, 0), m12, c);
  Report r;
  verify_theorem_hypotheses({&x}, m12, identity_subdivision(m12.complex), r);
  CHECK_FALSE(r.ok());
}

TEST_CASE("check_nu is symmetric in the factors") {
  std::vector<std::pair<std::vector<long>, std::vector<long>>> pairs{{{2, -2}, {1, -1}}, {{1, -1}, {1, -1}}};
  for (const auto& [a, b] : pairs) {
    Report ab = product_check({1, 2, {a, b}});
    Report ba = product_check({1, 2, {b, a}});
    CHECK(ab.ok() == ba.ok());
    const CheckResult* nab = find_check(ab, "fiber_product_tiling");
    const CheckResult* nba = find_check(ba, "fiber_product_tiling");
    REQUIRE(nab);
    REQUIRE(nba);
    CHECK(nab->ok == nba->ok);
    CHECK(nab->checked == nba->checked);
  }
}

TEST_CASE("dr_support") {
  for (int n = 3; n <= 5; ++n) {
    std::vector<long> a(n, 0);
    a[0] = 1;
    a[1] = -1;
    DrSupport d = dr_support({0, n, {a}}, 0);
    CHECK(d.report.ok());
    CurveModuliComplex m = build_moduli_complex(0, n);
    std::set<ConeId> full;
    for (const auto& sc : d.cones) {
      CHECK(sc.codim + sc.cone.dim() == sc.host_dim);
      if (sc.codim == 0) full.insert(sc.host);
    }
    for (const auto& id : m.complex->maximal_cones()) CHECK(full.count(id) == 1);
  }

  CurveModuliComplex m22 = build_moduli_complex(2, 2);
  ContactData c{2, 2, {{3, -3}}};
  FactorRun x = build_factor("X", enumerate_rubber_types(c, 0), m22, c);
  StableImage fig = forgetful_image(figure1_type());
  std::string key = canonical_type(figure1_type()).key;
  bool diagonal = false;
  for (const auto& [id, t] : x.complex.types) {
    if (canonical_type(t).key != key) continue;
    const ConeImage& img = x.complex.forgetful.images.at(id);
    diagonal = img.target == fig.host && x.complex.complex->cone(id).image(img.map) == fig.image;
  }
  CHECK(diagonal);

  // Degree two: the banana cone carries the ray l1 = l2 (slopes 1, 1).
  DrSupport two = dr_support({1, 2, {{2, -2}}}, 0);
  CHECK(two.report.ok());
  bool banana = false;
  for (const auto& sc : two.cones)
    if (sc.host_dim == 2 && sc.cone.rays() == std::vector<IntVector>{{1, 1}}) banana = true;
  CHECK(banana);

  // Degree one: no integral slopes balance the banana with one leg on each
  // vertex, so the oracle finds no banana type and neither does the support.
  DrSupport one = dr_support({1, 2, {{1, -1}}}, 0);
  CHECK(one.report.ok());
  for (const auto& sc : one.cones)
    CHECK_FALSE((sc.host_dim == 2 && sc.cone.dim() == 1));
  for (const auto& k : oracle::brute_force_types(1, 2, {{1, -1}})) {
    std::size_t first = k.find("0-1:");
    CHECK((first == std::string::npos || k.find("0-1:", first + 1) == std::string::npos));
  }
}
