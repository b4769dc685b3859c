#include <doctest.h>

#include <memory>
#include <random>

#include "oracles.hpp"
#include "tropprod/complexes.hpp"
#include "tropprod/curves.hpp"
#include "tropprod/error.hpp"

using namespace tropprod;

namespace {

using Complex = std::shared_ptr<const AbstractConeComplex>;

Complex fan(std::size_t rank, std::vector<RationalCone> cones, std::vector<LinearMap> group = {}) {
  return std::make_shared<const AbstractConeComplex>(fan_complex(rank, cones, group));
}

ConeId top(const Complex& c) {
  auto m = c->maximal_cones();
  REQUIRE(m.size() == 1);
  return m.front();
}

ConeId find(const Complex& c, const RationalCone& cone) {
  for (const auto& [id, x] : c->cones())
    if (x == cone) return id;
  FAIL("cone not found");
  return {};
}

ComplexMorphism identity_morphism(const Complex& c) {
  ComplexMorphism f{c, c, {}};
  for (const auto& [id, x] : c->cones()) f.images[id] = {id, LinearMap::identity(x.ambient_rank())};
  return f;
}

// Inclusion of the cones of `source` into the unique maximal cone of `target`
// (same ambient lattice).
ComplexMorphism inclusion(const Complex& source, const Complex& target) {
  ComplexMorphism f{source, target, {}};
  for (const auto& [id, x] : source->cones()) {
    ConeId t = top(target);
    for (const auto& [tid, y] : target->cones())
      if (y.contains(x) && y.dim() < target->cone(t).dim()) t = tid;
    f.images[id] = {t, LinearMap::identity(x.ambient_rank())};
  }
  return f;
}

void check_sound(const SubdivisionOf& s) {
  std::mt19937_64 rng(11);
  CHECK(oracle::check_partition(s, rng, 20) == "");
  CHECK(validate_complex(*s.refined).empty());
  CHECK(validate_morphism(s.proj).empty());
}

const std::vector<LinearMap>& s3() {
  static const std::vector<LinearMap> g = [] {
    std::vector<LinearMap> out;
    std::vector<int> p{0, 1, 2};
    do {
      LinearMap m(3, 3);
      for (int i = 0; i < 3; ++i) m.at(p[i], i) = 1;
      out.push_back(m);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  }();
  return g;
}

}  // namespace

TEST_CASE("validate_complex") {
  CHECK(validate_complex(fan_complex(2, {RationalCone::orthant(2)})).empty());
  AbstractConeComplex missing;
  missing.add_cone("ray", RationalCone::orthant(1));
  CHECK(validate_complex(missing).size() == 1);
  CHECK(validate_complex(*build_moduli_complex(2, 2).complex).empty());
  CHECK(validate_complex(fan_complex(3, {RationalCone::orthant(3)}, s3())).empty());
}

TEST_CASE("stellar_subdivide") {
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  SubdivisionOf s = stellar_subdivide(o3, top(o3), {1, 1, 1});
  auto cells = s.cells(top(o3));
  CHECK(cells.size() == 3);
  for (const auto& c : cells) {
    CHECK(c.dim() == 3);
    CHECK(std::count(c.rays().begin(), c.rays().end(), IntVector{1, 1, 1}) == 1);
  }
  check_sound(s);
  ConicalSubset diag{{{top(o3), cone_from_generators({{1, 1, 1}})}}};
  CHECK_FALSE(is_union_of_cones(*o3, diag).ok);
  CHECK(is_union_of_cones(s, diag).ok);

  Complex o2 = fan(2, {RationalCone::orthant(2)});
  SubdivisionOf t = stellar_subdivide(o2, top(o2), {1, 1});
  CHECK(t.cells(top(o2)).size() == 2);
  for (const auto& c : t.cells(top(o2))) CHECK(is_unimodular(c));
  check_sound(t);

  CHECK(stellar_subdivide(o2, top(o2), {1, 0}).is_identity());

  try {
    stellar_subdivide(o2, top(o2), {1, -1});
    FAIL("expected RayOutside");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RayOutside);
  }
}

TEST_CASE("stellar_subdivide inserts the automorphism orbit") {
  Complex o3 = fan(3, {RationalCone::orthant(3)}, s3());
  SubdivisionOf s = stellar_subdivide(o3, top(o3), {2, 1, 0});
  check_sound(s);
  std::set<IntVector> rays;
  for (const auto& c : s.cells(top(o3)))
    for (const auto& r : c.rays()) rays.insert(r);
  for (const auto& g : s3()) CHECK(rays.count(g.apply({2, 1, 0})) == 1);
}

TEST_CASE("hyperplane_refine") {
  Complex o2 = fan(2, {RationalCone::orthant(2)});
  SubdivisionOf s = hyperplane_refine(o2, {{top(o2), {{1, -1}}}});
  CHECK(s.cells(top(o2)).size() == 2);
  check_sound(s);
  CHECK(hyperplane_refine(o2, {}).is_identity());

  Complex o3 = fan(3, {RationalCone::orthant(3)});
  std::vector<IntVector> braid{{1, -1, 0}, {0, 1, -1}, {1, 0, -1}};
  SubdivisionOf b = hyperplane_refine(o3, {{top(o3), braid}});
  auto oracle_count = oracle::braid_sign_oracle(3, braid, 4);
  CHECK(b.cells(top(o3)).size() == oracle_count.maximal);
  CHECK(b.refined->size() == oracle_count.cones);
  CHECK(oracle_count.maximal == 6);
  CHECK(oracle_count.cones == 26);
  check_sound(b);

  Complex sym = fan(3, {RationalCone::orthant(3)}, s3());
  SubdivisionOf bs = hyperplane_refine(sym, {{top(sym), {{1, -1, 0}}}});
  CHECK(bs.cells(top(sym)).size() == 6);
  check_sound(bs);
}

TEST_CASE("common_refinement") {
  Complex o2 = fan(2, {RationalCone::orthant(2)});
  SubdivisionOf a = hyperplane_refine(o2, {{top(o2), {{1, -1}}}});
  SubdivisionOf b = hyperplane_refine(o2, {{top(o2), {{1, -2}}}});
  SubdivisionOf id = identity_subdivision(o2);
  CHECK(common_refinement(a, id).cells(top(o2)).size() == 2);
  CHECK(common_refinement(a, a).cells(top(o2)).size() == 2);
  SubdivisionOf ab = common_refinement(a, b);
  auto cells = ab.cells(top(o2));
  CHECK(cells.size() == 3);
  check_sound(ab);
  for (const auto& c : cells) {
    bool in_a = false, in_b = false;
    for (const auto& x : a.cells(top(o2))) in_a |= x.contains(c);
    for (const auto& x : b.cells(top(o2))) in_b |= x.contains(c);
    CHECK(in_a);
    CHECK(in_b);
  }
}

TEST_CASE("pullback_subdivision") {
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  SubdivisionOf st = stellar_subdivide(o3, top(o3), {1, 1, 1});
  PullbackResult self = pullback_subdivision(identity_morphism(o3), st);
  CHECK(self.subdivision.cells(top(o3)).size() == 3);
  CHECK(validate_morphism(self.induced).empty());

  Complex ray = fan(3, {cone_from_generators({{1, 1, 1}})});
  ComplexMorphism f = inclusion(ray, o3);
  CHECK_FALSE(check_weak_semistable(f).ok());
  PullbackResult pr = pullback_subdivision(f, st);
  CHECK(pr.subdivision.is_identity());
  CHECK(validate_morphism(pr.induced).empty());
  CHECK(check_weak_semistable(pr.induced).ok());
  for (const auto& [id, img] : pr.induced.images)
    CHECK(pr.induced.target->cone(img.target).dim() == pr.induced.source->cone(id).dim());

  Complex line = fan(1, {RationalCone::orthant(1)});
  ComplexMorphism sum{o3, line, {}};
  for (const auto& [id, x] : o3->cones()) {
    ConeId t = x.is_zero() ? find(line, RationalCone::zero(1)) : top(line);
    sum.images[id] = {t, LinearMap::from_rows(3, {{1, 1, 1}})};
  }
  CHECK(validate_morphism(sum).empty());
  CHECK(pullback_subdivision(sum, identity_subdivision(line)).subdivision.is_identity());
}

TEST_CASE("is_union_of_cones") {
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  RationalCone face = cone_from_generators({{1, 0, 0}, {0, 1, 0}});
  CHECK(is_union_of_cones(*o3, {{{top(o3), face}}}).ok);
  UnionCheck diag = is_union_of_cones(*o3, {{{top(o3), cone_from_generators({{1, 1, 1}})}}});
  CHECK_FALSE(diag.ok);
  CHECK(diag.witness == IntVector{1, 1, 1});
}

TEST_CASE("refine_until_conical") {
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  RationalCone face = cone_from_generators({{1, 0, 0}, {0, 1, 0}});
  CHECK(refine_until_conical(o3, {{{top(o3), face}}}).is_identity());

  ConicalSubset diag{{{top(o3), cone_from_generators({{1, 1, 1}})}}};
  SubdivisionOf d = refine_until_conical(o3, diag);
  CHECK(is_union_of_cones(d, diag).ok);
  check_sound(d);

  Complex o2 = fan(2, {RationalCone::orthant(2)});
  ConicalSubset r12{{{top(o2), cone_from_generators({{1, 2}})}}};
  SubdivisionOf a = refine_until_conical(o2, r12);
  CHECK(a.cells(top(o2)).size() == 2);
  int non_unimodular = 0;
  for (const auto& c : a.cells(top(o2))) non_unimodular += !is_unimodular(c);
  CHECK(non_unimodular == 1);
  SubdivisionOf u = refine_until_conical(o2, r12, true);
  CHECK(u.cells(top(o2)).size() == 3);
  for (const auto& c : u.cells(top(o2))) CHECK(is_unimodular(c));
  CHECK(is_union_of_cones(u, r12).ok);
  check_sound(u);
}

TEST_CASE("check_weak_semistable") {
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  CHECK(check_weak_semistable(identity_morphism(o3)).ok());

  Complex ray = fan(3, {cone_from_generators({{1, 1, 1}})});
  SemistableReport diag = check_weak_semistable(inclusion(ray, o3));
  CHECK_FALSE(diag.ok());
  for (const auto& c : diag.cones)
    if (!ray->cone(c.cone).is_zero()) CHECK_FALSE(c.onto);

  Complex line = fan(1, {RationalCone::orthant(1)});
  ComplexMorphism twice{line, line, {}};
  for (const auto& [id, x] : line->cones()) twice.images[id] = {id, LinearMap::from_rows(1, {{2}})};
  SemistableReport r = check_weak_semistable(twice);
  CHECK(r.failures() == 1);
  for (const auto& c : r.cones)
    if (!line->cone(c.cone).is_zero()) {
      CHECK(c.onto);
      CHECK_FALSE(c.lattice);
    }
}

TEST_CASE("stellar then union of cones at the inserted ray") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> e(0, 3);
  Complex o3 = fan(3, {RationalCone::orthant(3)});
  for (int k = 0; k < 8; ++k) {
    IntVector r{e(rng), e(rng), e(rng)};
    if (r.is_zero()) continue;
    r = r.primitive();
    SubdivisionOf s = stellar_subdivide(o3, top(o3), r);
    CHECK(is_union_of_cones(s, {{{top(o3), cone_from_generators({r})}}}).ok);
    check_sound(s);
  }
}

TEST_CASE("unimodularize") {
  Complex c = fan(2, {cone_from_generators({{1, 0}, {1, 3}})});
  SubdivisionOf u = unimodularize(identity_subdivision(c));
  for (const auto& cell : u.cells(top(c))) CHECK(is_unimodular(cell));
  check_sound(u);
}
