#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tropprod/error.hpp"
#include "tropprod/exactgeom.hpp"
#include "tropprod/linalg.hpp"

using namespace tropprod;

namespace {

std::vector<IntVector> rays(std::initializer_list<IntVector> v) { return v; }

}  // namespace

TEST_CASE("cone_from_generators canonicalizes rays") {
  CHECK(cone_from_generators({{2, 0}, {0, 4}}).rays() == rays({{0, 1}, {1, 0}}));
  RationalCone diag = cone_from_generators({{1, 1, 1}});
  CHECK(diag.dim() == 1);
  CHECK(diag.rays() == rays({{1, 1, 1}}));
  std::vector<IntVector> gens{{1, 0}, {1, 1}, {0, 1}};
  auto brute = oracle::brute_force_cone(2, gens);
  RationalCone c = cone_from_generators(gens);
  CHECK(std::set<IntVector>(c.rays().begin(), c.rays().end()) == brute.rays);
  CHECK(c.rays() == rays({{0, 1}, {1, 0}}));
}

TEST_CASE("cone_from_generators rejects lines and mixed ranks") {
  try {
    cone_from_generators({{1, 0}, {-1, 0}});
    FAIL("expected NotPointed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPointed);
  }
  try {
    cone_from_generators({{1, 0}, {1, 0, 0}});
    FAIL("expected RankMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankMismatch);
  }
}

TEST_CASE("dual_description") {
  CHECK(dual_description(RationalCone::orthant(2)) == rays({{0, 1}, {1, 0}}));
  RationalCone ray = cone_from_generators({{1, 2}});
  CHECK(ray.span_equations() == rays({{2, -1}}));
  CHECK(dual_description(ray) == rays({{1, 2}}));
  std::vector<IntVector> gens{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}};
  auto brute = oracle::brute_force_cone(3, gens);
  auto facets = dual_description(cone_from_generators(gens));
  CHECK(std::set<IntVector>(facets.begin(), facets.end()) == brute.facets);
  CHECK(std::is_sorted(facets.begin(), facets.end()));
}

TEST_CASE("intersect") {
  RationalCone o = RationalCone::orthant(3);
  CHECK(intersect(o, o) == o);
  RationalCone face = RationalCone::from_inequalities(3, {{1, 0, 0}, {0, 1, 0}}, {{0, 0, 1}});
  CHECK(intersect(cone_from_generators({{1, 1, 1}}), face).is_zero());
  CHECK(intersect(cone_from_generators({{1, 0}, {1, 1}}), cone_from_generators({{1, 1}, {0, 1}})) ==
        cone_from_generators({{1, 1}}));
}

TEST_CASE("image_cone") {
  RationalCone o3 = RationalCone::orthant(3);
  CHECK(image_cone(LinearMap::identity(3), o3) == o3);
  LinearMap proj = LinearMap::from_rows(3, {{1, 0, 0}, {0, 1, 0}});
  CHECK(image_cone(proj, o3) == RationalCone::orthant(2));
  LinearMap sum = LinearMap::from_rows(2, {{1, 1}});
  CHECK(image_cone(sum, RationalCone::orthant(2)) == RationalCone::orthant(1));
  try {
    image_cone(LinearMap::from_rows(2, {{1, -1}}), RationalCone::orthant(2));
    FAIL("expected NotPointed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPointed);
  }
}

TEST_CASE("is_unimodular") {
  CHECK(is_unimodular(RationalCone::orthant(3)));
  RationalCone c = cone_from_generators({{1, 0}, {1, 2}});
  CHECK_FALSE(is_unimodular(c));
  CHECK(abs(linalg::determinant(std::vector<IntVector>{{1, 0}, {1, 2}})) == 2);
  CHECK(is_unimodular(RationalCone::zero(3)));
}

TEST_CASE("lattice_surjective") {
  RationalCone o3 = RationalCone::orthant(3);
  CHECK(lattice_surjective(LinearMap::identity(3), o3, o3));
  RationalCone r = RationalCone::orthant(1);
  CHECK_FALSE(lattice_surjective(LinearMap::from_rows(1, {{2}}), r, r));
  LinearMap sum = LinearMap::from_rows(3, {{1, 1, 1}});
  CHECK(lattice_surjective(sum, o3, r));
  CHECK(linalg::invariant_factors(sum.rows()) == std::vector<Int>{1});
}

TEST_CASE("random cones agree with the brute-force oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> rank_d(1, 4), count_d(1, 6), entry(-3, 3);
  int tested = 0;
  while (tested < 40) {
    std::size_t rank = rank_d(rng);
    IntVector w(rank);
    for (std::size_t i = 0; i < rank; ++i) w[i] = entry(rng);
    if (w.is_zero()) continue;
    std::vector<IntVector> gens;
    int count = count_d(rng);
    while (static_cast<int>(gens.size()) < count) {
      IntVector g(rank);
      for (std::size_t i = 0; i < rank; ++i) g[i] = entry(rng);
      if (dot(w, g) > 0) gens.push_back(g);
    }
    RationalCone c = cone_from_generators(gens);
    auto brute = oracle::brute_force_cone(rank, gens);
    CHECK(c.dim() == brute.dim);
    CHECK(std::set<IntVector>(c.rays().begin(), c.rays().end()) == brute.rays);
    CHECK(std::set<IntVector>(c.facets().begin(), c.facets().end()) == brute.facets);
    CHECK(cone_from_generators(c.rays()) == c);
    for (int k = 0; k < 10; ++k) {
      auto x = oracle::sample_ambient(rng, rank);
      CHECK(c.contains(oracle::clear_denominators(x)) == oracle::brute_force_contains(gens, x));
    }
    ++tested;
  }
}

TEST_CASE("intersect is commutative, associative and idempotent") {
  RationalCone a = cone_from_generators({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}});
  RationalCone b = cone_from_generators({{1, 0, 1}, {0, 1, 0}, {1, 1, 0}});
  RationalCone c = RationalCone::orthant(3);
  CHECK(intersect(a, b) == intersect(b, a));
  CHECK(intersect(intersect(a, b), c) == intersect(a, intersect(b, c)));
  CHECK(intersect(a, a) == a);
}

TEST_CASE("unimodular iff determinant one on full simplicial cones") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> entry(-2, 3);
  for (int k = 0; k < 30; ++k) {
    std::vector<IntVector> m{{entry(rng), entry(rng), entry(rng)}, {entry(rng), entry(rng), entry(rng)},
                             {entry(rng), entry(rng), entry(rng)}};
    Int det = linalg::determinant(m);
    if (det == 0) continue;
    bool primitive = true;
    for (const auto& v : m) primitive &= v.content() == 1;
    if (!primitive) continue;
    CHECK(is_unimodular(cone_from_generators(m)) == (abs(det) == 1));
  }
}

TEST_CASE("check_tiling") {
  RationalCone o = RationalCone::orthant(2);
  RationalCone left = cone_from_generators({{1, 0}, {1, 1}});
  RationalCone right = cone_from_generators({{1, 1}, {0, 1}});
  CHECK(check_tiling(o, {left, right}).ok);
  CHECK_FALSE(check_tiling(o, {left}).ok);
  CHECK_FALSE(check_tiling(o, {left, o}).ok);
}
