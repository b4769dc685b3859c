#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "tropprod/error.hpp"

namespace tropprod {

using Int = mpz_class;
using Rat = mpq_class;

// Lattice point (or covector) of Z^rank with arbitrary-precision coordinates.
class IntVector {
 public:
  IntVector() = default;
  explicit IntVector(std::size_t rank) : coords_(rank, 0) {}
  explicit IntVector(std::vector<Int> coords) : coords_(std::move(coords)) {}
  IntVector(std::initializer_list<long> coords);

  std::size_t rank() const { return coords_.size(); }
  const std::vector<Int>& coords() const { return coords_; }
  const Int& operator[](std::size_t i) const { return coords_[i]; }
  Int& operator[](std::size_t i) { return coords_[i]; }

  bool is_zero() const;
  // gcd of the coordinates; zero for the zero vector.
  Int content() const;
  IntVector primitive() const;
  // Primitive with first nonzero coordinate positive (hyperplane normal form).
  IntVector normalized_line() const;

  IntVector operator-() const;
  IntVector& operator+=(const IntVector& other);
  IntVector& operator-=(const IntVector& other);

  friend IntVector operator+(IntVector a, const IntVector& b) { return a += b; }
  friend IntVector operator-(IntVector a, const IntVector& b) { return a -= b; }
  friend IntVector operator*(const Int& s, const IntVector& v);
  friend bool operator==(const IntVector& a, const IntVector& b) { return a.coords_ == b.coords_; }
  friend bool operator<(const IntVector& a, const IntVector& b) { return a.coords_ < b.coords_; }

  std::string to_string() const;

 private:
  std::vector<Int> coords_;
};

Int dot(const IntVector& a, const IntVector& b);

// Scales a rational vector to the primitive integer vector on the same ray.
IntVector primitive_from_rational(const std::vector<Rat>& v);

// Integer matrix of a lattice map Z^source -> Z^target, stored row-major
// (target_rank rows, source_rank columns).
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(std::size_t source_rank, std::size_t target_rank);
  static LinearMap identity(std::size_t rank);
  static LinearMap from_rows(std::size_t source_rank, const std::vector<IntVector>& rows);
  static LinearMap from_columns(std::size_t target_rank, const std::vector<IntVector>& columns);

  std::size_t source_rank() const { return source_rank_; }
  std::size_t target_rank() const { return target_rank_; }

  const Int& at(std::size_t row, std::size_t col) const { return entries_[row * source_rank_ + col]; }
  Int& at(std::size_t row, std::size_t col) { return entries_[row * source_rank_ + col]; }

  IntVector row(std::size_t r) const;
  IntVector column(std::size_t c) const;
  std::vector<IntVector> rows() const;

  IntVector apply(const IntVector& v) const;
  // Pulls a covector on the target back to the source (u |-> u o f).
  IntVector pullback(const IntVector& covector) const;
  LinearMap transpose() const;
  bool is_identity() const;

  // (g * f)(x) = g(f(x)).
  friend LinearMap operator*(const LinearMap& g, const LinearMap& f);
  friend bool operator==(const LinearMap& a, const LinearMap& b) = default;
  friend bool operator<(const LinearMap& a, const LinearMap& b);

 private:
  std::size_t source_rank_ = 0;
  std::size_t target_rank_ = 0;
  std::vector<Int> entries_;
};

// Pointed rational polyhedral cone, stored with both descriptions.
//
// Rays are primitive and extremal; facets are primitive covectors that lie in
// the linear span of the cone (so they are unique); span equations are the
// primitive rows of the reduced echelon basis of the orthogonal complement of
// the span. All three lists are sorted, so equal cones compare equal.
class RationalCone {
 public:
  RationalCone() = default;

  static RationalCone zero(std::size_t rank);
  static RationalCone orthant(std::size_t rank);
  static RationalCone from_generators(std::size_t rank, const std::vector<IntVector>& generators);
  // {x : a.x >= 0 for a in inequalities, e.x = 0 for e in equations}.
  static RationalCone from_inequalities(std::size_t rank, const std::vector<IntVector>& inequalities,
                                        const std::vector<IntVector>& equations = {});

  std::size_t ambient_rank() const { return rank_; }
  std::size_t dim() const { return dim_; }
  const std::vector<IntVector>& rays() const { return rays_; }
  const std::vector<IntVector>& facets() const { return facets_; }
  const std::vector<IntVector>& span_equations() const { return span_equations_; }

  bool is_zero() const { return rays_.empty(); }
  bool is_simplicial() const { return rays_.size() == dim_; }

  bool contains(const IntVector& x) const;
  bool contains(const RationalCone& other) const;
  bool in_span(const IntVector& x) const;
  bool in_relative_interior(const IntVector& x) const;
  // Sum of the rays: an integral point of the relative interior.
  IntVector interior_point() const;

  // Every face including the cone itself and the zero face, sorted.
  std::vector<RationalCone> faces() const;
  // Smallest face containing the given subcone.
  RationalCone minimal_face_containing(const RationalCone& sub) const;
  bool has_face(const RationalCone& candidate) const;

  RationalCone image(const LinearMap& f) const;

  friend bool operator==(const RationalCone& a, const RationalCone& b) {
    return a.rank_ == b.rank_ && a.rays_ == b.rays_;
  }
  friend bool operator<(const RationalCone& a, const RationalCone& b) {
    if (a.rank_ != b.rank_) return a.rank_ < b.rank_;
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    return a.rays_ < b.rays_;
  }

  std::string to_string() const;

 private:
  std::size_t rank_ = 0;
  std::size_t dim_ = 0;
  std::vector<IntVector> rays_;
  std::vector<IntVector> facets_;
  std::vector<IntVector> span_equations_;
};

// Operations named after the library surface.
RationalCone cone_from_generators(const std::vector<IntVector>& vectors);
std::vector<IntVector> dual_description(const RationalCone& cone);
RationalCone intersect(const RationalCone& a, const RationalCone& b);
RationalCone image_cone(const LinearMap& f, const RationalCone& c);
bool is_unimodular(const RationalCone& c);
bool lattice_surjective(const LinearMap& f, const RationalCone& c, const RationalCone& target);

// Lattice index of the ray lattice inside the saturated lattice of the span
// (1 for unimodular simplicial cones).
Int multiplicity(const RationalCone& c);

// Splits a pointed cone into simplicial cones using only its own rays.
std::vector<RationalCone> triangulate(const RationalCone& c);

// Exact check that the full-dimensional members of `parts` tile `whole`:
// each lies inside it, their interiors are pairwise disjoint and their
// volumes add up. Lower-dimensional parts are ignored.
struct TilingCheck {
  bool ok = true;
  std::string reason;
};
TilingCheck check_tiling(const RationalCone& whole, const std::vector<RationalCone>& parts);

// Result of the double description method on {x : A x >= 0, E x = 0}.
struct DoubleDescription {
  std::vector<IntVector> lineality;
  std::vector<IntVector> rays;
};
DoubleDescription double_description(std::size_t rank, const std::vector<IntVector>& inequalities,
                                     const std::vector<IntVector>& equations);

}  // namespace tropprod
