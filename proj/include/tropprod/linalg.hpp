#pragma once

#include <optional>
#include <vector>

#include "tropprod/exactgeom.hpp"

// Exact dense linear algebra over Z and Q for the small matrices used here.
// Matrices are lists of rows.
namespace tropprod::linalg {

using RatRow = std::vector<Rat>;
using RatMatrix = std::vector<RatRow>;

RatMatrix to_rational(const std::vector<IntVector>& rows);

std::size_t rank(const std::vector<IntVector>& rows);

// Reduced row echelon form; returns the nonzero rows and fills pivot columns.
RatMatrix rref(RatMatrix m, std::vector<std::size_t>* pivots = nullptr);

// Basis of {y : rows . y = 0} as primitive integer vectors in reduced echelon
// form (canonical for the subspace).
std::vector<IntVector> kernel(const std::vector<IntVector>& rows, std::size_t columns);

// Canonical primitive basis of the row space.
std::vector<IntVector> canonical_row_basis(const std::vector<IntVector>& rows);

// Lattice basis of {y in Z^columns : rows . y = 0}.
std::vector<IntVector> integer_kernel(const std::vector<IntVector>& rows, std::size_t columns);

// Nonzero diagonal entries of the Smith normal form.
std::vector<Int> invariant_factors(const std::vector<IntVector>& rows);

// True iff the lattice generated by the vectors is saturated in Z^rank.
bool generates_saturated_lattice(const std::vector<IntVector>& vectors);

Int determinant(const std::vector<IntVector>& square);
Rat determinant(RatMatrix square);

// Some solution of sum_i x_i columns[i] = target, if one exists.
std::optional<std::vector<Rat>> solve(const std::vector<IntVector>& columns, const IntVector& target);

// Integer left inverse L (L f = id) of an injective map, when one exists over Z.
std::optional<LinearMap> integer_left_inverse(const LinearMap& f);

// Orthogonal projection of a covector onto the orthogonal complement of the
// span of `equations`.
std::vector<Rat> project_off(const IntVector& v, const std::vector<IntVector>& equations);

}  // namespace tropprod::linalg
