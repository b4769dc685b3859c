#include "tropprod/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace tropprod::linalg {

RatMatrix to_rational(const std::vector<IntVector>& rows) {
  RatMatrix m;
  m.reserve(rows.size());
  for (const auto& r : rows) {
    RatRow row(r.rank());
    for (std::size_t j = 0; j < r.rank(); ++j) row[j] = Rat(r[j]);
    m.push_back(std::move(row));
  }
  return m;
}

RatMatrix rref(RatMatrix m, std::vector<std::size_t>* pivots) {
  if (pivots) pivots->clear();
  if (m.empty()) return m;
  const std::size_t cols = m.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[r], m[p]);
    const Rat inv = 1 / m[r][c];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rat f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    if (pivots) pivots->push_back(c);
    ++r;
  }
  m.resize(r);
  return m;
}

std::size_t rank(const std::vector<IntVector>& rows) {
  if (rows.empty()) return 0;
  return rref(to_rational(rows)).size();
}

std::vector<IntVector> canonical_row_basis(const std::vector<IntVector>& rows) {
  std::vector<IntVector> out;
  for (const auto& row : rref(to_rational(rows))) out.push_back(primitive_from_rational(row));
  return out;
}

std::vector<IntVector> kernel(const std::vector<IntVector>& rows, std::size_t columns) {
  std::vector<std::size_t> pivots;
  RatMatrix m = rref(to_rational(rows), &pivots);
  std::vector<bool> is_pivot(columns, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<IntVector> basis;
  for (std::size_t free = 0; free < columns; ++free) {
    if (is_pivot[free]) continue;
    RatRow v(columns, Rat(0));
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
    basis.push_back(primitive_from_rational(v));
  }
  return canonical_row_basis(basis);
}

namespace {

void ext_gcd(const Int& a, const Int& b, Int& g, Int& x, Int& y) {
  mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

struct ColumnEchelon {
  std::vector<std::vector<Int>> h;  // rows x n
  std::vector<std::vector<Int>> u;  // n x n, h = a * u
  std::vector<long> pivot_of_row;
  std::size_t rank = 0;
};

ColumnEchelon column_echelon(const std::vector<IntVector>& rows, std::size_t n) {
  ColumnEchelon ce;
  for (const auto& r : rows) ce.h.push_back(r.coords());
  ce.u.assign(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) ce.u[i][i] = 1;

  auto combine = [&](std::size_t p, std::size_t j, const Int& a11, const Int& a21, const Int& a12,
                     const Int& a22) {
    // new col p = a11*p + a21*j ; new col j = a12*p + a22*j
    for (auto* mat : {&ce.h, &ce.u}) {
      for (auto& row : *mat) {
        Int cp = row[p], cj = row[j];
        row[p] = a11 * cp + a21 * cj;
        row[j] = a12 * cp + a22 * cj;
      }
    }
  };

  std::size_t p = 0;
  for (std::size_t i = 0; i < ce.h.size(); ++i) {
    if (p >= n) {
      ce.pivot_of_row.push_back(-1);
      continue;
    }
    for (std::size_t j = p + 1; j < n; ++j) {
      if (ce.h[i][j] == 0) continue;
      if (ce.h[i][p] == 0) {
        for (auto* mat : {&ce.h, &ce.u})
          for (auto& row : *mat) std::swap(row[p], row[j]);
        continue;
      }
      Int g, x, y;
      Int a = ce.h[i][p], b = ce.h[i][j];
      ext_gcd(a, b, g, x, y);
      combine(p, j, x, y, Int(-b / g), Int(a / g));
    }
    if (ce.h[i][p] != 0) {
      ce.pivot_of_row.push_back(static_cast<long>(p));
      ++p;
    } else {
      ce.pivot_of_row.push_back(-1);
    }
  }
  ce.rank = p;
  return ce;
}

}  // namespace

std::vector<IntVector> integer_kernel(const std::vector<IntVector>& rows, std::size_t columns) {
  if (rows.empty()) {
    std::vector<IntVector> basis;
    for (std::size_t i = 0; i < columns; ++i) {
      IntVector e(columns);
      e[i] = 1;
      basis.push_back(e);
    }
    return basis;
  }
  ColumnEchelon ce = column_echelon(rows, columns);
  std::vector<IntVector> basis;
  for (std::size_t c = ce.rank; c < columns; ++c) {
    IntVector v(columns);
    for (std::size_t r = 0; r < columns; ++r) v[r] = ce.u[r][c];
    basis.push_back(v);
  }
  return basis;
}

namespace {

// Integer solution y of rows . y = b.
std::optional<IntVector> integer_solve(const std::vector<IntVector>& rows, std::size_t n,
                                       const IntVector& b) {
  ColumnEchelon ce = column_echelon(rows, n);
  std::vector<Int> z(n, 0);
  for (std::size_t i = 0; i < ce.h.size(); ++i) {
    Int acc = 0;
    const long piv = ce.pivot_of_row[i];
    const std::size_t upto = piv >= 0 ? static_cast<std::size_t>(piv) : ce.rank;
    for (std::size_t c = 0; c < upto; ++c) acc += ce.h[i][c] * z[c];
    Int rest = b[i] - acc;
    if (piv < 0) {
      if (rest != 0) return std::nullopt;
      continue;
    }
    const Int& d = ce.h[i][static_cast<std::size_t>(piv)];
    if (!mpz_divisible_p(rest.get_mpz_t(), d.get_mpz_t())) return std::nullopt;
    z[static_cast<std::size_t>(piv)] = rest / d;
  }
  IntVector y(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) y[r] += ce.u[r][c] * z[c];
  return y;
}

}  // namespace

std::vector<Int> invariant_factors(const std::vector<IntVector>& rows) {
  if (rows.empty()) return {};
  std::vector<std::vector<Int>> m;
  for (const auto& r : rows) m.push_back(r.coords());
  const std::size_t nr = m.size(), nc = m.front().size();
  std::vector<Int> out;
  std::size_t t = 0;
  while (t < nr && t < nc) {
    // Pivot: smallest nonzero entry in the trailing block.
    bool found = false;
    std::size_t pi = t, pj = t;
    for (std::size_t i = t; i < nr; ++i)
      for (std::size_t j = t; j < nc; ++j)
        if (m[i][j] != 0 && (!found || abs(m[i][j]) < abs(m[pi][pj]))) {
          found = true;
          pi = i;
          pj = j;
        }
    if (!found) break;
    std::swap(m[t], m[pi]);
    for (auto& row : m) std::swap(row[t], row[pj]);

    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < nr; ++i) {
        if (m[i][t] == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m[i][t].get_mpz_t(), m[t][t].get_mpz_t());
        for (std::size_t j = t; j < nc; ++j) m[i][j] -= q * m[t][j];
        if (m[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < nc; ++j) {
        if (m[t][j] == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m[t][j].get_mpz_t(), m[t][t].get_mpz_t());
        for (std::size_t i = t; i < nr; ++i) m[i][j] -= q * m[i][t];
        if (m[t][j] != 0) clean = false;
      }
      if (!clean) {
        // Move the smallest remaining entry of row/column t to the pivot.
        std::size_t bi = t, bj = t;
        for (std::size_t i = t + 1; i < nr; ++i)
          if (m[i][t] != 0 && abs(m[i][t]) < abs(m[bi][bj])) { bi = i; bj = t; }
        for (std::size_t j = t + 1; j < nc; ++j)
          if (m[t][j] != 0 && abs(m[t][j]) < abs(m[bi][bj])) { bi = t; bj = j; }
        std::swap(m[t], m[bi]);
        for (auto& row : m) std::swap(row[t], row[bj]);
        continue;
      }
      bool divisible = true;
      for (std::size_t i = t + 1; i < nr && divisible; ++i)
        for (std::size_t j = t + 1; j < nc; ++j)
          if (!mpz_divisible_p(m[i][j].get_mpz_t(), m[t][t].get_mpz_t())) {
            for (std::size_t c = t; c < nc; ++c) m[t][c] += m[i][c];
            divisible = false;
            break;
          }
      if (divisible) break;
    }
    out.push_back(abs(m[t][t]));
    ++t;
  }
  return out;
}

bool generates_saturated_lattice(const std::vector<IntVector>& vectors) {
  for (const auto& f : invariant_factors(vectors))
    if (f != 1) return false;
  return true;
}

Int determinant(const std::vector<IntVector>& square) {
  const std::size_t n = square.size();
  if (n == 0) return 1;
  std::vector<std::vector<Int>> m;
  for (const auto& r : square) m.push_back(r.coords());
  Int sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

Rat determinant(RatMatrix m) {
  const std::size_t n = m.size();
  Rat det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m[i][c] == 0) continue;
      const Rat f = m[i][c] / m[c][c];
      for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  return det;
}

std::optional<std::vector<Rat>> solve(const std::vector<IntVector>& columns, const IntVector& target) {
  const std::size_t n = columns.size();
  const std::size_t m = target.rank();
  RatMatrix aug(m, RatRow(n + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = Rat(columns[j][i]);
    aug[i][n] = Rat(target[i]);
  }
  std::vector<std::size_t> pivots;
  RatMatrix r = rref(aug, &pivots);
  std::vector<Rat> x(n, Rat(0));
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    if (pivots[i] == n) return std::nullopt;
    x[pivots[i]] = r[i][n];
  }
  return x;
}

std::optional<LinearMap> integer_left_inverse(const LinearMap& f) {
  // Row i of L solves f^T y = e_i.
  const std::size_t s = f.source_rank(), t = f.target_rank();
  std::vector<IntVector> ft_rows;
  for (std::size_t c = 0; c < s; ++c) ft_rows.push_back(f.column(c));
  std::vector<IntVector> l_rows;
  for (std::size_t i = 0; i < s; ++i) {
    IntVector e(s);
    e[i] = 1;
    auto y = integer_solve(ft_rows, t, e);
    if (!y) return std::nullopt;
    l_rows.push_back(*y);
  }
  return LinearMap::from_rows(t, l_rows);
}

std::vector<Rat> project_off(const IntVector& v, const std::vector<IntVector>& equations) {
  const std::size_t n = v.rank();
  std::vector<Rat> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = Rat(v[i]);
  if (equations.empty()) return out;
  const std::size_t k = equations.size();
  // Solve (E E^T) z = E v.
  RatMatrix aug(k, RatRow(k + 1));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) aug[i][j] = Rat(dot(equations[i], equations[j]));
    aug[i][k] = Rat(dot(equations[i], v));
  }
  std::vector<std::size_t> pivots;
  RatMatrix r = rref(aug, &pivots);
  if (pivots.size() != k) throw std::logic_error("project_off: dependent equations");
  for (std::size_t i = 0; i < k; ++i) {
    const Rat& z = r[i][k];
    for (std::size_t j = 0; j < n; ++j) out[j] -= z * Rat(equations[i][j]);
  }
  return out;
}

}  // namespace tropprod::linalg
