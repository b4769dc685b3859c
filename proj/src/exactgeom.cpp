#include "tropprod/exactgeom.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tropprod/linalg.hpp"

namespace tropprod {

// ---------------------------------------------------------------- IntVector

IntVector::IntVector(std::initializer_list<long> coords) {
  coords_.reserve(coords.size());
  for (long c : coords) coords_.emplace_back(c);
}

bool IntVector::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Int& c) { return c == 0; });
}

Int IntVector::content() const {
  Int g = 0;
  for (const auto& c : coords_) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  return g;
}

IntVector IntVector::primitive() const {
  Int g = content();
  if (g == 0 || g == 1) return *this;
  IntVector out(*this);
  for (auto& c : out.coords_) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
  return out;
}

IntVector IntVector::normalized_line() const {
  IntVector p = primitive();
  for (const auto& c : p.coords_) {
    if (c == 0) continue;
    if (c < 0) return -p;
    break;
  }
  return p;
}

IntVector IntVector::operator-() const {
  IntVector out(*this);
  for (auto& c : out.coords_) c = -c;
  return out;
}

IntVector& IntVector::operator+=(const IntVector& other) {
  if (other.rank() != rank()) throw Error(ErrorKind::RankMismatch, "vector addition");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

IntVector& IntVector::operator-=(const IntVector& other) {
  if (other.rank() != rank()) throw Error(ErrorKind::RankMismatch, "vector subtraction");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

IntVector operator*(const Int& s, const IntVector& v) {
  IntVector out(v);
  for (auto& c : out.coords_) c *= s;
  return out;
}

std::string IntVector::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i].get_str();
  os << ')';
  return os.str();
}

Int dot(const IntVector& a, const IntVector& b) {
  if (a.rank() != b.rank()) throw Error(ErrorKind::RankMismatch, "dot product");
  Int s = 0;
  for (std::size_t i = 0; i < a.rank(); ++i) s += a[i] * b[i];
  return s;
}

IntVector primitive_from_rational(const std::vector<Rat>& v) {
  Int l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  IntVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Rat scaled = v[i] * Rat(l);
    out[i] = scaled.get_num();
  }
  return out.primitive();
}

// ---------------------------------------------------------------- LinearMap

LinearMap::LinearMap(std::size_t source_rank, std::size_t target_rank)
    : source_rank_(source_rank), target_rank_(target_rank), entries_(source_rank * target_rank, 0) {}

LinearMap LinearMap::identity(std::size_t rank) {
  LinearMap m(rank, rank);
  for (std::size_t i = 0; i < rank; ++i) m.at(i, i) = 1;
  return m;
}

LinearMap LinearMap::from_rows(std::size_t source_rank, const std::vector<IntVector>& rows) {
  LinearMap m(source_rank, rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].rank() != source_rank) throw Error(ErrorKind::RankMismatch, "matrix row length");
    for (std::size_t c = 0; c < source_rank; ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

LinearMap LinearMap::from_columns(std::size_t target_rank, const std::vector<IntVector>& columns) {
  LinearMap m(columns.size(), target_rank);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].rank() != target_rank) throw Error(ErrorKind::RankMismatch, "matrix column length");
    for (std::size_t r = 0; r < target_rank; ++r) m.at(r, c) = columns[c][r];
  }
  return m;
}

IntVector LinearMap::row(std::size_t r) const {
  IntVector v(source_rank_);
  for (std::size_t c = 0; c < source_rank_; ++c) v[c] = at(r, c);
  return v;
}

IntVector LinearMap::column(std::size_t c) const {
  IntVector v(target_rank_);
  for (std::size_t r = 0; r < target_rank_; ++r) v[r] = at(r, c);
  return v;
}

std::vector<IntVector> LinearMap::rows() const {
  std::vector<IntVector> out;
  for (std::size_t r = 0; r < target_rank_; ++r) out.push_back(row(r));
  return out;
}

IntVector LinearMap::apply(const IntVector& v) const {
  if (v.rank() != source_rank_) throw Error(ErrorKind::RankMismatch, "linear map applied to vector");
  IntVector out(target_rank_);
  for (std::size_t r = 0; r < target_rank_; ++r) {
    Int s = 0;
    for (std::size_t c = 0; c < source_rank_; ++c) {
      const Int& a = at(r, c);
      if (a != 0) s += a * v[c];
    }
    out[r] = s;
  }
  return out;
}

IntVector LinearMap::pullback(const IntVector& covector) const {
  if (covector.rank() != target_rank_) throw Error(ErrorKind::RankMismatch, "covector pullback");
  IntVector out(source_rank_);
  for (std::size_t c = 0; c < source_rank_; ++c) {
    Int s = 0;
    for (std::size_t r = 0; r < target_rank_; ++r) {
      const Int& a = at(r, c);
      if (a != 0) s += covector[r] * a;
    }
    out[c] = s;
  }
  return out;
}

LinearMap LinearMap::transpose() const {
  LinearMap t(target_rank_, source_rank_);
  for (std::size_t r = 0; r < target_rank_; ++r)
    for (std::size_t c = 0; c < source_rank_; ++c) t.at(c, r) = at(r, c);
  return t;
}

bool LinearMap::is_identity() const { return *this == identity(source_rank_); }

LinearMap operator*(const LinearMap& g, const LinearMap& f) {
  if (g.source_rank_ != f.target_rank_) throw Error(ErrorKind::RankMismatch, "map composition");
  LinearMap out(f.source_rank_, g.target_rank_);
  for (std::size_t r = 0; r < g.target_rank_; ++r)
    for (std::size_t k = 0; k < g.source_rank_; ++k) {
      const Int& a = g.at(r, k);
      if (a == 0) continue;
      for (std::size_t c = 0; c < f.source_rank_; ++c) out.at(r, c) += a * f.at(k, c);
    }
  return out;
}

bool operator<(const LinearMap& a, const LinearMap& b) {
  if (a.source_rank_ != b.source_rank_) return a.source_rank_ < b.source_rank_;
  if (a.target_rank_ != b.target_rank_) return a.target_rank_ < b.target_rank_;
  return a.entries_ < b.entries_;
}

// ---------------------------------------------------------------- double description

DoubleDescription double_description(std::size_t n, const std::vector<IntVector>& inequalities,
                                     const std::vector<IntVector>& equations) {
  std::vector<IntVector> lin;
  for (std::size_t i = 0; i < n; ++i) {
    IntVector e(n);
    e[i] = 1;
    lin.push_back(e);
  }
  std::vector<IntVector> rays;
  std::vector<IntVector> processed;

  auto process = [&](const IntVector& a, bool equality) {
    if (a.rank() != n) throw Error(ErrorKind::RankMismatch, "constraint length");
    if (a.is_zero()) return;
    std::size_t piv = lin.size();
    for (std::size_t i = 0; i < lin.size(); ++i)
      if (dot(a, lin[i]) != 0) {
        piv = i;
        break;
      }
    if (piv < lin.size()) {
      IntVector l = lin[piv];
      Int al = dot(a, l);
      if (al < 0) {
        l = -l;
        al = -al;
      }
      lin.erase(lin.begin() + static_cast<long>(piv));
      for (auto& other : lin) {
        Int b = dot(a, other);
        if (b != 0) other = (al * other - b * l).primitive();
      }
      for (auto& r : rays) {
        Int b = dot(a, r);
        if (b != 0) r = (al * r - b * l).primitive();
      }
      if (!equality) rays.push_back(l);
      processed.push_back(a);
      return;
    }

    std::vector<std::pair<IntVector, Int>> pos, neg;
    std::vector<IntVector> next;
    for (auto& r : rays) {
      Int v = dot(a, r);
      if (v > 0) {
        pos.emplace_back(r, v);
      } else if (v < 0) {
        neg.emplace_back(r, v);
      } else {
        next.push_back(r);
      }
    }
    if (!equality)
      for (auto& [r, v] : pos) next.push_back(r);
    const long target = static_cast<long>(n) - static_cast<long>(lin.size()) - 2;
    for (auto& [p, vp] : pos) {
      for (auto& [q, vq] : neg) {
        std::vector<IntVector> tight;
        for (const auto& c : processed)
          if (dot(c, p) == 0 && dot(c, q) == 0) tight.push_back(c);
        if (static_cast<long>(tight.size()) < target) continue;
        if (static_cast<long>(linalg::rank(tight)) != target) continue;
        next.push_back((vp * q - vq * p).primitive());
      }
    }
    rays = std::move(next);
    processed.push_back(a);
  };

  for (const auto& e : equations) process(e, true);
  for (const auto& a : inequalities) process(a, false);

  std::sort(rays.begin(), rays.end());
  rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
  return {lin, rays};
}

// ---------------------------------------------------------------- RationalCone

RationalCone RationalCone::zero(std::size_t rank) {
  RationalCone c;
  c.rank_ = rank;
  c.dim_ = 0;
  for (std::size_t i = 0; i < rank; ++i) {
    IntVector e(rank);
    e[i] = 1;
    c.span_equations_.push_back(e);
  }
  return c;
}

RationalCone RationalCone::orthant(std::size_t rank) {
  std::vector<IntVector> gens;
  for (std::size_t i = 0; i < rank; ++i) {
    IntVector e(rank);
    e[i] = 1;
    gens.push_back(e);
  }
  return from_generators(rank, gens);
}

RationalCone RationalCone::from_generators(std::size_t rank, const std::vector<IntVector>& generators) {
  std::vector<IntVector> gens;
  for (const auto& g : generators) {
    if (g.rank() != rank) throw Error(ErrorKind::RankMismatch, "generator " + g.to_string());
    if (!g.is_zero()) gens.push_back(g.primitive());
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  if (gens.empty()) return zero(rank);

  DoubleDescription dual = double_description(rank, gens, {});
  {
    std::vector<IntVector> all = dual.lineality;
    all.insert(all.end(), dual.rays.begin(), dual.rays.end());
    if (linalg::rank(all) < rank) throw Error(ErrorKind::NotPointed, "generated cone contains a line");
  }

  RationalCone c;
  c.rank_ = rank;
  c.span_equations_ = linalg::canonical_row_basis(dual.lineality);
  std::sort(c.span_equations_.begin(), c.span_equations_.end());
  c.dim_ = rank - c.span_equations_.size();

  for (const auto& r : dual.rays) c.facets_.push_back(primitive_from_rational(linalg::project_off(r, c.span_equations_)));
  std::sort(c.facets_.begin(), c.facets_.end());
  c.facets_.erase(std::unique(c.facets_.begin(), c.facets_.end()), c.facets_.end());

  for (const auto& g : gens) {
    std::vector<IntVector> tight = c.span_equations_;
    for (const auto& f : c.facets_)
      if (dot(f, g) == 0) tight.push_back(f);
    if (linalg::rank(tight) + 1 == rank) c.rays_.push_back(g);
  }
  return c;
}

RationalCone RationalCone::from_inequalities(std::size_t rank, const std::vector<IntVector>& inequalities,
                                             const std::vector<IntVector>& equations) {
  DoubleDescription dd = double_description(rank, inequalities, equations);
  if (!dd.lineality.empty()) throw Error(ErrorKind::NotPointed, "inequality system has a lineality space");
  return from_generators(rank, dd.rays);
}

bool RationalCone::in_span(const IntVector& x) const {
  if (x.rank() != rank_) throw Error(ErrorKind::RankMismatch, "point " + x.to_string());
  for (const auto& e : span_equations_)
    if (dot(e, x) != 0) return false;
  return true;
}

bool RationalCone::contains(const IntVector& x) const {
  if (!in_span(x)) return false;
  for (const auto& f : facets_)
    if (dot(f, x) < 0) return false;
  return true;
}

bool RationalCone::contains(const RationalCone& other) const {
  if (other.rank_ != rank_) throw Error(ErrorKind::RankMismatch, "cone containment");
  for (const auto& r : other.rays_)
    if (!contains(r)) return false;
  return true;
}

bool RationalCone::in_relative_interior(const IntVector& x) const {
  if (!in_span(x)) return false;
  for (const auto& f : facets_)
    if (dot(f, x) <= 0) return false;
  return true;
}

IntVector RationalCone::interior_point() const {
  IntVector s(rank_);
  for (const auto& r : rays_) s += r;
  return s;
}

std::vector<RationalCone> RationalCone::faces() const {
  if (rays_.size() > 64) throw std::logic_error("faces(): too many rays");
  using Mask = std::uint64_t;
  const Mask full = rays_.size() == 64 ? ~Mask{0} : ((Mask{1} << rays_.size()) - 1);
  std::vector<Mask> tight;
  for (const auto& f : facets_) {
    Mask m = 0;
    for (std::size_t i = 0; i < rays_.size(); ++i)
      if (dot(f, rays_[i]) == 0) m |= Mask{1} << i;
    tight.push_back(m);
  }
  std::set<Mask> masks{full};
  for (Mask t : tight) {
    std::vector<Mask> add;
    for (Mask m : masks) add.push_back(m & t);
    masks.insert(add.begin(), add.end());
  }
  std::vector<RationalCone> out;
  for (Mask m : masks) {
    if (m == full) {
      out.push_back(*this);
      continue;
    }
    std::vector<IntVector> sub;
    for (std::size_t i = 0; i < rays_.size(); ++i)
      if (m & (Mask{1} << i)) sub.push_back(rays_[i]);
    out.push_back(from_generators(rank_, sub));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RationalCone RationalCone::minimal_face_containing(const RationalCone& sub) const {
  std::vector<const IntVector*> active;
  for (const auto& f : facets_) {
    bool vanishes = true;
    for (const auto& r : sub.rays())
      if (dot(f, r) != 0) {
        vanishes = false;
        break;
      }
    if (vanishes) active.push_back(&f);
  }
  if (active.empty()) return *this;
  std::vector<IntVector> face_rays;
  for (const auto& r : rays_) {
    bool on = true;
    for (const auto* f : active)
      if (dot(*f, r) != 0) {
        on = false;
        break;
      }
    if (on) face_rays.push_back(r);
  }
  return from_generators(rank_, face_rays);
}

bool RationalCone::has_face(const RationalCone& candidate) const {
  if (candidate.rank_ != rank_ || !contains(candidate)) return false;
  return minimal_face_containing(candidate) == candidate;
}

RationalCone RationalCone::image(const LinearMap& f) const {
  if (f.source_rank() != rank_) throw Error(ErrorKind::RankMismatch, "image of cone");
  std::vector<IntVector> gens;
  for (const auto& r : rays_) gens.push_back(f.apply(r));
  return from_generators(f.target_rank(), gens);
}

std::string RationalCone::to_string() const {
  std::ostringstream os;
  os << "cone(rank " << rank_ << "; ";
  for (std::size_t i = 0; i < rays_.size(); ++i) os << (i ? " " : "") << rays_[i].to_string();
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- operations

RationalCone cone_from_generators(const std::vector<IntVector>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::RankMismatch, "no generators to infer the rank from");
  return RationalCone::from_generators(vectors.front().rank(), vectors);
}

std::vector<IntVector> dual_description(const RationalCone& cone) { return cone.facets(); }

RationalCone intersect(const RationalCone& a, const RationalCone& b) {
  if (a.ambient_rank() != b.ambient_rank()) throw Error(ErrorKind::RankMismatch, "intersection");
  if (a.contains(b)) return b;
  if (b.contains(a)) return a;
  std::vector<IntVector> ineq = a.facets();
  ineq.insert(ineq.end(), b.facets().begin(), b.facets().end());
  std::vector<IntVector> eq = a.span_equations();
  eq.insert(eq.end(), b.span_equations().begin(), b.span_equations().end());
  return RationalCone::from_inequalities(a.ambient_rank(), ineq, eq);
}

RationalCone image_cone(const LinearMap& f, const RationalCone& c) { return c.image(f); }

bool is_unimodular(const RationalCone& c) {
  if (c.is_zero()) return true;
  if (!c.is_simplicial()) return false;
  return linalg::generates_saturated_lattice(c.rays());
}

Int multiplicity(const RationalCone& c) {
  Int m = 1;
  for (const auto& f : linalg::invariant_factors(c.rays())) m *= f;
  return m;
}

bool lattice_surjective(const LinearMap& f, const RationalCone& c, const RationalCone& target) {
  if (f.source_rank() != c.ambient_rank() || f.target_rank() != target.ambient_rank())
    throw Error(ErrorKind::RankMismatch, "lattice_surjective");
  if (!target.contains(c.image(f))) throw Error(ErrorKind::InvalidInput, "map does not land in the target cone");
  if (c.is_zero()) return true;
  std::vector<IntVector> basis = linalg::integer_kernel(c.span_equations(), c.ambient_rank());
  std::vector<IntVector> images;
  for (const auto& b : basis) images.push_back(f.apply(b));
  return linalg::generates_saturated_lattice(images);
}

std::vector<RationalCone> triangulate(const RationalCone& c) {
  if (c.is_zero() || c.is_simplicial()) return {c};
  const IntVector& apex = c.rays().front();
  std::vector<RationalCone> out;
  for (const auto& f : c.facets()) {
    if (dot(f, apex) == 0) continue;
    std::vector<IntVector> facet_rays;
    for (const auto& r : c.rays())
      if (dot(f, r) == 0) facet_rays.push_back(r);
    for (const auto& s : triangulate(RationalCone::from_generators(c.ambient_rank(), facet_rays))) {
      std::vector<IntVector> rays = s.rays();
      rays.push_back(apex);
      out.push_back(RationalCone::from_generators(c.ambient_rank(), rays));
    }
  }
  return out;
}

namespace {

// Volume of {x in c : h(x) <= 1} in the coordinates picked out by `pivots`.
Rat sliced_volume(const RationalCone& c, const IntVector& h, const std::vector<std::size_t>& pivots) {
  Rat total = 0;
  for (const auto& s : triangulate(c)) {
    linalg::RatMatrix m;
    for (const auto& r : s.rays()) {
      Rat scale = 1 / Rat(dot(h, r));
      linalg::RatRow row;
      for (auto p : pivots) row.push_back(Rat(r[p]) * scale);
      m.push_back(std::move(row));
    }
    total += abs(linalg::determinant(m));
  }
  return total;
}

}  // namespace

TilingCheck check_tiling(const RationalCone& whole, const std::vector<RationalCone>& parts) {
  TilingCheck result;
  const std::size_t d = whole.dim();
  std::vector<const RationalCone*> full;
  for (const auto& p : parts) {
    if (!whole.contains(p)) {
      result.ok = false;
      result.reason = "part " + p.to_string() + " leaves " + whole.to_string();
      return result;
    }
    if (p.dim() == d) full.push_back(&p);
  }
  if (d == 0) {
    if (full.empty()) result = {false, "zero cone not covered"};
    return result;
  }
  for (std::size_t i = 0; i < full.size(); ++i)
    for (std::size_t j = i + 1; j < full.size(); ++j)
      if (intersect(*full[i], *full[j]).dim() == d) {
        result.ok = false;
        result.reason = "interiors overlap: " + full[i]->to_string() + " and " + full[j]->to_string();
        return result;
      }
  IntVector h(whole.ambient_rank());
  for (const auto& f : whole.facets()) h += f;
  std::vector<std::size_t> pivots;
  linalg::rref(linalg::to_rational(whole.rays()), &pivots);
  Rat expected = sliced_volume(whole, h, pivots);
  Rat covered = 0;
  for (const auto* p : full) covered += sliced_volume(*p, h, pivots);
  if (covered != expected) {
    result.ok = false;
    result.reason = "covered volume " + covered.get_str() + " != " + expected.get_str() + " for " + whole.to_string();
  }
  return result;
}

}  // namespace tropprod
