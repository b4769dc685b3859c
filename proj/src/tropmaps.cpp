#include "tropprod/tropmaps.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "tropprod/linalg.hpp"

namespace tropprod {

// ---------------------------------------------------------------- contact data

long ContactData::degree(std::size_t factor) const {
  long d = 0;
  for (long a : factors.at(factor))
    if (a > 0) d += a;
  return d;
}

void ContactData::validate() const {
  if (g < 0 || n < 0 || 2 * g - 2 + n <= 0)
    throw Error(ErrorKind::Unstable, "2g-2+n must be positive, got g=" + std::to_string(g) + " n=" + std::to_string(n));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (static_cast<int>(factors[i].size()) != n)
      throw Error(ErrorKind::InvalidInput, "factor " + std::to_string(i + 1) + " has " +
                                               std::to_string(factors[i].size()) + " entries, expected " +
                                               std::to_string(n));
    if (std::accumulate(factors[i].begin(), factors[i].end(), 0L) != 0)
      throw Error(ErrorKind::InvalidInput, "factor " + std::to_string(i + 1) + " does not sum to zero");
  }
}

ContactData ContactData::single(std::size_t factor) const { return {g, n, {factors.at(factor)}}; }

// ---------------------------------------------------------------- types

EdgeLabels RubberMapType::edge_labels() const {
  EdgeLabels labels(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e)
    for (const auto& s : slopes) labels[e].push_back(s[e]);
  return labels;
}

bool RubberMapType::is_balanced() const {
  if (leg_slopes.size() != slopes.size()) return false;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (static_cast<int>(slopes[i].size()) != graph.num_edges() ||
        static_cast<int>(leg_slopes[i].size()) != graph.num_legs())
      return false;
    std::vector<long> out(graph.genus.size(), 0);
    for (int j = 0; j < graph.num_legs(); ++j) out[graph.legs[j]] += leg_slopes[i][j];
    for (int e = 0; e < graph.num_edges(); ++e) {
      auto [a, b] = graph.edges[e];
      out[a] += slopes[i][e];
      out[b] -= slopes[i][e];
    }
    if (std::any_of(out.begin(), out.end(), [](long x) { return x != 0; })) return false;
  }
  return true;
}

bool RubberMapType::has_contracted_cycle() const {
  std::vector<int> parent(graph.genus.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int e = 0; e < graph.num_edges(); ++e) {
    bool flat = std::all_of(slopes.begin(), slopes.end(), [&](const std::vector<long>& s) { return s[e] == 0; });
    if (!flat) continue;
    int a = find(graph.edges[e].first), b = find(graph.edges[e].second);
    if (a == b) return true;
    parent[a] = b;
  }
  return false;
}

std::string RubberMapType::to_string() const {
  std::ostringstream os;
  os << "type(" << graph.to_string() << "; slopes";
  for (const auto& s : slopes) {
    os << " [";
    for (std::size_t e = 0; e < s.size(); ++e) os << (e ? "," : "") << s[e];
    os << ']';
  }
  os << ')';
  return os.str();
}

CanonicalType canonical_type(const RubberMapType& t) {
  CanonicalType ct;
  ct.form = canonical_form(t.graph, t.edge_labels());
  ct.type.graph = ct.form.graph;
  ct.type.leg_slopes = t.leg_slopes;
  ct.type.slopes.assign(t.slopes.size(), std::vector<long>(t.graph.edges.size(), 0));
  for (std::size_t e = 0; e < t.graph.edges.size(); ++e)
    for (std::size_t i = 0; i < t.slopes.size(); ++i) ct.type.slopes[i][e] = ct.form.labels[e][i];
  std::ostringstream os;
  os << ct.form.key << "|a";
  for (std::size_t i = 0; i < t.leg_slopes.size(); ++i) {
    os << (i ? ";" : "");
    for (std::size_t j = 0; j < t.leg_slopes[i].size(); ++j) os << (j ? "," : "") << t.leg_slopes[i][j];
  }
  ct.key = os.str();
  return ct;
}

// ---------------------------------------------------------------- cycle equations

namespace {

struct SpanningTree {
  std::vector<bool> in_tree;
  std::vector<int> parent_edge;  // -1 at roots
  std::vector<int> parent;
  std::vector<int> depth;
};

SpanningTree spanning_tree(const DualGraph& g) {
  SpanningTree t;
  const int nv = g.num_vertices();
  t.in_tree.assign(g.edges.size(), false);
  std::vector<int> comp(nv);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [a, b] = g.edges[e];
    int ra = find(a), rb = find(b);
    if (ra == rb) continue;
    comp[ra] = rb;
    t.in_tree[e] = true;
    adj[a].emplace_back(b, e);
    adj[b].emplace_back(a, e);
  }
  t.parent_edge.assign(nv, -1);
  t.parent.assign(nv, -1);
  t.depth.assign(nv, -1);
  for (int root = 0; root < nv; ++root) {
    if (t.depth[root] >= 0) continue;
    t.depth[root] = 0;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (auto [w, e] : adj[v])
        if (t.depth[w] < 0) {
          t.depth[w] = t.depth[v] + 1;
          t.parent[w] = v;
          t.parent_edge[w] = e;
          q.push(w);
        }
    }
  }
  return t;
}

// Signed tree edges on the path from u to w: +1 when traversed tail -> head.
std::vector<std::pair<int, int>> tree_path(const DualGraph& g, const SpanningTree& t, int u, int w) {
  std::vector<std::pair<int, int>> up, down;
  while (u != w) {
    if (t.depth[u] >= t.depth[w]) {
      int e = t.parent_edge[u];
      up.emplace_back(e, g.edges[e].first == u ? 1 : -1);
      u = t.parent[u];
    } else {
      int e = t.parent_edge[w];
      down.emplace_back(e, g.edges[e].second == w ? 1 : -1);
      w = t.parent[w];
    }
  }
  std::reverse(down.begin(), down.end());
  up.insert(up.end(), down.begin(), down.end());
  return up;
}

}  // namespace

std::vector<IntVector> cycle_equations(const RubberMapType& t) {
  const DualGraph& g = t.graph;
  SpanningTree tree = spanning_tree(g);
  std::vector<IntVector> rows;
  for (const auto& s : t.slopes)
    for (int e = 0; e < g.num_edges(); ++e) {
      if (tree.in_tree[e]) continue;
      IntVector row(g.edges.size());
      row[e] += s[e];
      for (auto [f, sign] : tree_path(g, tree, g.edges[e].second, g.edges[e].first)) row[f] += sign * s[f];
      rows.push_back(std::move(row));
    }
  return rows;
}

ModuliCone moduli_cone(const RubberMapType& t) {
  ModuliCone m;
  m.equations = cycle_equations(t);
  const std::size_t ne = t.graph.edges.size();
  if (ne == 0) {
    m.cone = RationalCone::zero(0);
    return m;
  }
  std::vector<IntVector> units;
  for (std::size_t e = 0; e < ne; ++e) {
    IntVector u(ne);
    u[e] = 1;
    units.push_back(u);
  }
  m.cone = RationalCone::from_inequalities(ne, units, m.equations);
  m.empty_interior = m.cone.is_zero();
  return m;
}

bool meets_open_orthant(const RubberMapType& t) {
  if (t.graph.edges.empty()) return true;
  IntVector p = moduli_cone(t).cone.interior_point();
  return std::all_of(p.coords().begin(), p.coords().end(), [](const Int& x) { return x > 0; });
}

std::optional<std::vector<std::vector<Rat>>> vertex_heights(const RubberMapType& t, const IntVector& lengths) {
  const DualGraph& g = t.graph;
  std::vector<std::vector<Rat>> heights;
  for (const auto& s : t.slopes) {
    std::vector<std::optional<Rat>> h(g.genus.size());
    h[0] = Rat(0);
    bool progress = true;
    while (progress) {
      progress = false;
      for (int e = 0; e < g.num_edges(); ++e) {
        auto [a, b] = g.edges[e];
        Rat delta = Rat(s[e]) * Rat(lengths[e]);
        if (h[a] && !h[b]) {
          h[b] = *h[a] + delta;
          progress = true;
        } else if (h[b] && !h[a]) {
          h[a] = *h[b] - delta;
          progress = true;
        }
      }
    }
    std::vector<Rat> out;
    for (const auto& x : h) {
      if (!x) return std::nullopt;
      out.push_back(*x);
    }
    for (int e = 0; e < g.num_edges(); ++e)
      if (out[g.edges[e].second] - out[g.edges[e].first] != Rat(s[e]) * Rat(lengths[e])) return std::nullopt;
    heights.push_back(std::move(out));
  }
  return heights;
}

// ---------------------------------------------------------------- enumeration

namespace {

// Height order of one factor is realizable with positive lengths iff the
// graph obtained by collapsing slope-0 edges and orienting the others upward
// has no directed cycle.
bool heights_acyclic(const DualGraph& g, const std::vector<long>& s) {
  const int nv = g.num_vertices();
  std::vector<int> comp(nv);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (int e = 0; e < g.num_edges(); ++e)
    if (s[e] == 0) comp[find(g.edges[e].first)] = find(g.edges[e].second);
  std::vector<std::vector<int>> out(nv);
  std::vector<int> indeg(nv, 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (s[e] == 0) continue;
    int a = find(g.edges[e].first), b = find(g.edges[e].second);
    if (a == b) return false;
    if (s[e] < 0) std::swap(a, b);
    out[a].push_back(b);
    ++indeg[b];
  }
  std::vector<int> ready;
  int nodes = 0, seen = 0;
  for (int v = 0; v < nv; ++v)
    if (find(v) == v) {
      ++nodes;
      if (indeg[v] == 0) ready.push_back(v);
    }
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int w : out[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  return seen == nodes;
}

// Balanced slope assignments for one factor on a fixed graph, |slope| <= d,
// loops flat, realizable heights.
std::vector<std::vector<long>> slope_assignments(const DualGraph& g, const std::vector<long>& a, long d) {
  SpanningTree tree = spanning_tree(g);
  std::vector<int> free_edges;
  for (int e = 0; e < g.num_edges(); ++e)
    if (!tree.in_tree[e] && g.edges[e].first != g.edges[e].second) free_edges.push_back(e);
  const int nv = g.num_vertices();
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return tree.depth[x] > tree.depth[y]; });

  std::vector<std::vector<long>> out;
  std::vector<long> s(g.edges.size(), 0);
  std::vector<long> choice(free_edges.size(), -d);
  while (true) {
    for (std::size_t k = 0; k < free_edges.size(); ++k) s[free_edges[k]] = choice[k];
    std::vector<long> excess(nv, 0);
    for (int j = 0; j < g.num_legs(); ++j) excess[g.legs[j]] += a[j];
    for (int e : free_edges) {
      excess[g.edges[e].first] += s[e];
      excess[g.edges[e].second] -= s[e];
    }
    bool ok = true;
    for (int v : order) {
      int e = tree.parent_edge[v];
      if (e < 0) {
        ok &= excess[v] == 0;
        continue;
      }
      long slope = g.edges[e].first == v ? -excess[v] : excess[v];
      if (slope > d || slope < -d) ok = false;
      s[e] = slope;
      excess[tree.parent[v]] += excess[v];
    }
    if (ok && heights_acyclic(g, s)) out.push_back(s);
    std::size_t i = 0;
    while (i < choice.size() && ++choice[i] > d) choice[i++] = -d;
    if (i == choice.size()) break;
  }
  return out;
}

bool type_order(const CanonicalType& a, const CanonicalType& b) {
  if (a.type.graph.edges.size() != b.type.graph.edges.size())
    return a.type.graph.edges.size() < b.type.graph.edges.size();
  return a.key < b.key;
}

}  // namespace

std::vector<RubberMapType> enumerate_joint_types(const ContactData& c) {
  c.validate();
  std::map<std::string, CanonicalType> found;
  for (const auto& g : enumerate_stable_graphs(c.g, c.n)) {
    std::vector<std::vector<std::vector<long>>> per_factor;
    for (std::size_t i = 0; i < c.factors.size(); ++i)
      per_factor.push_back(slope_assignments(g, c.factors[i], c.degree(i)));
    std::vector<std::size_t> idx(per_factor.size(), 0);
    if (std::any_of(per_factor.begin(), per_factor.end(), [](const auto& v) { return v.empty(); })) continue;
    while (true) {
      RubberMapType t;
      t.graph = g;
      for (std::size_t i = 0; i < per_factor.size(); ++i) {
        t.slopes.push_back(per_factor[i][idx[i]]);
        t.leg_slopes.push_back(c.factors[i]);
      }
      if (per_factor.size() <= 1 || meets_open_orthant(t)) {
        CanonicalType ct = canonical_type(t);
        found.emplace(ct.key, std::move(ct));
      }
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == per_factor[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
  }
  std::vector<CanonicalType> sorted;
  for (auto& [k, ct] : found) sorted.push_back(std::move(ct));
  std::sort(sorted.begin(), sorted.end(), type_order);
  std::vector<RubberMapType> out;
  for (auto& ct : sorted) out.push_back(std::move(ct.type));
  return out;
}

std::vector<RubberMapType> enumerate_rubber_types(const ContactData& c, std::size_t factor) {
  c.validate();
  return enumerate_joint_types(c.single(factor));
}

// ---------------------------------------------------------------- forgetful image

namespace {

LinearMap edge_permutation(const CanonicalForm& cf) {
  const std::size_t ne = cf.edge_map.size();
  LinearMap p(ne, ne);
  for (std::size_t e = 0; e < ne; ++e) p.at(static_cast<std::size_t>(cf.edge_map[e]), e) = 1;
  return p;
}

}  // namespace

StableImage forgetful_image(const RubberMapType& t) {
  StableImage out;
  RationalCone cone = moduli_cone(t).cone;
  if (t.graph.is_stable()) {
    CanonicalForm cf = canonical_form(t.graph);
    out.host = cf.key;
    out.map = edge_permutation(cf);
  } else {
    Stabilization s = stabilize(t.graph);
    CanonicalForm cf = canonical_form(s.graph);
    out.host = cf.key;
    out.map = edge_permutation(cf) * s.map;
  }
  out.image = cone.image(out.map);
  return out;
}

// ---------------------------------------------------------------- superimposition

namespace {

struct OrientedChain {
  std::vector<ChainLink> links;
  std::vector<int> inner;  // vertices between consecutive links
};

OrientedChain orient(const DualGraph& g, std::vector<ChainLink> links, bool reverse) {
  if (reverse) {
    std::reverse(links.begin(), links.end());
    for (auto& l : links) l.forward = !l.forward;
  }
  OrientedChain c{links, {}};
  for (std::size_t k = 0; k + 1 < links.size(); ++k) {
    const auto& [a, b] = g.edges[links[k].edge];
    c.inner.push_back(links[k].forward ? b : a);
  }
  return c;
}

// Merges of x and y break points: 0 = x only, 1 = y only, 2 = both.
void merges(std::size_t x, std::size_t y, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (x == 0 && y == 0) {
    out.push_back(cur);
    return;
  }
  for (int step = 0; step < 3; ++step) {
    if ((step != 1 && x == 0) || (step != 0 && y == 0)) continue;
    cur.push_back(step);
    merges(x - (step != 1), y - (step != 0), cur, out);
    cur.pop_back();
  }
}

bool covers_all_edges(const DualGraph& g, const Stabilization& s) {
  std::vector<int> count(g.edges.size(), 0);
  for (const auto& chain : s.chains)
    for (const auto& l : chain) ++count[l.edge];
  return std::all_of(count.begin(), count.end(), [](int k) { return k == 1; });
}

}  // namespace

std::vector<ProductType> superimpose(const RubberMapType& tx, const RubberMapType& ty,
                                     const GraphIdentification& id) {
  Stabilization sx = stabilize(tx.graph), sy = stabilize(ty.graph);
  if (!covers_all_edges(tx.graph, sx) || !covers_all_edges(ty.graph, sy))
    throw Error(ErrorKind::InvalidInput, "superimposition of types with contracted tails is not supported");
  auto incompatible = [](const std::string& why) { return Error(ErrorKind::IncompatibleStabilizations, why); };
  if (static_cast<int>(id.vertices.size()) != sy.graph.num_vertices() ||
      static_cast<int>(id.edges.size()) != sy.graph.num_edges() || sx.graph.num_vertices() != sy.graph.num_vertices() ||
      sx.graph.num_edges() != sy.graph.num_edges() || sx.graph.num_legs() != sy.graph.num_legs())
    throw incompatible("stabilized graphs have different shapes");
  for (int v = 0; v < sy.graph.num_vertices(); ++v)
    if (sx.graph.genus[id.vertices[v]] != sy.graph.genus[v]) throw incompatible("vertex genera differ");
  for (int j = 0; j < sy.graph.num_legs(); ++j)
    if (id.vertices[sy.graph.legs[j]] != sx.graph.legs[j]) throw incompatible("legs are not matched");
  std::vector<int> y_of_x(sx.graph.num_edges(), -1);
  for (int j = 0; j < sy.graph.num_edges(); ++j) {
    auto [a, b] = sy.graph.edges[j];
    int ma = id.vertices[a], mb = id.vertices[b];
    if (j < static_cast<int>(id.flips.size()) && id.flips[j]) std::swap(ma, mb);
    if (sx.graph.edges[id.edges[j]] != std::make_pair(ma, mb)) throw incompatible("edges are not matched");
    y_of_x[id.edges[j]] = j;
  }

  std::vector<int> x_original(sx.graph.num_vertices(), -1);
  for (int v = 0; v < tx.graph.num_vertices(); ++v)
    if (sx.vertex_map[v] >= 0) x_original[sx.vertex_map[v]] = v;

  const int ke = sx.graph.num_edges();
  std::vector<OrientedChain> xc, yc;
  std::vector<std::vector<std::vector<int>>> options(ke);
  for (int k = 0; k < ke; ++k) {
    int j = y_of_x[k];
    bool flip = j < static_cast<int>(id.flips.size()) && id.flips[j];
    xc.push_back(orient(tx.graph, sx.chains[k], false));
    yc.push_back(orient(ty.graph, sy.chains[j], flip));
    std::vector<int> cur;
    merges(xc[k].inner.size(), yc[k].inner.size(), cur, options[k]);
  }

  // Fiber product cone in R^{E(tx)} x R^{E(ty)}.
  const std::size_t ex = tx.graph.edges.size(), ey = ty.graph.edges.size();
  RationalCone cx = moduli_cone(tx).cone, cy = moduli_cone(ty).cone;
  auto embed = [&](const IntVector& v, std::size_t offset) {
    IntVector w(ex + ey);
    for (std::size_t i = 0; i < v.rank(); ++i) w[offset + i] = v[i];
    return w;
  };
  std::vector<IntVector> ineq, eq;
  for (const auto& f : cx.facets()) ineq.push_back(embed(f, 0));
  for (const auto& f : cy.facets()) ineq.push_back(embed(f, ex));
  for (const auto& f : cx.span_equations()) eq.push_back(embed(f, 0));
  for (const auto& f : cy.span_equations()) eq.push_back(embed(f, ex));
  for (int k = 0; k < ke; ++k) {
    IntVector row(ex + ey);
    for (const auto& l : sx.chains[k]) row[l.edge] += 1;
    for (const auto& l : sy.chains[y_of_x[k]]) row[ex + l.edge] -= 1;
    eq.push_back(row);
  }
  const std::size_t fp_dim = RationalCone::from_inequalities(ex + ey, ineq, eq).dim();

  std::vector<ProductType> out;
  std::vector<std::size_t> pick(ke, 0);
  while (true) {
    RubberMapType p;
    p.graph.genus = tx.graph.genus;
    p.graph.legs = tx.graph.legs;
    p.slopes.assign(tx.slopes.size() + ty.slopes.size(), {});
    p.leg_slopes = tx.leg_slopes;
    p.leg_slopes.insert(p.leg_slopes.end(), ty.leg_slopes.begin(), ty.leg_slopes.end());
    std::vector<int> x_edge, y_edge;
    for (int k = 0; k < ke; ++k) {
      const auto& steps = options[k][pick[k]];
      std::vector<int> path{x_original[sx.graph.edges[k].first]};
      std::vector<std::pair<std::size_t, std::size_t>> links;  // x link, y link per segment
      std::size_t xi = 0, yi = 0;
      for (int step : steps) {
        links.emplace_back(xi, yi);
        if (step == 1) {
          path.push_back(p.graph.num_vertices());
          p.graph.genus.push_back(0);
        } else {
          path.push_back(xc[k].inner[xi]);
        }
        if (step != 1) ++xi;
        if (step != 0) ++yi;
      }
      links.emplace_back(xi, yi);
      path.push_back(x_original[sx.graph.edges[k].second]);
      for (std::size_t seg = 0; seg < links.size(); ++seg) {
        int a = path[seg], b = path[seg + 1];
        int sign = a <= b ? 1 : -1;
        p.graph.edges.emplace_back(std::min(a, b), std::max(a, b));
        const ChainLink& lx = xc[k].links[links[seg].first];
        const ChainLink& ly = yc[k].links[links[seg].second];
        for (std::size_t i = 0; i < tx.slopes.size(); ++i)
          p.slopes[i].push_back(sign * (lx.forward ? 1 : -1) * tx.slopes[i][lx.edge]);
        for (std::size_t i = 0; i < ty.slopes.size(); ++i)
          p.slopes[tx.slopes.size() + i].push_back(sign * (ly.forward ? 1 : -1) * ty.slopes[i][ly.edge]);
        x_edge.push_back(lx.edge);
        y_edge.push_back(ly.edge);
      }
    }
    if (meets_open_orthant(p)) {
      const std::size_t np = p.graph.edges.size();
      LinearMap to_x(np, ex), to_y(np, ey), both(np, ex + ey);
      for (std::size_t e = 0; e < np; ++e) {
        to_x.at(x_edge[e], e) = 1;
        to_y.at(y_edge[e], e) = 1;
        both.at(x_edge[e], e) = 1;
        both.at(ex + y_edge[e], e) = 1;
      }
      RationalCone cone = moduli_cone(p).cone;
      if (cone.image(both).dim() == fp_dim) out.push_back({std::move(p), std::move(cone), to_x, to_y});
    }
    int k = 0;
    while (k < ke && ++pick[k] == options[k].size()) pick[k++] = 0;
    if (k == ke) break;
  }
  return out;
}

// ---------------------------------------------------------------- map complexes

MapModuliComplex build_map_complex(const std::vector<RubberMapType>& types, const CurveModuliComplex& base) {
  struct Entry {
    CanonicalType ct;
    RationalCone cone;
  };
  std::map<std::string, Entry> entries;
  struct PendingFace {
    std::string sub, super;
    LinearMap map;
  };
  std::vector<PendingFace> pending;
  std::vector<std::string> work;
  auto add = [&](const RubberMapType& t) {
    CanonicalType ct = canonical_type(t);
    if (!entries.count(ct.key)) {
      RationalCone cone = moduli_cone(ct.type).cone;
      entries.emplace(ct.key, Entry{ct, std::move(cone)});
      work.push_back(ct.key);
    }
    return ct;
  };
  for (const auto& t : types) add(t);
  while (!work.empty()) {
    std::string key = work.back();
    work.pop_back();
    const RubberMapType t = entries.at(key).ct.type;
    const RationalCone cone = entries.at(key).cone;
    for (const auto& face : cone.faces()) {
      if (face == cone) continue;
      std::set<int> zero;
      for (int e = 0; e < t.graph.num_edges(); ++e)
        if (std::all_of(face.rays().begin(), face.rays().end(), [&](const IntVector& r) { return r[e] == 0; }))
          zero.insert(e);
      Contraction c = contract_edges(t.graph, zero);
      RubberMapType sub{c.graph, std::vector<std::vector<long>>(t.slopes.size()), t.leg_slopes};
      for (int e = 0; e < t.graph.num_edges(); ++e) {
        if (c.edge_map[e] < 0) continue;
        int sign = c.vertex_map[t.graph.edges[e].first] > c.vertex_map[t.graph.edges[e].second] ? -1 : 1;
        for (std::size_t i = 0; i < t.slopes.size(); ++i) sub.slopes[i].push_back(sign * t.slopes[i][e]);
      }
      CanonicalType sct = add(sub);
      LinearMap f(static_cast<std::size_t>(c.graph.num_edges()), static_cast<std::size_t>(t.graph.num_edges()));
      for (int e = 0; e < t.graph.num_edges(); ++e)
        if (c.edge_map[e] >= 0) f.at(e, sct.form.edge_map[c.edge_map[e]]) = 1;
      pending.push_back({sct.key, key, f});
    }
  }

  MapModuliComplex m;
  m.complex = std::make_shared<AbstractConeComplex>();
  for (auto& [key, entry] : entries) {
    std::vector<LinearMap> auts;
    for (const auto& a : canonical_form(entry.ct.type.graph, entry.ct.type.edge_labels()).automorphisms)
      auts.push_back(a.edge_action());
    m.complex->add_cone(key, entry.cone, auts);
    m.types[key] = entry.ct.type;
  }
  for (const auto& pf : pending)
    for (const auto& a : m.complex->auts(pf.sub)) m.complex->add_face(pf.sub, pf.super, pf.map * a);

  m.forgetful.source = m.complex;
  m.forgetful.target = base.complex;
  for (const auto& [key, t] : m.types) {
    StableImage img = forgetful_image(t);
    if (!base.complex->has_cone(img.host))
      throw Error(ErrorKind::InvalidInput, "stabilized graph " + img.host + " is not in the curve complex");
    m.forgetful.images[key] = {img.host, img.map};
  }
  return m;
}

}  // namespace tropprod
