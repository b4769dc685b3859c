#include "tropprod/curves.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace tropprod {

int DualGraph::valence(int v) const {
  int val = 0;
  for (const auto& [a, b] : edges) val += (a == v) + (b == v);
  for (int l : legs) val += l == v;
  return val;
}

int DualGraph::loops_at(int v) const {
  int k = 0;
  for (const auto& [a, b] : edges) k += a == v && b == v;
  return k;
}

bool DualGraph::is_connected() const {
  if (genus.empty()) return false;
  std::vector<int> parent(genus.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  int components = num_vertices();
  for (const auto& [a, b] : edges) {
    int ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

int DualGraph::h1() const { return num_edges() - num_vertices() + 1; }

bool DualGraph::is_stable() const {
  for (int v = 0; v < num_vertices(); ++v)
    if (2 * genus[v] - 2 + valence(v) <= 0) return false;
  return true;
}

std::string DualGraph::to_string() const {
  std::ostringstream os;
  os << "graph(genus";
  for (int g : genus) os << ' ' << g;
  os << "; edges";
  for (const auto& [a, b] : edges) os << ' ' << a << '-' << b;
  os << "; legs";
  for (int l : legs) os << ' ' << l;
  os << ')';
  return os.str();
}

int genus(const DualGraph& g) {
  if (!g.is_connected()) throw Error(ErrorKind::Disconnected, g.to_string());
  return g.h1() + std::accumulate(g.genus.begin(), g.genus.end(), 0);
}

DualGraph theta_graph() { return {{0, 0}, {{0, 1}, {0, 1}, {0, 1}}, {}}; }

LinearMap GraphAutomorphism::edge_action() const {
  LinearMap m(edges.size(), edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) m.at(static_cast<std::size_t>(edges[e]), e) = 1;
  return m;
}

// ---------------------------------------------------------------- canonical form

namespace {

using Label = std::vector<long>;
using EdgeTuple = std::tuple<int, int, Label>;

Label negate(Label l) {
  for (auto& x : l) x = -x;
  return l;
}

EdgeTuple relabel_edge(int u, int v, const Label& label, const std::vector<int>& pos) {
  int a = pos[u], b = pos[v];
  if (a == b) return {a, a, std::min(label, negate(label))};
  if (a < b) return {a, b, label};
  return {b, a, negate(label)};
}

std::vector<int> refine_colors(const DualGraph& g, const EdgeLabels& labels) {
  const int nv = g.num_vertices();
  std::vector<std::string> desc(nv);
  for (int v = 0; v < nv; ++v) {
    std::ostringstream os;
    os << g.genus[v] << ';' << g.valence(v) << ";L";
    for (int i = 0; i < g.num_legs(); ++i)
      if (g.legs[i] == v) os << i << ',';
    std::vector<Label> loops;
    for (int e = 0; e < g.num_edges(); ++e)
      if (g.edges[e].first == v && g.edges[e].second == v) loops.push_back(std::min(labels[e], negate(labels[e])));
    std::sort(loops.begin(), loops.end());
    os << ";O";
    for (const auto& l : loops) {
      for (long x : l) os << x << ' ';
      os << '/';
    }
    desc[v] = os.str();
  }
  auto compress = [&](const std::vector<std::string>& d) {
    std::vector<std::string> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> c(d.size());
    for (std::size_t v = 0; v < d.size(); ++v)
      c[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), d[v]) - sorted.begin());
    return std::make_pair(c, sorted.size());
  };
  auto [color, classes] = compress(desc);
  while (true) {
    std::vector<std::string> next(nv);
    for (int v = 0; v < nv; ++v) {
      std::vector<std::pair<int, Label>> nbrs;
      for (int e = 0; e < g.num_edges(); ++e) {
        auto [a, b] = g.edges[e];
        if (a == b) continue;
        if (a == v) nbrs.emplace_back(color[b], labels[e]);
        if (b == v) nbrs.emplace_back(color[a], negate(labels[e]));
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::ostringstream os;
      os << color[v] << '[';
      for (const auto& [c, l] : nbrs) {
        os << c << ':';
        for (long x : l) os << x << ' ';
        os << ',';
      }
      next[v] = os.str();
    }
    auto [c2, k2] = compress(next);
    color = c2;
    if (k2 == classes) break;
    classes = k2;
  }
  return color;
}

// Calls visit(pos) for every position assignment respecting the color classes.
void for_each_labeling(const std::vector<int>& color, const std::function<void(const std::vector<int>&)>& visit) {
  const int nv = static_cast<int>(color.size());
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return color[a] < color[b]; });
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < nv; ++i) {
    if (i == 0 || color[order[i]] != color[order[i - 1]]) blocks.emplace_back();
    blocks.back().push_back(order[i]);
  }
  std::vector<int> pos(nv);
  std::function<void(std::size_t, int)> rec = [&](std::size_t b, int start) {
    if (b == blocks.size()) {
      visit(pos);
      return;
    }
    std::vector<int> members = blocks[b];
    std::sort(members.begin(), members.end());
    do {
      for (std::size_t i = 0; i < members.size(); ++i) pos[members[i]] = start + static_cast<int>(i);
      rec(b + 1, start + static_cast<int>(members.size()));
    } while (std::next_permutation(members.begin(), members.end()));
  };
  rec(0, 0);
}

std::string make_key(const DualGraph& g, const EdgeLabels& labels) {
  std::ostringstream os;
  os << 'v';
  for (int i = 0; i < g.num_vertices(); ++i) os << (i ? "," : "") << g.genus[i];
  os << "|e";
  for (int e = 0; e < g.num_edges(); ++e) {
    os << (e ? "," : "") << g.edges[e].first << '-' << g.edges[e].second;
    if (!labels[e].empty()) {
      os << ':';
      for (std::size_t k = 0; k < labels[e].size(); ++k) os << (k ? "/" : "") << labels[e][k];
    }
  }
  os << "|l";
  for (int i = 0; i < g.num_legs(); ++i) os << (i ? "," : "") << g.legs[i];
  return os.str();
}

}  // namespace

CanonicalForm canonical_form(const DualGraph& g, const EdgeLabels& labels_in) {
  EdgeLabels labels = labels_in;
  if (labels.empty()) labels.assign(g.edges.size(), {});
  if (labels.size() != g.edges.size()) throw Error(ErrorKind::InvalidInput, "edge labels do not match edges");
  const int nv = g.num_vertices();
  const int ne = g.num_edges();
  std::vector<int> color = refine_colors(g, labels);

  auto tuples_for = [&](const std::vector<int>& pos) {
    std::vector<EdgeTuple> t;
    t.reserve(ne);
    for (int e = 0; e < ne; ++e) t.push_back(relabel_edge(g.edges[e].first, g.edges[e].second, labels[e], pos));
    std::sort(t.begin(), t.end());
    return t;
  };

  std::vector<EdgeTuple> best;
  std::vector<std::vector<int>> best_pos;
  for_each_labeling(color, [&](const std::vector<int>& pos) {
    auto t = tuples_for(pos);
    if (best_pos.empty() || t < best) {
      best = std::move(t);
      best_pos.assign(1, pos);
    } else if (t == best) {
      best_pos.push_back(pos);
    }
  });

  CanonicalForm cf;
  const std::vector<int>& pos = best_pos.front();
  cf.vertex_map = pos;
  cf.graph.genus.assign(nv, 0);
  for (int v = 0; v < nv; ++v) cf.graph.genus[pos[v]] = g.genus[v];
  for (const auto& [a, b, l] : best) {
    cf.graph.edges.emplace_back(a, b);
    cf.labels.push_back(l);
  }
  for (int l : g.legs) cf.graph.legs.push_back(pos[l]);

  std::vector<std::pair<EdgeTuple, int>> old;
  for (int e = 0; e < ne; ++e)
    old.emplace_back(relabel_edge(g.edges[e].first, g.edges[e].second, labels[e], pos), e);
  std::sort(old.begin(), old.end());
  cf.edge_map.assign(ne, 0);
  cf.flips.assign(ne, false);
  for (int k = 0; k < ne; ++k) {
    int e = old[k].second;
    cf.edge_map[e] = k;
    auto [u, v] = g.edges[e];
    cf.flips[e] = pos[u] != pos[v] && pos[u] > pos[v];
  }

  std::vector<int> inverse(nv);
  for (int v = 0; v < nv; ++v) inverse[pos[v]] = v;
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  for (const auto& other : best_pos) {
    std::vector<int> sigma(nv);
    for (int c = 0; c < nv; ++c) sigma[c] = other[inverse[c]];
    std::map<EdgeTuple, std::vector<int>> slots;
    for (int k = 0; k < ne; ++k) slots[best[k]].push_back(k);
    std::map<EdgeTuple, std::vector<int>> sources;
    std::vector<bool> flip(ne, false);
    for (int k = 0; k < ne; ++k) {
      auto [a, b, l] = best[k];
      sources[relabel_edge(a, b, l, sigma)].push_back(k);
      flip[k] = a != b && sigma[a] > sigma[b];
    }
    std::vector<std::pair<std::vector<int>, std::vector<int>>> groups;
    for (auto& [t, src] : sources) groups.emplace_back(src, slots.at(t));
    std::vector<int> edge_perm(ne, -1);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == groups.size()) {
        if (seen.emplace(sigma, edge_perm).second) cf.automorphisms.push_back({sigma, edge_perm, flip});
        return;
      }
      std::vector<int> targets = groups[i].second;
      do {
        for (std::size_t j = 0; j < targets.size(); ++j) edge_perm[groups[i].first[j]] = targets[j];
        rec(i + 1);
      } while (std::next_permutation(targets.begin(), targets.end()));
    };
    rec(0);
  }
  cf.key = make_key(cf.graph, cf.labels);
  return cf;
}

// ---------------------------------------------------------------- contraction

Contraction contract_edges(const DualGraph& g, const std::set<int>& edges) {
  for (int e : edges)
    if (e < 0 || e >= g.num_edges()) throw Error(ErrorKind::NoSuchEdge, "edge " + std::to_string(e));
  const int nv = g.num_vertices();
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int e : edges) {
    int a = find(g.edges[e].first), b = find(g.edges[e].second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  Contraction c;
  c.vertex_map.assign(nv, -1);
  std::map<int, int> root_index;
  for (int v = 0; v < nv; ++v) {
    int r = find(v);
    auto it = root_index.find(r);
    if (it == root_index.end()) {
      it = root_index.emplace(r, c.graph.num_vertices()).first;
      c.graph.genus.push_back(0);
    }
    c.vertex_map[v] = it->second;
  }
  std::vector<int> class_size(c.graph.num_vertices(), 0);
  for (int v = 0; v < nv; ++v) {
    c.graph.genus[c.vertex_map[v]] += g.genus[v];
    ++class_size[c.vertex_map[v]];
  }
  for (int e : edges) ++c.graph.genus[c.vertex_map[g.edges[e].first]];
  for (int k = 0; k < c.graph.num_vertices(); ++k) c.graph.genus[k] -= class_size[k] - 1;

  c.edge_map.assign(g.num_edges(), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (edges.count(e)) continue;
    int a = c.vertex_map[g.edges[e].first], b = c.vertex_map[g.edges[e].second];
    c.edge_map[e] = c.graph.num_edges();
    c.graph.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  for (int l : g.legs) c.graph.legs.push_back(c.vertex_map[l]);

  c.inclusion = LinearMap(static_cast<std::size_t>(c.graph.num_edges()), static_cast<std::size_t>(g.num_edges()));
  for (int e = 0; e < g.num_edges(); ++e)
    if (c.edge_map[e] >= 0) c.inclusion.at(e, c.edge_map[e]) = 1;
  return c;
}

Contraction contract_edge(const DualGraph& g, int e) {
  if (e < 0 || e >= g.num_edges()) throw Error(ErrorKind::NoSuchEdge, "edge " + std::to_string(e));
  return contract_edges(g, {e});
}

// ---------------------------------------------------------------- enumeration

namespace {

// All graphs with one more edge that contract back to g.
std::vector<DualGraph> uncontractions(const DualGraph& g) {
  std::vector<DualGraph> out;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (g.genus[v] > 0) {
      DualGraph h = g;
      --h.genus[v];
      h.edges.emplace_back(v, v);
      out.push_back(h);
    }
    // Split v into v and a new vertex w joined by a new edge.
    struct End {
      int kind;  // 0 edge end, 1 loop, 2 leg
      int index;
      int side;  // for edge ends: 0 tail, 1 head
    };
    std::vector<End> ends;
    for (int e = 0; e < g.num_edges(); ++e) {
      auto [a, b] = g.edges[e];
      if (a == v && b == v) {
        ends.push_back({1, e, 0});
      } else if (a == v) {
        ends.push_back({0, e, 0});
      } else if (b == v) {
        ends.push_back({0, e, 1});
      }
    }
    for (int i = 0; i < g.num_legs(); ++i)
      if (g.legs[i] == v) ends.push_back({2, i, 0});
    const int w = g.num_vertices();
    std::vector<int> choice(ends.size(), 0);
    auto options = [&](const End& e) { return e.kind == 1 ? 3 : 2; };
    while (true) {
      for (int g1 = 0; g1 <= g.genus[v]; ++g1) {
        DualGraph h = g;
        h.genus[v] = g1;
        h.genus.push_back(g.genus[v] - g1);
        for (std::size_t k = 0; k < ends.size(); ++k) {
          const End& e = ends[k];
          if (e.kind == 2) {
            if (choice[k] == 1) h.legs[e.index] = w;
          } else if (e.kind == 1) {
            if (choice[k] == 1) h.edges[e.index] = {w, w};
            if (choice[k] == 2) h.edges[e.index] = {v, w};
          } else if (choice[k] == 1) {
            auto& [a, b] = h.edges[e.index];
            (e.side == 0 ? a : b) = w;
            if (a > b) std::swap(a, b);
          }
        }
        h.edges.emplace_back(v, w);
        if (h.is_stable()) out.push_back(std::move(h));
      }
      std::size_t i = 0;
      while (i < ends.size() && ++choice[i] == options(ends[i])) choice[i++] = 0;
      if (i == ends.size()) break;
    }
  }
  return out;
}

}  // namespace

std::vector<DualGraph> enumerate_stable_graphs(int g, int n) {
  if (g < 0 || n < 0 || 2 * g - 2 + n <= 0)
    throw Error(ErrorKind::Unstable, "2g-2+n must be positive, got g=" + std::to_string(g) + " n=" + std::to_string(n));
  DualGraph smooth{{g}, {}, std::vector<int>(n, 0)};
  std::map<std::string, DualGraph> level{{canonical_form(smooth).key, canonical_form(smooth).graph}};
  std::vector<DualGraph> out;
  while (!level.empty()) {
    std::map<std::string, DualGraph> next;
    for (const auto& [key, graph] : level) {
      out.push_back(graph);
      for (const auto& h : uncontractions(graph)) {
        CanonicalForm cf = canonical_form(h);
        next.emplace(cf.key, cf.graph);
      }
    }
    level = std::move(next);
  }
  return out;
}

CurveModuliComplex build_moduli_complex(int g, int n) {
  CurveModuliComplex m;
  m.g = g;
  m.n = n;
  m.complex = std::make_shared<AbstractConeComplex>();
  auto graphs = enumerate_stable_graphs(g, n);
  std::map<std::string, CanonicalForm> forms;
  for (const auto& graph : graphs) {
    CanonicalForm cf = canonical_form(graph);
    const std::size_t e = graph.edges.size();
    std::vector<LinearMap> auts;
    for (const auto& a : cf.automorphisms) auts.push_back(a.edge_action());
    m.complex->add_cone(cf.key, e == 0 ? RationalCone::zero(0) : RationalCone::orthant(e), auts);
    m.graphs[cf.key] = cf.graph;
    forms.emplace(cf.key, std::move(cf));
  }
  for (const auto& [key, cf] : forms) {
    const DualGraph& graph = cf.graph;
    const int ne = graph.num_edges();
    for (unsigned mask = 1; mask < (1u << ne); ++mask) {
      std::set<int> s;
      for (int e = 0; e < ne; ++e)
        if (mask & (1u << e)) s.insert(e);
      Contraction c = contract_edges(graph, s);
      CanonicalForm sub = canonical_form(c.graph);
      LinearMap f(static_cast<std::size_t>(c.graph.num_edges()), static_cast<std::size_t>(ne));
      for (int e = 0; e < ne; ++e)
        if (c.edge_map[e] >= 0) f.at(e, sub.edge_map[c.edge_map[e]]) = 1;
      for (const auto& a : m.complex->auts(sub.key)) m.complex->add_face(sub.key, key, f * a);
    }
  }
  return m;
}

// ---------------------------------------------------------------- stabilization

Stabilization stabilize(const DualGraph& g) {
  const int n = g.num_legs();
  if (2 * genus(g) - 2 + n <= 0) throw Error(ErrorKind::Unstable, "stabilization of " + g.to_string() + " is empty");
  struct WorkEdge {
    int tail, head;
    std::vector<ChainLink> chain;
    bool alive = true;
  };
  std::vector<WorkEdge> edges;
  for (int e = 0; e < g.num_edges(); ++e) edges.push_back({g.edges[e].first, g.edges[e].second, {{e, true}}});
  std::vector<bool> alive(g.num_vertices(), true);
  std::vector<bool> marked(g.num_vertices(), false);
  for (int l : g.legs) marked[l] = true;

  auto reversed = [](std::vector<ChainLink> chain) {
    std::reverse(chain.begin(), chain.end());
    for (auto& l : chain) l.forward = !l.forward;
    return chain;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < g.num_vertices() && !changed; ++v) {
      if (!alive[v] || marked[v] || g.genus[v] != 0) continue;
      std::vector<int> inc;
      int val = 0;
      bool loop = false;
      for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        if (!edges[e].alive) continue;
        int k = (edges[e].tail == v) + (edges[e].head == v);
        if (k == 0) continue;
        val += k;
        loop |= k == 2;
        inc.push_back(e);
      }
      if (val == 0 || (val == 2 && loop)) throw Error(ErrorKind::Unstable, "stabilization of " + g.to_string());
      if (val == 1) {
        edges[inc[0]].alive = false;
        alive[v] = false;
        changed = true;
      } else if (val == 2) {
        WorkEdge& e1 = edges[inc[0]];
        WorkEdge& e2 = edges[inc[1]];
        int a = e1.tail == v ? e1.head : e1.tail;
        int b = e2.tail == v ? e2.head : e2.tail;
        std::vector<ChainLink> c1 = e1.head == v ? e1.chain : reversed(e1.chain);
        std::vector<ChainLink> c2 = e2.tail == v ? e2.chain : reversed(e2.chain);
        c1.insert(c1.end(), c2.begin(), c2.end());
        e1.alive = e2.alive = false;
        alive[v] = false;
        edges.push_back({a, b, std::move(c1)});
        changed = true;
      }
    }
  }

  Stabilization s;
  s.vertex_map.assign(g.num_vertices(), -1);
  for (int v = 0; v < g.num_vertices(); ++v)
    if (alive[v]) {
      s.vertex_map[v] = s.graph.num_vertices();
      s.graph.genus.push_back(g.genus[v]);
    }
  for (auto& e : edges) {
    if (!e.alive) continue;
    int a = s.vertex_map[e.tail], b = s.vertex_map[e.head];
    if (a > b) {
      std::swap(a, b);
      e.chain = reversed(e.chain);
    }
    s.graph.edges.emplace_back(a, b);
    s.chains.push_back(e.chain);
  }
  for (int l : g.legs) s.graph.legs.push_back(s.vertex_map[l]);
  s.map = LinearMap(static_cast<std::size_t>(g.num_edges()), s.chains.size());
  for (std::size_t k = 0; k < s.chains.size(); ++k)
    for (const auto& link : s.chains[k]) s.map.at(k, static_cast<std::size_t>(link.edge)) = 1;
  if (!s.graph.is_stable()) throw std::logic_error("stabilization produced an unstable graph");
  return s;
}

}  // namespace tropprod
