#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tropprod/complexes.hpp"

namespace tropprod {

// Marked genus-decorated multigraph. Vertices are 0-based, edges are stored
// with tail <= head, legs[i] is the vertex carrying marking i+1.
struct DualGraph {
  std::vector<int> genus;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> legs;

  int num_vertices() const { return static_cast<int>(genus.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_legs() const { return static_cast<int>(legs.size()); }

  // Edge ends plus legs.
  int valence(int v) const;
  int loops_at(int v) const;
  bool is_connected() const;
  // First Betti number; requires connectedness.
  int h1() const;
  bool is_stable() const;
  std::string to_string() const;

  friend bool operator==(const DualGraph&, const DualGraph&) = default;
};

// Throws Disconnected.
int genus(const DualGraph& g);

DualGraph theta_graph();

// Edge orientation data used by decorated graphs: label vectors are negated
// when an automorphism reverses an edge.
using EdgeLabels = std::vector<std::vector<long>>;

struct GraphAutomorphism {
  std::vector<int> vertices;  // old vertex -> new vertex
  std::vector<int> edges;     // old edge -> new edge
  std::vector<bool> flips;    // edge reversed relative to stored orientation

  // Action on edge-length coordinates.
  LinearMap edge_action() const;
};

struct CanonicalForm {
  DualGraph graph;
  EdgeLabels labels;
  std::vector<int> vertex_map;  // old vertex -> canonical vertex
  std::vector<int> edge_map;    // old edge -> canonical edge
  std::vector<bool> flips;      // old edge reversed in the canonical graph
  std::vector<GraphAutomorphism> automorphisms;  // of the canonical graph
  std::string key;
};

// Canonical relabeling; `labels` (per edge, oriented tail->head) are carried
// along and must be preserved by automorphisms.
CanonicalForm canonical_form(const DualGraph& g, const EdgeLabels& labels = {});

struct Contraction {
  DualGraph graph;
  std::vector<int> edge_map;     // old edge -> new edge, -1 if contracted
  std::vector<int> vertex_map;   // old vertex -> new vertex
  LinearMap inclusion;           // R^{E(new)} -> R^{E(old)}, the face {l_S = 0}
};

Contraction contract_edges(const DualGraph& g, const std::set<int>& edges);
Contraction contract_edge(const DualGraph& g, int e);

std::vector<DualGraph> enumerate_stable_graphs(int g, int n);

struct CurveModuliComplex {
  int g = 0;
  int n = 0;
  std::shared_ptr<AbstractConeComplex> complex;
  std::map<ConeId, DualGraph> graphs;  // canonical graph per cone id
};

CurveModuliComplex build_moduli_complex(int g, int n);

// Original edges making up one edge of the stabilized graph.
struct ChainLink {
  int edge;
  bool forward;  // original orientation agrees with the stable edge
};

struct Stabilization {
  DualGraph graph;
  LinearMap map;  // R^{E(original)} -> R^{E(stable)}
  std::vector<std::vector<ChainLink>> chains;
  std::vector<int> vertex_map;  // original vertex -> stable vertex, -1 if removed
};

Stabilization stabilize(const DualGraph& g);

}  // namespace tropprod
