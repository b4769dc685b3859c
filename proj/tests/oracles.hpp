#pragma once

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tropprod/complexes.hpp"
#include "tropprod/curves.hpp"
#include "tropprod/exactgeom.hpp"
#include "tropprod/tropmaps.hpp"

// Brute-force reference implementations. They share no code with the library
// beyond the number types and IntVector.
namespace oracle {

using tropprod::Int;
using tropprod::IntVector;
using tropprod::Rat;
using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;

QMat row_reduce(QMat m, std::vector<std::size_t>* pivots = nullptr);
std::size_t rank(const std::vector<IntVector>& rows);
// Basis of {y : m y = 0}.
QMat nullspace(const QMat& m, std::size_t columns);
IntVector primitive(const QVec& v);
QVec to_q(const IntVector& v);

struct ConeData {
  std::size_t dim = 0;
  std::set<IntVector> rays;
  std::set<IntVector> facets;  // primitive covectors inside the span
};

// Facets from every (dim-1)-subset of generators, rays as generators lying on
// dim-1 independent facets.
ConeData brute_force_cone(std::size_t rank, const std::vector<IntVector>& generators);

// Caratheodory: x is a nonnegative combination of some independent subset.
bool brute_force_contains(const std::vector<IntVector>& generators, const QVec& x);

// Rational points: nonnegative rational combinations of `generators`, and
// arbitrary points of the ambient space.
QVec sample_combination(std::mt19937_64& rng, const std::vector<IntVector>& generators, std::size_t rank);
QVec sample_ambient(std::mt19937_64& rng, std::size_t rank, int bound = 4);
// Integer point on the same ray (zero stays zero).
IntVector clear_denominators(const QVec& v);

struct Graph {
  std::vector<int> genus;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> legs;
};

// Minimum serialization over all vertex relabelings.
std::string graph_key(const Graph& g);
Graph from_library(const tropprod::DualGraph& g);

// Every stable graph of type (g, n) by exhaustive vertex, genus, edge and leg
// choices, deduplicated by graph_key.
std::vector<Graph> brute_force_stable_graphs(int g, int n);

struct MapType {
  Graph graph;
  std::vector<std::vector<long>> slopes;  // factor -> edge, measured from the smaller vertex
  std::vector<std::vector<long>> leg_slopes;
};

std::string type_key(const MapType& t);
MapType from_library(const tropprod::RubberMapType& t);

// Slopes in [-d_i, d_i] on every stable graph, kept when balanced and when
// some point with all edge lengths positive satisfies every cycle equation.
std::set<std::string> brute_force_types(int g, int n, const std::vector<std::vector<long>>& factors);

// Sign vectors of the coordinates and of the covectors over a grid of the
// nonnegative orthant: one per cone of the sliced orthant.
struct SignCount {
  std::size_t cones = 0;
  std::size_t maximal = 0;
};
SignCount braid_sign_oracle(std::size_t rank, const std::vector<IntVector>& covectors, int grid);

// Slope vectors of length n summing to zero with degree in [1, max_degree],
// up to permutation and global sign.
std::vector<std::vector<long>> slope_vectors(int n, int max_degree);

// Samples points of every original cone and checks that they are covered by
// the refined cells, that interior points of a cell lie in no other cell and
// that sampled points of each cell stay inside its host. Returns a
// description of the first failure, or an empty string.
std::string check_partition(const tropprod::SubdivisionOf& s, std::mt19937_64& rng, int points_per_cone);

}  // namespace oracle
