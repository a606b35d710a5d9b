#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semitext/kdtree.hpp"

namespace semitext {

// Directed k-NN graph; adjacency[i] holds the min(k, n-1) nearest nodes,
// sorted ascending by (distance, id), never including i itself.
struct SimilarityGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::vector<Neighbor>> adjacency;
};

inline constexpr std::size_t kDefaultNeighbors = 10;

// Exact graph construction: one k-d tree, one query per node. Queries run in
// parallel (results land in disjoint slots, so the output is independent of
// the thread count); threads = 0 uses the OpenMP default, 1 forces the
// serial path.
SimilarityGraph build_graph(const double* data, std::size_t n, std::size_t dim,
                            std::size_t k = kDefaultNeighbors, int threads = 0,
                            std::size_t leaf_size = 16);

// Serial reference: adjacency built from brute_force_knn only. Used by tests
// and the benchmark as the ground truth for build_graph.
SimilarityGraph build_graph_bruteforce(const double* data, std::size_t n, std::size_t dim,
                                       std::size_t k = kDefaultNeighbors);

// Undirected neighbor sets: j is a neighbor of i if either directed edge
// exists. Sorted, deduplicated, per node.
std::vector<std::vector<std::uint32_t>> symmetrized_neighbors(const SimilarityGraph& graph);

// Graph file: header "n k", then one "i j dist" line per directed edge with
// round-trip-exact doubles. The sidecar maps node index to document id as
// "index<TAB>id" lines.
void save_graph(const SimilarityGraph& graph, const std::string& path);
SimilarityGraph load_graph(const std::string& path);
void save_graph_ids(const std::vector<std::string>& ids, const std::string& path);
std::vector<std::string> load_graph_ids(const std::string& path);

}  // namespace semitext
