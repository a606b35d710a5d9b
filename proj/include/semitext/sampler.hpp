#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "semitext/graph.hpp"

namespace semitext {

struct SamplerConfig {
  double rho1 = 0.5;  // probability a draw is positive
  double rho2 = 0.5;  // probability a draw is label-based (vs graph-based)
  std::uint64_t seed = 0;
};

enum class ContextKind { graph, label };

struct ContextSample {
  std::uint32_t input = 0;    // i
  std::uint32_t context = 0;  // j
  int sign = 1;               // gamma
  ContextKind kind = ContextKind::graph;
};

// Draws (i, j, gamma) tuples. Graph contexts use the symmetrized neighbor
// relation; label contexts pair nodes by equal/unequal class. Negatives are
// uniform with rejection (k << n keeps rejection cheap). One instance owns
// one random stream, used single-threaded.
class ContextSampler {
 public:
  ContextSampler(const SimilarityGraph& graph, std::vector<std::optional<int>> node_labels,
                 SamplerConfig cfg);

  ContextSample sample();
  std::vector<ContextSample> batch(std::size_t count);

  const std::vector<std::vector<std::uint32_t>>& neighbors() const { return neighbors_; }

 private:
  std::uint32_t uniform(std::uint32_t n);  // [0, n)
  bool is_neighbor(std::uint32_t i, std::uint32_t j) const;

  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::vector<std::optional<int>> labels_;
  std::vector<std::uint32_t> labeled_nodes_;
  std::vector<std::vector<std::uint32_t>> nodes_by_class_;
  std::vector<std::uint32_t> connected_nodes_;  // nodes with >= 1 neighbor
  std::size_t n_ = 0;
  SamplerConfig cfg_;
  std::mt19937_64 rng_;

  static constexpr int kMaxRetries = 100;
};

}  // namespace semitext
