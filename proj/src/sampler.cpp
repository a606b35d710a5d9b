#include "semitext/sampler.hpp"

#include <algorithm>

#include "semitext/common.hpp"

namespace semitext {

ContextSampler::ContextSampler(const SimilarityGraph& graph,
                               std::vector<std::optional<int>> node_labels, SamplerConfig cfg)
    : neighbors_(symmetrized_neighbors(graph)),
      labels_(std::move(node_labels)),
      n_(graph.n),
      cfg_(cfg),
      rng_(cfg.seed) {
  if (cfg_.rho1 <= 0.0 || cfg_.rho1 >= 1.0 || cfg_.rho2 <= 0.0 || cfg_.rho2 >= 1.0)
    throw DataError("sampler: rho1 and rho2 must lie in (0, 1)");
  if (n_ < 2) throw DataError("sampler: graph needs at least 2 nodes");
  if (labels_.size() != n_) throw DataError("sampler: label vector does not match graph size");

  int max_class = -1;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!neighbors_[i].empty()) connected_nodes_.push_back(static_cast<std::uint32_t>(i));
    if (labels_[i]) {
      labeled_nodes_.push_back(static_cast<std::uint32_t>(i));
      max_class = std::max(max_class, *labels_[i]);
    }
  }
  nodes_by_class_.resize(max_class + 1);
  for (auto i : labeled_nodes_) nodes_by_class_[*labels_[i]].push_back(i);

  std::size_t classes_present = 0;
  for (const auto& members : nodes_by_class_)
    if (!members.empty()) ++classes_present;
  if (labeled_nodes_.size() < 2 || classes_present < 2)
    throw DataError("sampler: need >= 2 labeled nodes spanning >= 2 classes");
  if (connected_nodes_.empty()) throw DataError("sampler: graph has no edges");
}

std::uint32_t ContextSampler::uniform(std::uint32_t n) {
  return static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_));
}

bool ContextSampler::is_neighbor(std::uint32_t i, std::uint32_t j) const {
  const auto& nb = neighbors_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

ContextSample ContextSampler::sample() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ContextSample s;
  s.kind = unit(rng_) < cfg_.rho2 ? ContextKind::label : ContextKind::graph;
  const bool positive = unit(rng_) < cfg_.rho1;
  s.sign = positive ? 1 : -1;

  if (s.kind == ContextKind::graph) {
    if (positive) {
      s.input = connected_nodes_[uniform(static_cast<std::uint32_t>(connected_nodes_.size()))];
      const auto& nb = neighbors_[s.input];
      s.context = nb[uniform(static_cast<std::uint32_t>(nb.size()))];
      return s;
    }
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
      const std::uint32_t i = uniform(static_cast<std::uint32_t>(n_));
      if (neighbors_[i].size() + 1 >= n_) continue;  // no non-neighbor exists
      for (int jt = 0; jt < kMaxRetries; ++jt) {
        const std::uint32_t j = uniform(static_cast<std::uint32_t>(n_));
        if (j == i || is_neighbor(i, j)) continue;
        s.input = i;
        s.context = j;
        return s;
      }
    }
    throw DataError("sampler: could not draw a graph negative");
  }

  if (positive) {
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
      const std::uint32_t i =
          labeled_nodes_[uniform(static_cast<std::uint32_t>(labeled_nodes_.size()))];
      const auto& members = nodes_by_class_[*labels_[i]];
      if (members.size() < 2) continue;  // singleton class, resample i
      for (int jt = 0; jt < kMaxRetries; ++jt) {
        const std::uint32_t j = members[uniform(static_cast<std::uint32_t>(members.size()))];
        if (j != i) {
          s.input = i;
          s.context = j;
          return s;
        }
      }
    }
    throw DataError("sampler: could not draw a label positive");
  }

  const std::uint32_t i =
      labeled_nodes_[uniform(static_cast<std::uint32_t>(labeled_nodes_.size()))];
  for (int jt = 0; jt < kMaxRetries; ++jt) {
    const std::uint32_t j =
        labeled_nodes_[uniform(static_cast<std::uint32_t>(labeled_nodes_.size()))];
    if (*labels_[j] != *labels_[i]) {
      s.input = i;
      s.context = j;
      return s;
    }
  }
  throw DataError("sampler: could not draw a label negative");
}

std::vector<ContextSample> ContextSampler::batch(std::size_t count) {
  std::vector<ContextSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample());
  return out;
}

}  // namespace semitext
