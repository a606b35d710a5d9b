#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace semitext {

struct Neighbor {
  std::uint32_t id;
  double dist;
};

// Exact k-d tree over a fixed point set. Splits on the dimension of maximum
// spread at the median; leaves hold up to leaf_size points. Queries are exact
// nearest-neighbor searches with ties broken by smaller point id, matching
// the brute-force scan bit for bit.
class KdTree {
 public:
  KdTree(const double* data, std::size_t n, std::size_t dim, std::size_t leaf_size = 16);

  // k nearest points to point `query_id`, excluding itself. Returns
  // min(k, n-1) results sorted ascending by (distance, id).
  std::vector<Neighbor> knn(std::uint32_t query_id, std::size_t k) const;

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

 private:
  struct Node {
    int split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;  // leaf range into order_
    std::uint32_t end = 0;
  };

  const double* at(std::uint32_t id) const { return data_ + static_cast<std::size_t>(id) * dim_; }
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  const double* data_;
  std::size_t n_;
  std::size_t dim_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

double euclidean_distance(const double* a, const double* b, std::size_t dim);
double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

// Full-scan k-NN with the same contract as KdTree::knn. Deliberately pays the
// O(n) cost per query; kept as the reference the tree is tested against.
std::vector<Neighbor> brute_force_knn(const double* data, std::size_t n, std::size_t dim,
                                      std::uint32_t query_id, std::size_t k);

}  // namespace semitext
