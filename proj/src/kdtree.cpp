#include "semitext/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "semitext/common.hpp"

namespace semitext {

double euclidean_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return std::sqrt(s);
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("euclidean_distance: dimension mismatch");
  return euclidean_distance(a.data(), b.data(), a.size());
}

namespace {

// Ordering on (squared distance, id); the heap keeps the current worst on top.
struct Candidate {
  double d2;
  std::uint32_t id;
};
struct WorseFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.id < b.id;
  }
};

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

std::vector<Neighbor> finish(std::vector<Candidate> heap) {
  std::sort(heap.begin(), heap.end(), [](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.id < b.id;
  });
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& c : heap) out.push_back({c.id, std::sqrt(c.d2)});
  return out;
}

}  // namespace

KdTree::KdTree(const double* data, std::size_t n, std::size_t dim, std::size_t leaf_size)
    : data_(data), n_(n), dim_(dim), leaf_size_(leaf_size == 0 ? 1 : leaf_size) {
  if (n == 0) throw DataError("kd-tree needs at least one point");
  if (dim == 0) throw DataError("kd-tree needs dimension >= 1");
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<std::uint32_t>(i);
  nodes_.reserve(2 * n / leaf_size_ + 2);
  root_ = build(0, static_cast<std::uint32_t>(n));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t count = end - begin;
  const auto idx = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();

  if (count <= leaf_size_) {
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    return idx;
  }

  // Split dimension: maximum spread over the subset.
  int best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    double lo = at(order_[begin])[c];
    double hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      const double v = at(order_[i])[c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = hi - lo;
    if (spread > best_spread) {
      best_spread = spread;
      best_dim = static_cast<int>(c);
    }
  }

  if (best_spread == 0.0) {
    // All points identical on every axis; no split can make progress.
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    return idx;
  }

  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = at(a)[best_dim];
                     const double vb = at(b)[best_dim];
                     if (va != vb) return va < vb;
                     return a < b;
                   });

  nodes_[idx].split_dim = best_dim;
  nodes_[idx].split_value = at(order_[mid])[best_dim];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[idx].left = left;
  nodes_[idx].right = right;
  return idx;
}

std::vector<Neighbor> KdTree::knn(std::uint32_t query_id, std::size_t k) const {
  if (query_id >= n_) throw DataError("knn: unknown query id");
  if (k < 1) throw DataError("knn: k must be >= 1");
  const std::size_t want = std::min(k, n_ - 1);
  if (want == 0) return {};

  const double* q = at(query_id);
  std::priority_queue<Candidate, std::vector<Candidate>, WorseFirst> heap;

  // Recursive descent, nearer child first; prune a subtree only when the
  // axial gap strictly exceeds the current worst, so equal-distance
  // candidates with smaller ids are never lost.
  auto visit = [&](auto&& self, std::int32_t node_idx) -> void {
    const Node& node = nodes_[node_idx];
    if (node.split_dim < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t id = order_[i];
        if (id == query_id) continue;
        const double d2 = squared_distance(q, at(id), dim_);
        if (heap.size() < want) {
          heap.push({d2, id});
        } else {
          const Candidate& worst = heap.top();
          if (d2 < worst.d2 || (d2 == worst.d2 && id < worst.id)) {
            heap.pop();
            heap.push({d2, id});
          }
        }
      }
      return;
    }
    const double delta = q[node.split_dim] - node.split_value;
    const std::int32_t near = delta < 0 ? node.left : node.right;
    const std::int32_t far = delta < 0 ? node.right : node.left;
    self(self, near);
    if (heap.size() < want || delta * delta <= heap.top().d2) self(self, far);
  };
  visit(visit, root_);

  std::vector<Candidate> flat;
  flat.reserve(heap.size());
  while (!heap.empty()) {
    flat.push_back(heap.top());
    heap.pop();
  }
  return finish(std::move(flat));
}

std::vector<Neighbor> brute_force_knn(const double* data, std::size_t n, std::size_t dim,
                                      std::uint32_t query_id, std::size_t k) {
  if (query_id >= n) throw DataError("brute_force_knn: unknown query id");
  if (k < 1) throw DataError("brute_force_knn: k must be >= 1");
  const double* q = data + static_cast<std::size_t>(query_id) * dim;

  std::vector<Candidate> all;
  all.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == query_id) continue;
    all.push_back({squared_distance(q, data + i * dim, dim), static_cast<std::uint32_t>(i)});
  }
  const std::size_t want = std::min(k, n - 1);
  std::partial_sort(all.begin(), all.begin() + want, all.end(),
                    [](const Candidate& a, const Candidate& b) {
                      if (a.d2 != b.d2) return a.d2 < b.d2;
                      return a.id < b.id;
                    });
  all.resize(want);
  return finish(std::move(all));
}

}  // namespace semitext
