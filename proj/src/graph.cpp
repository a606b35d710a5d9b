#include "semitext/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "semitext/common.hpp"

namespace semitext {

SimilarityGraph build_graph(const double* data, std::size_t n, std::size_t dim, std::size_t k,
                            int threads, std::size_t leaf_size) {
  if (n < 2) throw DataError("build_graph: need at least 2 nodes");
  if (k < 1) throw DataError("build_graph: k must be >= 1");

  KdTree tree(data, n, dim, leaf_size);
  SimilarityGraph graph;
  graph.n = n;
  graph.k = k;
  graph.adjacency.resize(n);

#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    graph.adjacency[i] = tree.knn(static_cast<std::uint32_t>(i), k);
#else
  (void)threads;
  for (std::size_t i = 0; i < n; ++i)
    graph.adjacency[i] = tree.knn(static_cast<std::uint32_t>(i), k);
#endif
  return graph;
}

SimilarityGraph build_graph_bruteforce(const double* data, std::size_t n, std::size_t dim,
                                       std::size_t k) {
  if (n < 2) throw DataError("build_graph: need at least 2 nodes");
  if (k < 1) throw DataError("build_graph: k must be >= 1");
  SimilarityGraph graph;
  graph.n = n;
  graph.k = k;
  graph.adjacency.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    graph.adjacency[i] = brute_force_knn(data, n, dim, static_cast<std::uint32_t>(i), k);
  return graph;
}

std::vector<std::vector<std::uint32_t>> symmetrized_neighbors(const SimilarityGraph& graph) {
  std::vector<std::vector<std::uint32_t>> nb(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i)
    for (const auto& e : graph.adjacency[i]) {
      nb[i].push_back(e.id);
      nb[e.id].push_back(static_cast<std::uint32_t>(i));
    }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

void save_graph(const SimilarityGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << graph.n << ' ' << graph.k << '\n';
  char buf[64];
  for (std::size_t i = 0; i < graph.n; ++i)
    for (const auto& e : graph.adjacency[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.dist);
      out << i << ' ' << e.id << ' ' << buf << '\n';
    }
  if (!out) throw DataError("write failed: " + path);
}

SimilarityGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  SimilarityGraph graph;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError(path + ": missing header");
  ++lineno;
  {
    const char* p = line.data();
    const char* end = p + line.size();
    auto r1 = std::from_chars(p, end, graph.n);
    if (r1.ec != std::errc() || r1.ptr == end)
      throw DataError(path + ":1: bad header");
    auto r2 = std::from_chars(r1.ptr + 1, end, graph.k);
    if (r2.ec != std::errc()) throw DataError(path + ":1: bad header");
  }
  graph.adjacency.resize(graph.n);

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t i = 0;
    std::uint32_t j = 0;
    double dist = 0.0;
    auto r1 = std::from_chars(p, end, i);
    if (r1.ec != std::errc() || r1.ptr >= end)
      throw DataError(path + ":" + std::to_string(lineno) + ": bad edge line");
    auto r2 = std::from_chars(r1.ptr + 1, end, j);
    if (r2.ec != std::errc() || r2.ptr >= end)
      throw DataError(path + ":" + std::to_string(lineno) + ": bad edge line");
    auto r3 = std::from_chars(r2.ptr + 1, end, dist);
    if (r3.ec != std::errc())
      throw DataError(path + ":" + std::to_string(lineno) + ": bad edge line");
    if (i >= graph.n || j >= graph.n)
      throw DataError(path + ":" + std::to_string(lineno) + ": node index out of range");
    if (i == j) throw DataError(path + ":" + std::to_string(lineno) + ": self edge");
    if (!(dist >= 0.0) || !std::isfinite(dist))
      throw DataError(path + ":" + std::to_string(lineno) + ": bad distance");
    graph.adjacency[i].push_back({j, dist});
  }

  for (std::size_t i = 0; i < graph.n; ++i) {
    const auto& list = graph.adjacency[i];
    const std::size_t expect = std::min(graph.k, graph.n - 1);
    if (list.size() != expect)
      throw DataError(path + ": node " + std::to_string(i) + " has " +
                      std::to_string(list.size()) + " edges, expected " + std::to_string(expect));
    for (std::size_t e = 1; e < list.size(); ++e)
      if (list[e].dist < list[e - 1].dist ||
          (list[e].dist == list[e - 1].dist && list[e].id <= list[e - 1].id))
        throw DataError(path + ": node " + std::to_string(i) + " adjacency not sorted");
  }
  return graph;
}

void save_graph_ids(const std::vector<std::string>& ids, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << '\t' << ids[i] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::vector<std::string> load_graph_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected index<TAB>id");
    std::size_t idx = 0;
    auto r = std::from_chars(line.data(), line.data() + tab, idx);
    if (r.ec != std::errc() || idx != ids.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": unexpected index");
    ids.push_back(line.substr(tab + 1));
  }
  return ids;
}

}  // namespace semitext
