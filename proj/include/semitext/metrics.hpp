#pragma once

#include <cstddef>
#include <vector>

namespace semitext {

// Per-class precision/recall/F1 plus support-weighted averages. A zero
// denominator yields 0 for the affected metric.
struct MetricsReport {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;
  std::vector<std::size_t> confusion;  // K x K, row = truth, col = prediction
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::size_t total = 0;
};

MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              std::size_t classes);

}  // namespace semitext
