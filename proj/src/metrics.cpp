#include "semitext/metrics.hpp"

#include "semitext/common.hpp"

namespace semitext {

MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                              std::size_t classes) {
  if (truth.empty()) throw DataError("metrics: empty input");
  if (truth.size() != predicted.size()) throw DataError("metrics: size mismatch");

  MetricsReport r;
  r.total = truth.size();
  r.confusion.assign(classes * classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t >= classes || p >= classes) throw DataError("metrics: class id out of range");
    r.confusion[t * classes + p]++;
  }

  r.precision.assign(classes, 0.0);
  r.recall.assign(classes, 0.0);
  r.f1.assign(classes, 0.0);
  r.support.assign(classes, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t tp = r.confusion[c * classes + c];
    std::size_t truth_c = 0, pred_c = 0;
    for (std::size_t k = 0; k < classes; ++k) {
      truth_c += r.confusion[c * classes + k];
      pred_c += r.confusion[k * classes + c];
    }
    r.support[c] = truth_c;
    r.precision[c] = pred_c ? static_cast<double>(tp) / static_cast<double>(pred_c) : 0.0;
    r.recall[c] = truth_c ? static_cast<double>(tp) / static_cast<double>(truth_c) : 0.0;
    const double pr = r.precision[c] + r.recall[c];
    r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;

    const double w = static_cast<double>(truth_c) / static_cast<double>(r.total);
    r.weighted_precision += w * r.precision[c];
    r.weighted_recall += w * r.recall[c];
    r.weighted_f1 += w * r.f1[c];
  }
  return r;
}

}  // namespace semitext
