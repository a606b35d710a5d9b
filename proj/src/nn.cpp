#include "semitext/nn.hpp"

#include <algorithm>
#include <cmath>

#include "semitext/common.hpp"

namespace semitext {

Tensor embedding_lookup(const std::vector<int>& ids, const EmbeddingTable& table) {
  const auto dim = static_cast<std::size_t>(table.dim);
  Tensor X = Tensor::zeros({ids.size(), dim});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows())
      throw DataError("embedding_lookup: index out of range");
    const double* src = table.row(id);
    std::copy(src, src + dim, X.row_ptr(t));
  }
  return X;
}

Tensor conv1d_forward(const Tensor& X, const FilterBank& bank) {
  const std::size_t len = X.rows();
  const std::size_t dim = X.cols();
  const std::size_t w = bank.width;
  if (len < w) throw DataError("conv1d: input shorter than filter width");
  const std::size_t out_len = len - w + 1;
  const std::size_t n_filters = bank.count();
  const std::size_t window = w * dim;

  Tensor H = Tensor::zeros({out_len, n_filters});
  for (std::size_t t = 0; t < out_len; ++t) {
    const double* x = X.row_ptr(t);  // rows t..t+w-1 are contiguous
    double* h = H.row_ptr(t);
    for (std::size_t j = 0; j < n_filters; ++j) {
      const double* u = bank.weight.row_ptr(j);
      double acc = bank.bias[j];
      for (std::size_t c = 0; c < window; ++c) acc += u[c] * x[c];
      h[j] = acc > 0.0 ? acc : 0.0;
    }
  }
  return H;
}

void conv1d_backward(const Tensor& X, const FilterBank& bank, const Tensor& H, const Tensor& dH,
                     FilterBank& grad, Tensor* dX) {
  const std::size_t dim = X.cols();
  const std::size_t w = bank.width;
  const std::size_t out_len = H.rows();
  const std::size_t n_filters = bank.count();
  const std::size_t window = w * dim;

  for (std::size_t t = 0; t < out_len; ++t) {
    const double* x = X.row_ptr(t);
    const double* h = H.row_ptr(t);
    const double* dh = dH.row_ptr(t);
    double* dx = dX ? dX->row_ptr(t) : nullptr;
    for (std::size_t j = 0; j < n_filters; ++j) {
      if (h[j] <= 0.0 || dh[j] == 0.0) continue;  // ReLU gate
      const double g = dh[j];
      grad.bias[j] += g;
      double* du = grad.weight.row_ptr(j);
      const double* u = bank.weight.row_ptr(j);
      for (std::size_t c = 0; c < window; ++c) du[c] += g * x[c];
      if (dx)
        for (std::size_t c = 0; c < window; ++c) dx[c] += g * u[c];
    }
  }
}

Tensor maxpool_forward(const Tensor& H, std::size_t p, std::vector<std::uint32_t>& argmax) {
  if (p < 1) throw DataError("maxpool: window must be >= 1");
  const std::size_t rows = H.rows();
  const std::size_t cols = H.cols();
  const std::size_t out_rows = (rows + p - 1) / p;

  Tensor P = Tensor::zeros({out_rows, cols});
  argmax.assign(out_rows * cols, 0);
  for (std::size_t wdw = 0; wdw < out_rows; ++wdw) {
    const std::size_t lo = wdw * p;
    const std::size_t hi = std::min(lo + p, rows);
    for (std::size_t j = 0; j < cols; ++j) {
      double best = H.at(lo, j);
      std::size_t best_t = lo;
      for (std::size_t t = lo + 1; t < hi; ++t)
        if (H.at(t, j) > best) {  // first index wins ties
          best = H.at(t, j);
          best_t = t;
        }
      P.at(wdw, j) = best;
      argmax[wdw * cols + j] = static_cast<std::uint32_t>(best_t);
    }
  }
  return P;
}

void maxpool_backward(const std::vector<std::uint32_t>& argmax, const Tensor& dP,
                      std::size_t in_rows, Tensor& dH) {
  const std::size_t cols = dP.cols();
  if (dH.numel() != in_rows * cols) {
    dH = Tensor::zeros({in_rows, cols});
  } else {
    dH.shape = {in_rows, cols};
    dH.fill(0.0);
  }
  for (std::size_t wdw = 0; wdw < dP.rows(); ++wdw)
    for (std::size_t j = 0; j < cols; ++j)
      dH.at(argmax[wdw * cols + j], j) += dP.at(wdw, j);
}

std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer) {
  const std::size_t out = layer.weight.rows();
  const std::size_t in = layer.weight.cols();
  if (x.size() != in) throw DataError("dense_forward: dimension mismatch");
  std::vector<double> y(out);
  for (std::size_t r = 0; r < out; ++r) {
    const double* wrow = layer.weight.row_ptr(r);
    double acc = layer.bias[r];
    for (std::size_t c = 0; c < in; ++c) acc += wrow[c] * x[c];
    y[r] = layer.relu && acc < 0.0 ? 0.0 : acc;
  }
  return y;
}

void dense_backward(const std::vector<double>& x, const DenseLayer& layer,
                    const std::vector<double>& y, const std::vector<double>& dy,
                    DenseLayer& grad, std::vector<double>* dx) {
  const std::size_t out = layer.weight.rows();
  const std::size_t in = layer.weight.cols();
  if (dx && dx->size() != in) dx->assign(in, 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    double g = dy[r];
    if (layer.relu && y[r] <= 0.0) g = 0.0;
    if (g == 0.0) continue;
    grad.bias[r] += g;
    double* gw = grad.weight.row_ptr(r);
    const double* wrow = layer.weight.row_ptr(r);
    for (std::size_t c = 0; c < in; ++c) gw[c] += g * x[c];
    if (dx)
      for (std::size_t c = 0; c < in; ++c) (*dx)[c] += g * wrow[c];
  }
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::vector<double> dropout_mask(std::size_t size, double rate, std::uint64_t& rng_state) {
  if (rate < 0.0 || rate >= 1.0) throw DataError("dropout rate must be in [0, 1)");
  std::vector<double> mask(size, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < size; ++i) {
    rng_state = splitmix64(rng_state);
    const double u = static_cast<double>(rng_state >> 11) * 0x1.0p-53;
    mask[i] = u < rate ? 0.0 : keep_scale;
  }
  return mask;
}

AdadeltaState AdadeltaState::like(const Tensor& param, double rho, double eps) {
  AdadeltaState s;
  s.rho = rho;
  s.eps = eps;
  s.grad_sq = param;
  s.grad_sq.fill(0.0);
  s.update_sq = s.grad_sq;
  return s;
}

void adadelta_step_span(double* x, const double* g, double* grad_sq, double* update_sq,
                        std::size_t n, double rho, double eps, double lr_scale) {
  for (std::size_t i = 0; i < n; ++i) {
    grad_sq[i] = rho * grad_sq[i] + (1.0 - rho) * g[i] * g[i];
    const double dx = -std::sqrt(update_sq[i] + eps) / std::sqrt(grad_sq[i] + eps) * g[i];
    update_sq[i] = rho * update_sq[i] + (1.0 - rho) * dx * dx;
    x[i] += lr_scale * dx;
  }
}

void adadelta_step(Tensor& param, const Tensor& grad, AdadeltaState& state, double lr_scale) {
  if (param.numel() != grad.numel() || param.numel() != state.grad_sq.numel())
    throw DataError("adadelta_step: shape mismatch");
  adadelta_step_span(param.data.data(), grad.data.data(), state.grad_sq.data.data(),
                     state.update_sq.data.data(), param.numel(), state.rho, state.eps, lr_scale);
}

void adadelta_step_row(Tensor& param, std::size_t row, const double* grad_row,
                       AdadeltaState& state, double lr_scale) {
  const std::size_t cols = param.cols();
  adadelta_step_span(param.row_ptr(row), grad_row, state.grad_sq.row_ptr(row),
                     state.update_sq.row_ptr(row), cols, state.rho, state.eps, lr_scale);
}

}  // namespace semitext
