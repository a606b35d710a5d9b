#pragma once

#include <cstdint>
#include <vector>

#include "semitext/embedding.hpp"
#include "semitext/tensor.hpp"

namespace semitext {

// Convolution filters of one width: weight is (count x width*dim), one bias
// per filter. Doubles as the gradient holder of the same shapes.
struct FilterBank {
  std::size_t width = 0;
  Tensor weight;
  Tensor bias;
  std::size_t count() const { return bias.numel(); }
};

struct DenseLayer {
  Tensor weight;  // out x in
  Tensor bias;    // out
  bool relu = true;
};

// --- forward ops ---

// Rows of E selected by id; PAD rows stay zero.
Tensor embedding_lookup(const std::vector<int>& ids, const EmbeddingTable& table);

// Valid 1-D convolution with stride 1 followed by ReLU.
// X is (len x dim); output is ((len - width + 1) x count).
Tensor conv1d_forward(const Tensor& X, const FilterBank& bank);

// Non-overlapping windowed max over each column; a short final window still
// emits its max. Output is (ceil(rows/p) x cols); argmax stores the winning
// row per output cell for the backward pass.
Tensor maxpool_forward(const Tensor& H, std::size_t p, std::vector<std::uint32_t>& argmax);

std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer);

std::vector<double> softmax(const std::vector<double>& logits);

double sigmoid(double x);

// log(1 + e^x) without overflow; -log(sigmoid(t)) == softplus(-t).
double softplus(double x);

// Inverted dropout: factor 0 with probability rate, else 1/(1-rate). The
// caller multiplies activations by the factors; eval mode skips dropout
// entirely. rng_state advances via splitmix64, so a mask depends only on the
// derived seed, never on thread scheduling.
std::vector<double> dropout_mask(std::size_t size, double rate, std::uint64_t& rng_state);

// --- backward ops (accumulate into the given gradient holders) ---

void conv1d_backward(const Tensor& X, const FilterBank& bank, const Tensor& H, const Tensor& dH,
                     FilterBank& grad, Tensor* dX);

void maxpool_backward(const std::vector<std::uint32_t>& argmax, const Tensor& dP,
                      std::size_t in_rows, Tensor& dH);

void dense_backward(const std::vector<double>& x, const DenseLayer& layer,
                    const std::vector<double>& y, const std::vector<double>& dy,
                    DenseLayer& grad, std::vector<double>* dx);

// --- optimizer ---

// Accumulator pair for one parameter tensor. The update rule is
//   Eg2   <- rho Eg2 + (1-rho) g^2
//   dx    =  -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
//   Edx2  <- rho Edx2 + (1-rho) dx^2
//   x     <- x + lr_scale * dx
// lr_scale is the per-loss step scale (0.1 classification, 0.001 context).
struct AdadeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  Tensor grad_sq;    // E[g^2]
  Tensor update_sq;  // E[dx^2]

  static AdadeltaState like(const Tensor& param, double rho = 0.95, double eps = 1e-6);
};

void adadelta_step(Tensor& param, const Tensor& grad, AdadeltaState& state, double lr_scale);

// Sparse variant: applies the rule to a single row of a (rows x cols) param.
void adadelta_step_row(Tensor& param, std::size_t row, const double* grad_row,
                       AdadeltaState& state, double lr_scale);

// Raw-span variant for parameters not held in a Tensor (embedding rows).
void adadelta_step_span(double* x, const double* g, double* grad_sq, double* update_sq,
                        std::size_t n, double rho, double eps, double lr_scale);

}  // namespace semitext
