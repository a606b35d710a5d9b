#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semitext/nn.hpp"

namespace semitext {

enum class ModelMode { supervised, semi };

struct FilterSpec {
  std::size_t width = 2;
  std::size_t count = 100;
  std::size_t pool = 2;
};

struct ModelConfig {
  std::size_t max_len = 30;
  std::vector<FilterSpec> filters{{2, 100, 2}, {3, 150, 3}, {4, 200, 4}};
  std::size_t shared_dim = 100;         // first hidden layer on the pooled vector
  std::size_t class_dim = 100;          // supervised feature
  std::size_t context_dim = 100;        // context feature scored against node weights
  std::size_t context_class_dim = 100;  // context-derived classification feature
  std::size_t classes = 2;
  double lambda = 1.0;
  double dropout = 0.02;
  ModelMode mode = ModelMode::semi;

  std::size_t pooled_dim() const;
  // Softmax input: class feature alone in supervised mode, concatenated with
  // the context-derived feature in semi mode.
  std::size_t logit_input_dim() const {
    return mode == ModelMode::semi ? class_dim + context_class_dim : class_dim;
  }
  void validate() const;
};

// All trainable weights. The per-node context weights exist only in semi
// mode (one row per training node) and are never read at inference.
struct ModelParams {
  std::vector<FilterBank> banks;
  DenseLayer fc_shared;
  DenseLayer fc_class;
  DenseLayer fc_context;
  DenseLayer fc_context_class;
  Tensor class_weights;  // classes x logit_input_dim, no bias
  Tensor node_weights;   // n x context_dim
};

ModelParams init_params(const ModelConfig& cfg, std::size_t n_nodes, std::size_t embed_dim,
                        std::uint64_t seed);

// Stable (name, tensor) enumeration used by the checkpoint format and the
// optimizer; order is part of the checkpoint contract.
template <typename Params, typename Fn>
void visit_params(Params& p, Fn&& fn) {
  for (std::size_t b = 0; b < p.banks.size(); ++b) {
    const std::string base = "conv" + std::to_string(b);
    fn(base + ".weight", p.banks[b].weight);
    fn(base + ".bias", p.banks[b].bias);
  }
  fn("fc_shared.weight", p.fc_shared.weight);
  fn("fc_shared.bias", p.fc_shared.bias);
  fn("fc_class.weight", p.fc_class.weight);
  fn("fc_class.bias", p.fc_class.bias);
  if (!p.fc_context.weight.empty()) {
    fn("fc_context.weight", p.fc_context.weight);
    fn("fc_context.bias", p.fc_context.bias);
    fn("fc_context_class.weight", p.fc_context_class.weight);
    fn("fc_context_class.bias", p.fc_context_class.bias);
  }
  fn("class_weights", p.class_weights);
  if (!p.node_weights.empty()) fn("node_weights", p.node_weights);
}

// Gradient holder mirroring ModelParams. Node-weight and embedding gradients
// are sparse (row, values) lists because each context sample touches exactly
// one node row.
struct ModelGrads {
  std::vector<FilterBank> banks;
  DenseLayer fc_shared;
  DenseLayer fc_class;
  DenseLayer fc_context;
  DenseLayer fc_context_class;
  Tensor class_weights;
  std::vector<std::pair<std::uint32_t, std::vector<double>>> node_rows;
  std::vector<std::pair<int, std::vector<double>>> embed_rows;

  void zero();
  void add(const ModelGrads& other);
};

ModelGrads make_grads(const ModelConfig& cfg, const ModelParams& params);

// Everything the backward pass needs. *_in vectors carry the dropout-masked
// values actually consumed downstream; masks are empty in eval mode.
struct ForwardTrace {
  Tensor X;
  std::vector<Tensor> conv_out;
  std::vector<std::vector<std::uint32_t>> pool_arg;
  std::vector<double> pooled_raw, pooled_mask, pooled_in;
  std::vector<double> shared_raw, shared_mask, shared_in;
  std::vector<double> class_feat;
  std::vector<double> ctx_raw, ctx_mask, ctx_in;
  std::vector<double> ctx_class_feat;
  std::vector<double> logits, probs;
};

// dropout_state == nullptr means eval mode (no dropout). with_class_head can
// be false for context-pass forwards, which stop after the context feature.
ForwardTrace forward(const std::vector<int>& ids, const EmbeddingTable& table,
                     const ModelParams& params, const ModelConfig& cfg,
                     std::uint64_t* dropout_state, bool with_class_head = true);

double classification_loss(const ForwardTrace& trace, int label);

// Context loss for one (i, j, gamma) sample given the forward trace of node
// i: softplus(-gamma * <w_j, z3(i)>), the minimization form of the
// negative-sampling objective.
double context_loss(const ForwardTrace& trace, const ModelParams& params, std::uint32_t j,
                    int gamma);

double combined_loss(double class_loss, double context_loss_value, double lambda);

// Accumulates gradients of weight * classification_loss into grads.
// want_embed_grad routes gradients to the embedding rows (fine-tuning).
void backward_classification(const ForwardTrace& trace, int label, double weight,
                             const ModelParams& params, const ModelConfig& cfg, ModelGrads& grads,
                             const std::vector<int>* ids_for_embed = nullptr);

// Accumulates gradients of weight * context_loss into grads (including the
// sparse node row j).
void backward_context(const ForwardTrace& trace, std::uint32_t j, int gamma, double weight,
                      const ModelParams& params, const ModelConfig& cfg, ModelGrads& grads,
                      const std::vector<int>* ids_for_embed = nullptr);

struct Prediction {
  int label = 0;
  std::vector<double> probs;
};

// Inductive inference: pure function of (ids, params, config, table); eval
// mode, ties go to the lowest class id.
Prediction predict(const std::vector<int>& ids, const ModelParams& params,
                   const ModelConfig& cfg, const EmbeddingTable& table);

}  // namespace semitext
