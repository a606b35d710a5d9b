#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semitext/corpus.hpp"
#include "semitext/embedding.hpp"
#include "semitext/graph.hpp"
#include "semitext/metrics.hpp"
#include "semitext/model.hpp"
#include "semitext/sampler.hpp"

namespace semitext {

struct TrainConfig {
  std::size_t max_epochs = 200;
  std::size_t patience = 25;
  std::size_t batch_size = 32;
  std::size_t context_batch = 32;
  double context_multiplier = 10.0;  // context samples per epoch = multiplier * labeled examples
  std::size_t context_per_epoch = 0;  // absolute override; 0 defers to the multiplier
  double lr_class = 0.1;
  double lr_context = 0.001;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  std::size_t budget = 0;  // labeled examples to use; 0 = all
  std::uint64_t seed = 1;
  int threads = 0;
  bool finetune_embeddings = false;
};

struct EpochStats {
  std::size_t epoch = 0;
  double class_loss = 0.0;
  double context_loss = 0.0;
  double dev_f1 = 0.0;
};

struct TrainResult {
  ModelParams params;  // the best-dev-F1 checkpoint, not the last epoch
  std::vector<EpochStats> log;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::size_t epochs_run = 0;
};

// --- batch gradient kernels ---
// The per-example forward/backward loop is data-parallel: each thread
// accumulates into its own buffer and buffers are reduced in thread order,
// so results are reproducible for a fixed thread count. threads = 1 is the
// plain serial path the parallel one is tested against.

struct ClassExample {
  const std::vector<int>* ids;
  int label;
  std::uint64_t dropout_seed;
};

struct ContextExample {
  const std::vector<int>* ids;  // tokens of the input node i
  std::uint32_t context;        // node j
  int sign;                     // gamma
  std::uint64_t dropout_seed;
};

// Gradient of the mean classification loss over the batch; returns the mean
// loss. `grads` is zeroed first.
double accumulate_class_gradients(const std::vector<ClassExample>& batch,
                                  const ModelParams& params, const ModelConfig& cfg,
                                  const EmbeddingTable& table, bool use_dropout, bool want_embed,
                                  ModelGrads& grads, int threads);

// Gradient of lambda * mean context loss over the batch; returns the mean
// (unscaled) context loss.
double accumulate_context_gradients(const std::vector<ContextExample>& batch,
                                    const ModelParams& params, const ModelConfig& cfg,
                                    const EmbeddingTable& table, bool use_dropout,
                                    bool want_embed, ModelGrads& grads, int threads);

// --- training ---

TrainResult train_supervised(const DataSplit& split, const EmbeddingTable& table,
                             ModelConfig cfg, const TrainConfig& tc);

// Alternates one pass of context minibatches (Adadelta scale lr_context) and
// one pass of classification minibatches (scale lr_class) per epoch, with
// early stopping on dev weighted F1. graph_ids, when given, must match the
// train docs (labeled prefix then unlabeled) id for id.
TrainResult train_semisupervised(const DataSplit& split, const SimilarityGraph& graph,
                                 const EmbeddingTable& table, ModelConfig cfg,
                                 const TrainConfig& tc, const SamplerConfig& sampler_cfg,
                                 const std::vector<std::string>* graph_ids = nullptr);

// Eval-mode predictions over a labeled list; parallel and read-only.
MetricsReport evaluate_model(const ModelParams& params, const ModelConfig& cfg,
                             const EmbeddingTable& table,
                             const std::vector<ProcessedTweet>& examples, int threads = 0);

// Stratified, seeded subsample of the labeled training prefix. Exposed for
// tests; budget 0 or >= labeled_count selects everything.
std::vector<std::uint32_t> stratified_budget(const std::vector<ProcessedTweet>& train,
                                             std::size_t labeled_count, std::size_t budget,
                                             std::size_t classes, std::uint64_t seed);

struct SweepRow {
  std::size_t budget = 0;
  ModelMode mode = ModelMode::supervised;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

// Trains both modes at each label budget (seeded stratified subsampling) and
// evaluates on the fixed test set.
std::vector<SweepRow> label_budget_sweep(const std::vector<std::size_t>& budgets,
                                         const DataSplit& split, const SimilarityGraph& graph,
                                         const EmbeddingTable& table, const ModelConfig& cfg,
                                         const TrainConfig& tc, const SamplerConfig& sampler_cfg,
                                         const std::vector<std::string>* graph_ids = nullptr);

// One line per epoch: epoch<TAB>class_loss<TAB>context_loss<TAB>dev_weighted_f1
std::string format_training_log(const std::vector<EpochStats>& log);

std::string format_sweep(const std::vector<SweepRow>& rows);

}  // namespace semitext
