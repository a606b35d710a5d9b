#include "semitext/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>

#include "semitext/common.hpp"
#include "semitext/parallel.hpp"

namespace semitext {

namespace {

constexpr std::uint64_t kTagBudget = 0x627564ULL;
constexpr std::uint64_t kTagShuffle = 0x736866ULL;
constexpr std::uint64_t kTagDropout = 0x64726fULL;
constexpr std::uint64_t kTagSampler = 0x636e7478ULL;

double checked_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " is not finite");
  return v;
}

}  // namespace

std::vector<std::uint32_t> stratified_budget(const std::vector<ProcessedTweet>& train,
                                             std::size_t labeled_count, std::size_t budget,
                                             std::size_t classes, std::uint64_t seed) {
  std::vector<std::vector<std::uint32_t>> by_class(classes);
  for (std::size_t i = 0; i < labeled_count; ++i) {
    if (!train[i].label) throw DataError("unlabeled doc inside the labeled prefix");
    by_class[static_cast<std::size_t>(*train[i].label)].push_back(
        static_cast<std::uint32_t>(i));
  }

  if (budget == 0 || budget >= labeled_count) {
    if (budget > labeled_count) throw DataError("label budget exceeds the labeled pool");
    std::vector<std::uint32_t> all(labeled_count);
    std::iota(all.begin(), all.end(), 0u);
    return all;
  }

  // Proportional allocation, largest remainders first (ties to lower class).
  std::vector<std::size_t> quota(classes, 0);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = static_cast<double>(budget) * static_cast<double>(by_class[c].size()) /
                         static_cast<double>(labeled_count);
    quota[c] = static_cast<std::size_t>(exact);
    assigned += quota[c];
    rema.emplace_back(exact - static_cast<double>(quota[c]), c);
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t r = 0; assigned < budget; r = (r + 1) % classes) {
    const std::size_t c = rema[r].second;
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  std::vector<std::uint32_t> picked;
  picked.reserve(budget);
  for (std::size_t c = 0; c < classes; ++c) {
    auto list = by_class[c];
    std::mt19937_64 rng(mix_seed(seed, kTagBudget, c));
    std::shuffle(list.begin(), list.end(), rng);
    picked.insert(picked.end(), list.begin(), list.begin() + quota[c]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

double accumulate_class_gradients(const std::vector<ClassExample>& batch,
                                  const ModelParams& params, const ModelConfig& cfg,
                                  const EmbeddingTable& table, bool use_dropout, bool want_embed,
                                  ModelGrads& grads, int threads) {
  const std::size_t B = batch.size();
  const double weight = 1.0 / static_cast<double>(B);
  const int T = resolve_threads(threads);

  grads.zero();
  std::vector<ModelGrads> extra;
  for (int t = 1; t < T; ++t) extra.push_back(make_grads(cfg, params));
  std::vector<double> losses(B, 0.0);

#pragma omp parallel for schedule(static) num_threads(T)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
    const int tid = current_thread();
    ModelGrads& g = tid == 0 ? grads : extra[tid - 1];
    std::uint64_t dstate = batch[b].dropout_seed;
    ForwardTrace trace =
        forward(*batch[b].ids, table, params, cfg, use_dropout ? &dstate : nullptr, true);
    losses[b] = classification_loss(trace, batch[b].label);
    backward_classification(trace, batch[b].label, weight, params, cfg, g,
                            want_embed ? batch[b].ids : nullptr);
  }

  for (auto& g : extra) grads.add(g);
  double total = 0.0;
  for (double l : losses) total += l;
  return total * weight;
}

double accumulate_context_gradients(const std::vector<ContextExample>& batch,
                                    const ModelParams& params, const ModelConfig& cfg,
                                    const EmbeddingTable& table, bool use_dropout,
                                    bool want_embed, ModelGrads& grads, int threads) {
  const std::size_t B = batch.size();
  const double weight = cfg.lambda / static_cast<double>(B);
  const int T = resolve_threads(threads);

  grads.zero();
  std::vector<ModelGrads> extra;
  for (int t = 1; t < T; ++t) extra.push_back(make_grads(cfg, params));
  std::vector<double> losses(B, 0.0);

#pragma omp parallel for schedule(static) num_threads(T)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
    const int tid = current_thread();
    ModelGrads& g = tid == 0 ? grads : extra[tid - 1];
    std::uint64_t dstate = batch[b].dropout_seed;
    ForwardTrace trace =
        forward(*batch[b].ids, table, params, cfg, use_dropout ? &dstate : nullptr, false);
    losses[b] = context_loss(trace, params, batch[b].context, batch[b].sign);
    backward_context(trace, batch[b].context, batch[b].sign, weight, params, cfg, g,
                     want_embed ? batch[b].ids : nullptr);
  }

  for (auto& g : extra) grads.add(g);
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(B);
}

namespace {

// Per-pass Adadelta accumulators. The classification pass and the context
// pass run as separate optimizers, so shared tensors (filters, fc_shared,
// fc_context) carry one accumulator pair per loss.
struct OptSet {
  std::vector<AdadeltaState> bank_w, bank_b;
  AdadeltaState shared_w, shared_b;
  AdadeltaState class_w, class_b;
  AdadeltaState ctx_w, ctx_b;
  AdadeltaState ctxcls_w, ctxcls_b;
  AdadeltaState logits;
  AdadeltaState nodes;
  AdadeltaState embed;
};

OptSet make_class_opt(const ModelParams& p, const ModelConfig& cfg, const TrainConfig& tc,
                      const EmbeddingTable& table) {
  OptSet o;
  const double rho = tc.adadelta_rho, eps = tc.adadelta_eps;
  for (const auto& b : p.banks) {
    o.bank_w.push_back(AdadeltaState::like(b.weight, rho, eps));
    o.bank_b.push_back(AdadeltaState::like(b.bias, rho, eps));
  }
  o.shared_w = AdadeltaState::like(p.fc_shared.weight, rho, eps);
  o.shared_b = AdadeltaState::like(p.fc_shared.bias, rho, eps);
  o.class_w = AdadeltaState::like(p.fc_class.weight, rho, eps);
  o.class_b = AdadeltaState::like(p.fc_class.bias, rho, eps);
  if (cfg.mode == ModelMode::semi) {
    o.ctx_w = AdadeltaState::like(p.fc_context.weight, rho, eps);
    o.ctx_b = AdadeltaState::like(p.fc_context.bias, rho, eps);
    o.ctxcls_w = AdadeltaState::like(p.fc_context_class.weight, rho, eps);
    o.ctxcls_b = AdadeltaState::like(p.fc_context_class.bias, rho, eps);
  }
  o.logits = AdadeltaState::like(p.class_weights, rho, eps);
  if (tc.finetune_embeddings) {
    Tensor shape = Tensor::zeros({table.rows(), static_cast<std::size_t>(table.dim)});
    o.embed = AdadeltaState::like(shape, rho, eps);
  }
  return o;
}

OptSet make_context_opt(const ModelParams& p, const ModelConfig& cfg, const TrainConfig& tc,
                        const EmbeddingTable& table) {
  (void)cfg;
  OptSet o;
  const double rho = tc.adadelta_rho, eps = tc.adadelta_eps;
  for (const auto& b : p.banks) {
    o.bank_w.push_back(AdadeltaState::like(b.weight, rho, eps));
    o.bank_b.push_back(AdadeltaState::like(b.bias, rho, eps));
  }
  o.shared_w = AdadeltaState::like(p.fc_shared.weight, rho, eps);
  o.shared_b = AdadeltaState::like(p.fc_shared.bias, rho, eps);
  o.ctx_w = AdadeltaState::like(p.fc_context.weight, rho, eps);
  o.ctx_b = AdadeltaState::like(p.fc_context.bias, rho, eps);
  o.nodes = AdadeltaState::like(p.node_weights, rho, eps);
  if (tc.finetune_embeddings) {
    Tensor shape = Tensor::zeros({table.rows(), static_cast<std::size_t>(table.dim)});
    o.embed = AdadeltaState::like(shape, rho, eps);
  }
  return o;
}

// Fold duplicate sparse rows; ordering is deterministic because the input
// order is (thread, insertion) under a static schedule.
template <typename Key>
void merge_sparse_rows(std::vector<std::pair<Key, std::vector<double>>>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i + 1;
    while (j < rows.size() && rows[j].first == rows[i].first) {
      for (std::size_t c = 0; c < rows[i].second.size(); ++c)
        rows[i].second[c] += rows[j].second[c];
      ++j;
    }
    if (out != i) rows[out] = std::move(rows[i]);
    ++out;
    i = j;
  }
  rows.resize(out);
}

void step_embedding(EmbeddingTable& table, std::vector<std::pair<int, std::vector<double>>>& rows,
                    OptSet& opt, double lr) {
  merge_sparse_rows(rows);
  const auto dim = static_cast<std::size_t>(table.dim);
  for (auto& [row, g] : rows) {
    if (row == EmbeddingTable::kPad) continue;
    adadelta_step_span(table.row(row), g.data(),
                       opt.embed.grad_sq.row_ptr(static_cast<std::size_t>(row)),
                       opt.embed.update_sq.row_ptr(static_cast<std::size_t>(row)), dim,
                       opt.embed.rho, opt.embed.eps, lr);
  }
}

void apply_class_step(ModelParams& p, ModelGrads& g, OptSet& opt, const ModelConfig& cfg,
                      double lr, EmbeddingTable* tuned_table) {
  for (std::size_t b = 0; b < p.banks.size(); ++b) {
    adadelta_step(p.banks[b].weight, g.banks[b].weight, opt.bank_w[b], lr);
    adadelta_step(p.banks[b].bias, g.banks[b].bias, opt.bank_b[b], lr);
  }
  adadelta_step(p.fc_shared.weight, g.fc_shared.weight, opt.shared_w, lr);
  adadelta_step(p.fc_shared.bias, g.fc_shared.bias, opt.shared_b, lr);
  adadelta_step(p.fc_class.weight, g.fc_class.weight, opt.class_w, lr);
  adadelta_step(p.fc_class.bias, g.fc_class.bias, opt.class_b, lr);
  if (cfg.mode == ModelMode::semi) {
    adadelta_step(p.fc_context.weight, g.fc_context.weight, opt.ctx_w, lr);
    adadelta_step(p.fc_context.bias, g.fc_context.bias, opt.ctx_b, lr);
    adadelta_step(p.fc_context_class.weight, g.fc_context_class.weight, opt.ctxcls_w, lr);
    adadelta_step(p.fc_context_class.bias, g.fc_context_class.bias, opt.ctxcls_b, lr);
  }
  adadelta_step(p.class_weights, g.class_weights, opt.logits, lr);
  if (tuned_table) step_embedding(*tuned_table, g.embed_rows, opt, lr);
}

void apply_context_step(ModelParams& p, ModelGrads& g, OptSet& opt, double lr,
                        EmbeddingTable* tuned_table) {
  for (std::size_t b = 0; b < p.banks.size(); ++b) {
    adadelta_step(p.banks[b].weight, g.banks[b].weight, opt.bank_w[b], lr);
    adadelta_step(p.banks[b].bias, g.banks[b].bias, opt.bank_b[b], lr);
  }
  adadelta_step(p.fc_shared.weight, g.fc_shared.weight, opt.shared_w, lr);
  adadelta_step(p.fc_shared.bias, g.fc_shared.bias, opt.shared_b, lr);
  adadelta_step(p.fc_context.weight, g.fc_context.weight, opt.ctx_w, lr);
  adadelta_step(p.fc_context.bias, g.fc_context.bias, opt.ctx_b, lr);
  merge_sparse_rows(g.node_rows);
  for (auto& [row, grad] : g.node_rows)
    adadelta_step_row(p.node_weights, row, grad.data(), opt.nodes, lr);
  if (tuned_table) step_embedding(*tuned_table, g.embed_rows, opt, lr);
}

struct RunState {
  std::vector<std::vector<int>> train_tokens;  // per train node
  std::vector<std::uint32_t> visible;          // budget-selected labeled nodes
};

RunState prepare_run(const DataSplit& split, const EmbeddingTable& table, const ModelConfig& cfg,
                     const TrainConfig& tc) {
  if (split.train.empty()) throw DataError("training split is empty");
  if (split.dev.empty()) throw DataError("dev split is empty (needed for early stopping)");
  if (split.labeled_count == 0) throw DataError("no labeled training documents");

  RunState rs;
  rs.visible =
      stratified_budget(split.train, split.labeled_count, tc.budget, cfg.classes, tc.seed);

  std::vector<std::size_t> per_class(cfg.classes, 0);
  for (auto i : rs.visible) per_class[static_cast<std::size_t>(*split.train[i].label)]++;
  for (std::size_t c = 0; c < cfg.classes; ++c)
    if (per_class[c] == 0)
      throw DataError("class " + std::to_string(c) + " has no labeled training example");

  rs.train_tokens.reserve(split.train.size());
  for (const auto& doc : split.train)
    rs.train_tokens.push_back(lookup_ids(doc, table, cfg.max_len));
  return rs;
}

TrainResult run_training(const DataSplit& split, const SimilarityGraph* graph,
                         const EmbeddingTable& input_table, ModelConfig cfg,
                         const TrainConfig& tc, const SamplerConfig* sampler_cfg,
                         const std::vector<std::string>* graph_ids) {
  cfg.validate();
  const bool semi = cfg.mode == ModelMode::semi;
  if (semi) {
    if (!graph || !sampler_cfg) throw DataError("semi-supervised training needs a graph");
    if (graph->n != split.train.size())
      throw DataError("graph/split misalignment: " + std::to_string(graph->n) + " nodes vs " +
                      std::to_string(split.train.size()) + " training docs");
    if (graph_ids) {
      if (graph_ids->size() != split.train.size())
        throw DataError("graph id sidecar does not match the training docs");
      for (std::size_t i = 0; i < split.train.size(); ++i)
        if ((*graph_ids)[i] != split.train[i].id)
          throw DataError("graph/split misalignment at node " + std::to_string(i) + ": '" +
                          (*graph_ids)[i] + "' vs '" + split.train[i].id + "'");
    }
  }

  // Fine-tuning mutates a private copy of the table; E stays frozen otherwise.
  EmbeddingTable tuned;
  const EmbeddingTable* table = &input_table;
  if (tc.finetune_embeddings) {
    tuned = input_table;
    table = &tuned;
  }

  RunState rs = prepare_run(split, *table, cfg, tc);

  ModelParams params = init_params(cfg, semi ? graph->n : 0, static_cast<std::size_t>(table->dim),
                                   tc.seed);
  OptSet class_opt = make_class_opt(params, cfg, tc, *table);
  OptSet ctx_opt;
  std::unique_ptr<ContextSampler> sampler;
  std::size_t context_per_epoch = 0;
  if (semi) {
    ctx_opt = make_context_opt(params, cfg, tc, *table);
    std::vector<std::optional<int>> vis_labels(split.train.size());
    for (auto i : rs.visible) vis_labels[i] = split.train[i].label;
    SamplerConfig sc = *sampler_cfg;
    sc.seed = mix_seed(tc.seed, kTagSampler, sc.seed);
    sampler = std::make_unique<ContextSampler>(*graph, std::move(vis_labels), sc);
    context_per_epoch = tc.context_per_epoch
                            ? tc.context_per_epoch
                            : static_cast<std::size_t>(tc.context_multiplier *
                                                       static_cast<double>(rs.visible.size()));
  }

  ModelGrads grads = make_grads(cfg, params);
  const bool use_dropout = cfg.dropout > 0.0;

  TrainResult result;
  result.best_dev_f1 = -1.0;
  std::size_t since_best = 0;
  EmbeddingTable best_tuned;

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    double ctx_loss_sum = 0.0;
    std::size_t ctx_batches = 0;

    if (semi && context_per_epoch > 0) {
      auto samples = sampler->batch(context_per_epoch);
      std::size_t sample_idx = 0;
      for (std::size_t start = 0; start < samples.size(); start += tc.context_batch) {
        const std::size_t stop = std::min(start + tc.context_batch, samples.size());
        std::vector<ContextExample> batch;
        batch.reserve(stop - start);
        for (std::size_t s = start; s < stop; ++s, ++sample_idx)
          batch.push_back({&rs.train_tokens[samples[s].input], samples[s].context,
                           samples[s].sign,
                           mix_seed(tc.seed ^ kTagDropout, epoch * 2, sample_idx)});
        ctx_loss_sum += checked_finite(
            accumulate_context_gradients(batch, params, cfg, *table, use_dropout,
                                         tc.finetune_embeddings, grads, tc.threads),
            "context loss");
        apply_context_step(params, grads, ctx_opt, tc.lr_context,
                           tc.finetune_embeddings ? &tuned : nullptr);
        ++ctx_batches;
      }
    }

    auto order = rs.visible;
    std::mt19937_64 shuffle_rng(mix_seed(tc.seed, kTagShuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double class_loss_sum = 0.0;
    std::size_t class_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t stop = std::min(start + tc.batch_size, order.size());
      std::vector<ClassExample> batch;
      batch.reserve(stop - start);
      for (std::size_t s = start; s < stop; ++s)
        batch.push_back({&rs.train_tokens[order[s]], *split.train[order[s]].label,
                         mix_seed(tc.seed ^ kTagDropout, epoch * 2 + 1, order[s])});
      class_loss_sum += checked_finite(
          accumulate_class_gradients(batch, params, cfg, *table, use_dropout,
                                     tc.finetune_embeddings, grads, tc.threads),
          "classification loss");
      apply_class_step(params, grads, class_opt, cfg, tc.lr_class,
                       tc.finetune_embeddings ? &tuned : nullptr);
      ++class_batches;
    }

    MetricsReport dev = evaluate_model(params, cfg, *table, split.dev, tc.threads);

    EpochStats stats;
    stats.epoch = epoch;
    stats.class_loss = class_batches ? class_loss_sum / static_cast<double>(class_batches) : 0.0;
    stats.context_loss = ctx_batches ? ctx_loss_sum / static_cast<double>(ctx_batches) : 0.0;
    stats.dev_f1 = checked_finite(dev.weighted_f1, "dev F1");
    result.log.push_back(stats);
    result.epochs_run = epoch;

    if (stats.dev_f1 > result.best_dev_f1) {
      result.best_dev_f1 = stats.dev_f1;
      result.best_epoch = epoch;
      result.params = params;
      if (tc.finetune_embeddings) best_tuned = tuned;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= tc.patience) break;
  }

  if (result.best_epoch == 0) {
    result.params = params;  // max_epochs == 0 degenerate case
  }
  return result;
}

}  // namespace

TrainResult train_supervised(const DataSplit& split, const EmbeddingTable& table, ModelConfig cfg,
                             const TrainConfig& tc) {
  cfg.mode = ModelMode::supervised;
  return run_training(split, nullptr, table, cfg, tc, nullptr, nullptr);
}

TrainResult train_semisupervised(const DataSplit& split, const SimilarityGraph& graph,
                                 const EmbeddingTable& table, ModelConfig cfg,
                                 const TrainConfig& tc, const SamplerConfig& sampler_cfg,
                                 const std::vector<std::string>* graph_ids) {
  cfg.mode = ModelMode::semi;
  return run_training(split, &graph, table, cfg, tc, &sampler_cfg, graph_ids);
}

MetricsReport evaluate_model(const ModelParams& params, const ModelConfig& cfg,
                             const EmbeddingTable& table,
                             const std::vector<ProcessedTweet>& examples, int threads) {
  if (examples.empty()) throw DataError("evaluate: empty input");
  const int T = resolve_threads(threads);

  std::vector<int> truth(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].label) throw DataError("evaluate: unlabeled example");
    truth[i] = *examples[i].label;
  }

  std::vector<int> predicted(examples.size());
#pragma omp parallel for schedule(static) num_threads(T)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(examples.size()); ++i) {
    const auto ids = lookup_ids(examples[i], table, cfg.max_len);
    predicted[i] = predict(ids, params, cfg, table).label;
  }
  return compute_metrics(truth, predicted, cfg.classes);
}

std::vector<SweepRow> label_budget_sweep(const std::vector<std::size_t>& budgets,
                                         const DataSplit& split, const SimilarityGraph& graph,
                                         const EmbeddingTable& table, const ModelConfig& cfg,
                                         const TrainConfig& tc, const SamplerConfig& sampler_cfg,
                                         const std::vector<std::string>* graph_ids) {
  std::vector<SweepRow> rows;
  for (std::size_t budget : budgets) {
    if (budget > split.labeled_count) throw DataError("label budget exceeds the labeled pool");
    TrainConfig run_tc = tc;
    run_tc.budget = budget;
    const std::size_t effective = budget == 0 ? split.labeled_count : budget;

    for (ModelMode mode : {ModelMode::supervised, ModelMode::semi}) {
      ModelConfig run_cfg = cfg;
      run_cfg.mode = mode;
      TrainResult res = mode == ModelMode::supervised
                            ? train_supervised(split, table, run_cfg, run_tc)
                            : train_semisupervised(split, graph, table, run_cfg, run_tc,
                                                   sampler_cfg, graph_ids);
      MetricsReport test =
          evaluate_model(res.params, run_cfg, table, split.test, run_tc.threads);
      rows.push_back(
          {effective, mode, test.weighted_precision, test.weighted_recall, test.weighted_f1});
    }
  }
  return rows;
}

std::string format_training_log(const std::vector<EpochStats>& log) {
  std::string out;
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\t%.6f\n", e.epoch, e.class_loss,
                  e.context_loss, e.dev_f1);
    out += buf;
  }
  return out;
}

std::string format_sweep(const std::vector<SweepRow>& rows) {
  std::string out;
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu\t%s\t%.4f\t%.4f\t%.4f\n", r.budget,
                  r.mode == ModelMode::semi ? "semi" : "supervised", r.weighted_precision,
                  r.weighted_recall, r.weighted_f1);
    out += buf;
  }
  return out;
}

}  // namespace semitext
