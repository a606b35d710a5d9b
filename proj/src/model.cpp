#include "semitext/model.hpp"

#include <algorithm>
#include <cmath>

#include "semitext/common.hpp"

namespace semitext {

std::size_t ModelConfig::pooled_dim() const {
  std::size_t total = 0;
  for (const auto& f : filters) {
    const std::size_t conv_len = max_len - f.width + 1;
    total += ((conv_len + f.pool - 1) / f.pool) * f.count;
  }
  return total;
}

void ModelConfig::validate() const {
  if (filters.empty()) throw DataError("model: need at least one filter bank");
  for (const auto& f : filters) {
    if (f.width < 1 || f.count < 1 || f.pool < 1)
      throw DataError("model: filter width/count/pool must be >= 1");
    if (max_len < f.width) throw DataError("model: max_len shorter than filter width");
  }
  if (shared_dim < 1 || class_dim < 1) throw DataError("model: hidden sizes must be >= 1");
  if (mode == ModelMode::semi && (context_dim < 1 || context_class_dim < 1))
    throw DataError("model: hidden sizes must be >= 1");
  if (classes < 2) throw DataError("model: need at least 2 classes");
  if (lambda < 0.0) throw DataError("model: lambda must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw DataError("model: dropout must be in [0, 1)");
}

namespace {

// Hand-rolled uniform so initialization is identical across platforms.
double next_uniform(std::uint64_t& s) {
  s = splitmix64(s);
  return static_cast<double>(s >> 11) * 0x1.0p-53;
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::uint64_t& s) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data) v = (2.0 * next_uniform(s) - 1.0) * limit;
}

std::vector<double> apply_mask(const std::vector<double>& x, const std::vector<double>& mask) {
  if (mask.empty()) return x;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  return out;
}

void mask_in_place(std::vector<double>& g, const std::vector<double>& mask) {
  if (mask.empty()) return;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::size_t n_nodes, std::size_t embed_dim,
                        std::uint64_t seed) {
  cfg.validate();
  std::uint64_t s = mix_seed(seed, 0x696e6974ULL);

  ModelParams p;
  for (const auto& f : cfg.filters) {
    FilterBank bank;
    bank.width = f.width;
    bank.weight = Tensor::zeros({f.count, f.width * embed_dim});
    bank.bias = Tensor::zeros({f.count});
    glorot_fill(bank.weight, f.width * embed_dim, f.count, s);
    p.banks.push_back(std::move(bank));
  }

  auto make_dense = [&](std::size_t out, std::size_t in, bool relu) {
    DenseLayer layer;
    layer.weight = Tensor::zeros({out, in});
    layer.bias = Tensor::zeros({out});
    layer.relu = relu;
    glorot_fill(layer.weight, in, out, s);
    return layer;
  };

  p.fc_shared = make_dense(cfg.shared_dim, cfg.pooled_dim(), true);
  p.fc_class = make_dense(cfg.class_dim, cfg.shared_dim, true);
  if (cfg.mode == ModelMode::semi) {
    p.fc_context = make_dense(cfg.context_dim, cfg.shared_dim, true);
    p.fc_context_class = make_dense(cfg.context_class_dim, cfg.context_dim, true);
  }
  p.class_weights = Tensor::zeros({cfg.classes, cfg.logit_input_dim()});
  glorot_fill(p.class_weights, cfg.logit_input_dim(), cfg.classes, s);

  if (cfg.mode == ModelMode::semi) {
    p.node_weights = Tensor::zeros({n_nodes, cfg.context_dim});
    for (double& v : p.node_weights.data) v = (2.0 * next_uniform(s) - 1.0) * 0.1;
  }
  return p;
}

void ModelGrads::zero() {
  for (auto& b : banks) {
    b.weight.fill(0.0);
    b.bias.fill(0.0);
  }
  auto zero_dense = [](DenseLayer& l) {
    l.weight.fill(0.0);
    l.bias.fill(0.0);
  };
  zero_dense(fc_shared);
  zero_dense(fc_class);
  zero_dense(fc_context);
  zero_dense(fc_context_class);
  class_weights.fill(0.0);
  node_rows.clear();
  embed_rows.clear();
}

void ModelGrads::add(const ModelGrads& other) {
  for (std::size_t b = 0; b < banks.size(); ++b) {
    banks[b].weight.add(other.banks[b].weight);
    banks[b].bias.add(other.banks[b].bias);
  }
  auto add_dense = [](DenseLayer& l, const DenseLayer& o) {
    l.weight.add(o.weight);
    l.bias.add(o.bias);
  };
  add_dense(fc_shared, other.fc_shared);
  add_dense(fc_class, other.fc_class);
  add_dense(fc_context, other.fc_context);
  add_dense(fc_context_class, other.fc_context_class);
  class_weights.add(other.class_weights);
  node_rows.insert(node_rows.end(), other.node_rows.begin(), other.node_rows.end());
  embed_rows.insert(embed_rows.end(), other.embed_rows.begin(), other.embed_rows.end());
}

ModelGrads make_grads(const ModelConfig& cfg, const ModelParams& params) {
  (void)cfg;
  ModelGrads g;
  for (const auto& b : params.banks) {
    FilterBank gb;
    gb.width = b.width;
    gb.weight = b.weight;
    gb.weight.fill(0.0);
    gb.bias = b.bias;
    gb.bias.fill(0.0);
    g.banks.push_back(std::move(gb));
  }
  auto like_dense = [](const DenseLayer& l) {
    DenseLayer d;
    d.weight = l.weight;
    d.weight.fill(0.0);
    d.bias = l.bias;
    d.bias.fill(0.0);
    d.relu = l.relu;
    return d;
  };
  g.fc_shared = like_dense(params.fc_shared);
  g.fc_class = like_dense(params.fc_class);
  g.fc_context = like_dense(params.fc_context);
  g.fc_context_class = like_dense(params.fc_context_class);
  g.class_weights = params.class_weights;
  g.class_weights.fill(0.0);
  return g;
}

ForwardTrace forward(const std::vector<int>& ids, const EmbeddingTable& table,
                     const ModelParams& params, const ModelConfig& cfg,
                     std::uint64_t* dropout_state, bool with_class_head) {
  if (ids.size() != cfg.max_len) throw DataError("forward: ids must be padded to max_len");
  const bool train = dropout_state != nullptr && cfg.dropout > 0.0;

  ForwardTrace t;
  t.X = embedding_lookup(ids, table);

  t.pooled_raw.reserve(cfg.pooled_dim());
  t.conv_out.reserve(params.banks.size());
  t.pool_arg.resize(params.banks.size());
  for (std::size_t b = 0; b < params.banks.size(); ++b) {
    Tensor H = conv1d_forward(t.X, params.banks[b]);
    Tensor P = maxpool_forward(H, cfg.filters[b].pool, t.pool_arg[b]);
    t.pooled_raw.insert(t.pooled_raw.end(), P.data.begin(), P.data.end());
    t.conv_out.push_back(std::move(H));
  }

  if (train) t.pooled_mask = dropout_mask(t.pooled_raw.size(), cfg.dropout, *dropout_state);
  t.pooled_in = apply_mask(t.pooled_raw, t.pooled_mask);

  t.shared_raw = dense_forward(t.pooled_in, params.fc_shared);
  if (train) t.shared_mask = dropout_mask(t.shared_raw.size(), cfg.dropout, *dropout_state);
  t.shared_in = apply_mask(t.shared_raw, t.shared_mask);

  if (cfg.mode == ModelMode::semi) {
    t.ctx_raw = dense_forward(t.shared_in, params.fc_context);
    if (train) t.ctx_mask = dropout_mask(t.ctx_raw.size(), cfg.dropout, *dropout_state);
    t.ctx_in = apply_mask(t.ctx_raw, t.ctx_mask);
  }

  if (with_class_head) {
    t.class_feat = dense_forward(t.shared_in, params.fc_class);
    std::vector<double> cat = t.class_feat;
    if (cfg.mode == ModelMode::semi) {
      t.ctx_class_feat = dense_forward(t.ctx_in, params.fc_context_class);
      cat.insert(cat.end(), t.ctx_class_feat.begin(), t.ctx_class_feat.end());
    }
    t.logits.assign(cfg.classes, 0.0);
    for (std::size_t k = 0; k < cfg.classes; ++k) {
      const double* w = params.class_weights.row_ptr(k);
      double acc = 0.0;
      for (std::size_t c = 0; c < cat.size(); ++c) acc += w[c] * cat[c];
      t.logits[k] = acc;
    }
    t.probs = softmax(t.logits);
  }
  return t;
}

double classification_loss(const ForwardTrace& trace, int label) {
  const double p = trace.probs[static_cast<std::size_t>(label)];
  return -std::log(std::max(p, 1e-12));
}

double context_loss(const ForwardTrace& trace, const ModelParams& params, std::uint32_t j,
                    int gamma) {
  const double* wj = params.node_weights.row_ptr(j);
  double dot = 0.0;
  for (std::size_t c = 0; c < trace.ctx_in.size(); ++c) dot += wj[c] * trace.ctx_in[c];
  return softplus(-static_cast<double>(gamma) * dot);
}

double combined_loss(double class_loss, double context_loss_value, double lambda) {
  return class_loss + lambda * context_loss_value;
}

namespace {

// Shared tail of both backward passes: from d(shared_in) down to the filters
// and, when requested, into the embedding rows.
void backward_from_shared(const ForwardTrace& t, std::vector<double>& d_shared_in,
                          const ModelParams& params, const ModelConfig& cfg, ModelGrads& grads,
                          const std::vector<int>* ids_for_embed) {
  mask_in_place(d_shared_in, t.shared_mask);
  std::vector<double> d_pooled_in(t.pooled_in.size(), 0.0);
  dense_backward(t.pooled_in, params.fc_shared, t.shared_raw, d_shared_in, grads.fc_shared,
                 &d_pooled_in);
  mask_in_place(d_pooled_in, t.pooled_mask);

  const bool want_embed = ids_for_embed != nullptr;
  Tensor dX;
  if (want_embed) dX = Tensor::zeros({t.X.rows(), t.X.cols()});

  std::size_t offset = 0;
  for (std::size_t b = 0; b < params.banks.size(); ++b) {
    const Tensor& H = t.conv_out[b];
    const std::size_t pool = cfg.filters[b].pool;
    const std::size_t out_rows = (H.rows() + pool - 1) / pool;
    const std::size_t chunk = out_rows * H.cols();

    Tensor dP = Tensor::zeros({out_rows, H.cols()});
    std::copy(d_pooled_in.begin() + offset, d_pooled_in.begin() + offset + chunk,
              dP.data.begin());
    offset += chunk;

    Tensor dH;
    maxpool_backward(t.pool_arg[b], dP, H.rows(), dH);
    conv1d_backward(t.X, params.banks[b], H, dH, grads.banks[b], want_embed ? &dX : nullptr);
  }

  if (want_embed) {
    const auto& ids = *ids_for_embed;
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (ids[r] == EmbeddingTable::kPad) continue;  // PAD row is never updated
      const double* src = dX.row_ptr(r);
      bool nonzero = false;
      for (std::size_t c = 0; c < dX.cols(); ++c)
        if (src[c] != 0.0) {
          nonzero = true;
          break;
        }
      if (nonzero) grads.embed_rows.emplace_back(ids[r], std::vector<double>(src, src + dX.cols()));
    }
  }
}

}  // namespace

void backward_classification(const ForwardTrace& t, int label, double weight,
                             const ModelParams& params, const ModelConfig& cfg, ModelGrads& grads,
                             const std::vector<int>* ids_for_embed) {
  const std::size_t K = cfg.classes;
  std::vector<double> dlogits(K);
  for (std::size_t k = 0; k < K; ++k)
    dlogits[k] = (t.probs[k] - (static_cast<int>(k) == label ? 1.0 : 0.0)) * weight;

  std::vector<double> cat = t.class_feat;
  if (cfg.mode == ModelMode::semi)
    cat.insert(cat.end(), t.ctx_class_feat.begin(), t.ctx_class_feat.end());

  std::vector<double> dcat(cat.size(), 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double* gw = grads.class_weights.row_ptr(k);
    const double* w = params.class_weights.row_ptr(k);
    const double g = dlogits[k];
    for (std::size_t c = 0; c < cat.size(); ++c) {
      gw[c] += g * cat[c];
      dcat[c] += g * w[c];
    }
  }

  std::vector<double> d_shared_in(t.shared_in.size(), 0.0);

  std::vector<double> d_class(dcat.begin(), dcat.begin() + t.class_feat.size());
  dense_backward(t.shared_in, params.fc_class, t.class_feat, d_class, grads.fc_class,
                 &d_shared_in);

  if (cfg.mode == ModelMode::semi) {
    std::vector<double> d_ctx_class(dcat.begin() + t.class_feat.size(), dcat.end());
    std::vector<double> d_ctx_in(t.ctx_in.size(), 0.0);
    dense_backward(t.ctx_in, params.fc_context_class, t.ctx_class_feat, d_ctx_class,
                   grads.fc_context_class, &d_ctx_in);
    mask_in_place(d_ctx_in, t.ctx_mask);
    dense_backward(t.shared_in, params.fc_context, t.ctx_raw, d_ctx_in, grads.fc_context,
                   &d_shared_in);
  }

  backward_from_shared(t, d_shared_in, params, cfg, grads, ids_for_embed);
}

void backward_context(const ForwardTrace& t, std::uint32_t j, int gamma, double weight,
                      const ModelParams& params, const ModelConfig& cfg, ModelGrads& grads,
                      const std::vector<int>* ids_for_embed) {
  const double* wj = params.node_weights.row_ptr(j);
  const std::size_t dim = t.ctx_in.size();
  double dot = 0.0;
  for (std::size_t c = 0; c < dim; ++c) dot += wj[c] * t.ctx_in[c];
  const double target = static_cast<double>(gamma) * dot;
  const double dt = (sigmoid(target) - 1.0) * weight;  // d softplus(-t) / dt

  std::vector<double> dwj(dim);
  std::vector<double> d_ctx_in(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    dwj[c] = dt * gamma * t.ctx_in[c];
    d_ctx_in[c] = dt * gamma * wj[c];
  }
  grads.node_rows.emplace_back(j, std::move(dwj));

  mask_in_place(d_ctx_in, t.ctx_mask);
  std::vector<double> d_shared_in(t.shared_in.size(), 0.0);
  dense_backward(t.shared_in, params.fc_context, t.ctx_raw, d_ctx_in, grads.fc_context,
                 &d_shared_in);
  backward_from_shared(t, d_shared_in, params, cfg, grads, ids_for_embed);
}

Prediction predict(const std::vector<int>& ids, const ModelParams& params, const ModelConfig& cfg,
                   const EmbeddingTable& table) {
  ForwardTrace t = forward(ids, table, params, cfg, nullptr, true);
  Prediction p;
  p.probs = t.probs;
  p.label = 0;
  for (std::size_t k = 1; k < p.probs.size(); ++k)
    if (p.probs[k] > p.probs[p.label]) p.label = static_cast<int>(k);
  return p;
}

}  // namespace semitext
