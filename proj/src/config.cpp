#include "semitext/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "semitext/common.hpp"

namespace semitext {

namespace {

struct KeyDef {
  const char* key;
  const char* default_value;
};

// Every tunable, defaults equal to the module defaults.
constexpr KeyDef kKnownKeys[] = {
    {"paths.embeddings", ""},
    {"paths.labeled", ""},
    {"paths.unlabeled", ""},
    {"paths.graph", ""},
    {"paths.checkpoint", ""},
    {"paths.output", ""},
    {"paths.labels", ""},
    {"seed", "1"},
    {"threads", "0"},
    {"corpus.train_ratio", "0.6"},
    {"corpus.test_ratio", "0.3"},
    {"corpus.dev_ratio", "0.1"},
    {"embedding.max_len", "30"},
    {"embedding.finetune", "false"},
    {"graph.k", "10"},
    {"graph.leaf_size", "16"},
    {"model.mode", "semi"},
    {"model.filters", "2:100:2,3:150:3,4:200:4"},
    {"model.shared_dim", "100"},
    {"model.class_dim", "100"},
    {"model.context_dim", "100"},
    {"model.context_class_dim", "100"},
    {"model.lambda", "1.0"},
    {"model.dropout", "0.02"},
    {"sampler.rho1", "0.5"},
    {"sampler.rho2", "0.5"},
    {"train.max_epochs", "200"},
    {"train.patience", "25"},
    {"train.batch", "32"},
    {"train.context_batch", "32"},
    {"train.context_multiplier", "10"},
    {"train.context_per_epoch", "0"},
    {"train.lr_class", "0.1"},
    {"train.lr_context", "0.001"},
    {"train.adadelta_rho", "0.95"},
    {"train.adadelta_eps", "1e-6"},
    {"train.budget", "0"},
    {"train.unlabeled_cap", "0"},
    {"sweep.budgets", "100,500,1000,2000,all"},
    {"synth.classes", "2"},
    {"synth.docs_per_class", "500"},
    {"synth.vocab", "600"},
    {"synth.tokens_per_doc", "10"},
    {"synth.margin", "1.5"},
    {"synth.unlabeled", "1000"},
    {"synth.dim", "16"},
    {"synth.seed", "0"},
};

const char* default_for(const std::string& key) {
  for (const auto& def : kKnownKeys)
    if (key == def.key) return def.default_value;
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string RunConfig::get_string(const std::string& key) const {
  auto it = values.find(key);
  if (it != values.end()) return it->second;
  const char* def = default_for(key);
  if (!def) throw UsageError("unknown config key '" + key + "'");
  return def;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const std::string v = get_string(key);
  std::size_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return static_cast<std::uint64_t>(get_size(key));
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(get_size(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!default_for(key)) throw UsageError("unknown config key '" + key + "'");
  values[key] = value;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty config key");
    cfg.set(key, value);
  }
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& keyval) {
  auto eq = keyval.find('=');
  if (eq == std::string::npos) throw UsageError("override must be key=value: '" + keyval + "'");
  cfg.set(trim(keyval.substr(0, eq)), trim(keyval.substr(eq + 1)));
}

std::vector<FilterSpec> parse_filter_specs(const std::string& text) {
  std::vector<FilterSpec> specs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    const std::string item =
        trim(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) {
      FilterSpec f;
      if (std::sscanf(item.c_str(), "%zu:%zu:%zu", &f.width, &f.count, &f.pool) != 3)
        throw UsageError("bad filter spec '" + item + "' (want width:count:pool)");
      specs.push_back(f);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (specs.empty()) throw UsageError("no filter specs given");
  return specs;
}

std::vector<std::size_t> parse_budgets(const std::string& text) {
  std::vector<std::size_t> budgets;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    const std::string item =
        trim(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) {
      if (item == "all" || item == "All" || item == "ALL") {
        budgets.push_back(0);
      } else {
        std::size_t v = 0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size() || v == 0)
          throw UsageError("bad budget '" + item + "'");
        budgets.push_back(v);
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (budgets.empty()) throw UsageError("no budgets given");
  return budgets;
}

ModelConfig model_config_from(const RunConfig& cfg, std::size_t classes) {
  ModelConfig mc;
  mc.max_len = cfg.get_size("embedding.max_len");
  mc.filters = parse_filter_specs(cfg.get_string("model.filters"));
  mc.shared_dim = cfg.get_size("model.shared_dim");
  mc.class_dim = cfg.get_size("model.class_dim");
  mc.context_dim = cfg.get_size("model.context_dim");
  mc.context_class_dim = cfg.get_size("model.context_class_dim");
  mc.classes = classes;
  mc.lambda = cfg.get_double("model.lambda");
  mc.dropout = cfg.get_double("model.dropout");
  const std::string mode = cfg.get_string("model.mode");
  if (mode == "semi") {
    mc.mode = ModelMode::semi;
  } else if (mode == "supervised") {
    mc.mode = ModelMode::supervised;
  } else {
    throw UsageError("model.mode must be 'supervised' or 'semi', got '" + mode + "'");
  }
  return mc;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.max_epochs = cfg.get_size("train.max_epochs");
  tc.patience = cfg.get_size("train.patience");
  tc.batch_size = cfg.get_size("train.batch");
  tc.context_batch = cfg.get_size("train.context_batch");
  tc.context_multiplier = cfg.get_double("train.context_multiplier");
  tc.context_per_epoch = cfg.get_size("train.context_per_epoch");
  tc.lr_class = cfg.get_double("train.lr_class");
  tc.lr_context = cfg.get_double("train.lr_context");
  tc.adadelta_rho = cfg.get_double("train.adadelta_rho");
  tc.adadelta_eps = cfg.get_double("train.adadelta_eps");
  tc.budget = cfg.get_size("train.budget");
  tc.seed = cfg.get_u64("seed");
  tc.threads = cfg.get_int("threads");
  tc.finetune_embeddings = cfg.get_bool("embedding.finetune");
  if (tc.batch_size < 1 || tc.context_batch < 1)
    throw UsageError("batch sizes must be >= 1");
  if (tc.patience > tc.max_epochs) throw UsageError("train.patience exceeds train.max_epochs");
  return tc;
}

SamplerConfig sampler_config_from(const RunConfig& cfg) {
  SamplerConfig sc;
  sc.rho1 = cfg.get_double("sampler.rho1");
  sc.rho2 = cfg.get_double("sampler.rho2");
  sc.seed = cfg.get_u64("seed");
  return sc;
}

SynthSpec synth_spec_from(const RunConfig& cfg) {
  SynthSpec spec;
  spec.classes = cfg.get_size("synth.classes");
  spec.docs_per_class = cfg.get_size("synth.docs_per_class");
  spec.vocab = cfg.get_size("synth.vocab");
  spec.tokens_per_doc = cfg.get_size("synth.tokens_per_doc");
  spec.margin = cfg.get_double("synth.margin");
  spec.unlabeled = cfg.get_size("synth.unlabeled");
  spec.dim = cfg.get_size("synth.dim");
  const std::uint64_t synth_seed = cfg.get_u64("synth.seed");
  spec.seed = synth_seed ? synth_seed : cfg.get_u64("seed");
  return spec;
}

std::uint64_t model_config_digest(const ModelConfig& cfg, bool finetune) {
  std::string canon;
  char buf[64];
  canon += "max_len=" + std::to_string(cfg.max_len) + "\n";
  canon += "filters=";
  for (const auto& f : cfg.filters) {
    std::snprintf(buf, sizeof(buf), "%zu:%zu:%zu,", f.width, f.count, f.pool);
    canon += buf;
  }
  canon += "\n";
  canon += "shared_dim=" + std::to_string(cfg.shared_dim) + "\n";
  canon += "class_dim=" + std::to_string(cfg.class_dim) + "\n";
  canon += "context_dim=" + std::to_string(cfg.context_dim) + "\n";
  canon += "context_class_dim=" + std::to_string(cfg.context_class_dim) + "\n";
  canon += "classes=" + std::to_string(cfg.classes) + "\n";
  std::snprintf(buf, sizeof(buf), "lambda=%.17g\n", cfg.lambda);
  canon += buf;
  std::snprintf(buf, sizeof(buf), "dropout=%.17g\n", cfg.dropout);
  canon += buf;
  canon += std::string("mode=") + (cfg.mode == ModelMode::semi ? "semi" : "supervised") + "\n";
  canon += std::string("finetune=") + (finetune ? "true" : "false") + "\n";
  return fnv1a64(canon);
}

ModelConfig overlay_model_config(ModelConfig base, const RunConfig& cfg) {
  if (cfg.is_set("embedding.max_len")) base.max_len = cfg.get_size("embedding.max_len");
  if (cfg.is_set("model.filters"))
    base.filters = parse_filter_specs(cfg.get_string("model.filters"));
  if (cfg.is_set("model.shared_dim")) base.shared_dim = cfg.get_size("model.shared_dim");
  if (cfg.is_set("model.class_dim")) base.class_dim = cfg.get_size("model.class_dim");
  if (cfg.is_set("model.context_dim")) base.context_dim = cfg.get_size("model.context_dim");
  if (cfg.is_set("model.context_class_dim"))
    base.context_class_dim = cfg.get_size("model.context_class_dim");
  if (cfg.is_set("model.lambda")) base.lambda = cfg.get_double("model.lambda");
  if (cfg.is_set("model.dropout")) base.dropout = cfg.get_double("model.dropout");
  if (cfg.is_set("model.mode")) {
    const std::string mode = cfg.get_string("model.mode");
    base.mode = mode == "semi" ? ModelMode::semi : ModelMode::supervised;
  }
  return base;
}

}  // namespace semitext
