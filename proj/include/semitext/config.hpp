#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semitext/model.hpp"
#include "semitext/sampler.hpp"
#include "semitext/synth.hpp"
#include "semitext/trainer.hpp"

namespace semitext {

// Flat `key = value` configuration with `#` comments. Only known keys are
// accepted; unset keys fall back to defaults that match the module defaults.
struct RunConfig {
  std::map<std::string, std::string> values;  // explicitly set keys only

  bool is_set(const std::string& key) const { return values.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  void set(const std::string& key, const std::string& value);  // rejects unknown keys
};

RunConfig load_run_config(const std::string& path);

// "key=value" command-line override.
void apply_override(RunConfig& cfg, const std::string& keyval);

std::vector<FilterSpec> parse_filter_specs(const std::string& text);

// "100,500,2000,all" -> budgets; "all" becomes 0 (= whole labeled pool).
std::vector<std::size_t> parse_budgets(const std::string& text);

ModelConfig model_config_from(const RunConfig& cfg, std::size_t classes);
TrainConfig train_config_from(const RunConfig& cfg);
SamplerConfig sampler_config_from(const RunConfig& cfg);
SynthSpec synth_spec_from(const RunConfig& cfg);

// Digest of the effective model configuration (architecture plus the
// embedding fine-tune switch); stored in checkpoints and re-checked before
// evaluate/predict.
std::uint64_t model_config_digest(const ModelConfig& cfg, bool finetune);

// Re-applies explicitly-set model keys on top of a checkpoint's stored
// config, so a conflicting runtime config changes the digest and aborts the
// run while an unset config stays compatible.
ModelConfig overlay_model_config(ModelConfig base, const RunConfig& cfg);

}  // namespace semitext
