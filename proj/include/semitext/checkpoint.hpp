#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semitext/model.hpp"
#include "semitext/tensor.hpp"

namespace semitext {

// Self-describing parameter container: magic, JSON manifest (model config,
// class names, vocabulary hash, config digest, tensor table), then raw
// row-major float64 values, little-endian. Serialization is deterministic,
// so identical runs produce byte-identical files.
struct Checkpoint {
  ModelConfig config;
  std::vector<std::string> labels;
  std::uint64_t vocab_hash = 0;
  std::uint64_t config_digest = 0;
  std::size_t embedding_dim = 0;
  ModelParams params;
  Tensor tuned_embedding;  // empty unless embeddings were fine-tuned
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace semitext
