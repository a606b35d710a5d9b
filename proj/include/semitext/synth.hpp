#pragma once

#include <cstdint>
#include <string>

namespace semitext {

// Synthetic corpus: K class-conditional token distributions over a shared +
// class-exclusive vocabulary, with token embeddings placed at
// margin * class-centroid + unit Gaussian noise, so averaged document
// vectors form clusters whose separation is controlled by `margin`.
struct SynthSpec {
  std::size_t classes = 2;
  std::size_t docs_per_class = 500;
  std::size_t vocab = 600;
  std::size_t tokens_per_doc = 10;
  double margin = 1.5;
  std::size_t unlabeled = 1000;
  std::size_t dim = 16;
  std::uint64_t seed = 1;
};

// Writes the labeled TSV, the unlabeled TSV (skipped when unlabeled == 0)
// and a word2vec-text embedding file. Deterministic under seed.
void generate_synthetic(const SynthSpec& spec, const std::string& labeled_path,
                        const std::string& unlabeled_path, const std::string& embedding_path);

}  // namespace semitext
