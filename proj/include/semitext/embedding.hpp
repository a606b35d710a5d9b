#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "semitext/corpus.hpp"

namespace semitext {

// Shared lookup table. Row 0 is PAD (all zero, never updated), row 1 is UNK
// (seeded uniform in [-0.25, 0.25], derived from the file contents so the
// same file always yields the same table). File words start at row 2.
struct EmbeddingTable {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  std::unordered_map<std::string, int> vocab;  // file words only
  std::vector<std::string> words;              // row order, rows 2..
  std::vector<double> vectors;                 // rows() x dim, row-major
  int dim = 0;

  std::size_t rows() const { return words.size() + 2; }
  const double* row(int r) const { return vectors.data() + static_cast<std::size_t>(r) * dim; }
  double* row(int r) { return vectors.data() + static_cast<std::size_t>(r) * dim; }

  int lookup(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? kUnk : it->second;
  }
  bool in_vocab(const std::string& token) const { return vocab.count(token) != 0; }

  // Hash of (dim, words in row order); identifies the vocabulary for
  // checkpoint compatibility checks.
  std::uint64_t vocab_hash() const;
};

// word2vec text format: header "count dim", then "word v1 ... vd" per line.
EmbeddingTable load_word_vectors(const std::string& path);

// Token ids truncated or PAD-padded to exactly max_len; unknown tokens map
// to UNK.
std::vector<int> lookup_ids(const ProcessedTweet& tweet, const EmbeddingTable& table,
                            std::size_t max_len);

// Mean of in-vocabulary token vectors; the zero vector when none are known.
// PAD and UNK never contribute.
std::vector<double> average_vector(const ProcessedTweet& tweet, const EmbeddingTable& table);

}  // namespace semitext
