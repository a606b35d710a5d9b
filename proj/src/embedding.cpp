#include "semitext/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "semitext/common.hpp"

namespace semitext {

std::uint64_t EmbeddingTable::vocab_hash() const {
  std::uint64_t h = fnv1a64("w2v", 3);
  h = fnv1a64(&dim, sizeof(dim), h);
  for (const auto& w : words) {
    h = fnv1a64(w, h);
    h = fnv1a64("\0", 1, h);
  }
  return h;
}

namespace {

const char* skip_ws(const char* p, const char* end) {
  while (p < end && (*p == ' ' || *p == '\t')) ++p;
  return p;
}

// Locale-independent double parsing via from_chars.
bool parse_double(const char*& p, const char* end, double& out) {
  p = skip_ws(p, end);
  auto res = std::from_chars(p, end, out);
  if (res.ec != std::errc()) return false;
  p = res.ptr;
  return true;
}

bool parse_size(const char*& p, const char* end, std::size_t& out) {
  p = skip_ws(p, end);
  auto res = std::from_chars(p, end, out);
  if (res.ec != std::errc()) return false;
  p = res.ptr;
  return true;
}

}  // namespace

EmbeddingTable load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: missing word2vec header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::size_t count = 0, dim = 0;
  {
    const char* p = line.data();
    const char* end = line.data() + line.size();
    if (!parse_size(p, end, count) || !parse_size(p, end, dim) || dim == 0)
      throw DataError(path + ":1: header must be '<count> <dim>'");
  }

  EmbeddingTable table;
  table.dim = static_cast<int>(dim);
  table.words.reserve(count);
  table.vectors.assign(2 * dim, 0.0);  // PAD + UNK placeholders
  table.vectors.reserve((count + 2) * dim);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const char* p = line.data();
    const char* end = line.data() + line.size();
    p = skip_ws(p, end);
    const char* wstart = p;
    while (p < end && *p != ' ' && *p != '\t') ++p;
    std::string word(wstart, p);
    if (word.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": missing word");
    if (table.vocab.count(word))
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate word '" + word + "'");

    std::size_t base = table.vectors.size();
    table.vectors.resize(base + dim);
    for (std::size_t c = 0; c < dim; ++c) {
      double v;
      if (!parse_double(p, end, v))
        throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(dim) + " values, found " + std::to_string(c));
      if (!std::isfinite(v))
        throw DataError(path + ":" + std::to_string(lineno) + ": non-finite value");
      table.vectors[base + c] = v;
    }
    p = skip_ws(p, end);
    if (p != end)
      throw DataError(path + ":" + std::to_string(lineno) + ": row longer than dim " +
                      std::to_string(dim));

    table.vocab.emplace(word, static_cast<int>(table.words.size()) + 2);
    table.words.push_back(std::move(word));
  }

  if (table.words.size() != count)
    throw DataError(path + ": header count " + std::to_string(count) + " != " +
                    std::to_string(table.words.size()) + " rows");

  // UNK: uniform [-0.25, 0.25], seeded from the vocabulary so predictions do
  // not depend on the run seed.
  std::uint64_t s = mix_seed(table.vocab_hash(), 0x756e6bULL);
  for (std::size_t c = 0; c < dim; ++c) {
    s = splitmix64(s);
    double u = static_cast<double>(s >> 11) * 0x1.0p-53;  // [0,1)
    table.vectors[dim + c] = 0.5 * u - 0.25;
  }
  return table;
}

std::vector<int> lookup_ids(const ProcessedTweet& tweet, const EmbeddingTable& table,
                            std::size_t max_len) {
  if (max_len < 1) throw DataError("max_len must be >= 1");
  std::vector<int> ids(max_len, EmbeddingTable::kPad);
  const std::size_t n = std::min(max_len, tweet.tokens.size());
  for (std::size_t i = 0; i < n; ++i) ids[i] = table.lookup(tweet.tokens[i]);
  return ids;
}

std::vector<double> average_vector(const ProcessedTweet& tweet, const EmbeddingTable& table) {
  std::vector<double> mean(table.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tweet.tokens) {
    auto it = table.vocab.find(tok);
    if (it == table.vocab.end()) continue;
    const double* v = table.row(it->second);
    for (int c = 0; c < table.dim; ++c) mean[c] += v[c];
    ++hits;
  }
  if (hits > 0)
    for (double& m : mean) m /= static_cast<double>(hits);
  return mean;
}

}  // namespace semitext
