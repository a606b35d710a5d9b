#include "semitext/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "semitext/common.hpp"

namespace semitext {

namespace {

// Self-contained stream so generated files are identical across platforms.
struct SynthRng {
  std::uint64_t state;
  bool have_spare = false;
  double spare = 0.0;

  explicit SynthRng(std::uint64_t seed) : state(splitmix64(seed)) {}

  double uniform() {
    state = splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }

  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double normal() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    have_spare = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
};

std::vector<std::vector<double>> class_centroids(std::size_t classes, std::size_t dim,
                                                 SynthRng& rng) {
  // Random orthonormal directions (Gram-Schmidt over Gaussian draws).
  std::vector<std::vector<double>> c(classes, std::vector<double>(dim));
  for (std::size_t k = 0; k < classes; ++k) {
    for (;;) {
      for (auto& v : c[k]) v = rng.normal();
      for (std::size_t p = 0; p < k; ++p) {
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += c[k][d] * c[p][d];
        for (std::size_t d = 0; d < dim; ++d) c[k][d] -= dot * c[p][d];
      }
      double norm = 0.0;
      for (double v : c[k]) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (auto& v : c[k]) v /= norm;
        break;
      }
    }
  }
  return c;
}

}  // namespace

void generate_synthetic(const SynthSpec& spec, const std::string& labeled_path,
                        const std::string& unlabeled_path, const std::string& embedding_path) {
  if (spec.classes < 2) throw DataError("synth: need at least 2 classes");
  if (spec.docs_per_class < 1 || spec.tokens_per_doc < 1 || spec.dim < 1)
    throw DataError("synth: counts must be positive");
  if (spec.margin <= 0.0) throw DataError("synth: margin must be positive");
  if (spec.classes > spec.dim) throw DataError("synth: need dim >= classes");
  if (spec.vocab < 2 * spec.classes) throw DataError("synth: vocabulary too small");

  SynthRng rng(mix_seed(spec.seed, 0x73796e74ULL));

  const std::size_t excl_per_class = spec.vocab / (2 * spec.classes);
  const std::size_t shared_count = spec.vocab - excl_per_class * spec.classes;

  std::vector<std::string> token_names(spec.vocab);
  for (std::size_t t = 0; t < spec.vocab; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%05zu", t);
    token_names[t] = buf;
  }
  // tokens [0, shared_count) are shared; the rest belong to class
  // (t - shared_count) / excl_per_class.

  auto centroids = class_centroids(spec.classes, spec.dim, rng);

  // Token embeddings: exclusive tokens sit at margin * centroid + noise,
  // shared tokens are pure noise.
  std::vector<std::vector<double>> vectors(spec.vocab, std::vector<double>(spec.dim));
  for (std::size_t t = 0; t < spec.vocab; ++t) {
    for (std::size_t d = 0; d < spec.dim; ++d) vectors[t][d] = rng.normal();
    if (t >= shared_count) {
      const std::size_t cls = (t - shared_count) / excl_per_class;
      for (std::size_t d = 0; d < spec.dim; ++d)
        vectors[t][d] += spec.margin * centroids[cls][d];
    }
  }

  auto draw_doc = [&](std::size_t cls) {
    std::string text;
    for (std::size_t t = 0; t < spec.tokens_per_doc; ++t) {
      std::size_t tok;
      if (rng.uniform() < 0.5) {
        tok = rng.index(shared_count);
      } else {
        tok = shared_count + cls * excl_per_class + rng.index(excl_per_class);
      }
      if (t) text += ' ';
      text += token_names[tok];
    }
    return text;
  };

  // Labeled corpus: class sequence shuffled so splits stay roughly balanced.
  std::vector<std::size_t> doc_class;
  doc_class.reserve(spec.classes * spec.docs_per_class);
  for (std::size_t c = 0; c < spec.classes; ++c)
    for (std::size_t i = 0; i < spec.docs_per_class; ++i) doc_class.push_back(c);
  for (std::size_t i = doc_class.size(); i > 1; --i)
    std::swap(doc_class[i - 1], doc_class[rng.index(i)]);

  {
    std::ofstream out(labeled_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + labeled_path);
    char id[16];
    for (std::size_t i = 0; i < doc_class.size(); ++i) {
      std::snprintf(id, sizeof(id), "L%06zu", i);
      out << id << '\t' << "class" << doc_class[i] << '\t' << draw_doc(doc_class[i]) << '\n';
    }
  }

  if (spec.unlabeled > 0) {
    std::ofstream out(unlabeled_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + unlabeled_path);
    char id[16];
    for (std::size_t i = 0; i < spec.unlabeled; ++i) {
      std::snprintf(id, sizeof(id), "U%06zu", i);
      out << id << '\t' << draw_doc(rng.index(spec.classes)) << '\n';
    }
  }

  {
    std::ofstream out(embedding_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + embedding_path);
    out << spec.vocab << ' ' << spec.dim << '\n';
    char buf[32];
    for (std::size_t t = 0; t < spec.vocab; ++t) {
      out << token_names[t];
      for (std::size_t d = 0; d < spec.dim; ++d) {
        std::snprintf(buf, sizeof(buf), " %.6f", vectors[t][d]);
        out << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace semitext
