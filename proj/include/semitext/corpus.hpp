#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semitext {

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> label;
};

struct ProcessedTweet {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<int> label;  // class id in [0, K)
};

// Ordered class-name table; a class id is its position.
struct LabelMap {
  std::vector<std::string> names;

  int intern(const std::string& name);
  std::optional<int> find(const std::string& name) const;
  int size() const { return static_cast<int>(names.size()); }
};

// Training instances = labeled prefix of `train` followed by unlabeled docs,
// matching the node order of the similarity graph.
struct DataSplit {
  std::vector<ProcessedTweet> train;
  std::vector<ProcessedTweet> dev;
  std::vector<ProcessedTweet> test;
  std::size_t labeled_count = 0;
  std::size_t unlabeled_count = 0;
  std::size_t total() const { return labeled_count + unlabeled_count; }
};

// Cleaning rules applied in fixed order: lowercase, URL removal, @mention
// removal, time-pattern removal, pure-digit removal, special-character
// stripping, single-character removal, whitespace normalization. The pass
// repeats until the text stops changing, so the result is idempotent.
std::string clean_text(const std::string& raw);

// Whitespace split, order preserved.
std::vector<std::string> tokenize(const std::string& clean);

struct LoadedCorpus {
  std::vector<RawDocument> docs;
  LabelMap labels;
};

// TSV reader: labeled files are `id<TAB>label<TAB>text`, unlabeled files are
// `id<TAB>text`. Wrong column count or duplicate id is a hard error naming
// the line. When `label_map` is given its classes are authoritative and an
// unseen label is an error; otherwise labels are interned in first-seen order.
LoadedCorpus load_documents(const std::string& path, bool labeled,
                            const LabelMap* label_map = nullptr);

// clean + tokenize + label lookup for a whole corpus.
std::vector<ProcessedTweet> process_documents(const std::vector<RawDocument>& docs,
                                              const LabelMap& labels);

// Seeded shuffle followed by contiguous slicing. Train and dev sizes are
// floor(ratio*n); the rounding remainder lands in test, which is the split
// arithmetic the 60/30/10 protocol implies on sizes like 11,668 -> 7,000 /
// 3,502 / 1,166.
DataSplit split_dataset(const std::vector<ProcessedTweet>& docs, double train_ratio,
                        double test_ratio, double dev_ratio, std::uint64_t seed);

// Appends unlabeled docs to the train list (cap = 0 means no cap).
void append_unlabeled(DataSplit& split, const std::vector<ProcessedTweet>& unlabeled,
                      std::size_t cap = 0);

LabelMap load_label_map(const std::string& path);
void save_label_map(const LabelMap& labels, const std::string& path);

}  // namespace semitext
