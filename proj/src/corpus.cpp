#include "semitext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "semitext/common.hpp"

namespace semitext {

int LabelMap::intern(const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  names.push_back(name);
  return static_cast<int>(names.size()) - 1;
}

std::optional<int> LabelMap::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_url_token(const std::string& t) {
  return t.find("http") != std::string::npos || t.rfind("www.", 0) == 0;
}

bool is_pure_digits(const std::string& t) {
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(), is_digit);
}

// Whole-token time pattern: \d{1,2}:\d{2}(:\d{2})?(am|pm)?
bool is_time_token(const std::string& t) {
  std::size_t i = 0;
  std::size_t h = 0;
  while (i < t.size() && is_digit(t[i]) && h < 2) ++i, ++h;
  if (h == 0 || i >= t.size() || t[i] != ':') return false;
  ++i;
  if (i + 2 > t.size() || !is_digit(t[i]) || !is_digit(t[i + 1])) return false;
  i += 2;
  if (i + 3 <= t.size() && t[i] == ':' && is_digit(t[i + 1]) && is_digit(t[i + 2])) i += 3;
  if (i + 2 <= t.size() && (t.compare(i, 2, "am") == 0 || t.compare(i, 2, "pm") == 0)) i += 2;
  return i == t.size();
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string clean_pass(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  std::vector<std::string> kept;
  for (const auto& tok : split_ws(lower)) {
    if (is_url_token(tok)) continue;
    if (tok[0] == '@') continue;
    if (is_time_token(tok)) continue;
    if (is_pure_digits(tok)) continue;
    // Everything outside [a-z0-9] becomes a space, which may split the token.
    std::string stripped = tok;
    for (char& c : stripped)
      if (!((c >= 'a' && c <= 'z') || is_digit(c))) c = ' ';
    for (const auto& sub : split_ws(stripped))
      if (sub.size() >= 2) kept.push_back(sub);
  }

  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ' ';
    out += kept[i];
  }
  return out;
}

}  // namespace

std::string clean_text(const std::string& raw) {
  // Token removals can expose new violations (e.g. "12!34" -> "12 34"), so
  // run the ordered pass to a fixpoint. Two passes always suffice: after the
  // first, token contents no longer change, only whole tokens get dropped.
  std::string cur = clean_pass(raw);
  for (;;) {
    std::string next = clean_pass(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

std::vector<std::string> tokenize(const std::string& clean) { return split_ws(clean); }

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

LoadedCorpus load_documents(const std::string& path, bool labeled, const LabelMap* label_map) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  LoadedCorpus corpus;
  if (label_map) corpus.labels = *label_map;

  const std::size_t want_cols = labeled ? 3 : 2;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != want_cols)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(want_cols) + " tab-separated columns, got " +
                      std::to_string(cols.size()));
    if (cols[0].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty document id");
    if (!seen.insert(cols[0]).second)
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id '" + cols[0] + "'");

    RawDocument doc;
    doc.id = cols[0];
    if (labeled) {
      if (label_map) {
        if (!corpus.labels.find(cols[1]))
          throw DataError(path + ":" + std::to_string(lineno) + ": unknown label '" + cols[1] +
                          "'");
      } else {
        corpus.labels.intern(cols[1]);
      }
      doc.label = cols[1];
      doc.text = cols[2];
    } else {
      doc.text = cols[1];
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<ProcessedTweet> process_documents(const std::vector<RawDocument>& docs,
                                              const LabelMap& labels) {
  std::vector<ProcessedTweet> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    ProcessedTweet t;
    t.id = doc.id;
    t.tokens = tokenize(clean_text(doc.text));
    if (doc.label) {
      auto id = labels.find(*doc.label);
      if (!id) throw DataError("label '" + *doc.label + "' missing from label map");
      t.label = *id;
    }
    out.push_back(std::move(t));
  }
  return out;
}

DataSplit split_dataset(const std::vector<ProcessedTweet>& docs, double train_ratio,
                        double test_ratio, double dev_ratio, std::uint64_t seed) {
  if (train_ratio <= 0 || test_ratio <= 0 || dev_ratio <= 0)
    throw DataError("split ratios must be positive");
  if (std::abs(train_ratio + test_ratio + dev_ratio - 1.0) > 1e-9)
    throw DataError("split ratios must sum to 1");
  const std::size_t n = docs.size();
  if (n < 3) throw DataError("need at least 3 documents to split");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));
  const auto n_dev = static_cast<std::size_t>(std::floor(dev_ratio * static_cast<double>(n)));
  const std::size_t n_test = n - n_train - n_dev;

  DataSplit split;
  split.train.reserve(n_train);
  split.test.reserve(n_test);
  split.dev.reserve(n_dev);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_train; ++i) split.train.push_back(docs[order[pos++]]);
  for (std::size_t i = 0; i < n_test; ++i) split.test.push_back(docs[order[pos++]]);
  for (std::size_t i = 0; i < n_dev; ++i) split.dev.push_back(docs[order[pos++]]);
  split.labeled_count = split.train.size();
  split.unlabeled_count = 0;
  return split;
}

void append_unlabeled(DataSplit& split, const std::vector<ProcessedTweet>& unlabeled,
                      std::size_t cap) {
  std::size_t count = unlabeled.size();
  if (cap > 0 && cap < count) count = cap;
  for (std::size_t i = 0; i < count; ++i) {
    ProcessedTweet t = unlabeled[i];
    t.label.reset();
    split.train.push_back(std::move(t));
  }
  split.unlabeled_count += count;
}

LabelMap load_label_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  LabelMap labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (labels.find(line)) throw DataError(path + ": duplicate class name '" + line + "'");
    labels.names.push_back(line);
  }
  if (labels.names.empty()) throw DataError(path + ": empty label map");
  return labels;
}

void save_label_map(const LabelMap& labels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& name : labels.names) out << name << '\n';
}

}  // namespace semitext
