#include <algorithm>
#include <map>
#include <set>

#include "safechat/error.hpp"
#include "safechat/features.hpp"
#include "safechat/text.hpp"

namespace safechat::features {

namespace {

bool is_edge_punct(char c) { return c == '.' || c == ',' || c == '?' || c == '!'; }

}  // namespace

std::vector<std::string> feature_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& chunk : text::split_whitespace(s)) {
    std::size_t b = 0;
    std::size_t e = chunk.size();
    while (b < e && is_edge_punct(chunk[b])) ++b;
    while (e > b && is_edge_punct(chunk[e - 1])) --e;
    if (e > b) out.emplace_back(chunk.substr(b, e - b));
  }
  return out;
}

std::vector<std::vector<std::string>> ngrams_by_order(const std::vector<std::string>& tokens,
                                                      std::size_t ngram_max) {
  std::vector<std::vector<std::string>> out(ngram_max);
  for (std::size_t n = 1; n <= ngram_max; ++n) {
    if (tokens.size() < n) break;
    auto& bucket = out[n - 1];
    bucket.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      bucket.push_back(std::move(g));
    }
  }
  return out;
}

std::optional<std::uint32_t> Vocabulary::id(std::string_view ngram) const {
  auto it = index_.find(std::string(ngram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> ngrams, std::vector<std::uint64_t> df,
                                  std::uint64_t corpus_size, std::size_t ngram_max,
                                  std::size_t min_df) {
  if (ngrams.size() != df.size()) {
    throw Error(Errc::bad_format, "vocabulary: ngram and df lists differ in length");
  }
  Vocabulary v;
  v.ngrams_ = std::move(ngrams);
  v.df_ = std::move(df);
  v.corpus_size_ = corpus_size;
  v.ngram_max_ = ngram_max;
  v.min_df_ = min_df;
  v.index_.reserve(v.ngrams_.size());
  for (std::uint32_t i = 0; i < v.ngrams_.size(); ++i) {
    if (!v.index_.emplace(v.ngrams_[i], i).second) {
      throw Error(Errc::bad_format, "vocabulary: duplicate n-gram '" + v.ngrams_[i] + "'");
    }
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, std::size_t ngram_max,
                            std::size_t min_df) {
  if (corpus.empty()) throw Error(Errc::empty_corpus, "build_vocabulary: corpus is empty");
  if (ngram_max == 0) throw Error(Errc::invalid_config, "build_vocabulary: ngram_max must be >= 1");
  if (min_df == 0) throw Error(Errc::invalid_config, "build_vocabulary: min_df must be >= 1");

  std::map<std::string, std::uint64_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string> seen;
    for (auto& order : ngrams_by_order(feature_tokens(doc), ngram_max)) {
      for (auto& g : order) seen.insert(std::move(g));
    }
    for (const auto& g : seen) ++df[g];
  }

  std::vector<std::string> grams;
  std::vector<std::uint64_t> counts;
  for (const auto& [g, c] : df) {
    if (c < min_df) continue;
    grams.push_back(g);
    counts.push_back(c);
  }
  return Vocabulary::from_parts(std::move(grams), std::move(counts), corpus.size(), ngram_max,
                                min_df);
}

}  // namespace safechat::features
