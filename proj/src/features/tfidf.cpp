#include <cmath>
#include <map>

#include "safechat/error.hpp"
#include "safechat/features.hpp"

namespace safechat::features {

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out;
  out.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      out.values.push_back(dense[i]);
    }
  }
  return out;
}

TfIdfVectorizer::TfIdfVectorizer(Vocabulary vocab, std::vector<double> idf)
    : vocab_(std::move(vocab)), idf_(std::move(idf)) {
  if (idf_.size() != vocab_.size()) {
    throw Error(Errc::vocabulary_mismatch, "tfidf: idf length differs from vocabulary size");
  }
}

TfIdfVectorizer tfidf_fit(std::span<const std::string> corpus, Vocabulary vocab) {
  const auto n_docs = static_cast<std::uint64_t>(corpus.size());
  if (n_docs == 0) throw Error(Errc::empty_corpus, "tfidf_fit: corpus is empty");
  if (vocab.corpus_size() != n_docs) {
    throw Error(Errc::vocabulary_mismatch, "tfidf_fit: vocabulary was built from " +
                                               std::to_string(vocab.corpus_size()) +
                                               " documents, corpus has " +
                                               std::to_string(n_docs));
  }
  std::vector<double> idf(vocab.size());
  for (std::uint32_t t = 0; t < vocab.size(); ++t) {
    const auto df = vocab.df(t);
    if (df == 0 || df > n_docs) {
      throw Error(Errc::vocabulary_mismatch,
                  "tfidf_fit: df out of range for '" + vocab.ngram(t) + "'");
    }
    idf[t] = std::log(static_cast<double>(n_docs) / static_cast<double>(df));
  }
  return TfIdfVectorizer(std::move(vocab), std::move(idf));
}

SparseVector tfidf_transform(const TfIdfVectorizer& vectorizer, std::string_view doc) {
  const auto& vocab = vectorizer.vocabulary();
  const auto idf = vectorizer.idf();
  SparseVector out;
  out.dim = vocab.size();

  std::map<std::uint32_t, double> weights;
  for (const auto& order : ngrams_by_order(feature_tokens(doc), vocab.ngram_max())) {
    if (order.empty()) continue;
    const double total = static_cast<double>(order.size());
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& g : order) {
      if (auto id = vocab.id(g)) ++counts[*id];
    }
    for (const auto& [id, c] : counts) {
      weights[id] = static_cast<double>(c) / total * idf[id];
    }
  }

  double norm2 = 0.0;
  for (const auto& [id, w] : weights) norm2 += w * w;
  if (norm2 == 0.0) return out;
  const double inv = 1.0 / std::sqrt(norm2);
  for (const auto& [id, w] : weights) {
    if (w == 0.0) continue;
    out.indices.push_back(id);
    out.values.push_back(w * inv);
  }
  return out;
}

}  // namespace safechat::features
