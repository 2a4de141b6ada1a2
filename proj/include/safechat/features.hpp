#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace safechat::features {

// Word tokens of a normalized document: whitespace split with sentence
// punctuation (.,?!) stripped from token edges.
std::vector<std::string> feature_tokens(std::string_view text);

// All word n-grams of orders 1..ngram_max, grouped by order (index 0 = unigrams).
std::vector<std::vector<std::string>> ngrams_by_order(const std::vector<std::string>& tokens,
                                                      std::size_t ngram_max);

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const noexcept { return ngrams_.size(); }
  std::optional<std::uint32_t> id(std::string_view ngram) const;
  const std::string& ngram(std::uint32_t id) const { return ngrams_.at(id); }
  std::uint64_t df(std::uint32_t id) const { return df_.at(id); }
  std::uint64_t corpus_size() const noexcept { return corpus_size_; }
  std::size_t ngram_max() const noexcept { return ngram_max_; }
  std::size_t min_df() const noexcept { return min_df_; }

  // Assembles a vocabulary from already-counted parts; ids follow the given order.
  static Vocabulary from_parts(std::vector<std::string> ngrams, std::vector<std::uint64_t> df,
                               std::uint64_t corpus_size, std::size_t ngram_max, std::size_t min_df);

 private:
  std::vector<std::string> ngrams_;
  std::vector<std::uint64_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t corpus_size_ = 0;
  std::size_t ngram_max_ = 3;
  std::size_t min_df_ = 1;
};

// Exactly the n-grams (1 <= n <= ngram_max) with document frequency >= min_df;
// ids in lexicographic n-gram order.
Vocabulary build_vocabulary(std::span<const std::string> corpus, std::size_t ngram_max = 3,
                            std::size_t min_df = 2);

struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  double norm() const;
  static SparseVector from_dense(std::span<const double> dense);
};

class TfIdfVectorizer {
 public:
  TfIdfVectorizer() = default;
  TfIdfVectorizer(Vocabulary vocab, std::vector<double> idf);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::span<const double> idf() const noexcept { return idf_; }
  std::size_t dim() const noexcept { return vocab_.size(); }

 private:
  Vocabulary vocab_;
  std::vector<double> idf_;
};

// idf[t] = ln(N / df[t]) with N = corpus size.
TfIdfVectorizer tfidf_fit(std::span<const std::string> corpus, Vocabulary vocab);

// Per n-gram t: count(t) / (number of n-grams of t's order in doc) * idf[t], then L2-normalized.
SparseVector tfidf_transform(const TfIdfVectorizer& vectorizer, std::string_view doc);

struct TrainingConfig {
  std::size_t dim = 100;
  std::size_t epochs = 20;
  std::size_t negative = 5;  // noise words per positive word
  double alpha = 0.025;
  double alpha_min = 0.0001;
  std::size_t min_df = 1;  // minimum document frequency for a DBOW vocabulary word
  std::uint64_t seed = 1;
  double noise_exponent = 0.75;
  // Frequent-word subsampling threshold t: a token with corpus frequency f is kept
  // with probability min(1, (sqrt(f/t) + 1) t/f). 0 disables subsampling.
  double sample = 1e-3;

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

// PV-DBOW document embeddings trained with negative sampling.
class DocEmbeddingModel {
 public:
  DocEmbeddingModel() = default;

  std::size_t dim() const noexcept { return config_.dim; }
  std::size_t num_docs() const noexcept { return num_docs_; }
  std::size_t vocab_size() const noexcept { return words_.size(); }
  const TrainingConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<std::uint32_t> word_id(std::string_view w) const;

  std::span<const double> doc_vector(std::size_t d) const;
  std::span<const double> word_output_vector(std::size_t w) const;
  std::span<const double> noise_distribution() const noexcept { return noise_; }
  // Probability that an occurrence of word w is used as a training target.
  double keep_probability(std::size_t w) const { return keep_.at(w); }
  // Mean per-step loss of each training epoch.
  const std::vector<double>& epoch_losses() const noexcept { return epoch_losses_; }

  std::span<const std::uint64_t> word_counts() const noexcept { return word_counts_; }
  std::span<const double> doc_matrix() const noexcept { return doc_vectors_; }
  std::span<const double> output_matrix() const noexcept { return out_vectors_; }

  // Draws a noise word id for u in [0, 1).
  std::uint32_t sample_noise(double u) const;

  // Rebuilds a model from serialized parts; validates all shapes.
  static DocEmbeddingModel from_parts(TrainingConfig config, std::vector<std::string> words,
                                      std::vector<std::uint64_t> word_counts, std::size_t num_docs,
                                      std::vector<double> doc_vectors,
                                      std::vector<double> out_vectors,
                                      std::vector<double> epoch_losses);

 private:
  friend DocEmbeddingModel dbow_train(std::span<const std::string>, const TrainingConfig&);
  void index_words();
  void init_noise();

  TrainingConfig config_;
  std::size_t num_docs_ = 0;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> word_counts_;
  std::unordered_map<std::string, std::uint32_t> word_index_;
  std::vector<double> doc_vectors_;  // num_docs x dim
  std::vector<double> out_vectors_;  // vocab x dim
  std::vector<double> noise_;        // probabilities
  std::vector<double> noise_cdf_;
  std::vector<double> keep_;
  std::vector<double> epoch_losses_;
};

DocEmbeddingModel dbow_train(std::span<const std::string> corpus, const TrainingConfig& config);

struct InferredVector {
  std::vector<double> values;
  bool empty = false;  // document had no in-vocabulary words; values are all zero
};

// Fits a vector for an unseen document with the word output vectors frozen.
// steps = passes over the document's words. The seed defaults to the model's.
InferredVector dbow_infer(const DocEmbeddingModel& model, std::string_view doc, std::size_t steps,
                          std::optional<std::uint64_t> seed = std::nullopt);

// Loss of one negative-sampling step,
//   -ln sigma(v.u_0) - sum_{j>=1} ln sigma(-v.u_j),
// where outputs[0] is the target word vector and the rest are noise words.
// Writes d loss/d v into grad_doc and d loss/d u_j into grad_outputs[j*dim ...].
double dbow_step(std::span<const double> doc, std::span<const std::span<const double>> outputs,
                 std::span<double> grad_doc, std::span<double> grad_outputs);

double sigmoid(double x) noexcept;
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace safechat::features
