#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "safechat/error.hpp"
#include "safechat/features.hpp"
#include "safechat/rng.hpp"
#include "safechat/text.hpp"

namespace safechat::features {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// -ln sigma(x), stable for large |x|.
double neg_log_sigmoid(double x) noexcept {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

void init_vector(std::span<double> v, Rng& rng) {
  const double scale = 1.0 / static_cast<double>(v.size());
  for (double& x : v) x = (rng.uniform() - 0.5) * scale;
}

// Shared by training and inference; the step gradient itself comes from dbow_step.
struct StepBuffers {
  std::vector<std::span<const double>> outputs;
  std::vector<std::uint32_t> ids;
  std::vector<double> grad_doc;
  std::vector<double> grad_out;

  explicit StepBuffers(std::size_t dim, std::size_t k)
      : grad_doc(dim), grad_out((k + 1) * dim) {
    outputs.reserve(k + 1);
    ids.reserve(k + 1);
  }

  void gather(const DocEmbeddingModel& m, std::span<const double> out_matrix,
              std::uint32_t target, Rng& rng) {
    const std::size_t dim = m.dim();
    ids.clear();
    outputs.clear();
    ids.push_back(target);
    for (std::size_t j = 0; j < m.config().negative; ++j) {
      const auto n = m.sample_noise(rng.uniform());
      if (n == target) continue;
      ids.push_back(n);
    }
    for (auto id : ids) outputs.push_back(out_matrix.subspan(std::size_t{id} * dim, dim));
  }
};

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double dbow_step(std::span<const double> doc, std::span<const std::span<const double>> outputs,
                 std::span<double> grad_doc, std::span<double> grad_outputs) {
  const std::size_t dim = doc.size();
  if (grad_doc.size() != dim || grad_outputs.size() < outputs.size() * dim) {
    throw Error(Errc::dimension_mismatch, "dbow_step: gradient buffers have the wrong size");
  }
  std::fill(grad_doc.begin(), grad_doc.end(), 0.0);
  double loss = 0.0;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    const auto u = outputs[j];
    if (u.size() != dim) throw Error(Errc::dimension_mismatch, "dbow_step: output vector size");
    const double x = dot(doc, u);
    const double label = j == 0 ? 1.0 : 0.0;
    loss += j == 0 ? neg_log_sigmoid(x) : neg_log_sigmoid(-x);
    const double g = sigmoid(x) - label;
    auto gu = grad_outputs.subspan(j * dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      grad_doc[i] += g * u[i];
      gu[i] = g * doc[i];
    }
  }
  return loss;
}

void TrainingConfig::validate() const {
  if (dim < 2) throw Error(Errc::invalid_config, "dbow: dim must be >= 2");
  if (epochs < 1) throw Error(Errc::invalid_config, "dbow: epochs must be >= 1");
  if (negative < 1) throw Error(Errc::invalid_config, "dbow: negative samples k must be >= 1");
  if (!(alpha_min > 0.0) || !(alpha_min <= alpha)) {
    throw Error(Errc::invalid_config, "dbow: require 0 < alpha_min <= alpha");
  }
  if (min_df < 1) throw Error(Errc::invalid_config, "dbow: min_df must be >= 1");
  if (!(noise_exponent > 0.0) || !std::isfinite(noise_exponent)) {
    throw Error(Errc::invalid_config, "dbow: noise_exponent must be positive");
  }
  if (!(sample >= 0.0) || !std::isfinite(sample)) {
    throw Error(Errc::invalid_config, "dbow: sample must be finite and >= 0");
  }
}

std::optional<std::uint32_t> DocEmbeddingModel::word_id(std::string_view w) const {
  auto it = word_index_.find(std::string(w));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> DocEmbeddingModel::doc_vector(std::size_t d) const {
  if (d >= num_docs_) throw Error(Errc::dimension_mismatch, "dbow: document index out of range");
  return std::span<const double>(doc_vectors_).subspan(d * dim(), dim());
}

std::span<const double> DocEmbeddingModel::word_output_vector(std::size_t w) const {
  if (w >= words_.size()) throw Error(Errc::dimension_mismatch, "dbow: word index out of range");
  return std::span<const double>(out_vectors_).subspan(w * dim(), dim());
}

void DocEmbeddingModel::index_words() {
  word_index_.clear();
  word_index_.reserve(words_.size());
  for (std::uint32_t i = 0; i < words_.size(); ++i) word_index_.emplace(words_[i], i);
}

void DocEmbeddingModel::init_noise() {
  noise_.assign(words_.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    noise_[i] = std::pow(static_cast<double>(word_counts_[i]), config_.noise_exponent);
    total += noise_[i];
  }
  double tokens = 0.0;
  for (auto c : word_counts_) tokens += static_cast<double>(c);
  keep_.assign(words_.size(), 1.0);
  if (config_.sample > 0.0) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      const double ratio = static_cast<double>(word_counts_[i]) / tokens / config_.sample;
      keep_[i] = std::min(1.0, (std::sqrt(ratio) + 1.0) / ratio);
    }
  }
  noise_cdf_.assign(words_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < noise_.size(); ++i) {
    noise_[i] /= total;
    acc += noise_[i];
    noise_cdf_[i] = acc;
  }
  if (!noise_cdf_.empty()) noise_cdf_.back() = 1.0;
}

std::uint32_t DocEmbeddingModel::sample_noise(double u) const {
  auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
  if (it == noise_cdf_.end()) --it;
  return static_cast<std::uint32_t>(it - noise_cdf_.begin());
}

DocEmbeddingModel DocEmbeddingModel::from_parts(TrainingConfig config,
                                                std::vector<std::string> words,
                                                std::vector<std::uint64_t> word_counts,
                                                std::size_t num_docs,
                                                std::vector<double> doc_vectors,
                                                std::vector<double> out_vectors,
                                                std::vector<double> epoch_losses) {
  config.validate();
  if (words.empty() || words.size() != word_counts.size() ||
      doc_vectors.size() != num_docs * config.dim ||
      out_vectors.size() != words.size() * config.dim) {
    throw Error(Errc::bad_format, "dbow: serialized model has inconsistent shapes");
  }
  for (auto c : word_counts) {
    if (c == 0) throw Error(Errc::bad_format, "dbow: zero word count");
  }
  DocEmbeddingModel m;
  m.config_ = config;
  m.words_ = std::move(words);
  m.word_counts_ = std::move(word_counts);
  m.num_docs_ = num_docs;
  m.doc_vectors_ = std::move(doc_vectors);
  m.out_vectors_ = std::move(out_vectors);
  m.epoch_losses_ = std::move(epoch_losses);
  m.index_words();
  m.init_noise();
  return m;
}

DocEmbeddingModel dbow_train(std::span<const std::string> corpus, const TrainingConfig& config) {
  config.validate();
  if (corpus.empty()) throw Error(Errc::empty_corpus, "dbow_train: corpus is empty");

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(corpus.size());
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> stats;  // word -> (df, count)
  for (const auto& doc : corpus) {
    tokenized.push_back(feature_tokens(doc));
    std::set<std::string_view> seen;
    for (const auto& w : tokenized.back()) {
      auto& [df, count] = stats[w];
      ++count;
      if (seen.insert(w).second) ++df;
    }
  }

  DocEmbeddingModel m;
  m.config_ = config;
  m.num_docs_ = corpus.size();
  for (const auto& [w, s] : stats) {
    if (s.first < config.min_df) continue;
    m.words_.push_back(w);
    m.word_counts_.push_back(s.second);
  }
  if (m.words_.empty()) {
    throw Error(Errc::empty_corpus, "dbow_train: no word reaches min_df");
  }
  m.index_words();
  m.init_noise();

  std::vector<std::vector<std::uint32_t>> docs(corpus.size());
  std::size_t total_tokens = 0;
  for (std::size_t d = 0; d < tokenized.size(); ++d) {
    for (const auto& w : tokenized[d]) {
      if (auto id = m.word_id(w)) docs[d].push_back(*id);
    }
    total_tokens += docs[d].size();
  }

  const std::size_t dim = config.dim;
  Rng rng(config.seed);
  m.doc_vectors_.assign(corpus.size() * dim, 0.0);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    init_vector(std::span<double>(m.doc_vectors_).subspan(d * dim, dim), rng);
  }
  m.out_vectors_.assign(m.words_.size() * dim, 0.0);

  StepBuffers buf(dim, config.negative);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t d = 0; d < order.size(); ++d) order[d] = d;

  const double total_steps = static_cast<double>(std::max<std::size_t>(1, total_tokens * config.epochs));
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t d : order) {
      auto v = std::span<double>(m.doc_vectors_).subspan(d * dim, dim);
      for (auto target : docs[d]) {
        const double progress = static_cast<double>(step++) / total_steps;
        if (m.keep_[target] < 1.0 && rng.uniform() >= m.keep_[target]) continue;
        const double alpha = config.alpha - (config.alpha - config.alpha_min) * progress;
        buf.gather(m, m.out_vectors_, target, rng);
        epoch_loss += dbow_step(v, buf.outputs, buf.grad_doc, buf.grad_out);
        ++epoch_steps;
        for (std::size_t j = 0; j < buf.ids.size(); ++j) {
          double* u = m.out_vectors_.data() + std::size_t{buf.ids[j]} * dim;
          const double* g = buf.grad_out.data() + j * dim;
          for (std::size_t i = 0; i < dim; ++i) u[i] -= alpha * g[i];
        }
        for (std::size_t i = 0; i < dim; ++i) v[i] -= alpha * buf.grad_doc[i];
      }
    }
    m.epoch_losses_.push_back(epoch_steps ? epoch_loss / static_cast<double>(epoch_steps) : 0.0);
  }
  return m;
}

InferredVector dbow_infer(const DocEmbeddingModel& model, std::string_view doc, std::size_t steps,
                          std::optional<std::uint64_t> seed) {
  const std::size_t dim = model.dim();
  InferredVector out;
  out.values.assign(dim, 0.0);

  std::vector<std::uint32_t> ids;
  for (const auto& w : feature_tokens(doc)) {
    if (auto id = model.word_id(w)) ids.push_back(*id);
  }
  if (ids.empty() || dim == 0) {
    out.empty = true;
    return out;
  }

  Rng rng(seed.value_or(model.config().seed) ^ text::fnv1a(doc));
  init_vector(out.values, rng);

  const auto& cfg = model.config();
  StepBuffers buf(dim, cfg.negative);
  const double total = static_cast<double>(std::max<std::size_t>(1, steps * ids.size()));
  std::size_t step = 0;
  for (std::size_t pass = 0; pass < steps; ++pass) {
    for (auto target : ids) {
      const double alpha =
          cfg.alpha - (cfg.alpha - cfg.alpha_min) * static_cast<double>(step++) / total;
      const double keep = model.keep_probability(target);
      if (keep < 1.0 && rng.uniform() >= keep) continue;
      buf.gather(model, model.output_matrix(), target, rng);
      dbow_step(out.values, buf.outputs, buf.grad_doc, buf.grad_out);
      for (std::size_t i = 0; i < dim; ++i) out.values[i] -= alpha * buf.grad_doc[i];
    }
  }
  return out;
}

}  // namespace safechat::features
