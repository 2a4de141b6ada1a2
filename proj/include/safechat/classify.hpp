#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safechat/features.hpp"
#include "safechat/preprocess.hpp"

namespace safechat::classify {

enum class Task : std::uint8_t { harassment = 0, verbal = 1, non_verbal = 2, physical = 3 };
inline constexpr std::array<Task, 4> kTasks{Task::harassment, Task::verbal, Task::non_verbal,
                                            Task::physical};
std::string_view task_name(Task t) noexcept;  // HARASSMENT_OR_NOT, VERBAL, NON_VERBAL, PHYSICAL
std::optional<Task> parse_task(std::string_view name) noexcept;

enum class HarassmentType : std::uint8_t { verbal = 0, non_verbal = 1, physical = 2 };
std::string_view type_name(HarassmentType t) noexcept;  // VERBAL, NON_VERBAL, PHYSICAL
std::optional<HarassmentType> type_of(Task t) noexcept;

// Subset of harassment types; also the dialogue's intent set.
class TypeSet {
 public:
  constexpr TypeSet() = default;
  constexpr TypeSet(std::initializer_list<HarassmentType> types) {
    for (auto t : types) insert(t);
  }

  constexpr bool contains(HarassmentType t) const noexcept { return bits_ & bit(t); }
  constexpr void insert(HarassmentType t) noexcept { bits_ |= bit(t); }
  constexpr void erase(HarassmentType t) noexcept { bits_ &= static_cast<std::uint8_t>(~bit(t)); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  constexpr TypeSet& operator|=(TypeSet o) noexcept {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const TypeSet&) const = default;

  // Members in urgency order: physical, verbal, non-verbal.
  std::vector<HarassmentType> ordered() const;

 private:
  static constexpr std::uint8_t bit(HarassmentType t) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

struct LabeledReport {
  std::string text;
  TypeSet labels;
  bool is_harassment = false;
};

// Binary target of `task` for a report.
bool target(const LabeledReport& r, Task task) noexcept;

// Reports from a CSV with columns description, verbal, nonverbal, physical
// (0/1). A "serious physical" column, when present, is merged into physical.
// Every row is a harassment report.
std::vector<LabeledReport> load_corpus_csv(const std::filesystem::path& path);
// One non-harassment document per non-blank line.
std::vector<std::string> load_negatives(const std::filesystem::path& path);

// Majority class downsampled uniformly to the minority size, output shuffled.
std::vector<LabeledReport> balance_dataset(std::span<const LabeledReport> positives,
                                           std::span<const LabeledReport> negatives,
                                           std::uint64_t seed);

struct SplitSpec {
  double test_fraction = 0.30;
  std::uint64_t seed = 7;
};

struct Split {
  std::vector<LabeledReport> train;
  std::vector<LabeledReport> test;
};

// Per class, round-half-up(n * test_fraction) items go to test.
Split stratified_split(std::span<const LabeledReport> data, Task task, const SplitSpec& spec);

enum class FeatureKind : std::uint8_t { tfidf = 0, dbow = 1 };
std::string_view feature_kind_name(FeatureKind k) noexcept;

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  FeatureKind kind = FeatureKind::tfidf;

  std::size_t dim() const noexcept { return weights.size(); }
};

struct LogRegHyper {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lambda = 1e-4;
  double learning_rate = 5.0;  // step at epoch e is learning_rate / sqrt(e)
  std::uint64_t seed = 11;

  void validate() const;
  bool operator==(const LogRegHyper&) const = default;
};

// Mean L2-regularized log loss over the data set.
double logistic_loss(const LogisticModel& m, std::span<const features::SparseVector> x,
                     std::span<const std::uint8_t> y, double lambda);

// Mini-batch SGD with a proximal L2 step; the bias is not regularized.
// When loss_trace is given it receives the full-data loss after each epoch.
LogisticModel train_logreg(std::span<const features::SparseVector> x,
                           std::span<const std::uint8_t> y, const LogRegHyper& hyper,
                           FeatureKind kind, std::vector<double>* loss_trace = nullptr);

double predict_proba(const LogisticModel& m, const features::SparseVector& x);

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const Confusion&) const = default;
};

struct Metrics {
  Confusion confusion;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  bool operator==(const Metrics&) const = default;
};

// Precision/recall/F1 are 0 when their denominators are 0.
Metrics compute_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

struct EvalReport {
  std::array<std::optional<Metrics>, 4> per_task;  // indexed by Task
  bool operator==(const EvalReport&) const = default;
};

// One task's feature extractors and heads.
struct TaskPipeline {
  features::TfIdfVectorizer tfidf;
  features::DocEmbeddingModel dbow;
  LogisticModel tfidf_head;
  LogisticModel dbow_head;
  double cutoff = 0.5;
  std::size_t infer_steps = 20;
};

struct TaskScore {
  double p_tfidf = 0.5;
  double p_dbow = 0.5;
  double p = 0.5;
  bool decision = false;
};

struct Prediction {
  std::array<TaskScore, 4> scores;  // indexed by Task
  bool harassment = false;
  TypeSet types;  // empty unless harassment
};

struct TrainOptions {
  std::size_t ngram_max = 3;
  std::size_t tfidf_min_df = 2;
  features::TrainingConfig dbow;
  LogRegHyper logreg;
  SplitSpec split;
  std::uint64_t balance_seed = 5;
  std::size_t infer_steps = 20;
  double cutoff = 0.5;
  preprocess::PipelineConfig preprocess = preprocess::PipelineConfig::classify_defaults();
};

class EnsembleClassifier {
 public:
  EnsembleClassifier() = default;
  EnsembleClassifier(preprocess::PipelineConfig config, std::array<TaskPipeline, 4> tasks,
                     preprocess::Resources resources);

  const preprocess::PipelineConfig& preprocess_config() const noexcept { return config_; }
  const preprocess::Resources& resources() const noexcept { return resources_; }
  const TaskPipeline& task(Task t) const { return tasks_.at(static_cast<std::size_t>(t)); }
  TaskPipeline& task(Task t) { return tasks_.at(static_cast<std::size_t>(t)); }
  bool trained() const noexcept { return trained_; }

  std::string normalize(std::string_view raw) const;

  // Head probabilities for already-normalized text.
  TaskScore score_normalized(Task t, std::string_view normalized) const;
  Prediction predict_normalized(std::string_view normalized) const;
  Prediction predict(std::string_view raw) const;

 private:
  preprocess::PipelineConfig config_ = preprocess::PipelineConfig::classify_defaults();
  std::array<TaskPipeline, 4> tasks_;
  preprocess::Resources resources_;
  bool trained_ = false;
};

// Arithmetic mean of head probabilities, decision p >= cutoff, and the harassment
// gate applied to type decisions.
Prediction combine(std::array<TaskScore, 4> heads, const std::array<double, 4>& cutoffs);
inline Prediction ensemble_predict(const EnsembleClassifier& e, std::string_view raw) {
  return e.predict(raw);
}

struct TrainOutcome {
  EnsembleClassifier ensemble;
  EvalReport held_out;
};

// Fits all four task pipelines (balanced, stratified 70/30 per task) and
// evaluates each on its held-out split.
TrainOutcome train_ensemble(std::span<const LabeledReport> reports,
                            std::span<const std::string> negatives, const TrainOptions& options,
                            const preprocess::Resources& resources);

// Harassment head over reports + negatives; type heads over reports only, ungated.
EvalReport evaluate(const EnsembleClassifier& e, std::span<const LabeledReport> reports,
                    std::span<const std::string> negatives);

// Model bundle ("MTMB1" container).
void save_bundle(const EnsembleClassifier& e, const std::filesystem::path& path);
std::string serialize_bundle(const EnsembleClassifier& e);
EnsembleClassifier load_bundle(const std::filesystem::path& path, preprocess::Resources resources);
EnsembleClassifier deserialize_bundle(std::string_view bytes, preprocess::Resources resources);

struct SyntheticSpec {
  std::size_t n_docs = 2000;  // half reports, half negatives
  double label_noise = 0.0;   // probability of flipping each type label of a report
  std::uint64_t seed = 2020;
};

struct SyntheticCorpus {
  std::vector<LabeledReport> reports;
  std::vector<std::string> negatives;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);
void write_corpus_csv(std::span<const LabeledReport> reports, const std::filesystem::path& path);
void write_negatives(std::span<const std::string> docs, const std::filesystem::path& path);

}  // namespace safechat::classify
