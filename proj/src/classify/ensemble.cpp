#include <cmath>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "safechat/classify.hpp"
#include "safechat/error.hpp"

namespace safechat::classify {

namespace {

std::size_t idx(Task t) { return static_cast<std::size_t>(t); }

using NormCache = std::unordered_map<std::string, std::string>;

const std::string& normalized(NormCache& cache, const EnsembleClassifier& e,
                              const std::string& raw) {
  auto it = cache.find(raw);
  if (it == cache.end()) it = cache.emplace(raw, e.normalize(raw)).first;
  return it->second;
}

// Inferred vector scaled to unit length so both heads see features of the same scale.
features::SparseVector dbow_features(const TaskPipeline& p, std::string_view doc) {
  auto v = features::dbow_infer(p.dbow, doc, p.infer_steps);
  double n2 = 0.0;
  for (double x : v.values) n2 += x * x;
  if (n2 > 0.0) {
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v.values) x *= inv;
  }
  auto sv = features::SparseVector::from_dense(v.values);
  sv.dim = p.dbow.dim();
  return sv;
}

TaskPipeline fit_pipeline(Task task, const std::vector<std::string>& docs,
                          const std::vector<std::uint8_t>& labels, const TrainOptions& opt) {
  TaskPipeline p;
  p.cutoff = opt.cutoff;
  p.infer_steps = opt.infer_steps;

  auto vocab = features::build_vocabulary(docs, opt.ngram_max, opt.tfidf_min_df);
  p.tfidf = features::tfidf_fit(docs, std::move(vocab));

  auto dbow_cfg = opt.dbow;
  dbow_cfg.seed = opt.dbow.seed + idx(task);
  p.dbow = features::dbow_train(docs, dbow_cfg);

  std::vector<features::SparseVector> x_tfidf;
  std::vector<features::SparseVector> x_dbow;
  x_tfidf.reserve(docs.size());
  x_dbow.reserve(docs.size());
  for (const auto& d : docs) {
    x_tfidf.push_back(features::tfidf_transform(p.tfidf, d));
    x_dbow.push_back(dbow_features(p, d));
  }
  auto hyper = opt.logreg;
  hyper.seed = opt.logreg.seed + idx(task);
  p.tfidf_head = train_logreg(x_tfidf, labels, hyper, FeatureKind::tfidf);
  p.dbow_head = train_logreg(x_dbow, labels, hyper, FeatureKind::dbow);
  return p;
}

}  // namespace

EnsembleClassifier::EnsembleClassifier(preprocess::PipelineConfig config,
                                       std::array<TaskPipeline, 4> tasks,
                                       preprocess::Resources resources)
    : config_(config), tasks_(std::move(tasks)), resources_(std::move(resources)), trained_(true) {
  for (auto t : kTasks) {
    const auto& p = task(t);
    if (!(p.cutoff > 0.0 && p.cutoff < 1.0)) {
      throw Error(Errc::invalid_config, "ensemble: cutoff for " + std::string(task_name(t)) +
                                            " must be in (0, 1)");
    }
    if (p.tfidf_head.dim() != p.tfidf.dim() || p.dbow_head.dim() != p.dbow.dim()) {
      throw Error(Errc::dimension_mismatch,
                  "ensemble: head dimensionality does not match its vectorizer for " +
                      std::string(task_name(t)));
    }
  }
}

std::string EnsembleClassifier::normalize(std::string_view raw) const {
  return preprocess::preprocess_pipeline(raw, config_, resources_).text;
}

TaskScore EnsembleClassifier::score_normalized(Task t, std::string_view doc) const {
  if (!trained_) throw Error(Errc::invalid_config, "ensemble: classifier is not trained");
  const auto& p = task(t);
  TaskScore s;
  s.p_tfidf = predict_proba(p.tfidf_head, features::tfidf_transform(p.tfidf, doc));
  s.p_dbow = predict_proba(p.dbow_head, dbow_features(p, doc));
  s.p = (s.p_tfidf + s.p_dbow) / 2.0;
  s.decision = s.p >= p.cutoff;
  return s;
}

Prediction combine(std::array<TaskScore, 4> heads, const std::array<double, 4>& cutoffs) {
  Prediction out;
  for (auto t : kTasks) {
    auto& s = heads[idx(t)];
    s.p = (s.p_tfidf + s.p_dbow) / 2.0;
    s.decision = s.p >= cutoffs[idx(t)];
  }
  out.harassment = heads[idx(Task::harassment)].decision;
  for (auto t : kTasks) {
    auto type = type_of(t);
    if (!type) continue;
    if (!out.harassment) {
      heads[idx(t)].decision = false;
    } else if (heads[idx(t)].decision) {
      out.types.insert(*type);
    }
  }
  out.scores = heads;
  return out;
}

Prediction EnsembleClassifier::predict_normalized(std::string_view doc) const {
  std::array<TaskScore, 4> heads;
  std::array<double, 4> cutoffs{};
  for (auto t : kTasks) {
    heads[idx(t)] = score_normalized(t, doc);
    cutoffs[idx(t)] = task(t).cutoff;
  }
  return combine(heads, cutoffs);
}

Prediction EnsembleClassifier::predict(std::string_view raw) const {
  return predict_normalized(normalize(raw));
}

TrainOutcome train_ensemble(std::span<const LabeledReport> reports,
                            std::span<const std::string> negatives, const TrainOptions& options,
                            const preprocess::Resources& resources) {
  options.dbow.validate();
  options.logreg.validate();

  NormCache cache;
  auto norm = [&](const std::string& raw) -> const std::string& {
    auto it = cache.find(raw);
    if (it == cache.end()) {
      it = cache.emplace(raw, preprocess::preprocess_pipeline(raw, options.preprocess, resources).text)
               .first;
    }
    return it->second;
  };

  std::vector<LabeledReport> negative_reports;
  negative_reports.reserve(negatives.size());
  for (const auto& n : negatives) negative_reports.push_back({n, {}, false});

  std::array<TaskPipeline, 4> pipelines;
  std::array<std::vector<LabeledReport>, 4> test_sets;
  for (auto t : kTasks) {
    std::vector<LabeledReport> pos;
    std::vector<LabeledReport> neg;
    if (t == Task::harassment) {
      pos.assign(reports.begin(), reports.end());
      for (auto& r : pos) r.is_harassment = true;
      neg = negative_reports;
    } else {
      for (const auto& r : reports) (target(r, t) ? pos : neg).push_back(r);
    }
    auto balanced = balance_dataset(pos, neg, options.balance_seed + idx(t));
    auto split = stratified_split(balanced, t, options.split);

    std::vector<std::string> docs;
    std::vector<std::uint8_t> labels;
    docs.reserve(split.train.size());
    for (const auto& r : split.train) {
      docs.push_back(norm(r.text));
      labels.push_back(target(r, t) ? 1 : 0);
    }
    spdlog::info("training {}: {} train / {} test documents", task_name(t), split.train.size(),
                 split.test.size());
    pipelines[idx(t)] = fit_pipeline(t, docs, labels, options);
    test_sets[idx(t)] = std::move(split.test);
  }

  TrainOutcome out{EnsembleClassifier(options.preprocess, std::move(pipelines), resources), {}};
  for (auto t : kTasks) {
    std::vector<std::uint8_t> predicted;
    std::vector<std::uint8_t> actual;
    for (const auto& r : test_sets[idx(t)]) {
      predicted.push_back(out.ensemble.score_normalized(t, norm(r.text)).decision ? 1 : 0);
      actual.push_back(target(r, t) ? 1 : 0);
    }
    out.held_out.per_task[idx(t)] = compute_metrics(predicted, actual);
  }
  return out;
}

EvalReport evaluate(const EnsembleClassifier& e, std::span<const LabeledReport> reports,
                    std::span<const std::string> negatives) {
  if (reports.empty() && negatives.empty()) {
    throw Error(Errc::empty_test_set, "evaluate: test set is empty");
  }
  NormCache cache;
  EvalReport out;
  for (auto t : kTasks) {
    std::vector<std::uint8_t> predicted;
    std::vector<std::uint8_t> actual;
    for (const auto& r : reports) {
      predicted.push_back(e.score_normalized(t, normalized(cache, e, r.text)).decision ? 1 : 0);
      actual.push_back(t == Task::harassment ? 1 : (target(r, t) ? 1 : 0));
    }
    if (t == Task::harassment) {
      for (const auto& n : negatives) {
        predicted.push_back(e.score_normalized(t, normalized(cache, e, n)).decision ? 1 : 0);
        actual.push_back(0);
      }
    }
    if (!actual.empty()) out.per_task[idx(t)] = compute_metrics(predicted, actual);
  }
  return out;
}

}  // namespace safechat::classify
