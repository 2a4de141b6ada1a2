#include <cmath>

#include "safechat/classify.hpp"
#include "safechat/error.hpp"
#include "safechat/rng.hpp"

namespace safechat::classify {

namespace {

double margin(const LogisticModel& m, const features::SparseVector& x) {
  double z = m.bias;
  for (std::size_t k = 0; k < x.indices.size(); ++k) z += m.weights[x.indices[k]] * x.values[k];
  return z;
}

// ln(1 + e^-z) for y = 1, ln(1 + e^z) for y = 0.
double log_loss(double z, bool y) {
  const double s = y ? -z : z;
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

void check_vector(const features::SparseVector& x, std::size_t dim, std::size_t row) {
  if (x.dim != dim) {
    throw Error(Errc::dimension_mismatch, "logreg: row " + std::to_string(row) + " has dimension " +
                                              std::to_string(x.dim) + ", expected " +
                                              std::to_string(dim));
  }
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    if (x.indices[k] >= dim) throw Error(Errc::dimension_mismatch, "logreg: index out of range");
    if (!std::isfinite(x.values[k])) {
      throw Error(Errc::non_finite_feature,
                  "logreg: non-finite feature in row " + std::to_string(row));
    }
  }
}

}  // namespace

std::string_view feature_kind_name(FeatureKind k) noexcept {
  return k == FeatureKind::tfidf ? "TFIDF" : "DBOW";
}

void LogRegHyper::validate() const {
  if (epochs < 1) throw Error(Errc::invalid_config, "logreg: epochs must be >= 1");
  if (batch_size < 1) throw Error(Errc::invalid_config, "logreg: batch_size must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::invalid_config, "logreg: lambda must be finite and >= 0");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::invalid_config, "logreg: learning_rate must be positive");
  }
}

double logistic_loss(const LogisticModel& m, std::span<const features::SparseVector> x,
                     std::span<const std::uint8_t> y, double lambda) {
  if (x.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += log_loss(margin(m, x[i]), y[i] != 0);
  double w2 = 0.0;
  for (double w : m.weights) w2 += w * w;
  return total / static_cast<double>(x.size()) + 0.5 * lambda * w2;
}

LogisticModel train_logreg(std::span<const features::SparseVector> x,
                           std::span<const std::uint8_t> y, const LogRegHyper& hyper,
                           FeatureKind kind, std::vector<double>* loss_trace) {
  hyper.validate();
  if (x.size() != y.size()) {
    throw Error(Errc::dimension_mismatch, "train_logreg: feature and label counts differ");
  }
  std::size_t positives = 0;
  for (auto v : y) positives += v != 0;
  if (positives == 0 || positives == y.size()) {
    throw Error(Errc::single_class, "train_logreg: need at least one example of each class (" +
                                        std::to_string(positives) + " positive of " +
                                        std::to_string(y.size()) + ")");
  }
  const std::size_t dim = x.front().dim;
  for (std::size_t i = 0; i < x.size(); ++i) check_vector(x[i], dim, i);

  LogisticModel m;
  m.kind = kind;
  m.weights.assign(dim, 0.0);
  std::vector<double> grad(dim, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint8_t> is_touched(dim, 0);
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(hyper.seed);

  if (loss_trace) loss_trace->clear();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const double eta = hyper.learning_rate / std::sqrt(static_cast<double>(epoch));
    const double shrink = 1.0 / (1.0 + eta * hyper.lambda);
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - start);
      double grad_b = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& xi = x[order[b]];
        const double r = features::sigmoid(margin(m, xi)) - (y[order[b]] ? 1.0 : 0.0);
        grad_b += r;
        for (std::size_t k = 0; k < xi.indices.size(); ++k) {
          const auto j = xi.indices[k];
          if (!is_touched[j]) {
            is_touched[j] = 1;
            touched.push_back(j);
          }
          grad[j] += r * xi.values[k];
        }
      }
      for (std::size_t j = 0; j < dim; ++j) {
        m.weights[j] = (m.weights[j] - eta * grad[j] * inv_n) * shrink;
      }
      for (auto j : touched) {
        grad[j] = 0.0;
        is_touched[j] = 0;
      }
      touched.clear();
      m.bias -= eta * grad_b * inv_n;
    }
    if (loss_trace) loss_trace->push_back(logistic_loss(m, x, y, hyper.lambda));
  }
  return m;
}

double predict_proba(const LogisticModel& m, const features::SparseVector& x) {
  check_vector(x, m.dim(), 0);
  return features::sigmoid(margin(m, x));
}

Metrics compute_metrics(std::span<const std::uint8_t> predicted,
                        std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(Errc::dimension_mismatch, "metrics: prediction and label counts differ");
  }
  if (actual.empty()) throw Error(Errc::empty_test_set, "metrics: test set is empty");
  Metrics out;
  auto& c = out.confusion;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (!p && !a) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  out.accuracy = ratio(c.tp + c.tn, c.total());
  out.precision = ratio(c.tp, c.tp + c.fp);
  out.recall = ratio(c.tp, c.tp + c.fn);
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

}  // namespace safechat::classify
