#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "safechat/classify.hpp"
#include "safechat/error.hpp"
#include "safechat/rng.hpp"
#include "scenarios.hpp"

using namespace safechat;
using namespace safechat::classify;

namespace {

std::vector<LabeledReport> reports(std::size_t n, bool harassment) {
  std::vector<LabeledReport> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].text = "doc " + std::to_string(i) + (harassment ? " pos" : " neg");
    out[i].is_harassment = harassment;
  }
  return out;
}

features::SparseVector point(double a, double b) {
  const std::vector<double> d{a, b};
  return features::SparseVector::from_dense(d);
}

}  // namespace

TEST_CASE("balance downsamples the majority class") {
  const auto pos = reports(100, true);
  const auto neg = reports(40, false);
  const auto b = balance_dataset(pos, neg, 1);
  CHECK(std::count_if(b.begin(), b.end(), [](auto& r) { return r.is_harassment; }) == 40);
  CHECK(b.size() == 80);

  const auto even = balance_dataset(reports(40, true), neg, 1);
  CHECK(even.size() == 80);
  CHECK_THROWS_AS(balance_dataset(reports(0, true), neg, 1), Error);
}

TEST_CASE("stratified split rounds half up per class") {
  auto data = reports(10, true);
  const auto neg = reports(10, false);
  data.insert(data.end(), neg.begin(), neg.end());
  const auto s = stratified_split(data, Task::harassment, {});
  CHECK(std::count_if(s.test.begin(), s.test.end(), [](auto& r) { return r.is_harassment; }) == 3);
  CHECK(s.test.size() == 6);
  CHECK(s.train.size() == 14);

  const auto again = stratified_split(data, Task::harassment, {});
  for (std::size_t i = 0; i < s.test.size(); ++i) CHECK(s.test[i].text == again.test[i].text);

  auto tiny = reports(1, true);
  const auto many = reports(10, false);
  tiny.insert(tiny.end(), many.begin(), many.end());
  CHECK_THROWS_AS(stratified_split(tiny, Task::harassment, {}), Error);
}

TEST_CASE("logistic regression separates blobs") {
  Rng rng(4);
  std::vector<features::SparseVector> x;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 200; ++i) {
    const bool pos = i % 2 == 0;
    x.push_back(point((pos ? 1.0 : -1.0) + rng.uniform(-0.4, 0.4), rng.uniform(-1, 1)));
    y.push_back(pos);
  }
  const auto m = train_logreg(x, y, {}, FeatureKind::tfidf);
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += (predict_proba(m, x[i]) >= 0.5) == (y[i] == 1);
  CHECK(correct / 200.0 >= 0.99);

  // Loss trace is the full-data objective and ends below where it started.
  std::vector<double> trace;
  (void)train_logreg(x, y, {}, FeatureKind::tfidf, &trace);
  REQUIRE(trace.size() == 50);
  CHECK(trace.back() < trace.front());
}

TEST_CASE("all-zero features converge to the class prior") {
  std::vector<features::SparseVector> x(100);
  for (auto& v : x) v.dim = 3;
  std::vector<std::uint8_t> y(100, 0);
  for (int i = 0; i < 30; ++i) y[i] = 1;
  LogRegHyper h;
  h.epochs = 300;
  const auto m = train_logreg(x, y, h, FeatureKind::tfidf);
  CHECK(predict_proba(m, x[0]) == doctest::Approx(0.3).epsilon(0.01));
  CHECK(m.bias == doctest::Approx(std::log(0.3 / 0.7)).epsilon(0.05));
}

TEST_CASE("weight norm shrinks as lambda grows") {
  Rng rng(9);
  std::vector<features::SparseVector> x;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 100; ++i) {
    const bool pos = rng.uniform() < 0.5;
    x.push_back(point((pos ? 0.6 : -0.6) + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)));
    y.push_back(pos);
  }
  double prev = INFINITY;
  for (double lambda : {0.01, 1.0, 100.0}) {
    LogRegHyper h;
    h.lambda = lambda;
    const auto m = train_logreg(x, y, h, FeatureKind::tfidf);
    const double n = std::hypot(m.weights[0], m.weights[1]);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("predict_proba values") {
  LogisticModel m;
  m.weights = {0.0, 0.0};
  CHECK(predict_proba(m, point(1, 2)) == 0.5);
  m.weights = {std::log(3.0), 0.0};
  CHECK(predict_proba(m, point(1, 0)) == doctest::Approx(0.75).epsilon(1e-12));
  m.weights = {1.0, 0.0};
  CHECK(predict_proba(m, point(0.2, 0)) < predict_proba(m, point(0.3, 0)));
}

TEST_CASE("ensemble combination and the harassment gate") {
  std::array<TaskScore, 4> heads{};
  heads[0] = {0.9, 0.7};
  heads[1] = {0.8, 0.8};
  heads[2] = {0.2, 0.3};
  heads[3] = {0.6, 0.6};
  const std::array<double, 4> cut{0.5, 0.5, 0.5, 0.5};
  const auto p = combine(heads, cut);
  CHECK(p.scores[0].p == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p.scores[1].p == 0.8);
  CHECK(p.harassment);
  CHECK(p.types == TypeSet{HarassmentType::verbal, HarassmentType::physical});

  heads[0] = {0.3, 0.4};
  const auto gated = combine(heads, cut);
  CHECK_FALSE(gated.harassment);
  CHECK(gated.types.empty());
  CHECK_FALSE(gated.scores[1].decision);
  CHECK(gated.scores[1].p == 0.8);
}

TEST_CASE("metrics") {
  const std::vector<std::uint8_t> actual{1, 1, 0, 0};
  const auto perfect = compute_metrics(actual, actual);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.confusion.fp + perfect.confusion.fn == 0);

  const std::vector<std::uint8_t> allpos{1, 1, 1, 1};
  const auto m = compute_metrics(allpos, actual);
  CHECK(m.accuracy == 0.5);
  CHECK(m.recall == 1.0);
  CHECK(m.confusion.total() == 4);

  const std::vector<std::uint8_t> none{0, 0, 0, 0};
  CHECK(compute_metrics(none, actual).precision == 0.0);
}

TEST_CASE("corpus CSV merges serious physical into physical") {
  const auto dir = std::filesystem::temp_directory_path() / "safechat_csv_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.csv";
  {
    std::ofstream f(path);
    f << "description,verbal,nonverbal,physical,serious physical\n"
      << "\"He grabbed me, then ran\",0,0,0,1\n"
      << "He shouted at me,1,0,0,0\n";
  }
  const auto r = load_corpus_csv(path);
  REQUIRE(r.size() == 2);
  CHECK(r[0].text == "He grabbed me, then ran");
  CHECK(r[0].labels == TypeSet{HarassmentType::physical});
  CHECK(r[1].labels == TypeSet{HarassmentType::verbal});
  CHECK(r[0].is_harassment);
  std::filesystem::remove_all(dir);
}

TEST_CASE("small training run: reproducible and bundle round-trips bit-identically") {
  SyntheticSpec spec;
  spec.n_docs = 300;
  const auto corpus = generate_synthetic(spec);
  TrainOptions opt;
  opt.dbow.dim = 16;
  opt.dbow.epochs = 5;
  opt.logreg.epochs = 10;
  const auto res = preprocess::Resources::load_directory(support::data_dir());
  const auto a = train_ensemble(corpus.reports, corpus.negatives, opt, res);
  const auto b = train_ensemble(corpus.reports, corpus.negatives, opt, res);
  CHECK(a.held_out == b.held_out);

  const auto bytes = serialize_bundle(a.ensemble);
  CHECK(bytes.substr(0, 5) == "MTMB1");
  const auto back = deserialize_bundle(bytes, res);
  for (const char* text : {"a man grabbed me at the station", "great pizza downtown", "",
                           "he kept staring at me and whistled"}) {
    const auto p = a.ensemble.predict(text);
    const auto q = back.predict(text);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(p.scores[t].p_tfidf == q.scores[t].p_tfidf);
      CHECK(p.scores[t].p_dbow == q.scores[t].p_dbow);
      CHECK(p.scores[t].p == (p.scores[t].p_tfidf + p.scores[t].p_dbow) / 2.0);
    }
  }
  CHECK_THROWS_AS(deserialize_bundle(bytes.substr(0, bytes.size() / 2), res), Error);
  CHECK_THROWS_AS(deserialize_bundle("XXXX" + bytes.substr(4), res), Error);
}

TEST_CASE("synthetic generator is seeded") {
  SyntheticSpec spec;
  spec.n_docs = 50;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.reports.size() == 25);
  CHECK(a.negatives.size() == 25);
  for (std::size_t i = 0; i < a.reports.size(); ++i) CHECK(a.reports[i].text == b.reports[i].text);
  spec.seed = 1;
  CHECK(generate_synthetic(spec).reports[0].text != a.reports[0].text);
}
