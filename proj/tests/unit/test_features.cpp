#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "safechat/error.hpp"
#include "safechat/features.hpp"
#include "safechat/rng.hpp"

using namespace safechat;
using namespace safechat::features;

namespace {

std::vector<std::string> random_corpus(Rng& rng, std::size_t max_docs, std::size_t max_tokens) {
  static const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  std::vector<std::string> corpus(1 + rng.below(max_docs));
  for (auto& doc : corpus) {
    for (auto n = rng.below(max_tokens + 1); n > 0; --n) {
      if (!doc.empty()) doc += ' ';
      doc += words[rng.below(words.size())];
    }
  }
  return corpus;
}

std::vector<double> dense(const SparseVector& v) {
  std::vector<double> out(v.dim, 0.0);
  for (std::size_t i = 0; i < v.nnz(); ++i) out[v.indices[i]] = v.values[i];
  return out;
}

}  // namespace

TEST_CASE("vocabulary enumerates n-grams") {
  const std::vector<std::string> corpus{"a b", "b c"};
  const auto v = build_vocabulary(corpus, 3, 1);
  CHECK(v.size() == 5);
  for (const char* g : {"a", "b", "c", "a b", "b c"}) CHECK(v.id(g).has_value());
  CHECK(v.corpus_size() == 2);

  const std::vector<std::string> twice{"a", "a"};
  const auto w = build_vocabulary(twice, 3, 2);
  REQUIRE(w.size() == 1);
  CHECK(w.df(*w.id("a")) == 2);

  CHECK_THROWS(build_vocabulary(std::vector<std::string>{}, 3, 1));
}

TEST_CASE("idf values") {
  const std::vector<std::string> c2{"a b", "c"};
  const auto t2 = tfidf_fit(c2, build_vocabulary(c2, 1, 1));
  CHECK(t2.idf()[*t2.vocabulary().id("a")] == doctest::Approx(0.6931471805599453).epsilon(1e-12));

  const std::vector<std::string> c4{"x y", "x", "x y", "x"};
  const auto t4 = tfidf_fit(c4, build_vocabulary(c4, 1, 1));
  CHECK(t4.idf()[*t4.vocabulary().id("x")] == 0.0);
  CHECK(t4.idf()[*t4.vocabulary().id("y")] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("tfidf transform: hand cases") {
  const std::vector<std::string> corpus{"a b", "c"};
  const auto t = tfidf_fit(corpus, build_vocabulary(corpus, 3, 1));
  const auto v = tfidf_transform(t, "a a");
  REQUIRE(v.nnz() == 1);
  CHECK(v.indices[0] == *t.vocabulary().id("a"));
  CHECK(v.values[0] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(tfidf_transform(t, "").nnz() == 0);
  const std::vector<std::string> same{"x", "x"};
  const auto ts = tfidf_fit(same, build_vocabulary(same, 1, 1));
  CHECK(tfidf_transform(ts, "x x").norm() == 0.0);
}

TEST_CASE("tfidf equals the brute-force oracle on random corpora") {
  Rng rng(2024);
  for (int round = 0; round < 50; ++round) {
    const auto corpus = random_corpus(rng, 10, 30);
    const std::size_t min_df = 1 + rng.below(2);
    const auto ref = oracle::tfidf(corpus, 3, min_df);
    if (ref.vocabulary.empty()) {
      // Nothing reaches min_df: a zero-dimensional model that maps every document to the empty vector.
      const auto t = tfidf_fit(corpus, build_vocabulary(corpus, 3, min_df));
      CHECK(t.dim() == 0);
      CHECK(tfidf_transform(t, corpus[0]).nnz() == 0);
      continue;
    }
    const auto t = tfidf_fit(corpus, build_vocabulary(corpus, 3, min_df));
    REQUIRE(t.dim() == ref.vocabulary.size());
    for (std::size_t i = 0; i < ref.vocabulary.size(); ++i) {
      CHECK(t.vocabulary().ngram(static_cast<std::uint32_t>(i)) == ref.vocabulary[i]);
    }
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto v = tfidf_transform(t, corpus[d]);
      for (std::size_t k = 1; k < v.nnz(); ++k) CHECK(v.indices[k - 1] < v.indices[k]);
      const double n = v.norm();
      CHECK((n == 0.0 || std::abs(n - 1.0) <= 1e-9));
      const auto got = dense(v);
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - ref.docs[d][i]) <= 1e-9);
    }
  }
}

TEST_CASE("idf decreases with document frequency") {
  Rng rng(8);
  for (int round = 0; round < 20; ++round) {
    const auto corpus = random_corpus(rng, 10, 12);
    const auto vocab = build_vocabulary(corpus, 2, 1);
    if (vocab.size() == 0) continue;
    const auto t = tfidf_fit(corpus, vocab);
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
      for (std::uint32_t j = 0; j < vocab.size(); ++j) {
        if (vocab.df(i) < vocab.df(j)) CHECK(t.idf()[i] > t.idf()[j]);
      }
    }
  }
}

TEST_CASE("dbow step gradients match central differences") {
  Rng rng(17);
  const double h = 1e-5;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
  };
  for (int round = 0; round < 30; ++round) {
    const std::size_t dim = 1 + rng.below(16);
    const std::size_t k = 1 + rng.below(5);
    std::vector<double> doc(dim);
    for (double& x : doc) x = rng.uniform(-1, 1);
    std::vector<std::vector<double>> outs(k + 1, std::vector<double>(dim));
    for (auto& o : outs) {
      for (double& x : o) x = rng.uniform(-1, 1);
    }
    std::vector<std::span<const double>> views(outs.begin(), outs.end());
    std::vector<double> g_doc(dim);
    std::vector<double> g_out((k + 1) * dim);
    const double loss = dbow_step(doc, views, g_doc, g_out);
    CHECK(loss == doctest::Approx(oracle::ns_loss(doc, outs)).epsilon(1e-12));
    for (std::size_t i = 0; i < dim; ++i) {
      auto p = doc, m = doc;
      p[i] += h;
      m[i] -= h;
      const double fd = (oracle::ns_loss(p, outs) - oracle::ns_loss(m, outs)) / (2 * h);
      CHECK(rel(g_doc[i], fd) < 1e-4);
    }
    for (std::size_t j = 0; j <= k; ++j) {
      for (std::size_t i = 0; i < dim; ++i) {
        auto p = outs, m = outs;
        p[j][i] += h;
        m[j][i] -= h;
        const double fd = (oracle::ns_loss(doc, p) - oracle::ns_loss(doc, m)) / (2 * h);
        CHECK(rel(g_out[j * dim + i], fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("dbow: identical documents converge, single document trains") {
  TrainingConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.sample = 0.0;
  const std::vector<std::string> twins{"the man followed me home from the station",
                                       "the man followed me home from the station"};
  const auto m = dbow_train(twins, cfg);
  CHECK(cosine(m.doc_vector(0), m.doc_vector(1)) >= 0.9);

  const std::vector<std::string> one{"just one document here"};
  const auto s = dbow_train(one, cfg);
  for (double x : s.doc_vector(0)) CHECK(std::isfinite(x));
}

TEST_CASE("dbow: inference recovers trained vectors and is deterministic") {
  std::vector<std::string> corpus;
  Rng rng(3);
  const std::vector<std::string> words{"bus", "station", "man", "stare", "follow", "shout",
                                       "touch", "grab", "phone", "pizza", "movie", "great"};
  for (int d = 0; d < 40; ++d) {
    std::string doc;
    for (int t = 0; t < 12; ++t) doc += words[rng.below(words.size())] + " ";
    corpus.push_back(doc);
  }
  TrainingConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 60;
  cfg.sample = 0.0;
  const auto m = dbow_train(corpus, cfg);
  double mean_cos = 0.0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto v = dbow_infer(m, corpus[d], 200);
    mean_cos += cosine(v.values, m.doc_vector(d));
  }
  mean_cos /= static_cast<double>(corpus.size());
  CHECK(mean_cos >= 0.8);

  const auto a = dbow_infer(m, corpus[0], 20);
  const auto b = dbow_infer(m, corpus[0], 20);
  CHECK(a.values == b.values);
  const auto e = dbow_infer(m, "", 20);
  CHECK(e.empty);
  for (double x : e.values) CHECK(x == 0.0);

  const auto again = dbow_train(corpus, cfg);
  CHECK(std::equal(m.doc_matrix().begin(), m.doc_matrix().end(), again.doc_matrix().begin()));
}

TEST_CASE("dbow subsampling keep probability") {
  TrainingConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 1;
  cfg.sample = 0.01;
  std::vector<std::string> corpus(20, "the the the the the the the rare");
  const auto m = dbow_train(corpus, cfg);
  auto keep = [](double f, double t) { return std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f); };
  CHECK(m.keep_probability(*m.word_id("the")) == doctest::Approx(keep(7.0 / 8, 0.01)).epsilon(1e-12));
  CHECK(m.keep_probability(*m.word_id("rare")) == doctest::Approx(keep(1.0 / 8, 0.01)).epsilon(1e-12));

  cfg.sample = 0.0;
  const auto off = dbow_train(corpus, cfg);
  CHECK(off.keep_probability(*off.word_id("the")) == 1.0);
}

TEST_CASE("invalid dbow config is rejected") {
  TrainingConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
