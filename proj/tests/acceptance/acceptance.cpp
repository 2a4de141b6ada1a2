// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "safechat/app.hpp"
#include "safechat/features.hpp"
#include "safechat/io.hpp"
#include "safechat/ner_validation.hpp"
#include "safechat/rng.hpp"
#include "safechat/service.hpp"
#include "scenarios.hpp"

using namespace safechat;
using nlohmann::json;

namespace {

// Pinned tolerances and budgets.
constexpr double kTfIdfTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kHarassmentMin = 0.95;
constexpr double kTypeMin = 0.80;
constexpr double kLocationMin = 0.90;
constexpr double kDateMin = 0.90;
constexpr double kTimeMin = 0.80;
constexpr double kTfIdfBudget = 5.0;
constexpr double kGradBudget = 10.0;
constexpr double kTrainBudget = 120.0;
constexpr double kNerBudget = 30.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- TF-IDF --------------------------------------------------------------------------------

std::vector<std::string> random_corpus(Rng& rng, std::size_t max_docs, std::size_t max_tokens) {
  static const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g"};
  std::vector<std::string> corpus(1 + rng.below(max_docs));
  for (auto& doc : corpus) {
    for (auto n = 1 + rng.below(max_tokens); n > 0; --n) {
      if (!doc.empty()) doc += ' ';
      doc += words[rng.below(words.size())];
    }
  }
  return corpus;
}

Outcome tfidf_oracle() {
  const auto t0 = Clock::now();
  Rng rng(20);
  double worst = 0;
  std::size_t components = 0;
  bool vocab_ok = true;
  for (int round = 0; round < 20; ++round) {
    const auto corpus = random_corpus(rng, 10, 30);
    // min_df 1 keeps every vocabulary non-empty.
    const auto ref = oracle::tfidf(corpus, 3, 1);
    const auto model = features::tfidf_fit(corpus, features::build_vocabulary(corpus, 3, 1));
    if (model.dim() != ref.vocabulary.size()) {
      vocab_ok = false;
      continue;
    }
    for (std::size_t i = 0; i < ref.vocabulary.size(); ++i) {
      vocab_ok = vocab_ok && model.vocabulary().ngram(static_cast<std::uint32_t>(i)) == ref.vocabulary[i];
    }
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto v = features::tfidf_transform(model, corpus[d]);
      std::vector<double> dense(v.dim, 0.0);
      for (std::size_t k = 0; k < v.nnz(); ++k) dense[v.indices[k]] = v.values[k];
      for (std::size_t i = 0; i < dense.size(); ++i) {
        worst = std::max(worst, std::abs(dense[i] - ref.docs[d][i]));
        ++components;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {vocab_ok && worst <= kTfIdfTol && secs < kTfIdfBudget,
          fmt::format("max |diff| {:.2e} over {} components, vocabularies {}, {:.2f} s", worst, components,
                      vocab_ok ? "equal" : "DIFFER", secs)};
}

// ---- DBOW gradient -------------------------------------------------------------------------

Outcome dbow_gradient() {
  const auto t0 = Clock::now();
  Rng rng(100);
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
  for (int round = 0; round < 100; ++round) {
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
    features::dbow_step(doc, views, g_doc, g_out);
    for (std::size_t i = 0; i < dim; ++i) {
      auto p = doc, m = doc;
      p[i] += kGradStep;
      m[i] -= kGradStep;
      const double fd = (oracle::ns_loss(p, outs) - oracle::ns_loss(m, outs)) / (2 * kGradStep);
      worst = std::max(worst, rel(g_doc[i], fd));
    }
    for (std::size_t j = 0; j <= k; ++j) {
      for (std::size_t i = 0; i < dim; ++i) {
        auto p = outs, m = outs;
        p[j][i] += kGradStep;
        m[j][i] -= kGradStep;
        const double fd = (oracle::ns_loss(doc, p) - oracle::ns_loss(doc, m)) / (2 * kGradStep);
        worst = std::max(worst, rel(g_out[j * dim + i], fd));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradBudget,
          fmt::format("max relative error {:.2e} over 100 configurations, {:.2f} s", worst, secs)};
}

// ---- classification ------------------------------------------------------------------------

std::optional<classify::TrainOutcome> g_model;

Outcome classification() {
  const auto t0 = Clock::now();
  g_model = support::train_reference_model();
  const auto& report = g_model->held_out;
  const double secs = seconds_since(t0);
  bool pass = secs < kTrainBudget;
  std::string detail;
  for (auto t : classify::kTasks) {
    const auto& m = report.per_task[static_cast<std::size_t>(t)];
    const double acc = m ? m->accuracy : 0.0;
    const double min = t == classify::Task::harassment ? kHarassmentMin : kTypeMin;
    pass = pass && m && acc >= min;
    detail += fmt::format("{} {:.4f} (>= {:.2f}), ", classify::task_name(t), acc, min);
  }
  return {pass, detail + fmt::format("{:.1f} s", secs)};
}

// ---- NER -----------------------------------------------------------------------------------

Outcome ner_validation_run() {
  const auto t0 = Clock::now();
  const auto d = support::data_dir();
  const auto templates = ner_validation::load_templates(d / "ner_templates.txt");
  const auto gazetteer = ner::Gazetteer::load(d / "gazetteer.csv", d / "gazetteer_stoplist.txt");
  const auto resources = preprocess::Resources::load_directory(d);
  auto kb = ner::FixtureKB::load(d / "kb_fixture.tsv");
  const auto ref = support::scenario_ref();
  auto extractor = [&](std::string_view text) { return app::extract_report(text, ref, gazetteer, &kb, resources); };
  const auto result = ner_validation::validate(extractor, templates, 100, gazetteer, ref, 42);
  const double secs = seconds_since(t0);
  const double loc = result.of(ner::EntityKind::location).accuracy();
  const double date = result.of(ner::EntityKind::date).accuracy();
  const double time = result.of(ner::EntityKind::time).accuracy();
  return {templates.size() == 5 && loc >= kLocationMin && date >= kDateMin && time >= kTimeMin && secs < kNerBudget,
          fmt::format("{} templates x 100: location {:.3f} (>= {:.2f}), date {:.3f} (>= {:.2f}), time {:.3f} "
                      "(>= {:.2f}), {:.2f} s",
                      templates.size(), loc, kLocationMin, date, kDateMin, time, kTimeMin, secs)};
}

// ---- temporal ------------------------------------------------------------------------------

ner::TemporalRef ref_on(const oracle::Civil& c) {
  ner::TemporalRef r;
  r.date = std::chrono::year{c.y} / std::chrono::month{c.m} / std::chrono::day{c.d};
  return r;
}

std::optional<oracle::Civil> single_date(std::string_view text, const ner::TemporalRef& ref) {
  const auto x = ner::extract_dates(text, ref);
  if (x.size() != 1 || !x[0].date()->resolved()) return std::nullopt;
  const auto& d = *x[0].date()->date;
  return oracle::Civil{static_cast<int>(d.year()), static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day())};
}

Outcome temporal() {
  Rng rng(1000);
  int yesterday_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const long z = oracle::to_days({1990, 1, 1}) + static_cast<long>(rng.below(365 * 40));
    if (single_date("it was yesterday", ref_on(oracle::from_days(z))) != oracle::from_days(z - 1)) ++yesterday_bad;
  }
  const bool long_form =
      single_date("on the 5th July 2019", support::scenario_ref()) == oracle::Civil{2019, 7, 5};

  int months_bad = 0;
  int months_total = 0;
  std::vector<oracle::Civil> refs{{2019, 7, 6}, {2019, 3, 31}, {2020, 3, 31}, {2019, 5, 31},
                                  {2019, 7, 31}, {2000, 3, 29}, {2021, 10, 31}};
  for (int i = 0; i < 500; ++i) {
    refs.push_back(oracle::from_days(oracle::to_days({1995, 1, 1}) + static_cast<long>(rng.below(9000))));
  }
  for (const auto& c : refs) {
    ++months_total;
    if (single_date("5 months ago", ref_on(c)) != oracle::shift_months(c, -5)) ++months_bad;
  }
  return {yesterday_bad == 0 && long_form && months_bad == 0,
          fmt::format("yesterday {}/1000 exact, long form {}, 5 months ago {}/{} exact", 1000 - yesterday_bad,
                      long_form ? "exact" : "WRONG", months_total - months_bad, months_total)};
}

// ---- dialogue ------------------------------------------------------------------------------

std::optional<app::Runtime> g_runtime;

dialogue::Services model_services() {
  return g_runtime->services([] { return support::scenario_ref(); });
}

Outcome golden() {
  const auto services = model_services();
  std::string detail;
  bool pass = true;
  for (const char* name : support::kScenarios) {
    const auto got = support::parse_golden(support::render_session(services, support::read_script(name)));
    const auto want = support::parse_golden(support::read_golden(name));
    auto states = [](const std::vector<support::GoldenTurn>& turns) {
      std::vector<std::string> out;
      for (const auto& t : turns) out.push_back(t.state);
      return out;
    };
    auto kinds = [](const std::vector<support::GoldenTurn>& turns) {
      std::vector<std::string> out;
      for (const auto& t : turns) {
        for (const auto& b : t.bot) out.push_back(b.first);
      }
      return out;
    };
    auto texts = [](const std::vector<support::GoldenTurn>& turns) {
      std::vector<std::string> out;
      for (const auto& t : turns) {
        for (const auto& b : t.bot) out.push_back(b.second);
      }
      return out;
    };
    const bool st = states(got) == states(want);
    const bool kd = kinds(got) == kinds(want);
    const bool tx = texts(got) == texts(want);
    pass = pass && st && kd && tx;
    detail += fmt::format("{}: states {}, kinds {}, text {}; ", name, st ? "equal" : "DIFFER", kd ? "equal" : "DIFFER",
                          tx ? "equal" : "DIFFER");
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

const std::vector<std::string>& non_answers() {
  static const std::vector<std::string> pool{
      "I do not know", "no idea", "I cannot remember", "hmm", "what?", "maybe", "whatever",
      "yes and no", "?", "...", "asdfgh qwerty", "12345", "can you recommend a good restaurant",
      "the weather is nice today", "\xF0\x9F\x98\x80\xF0\x9F\x98\x80", "   x   ", "why do you ask",
      "somewhere", "sometime", "later", "A man kept staring at me and followed me",
      "Someone grabbed me on the bus", "He shouted insults at me", "in", "at", "\t",
      std::string(400, 'a'), "near the old church by the river", "it was a long time ago"};
  return pool;
}

Outcome termination_fuzz() {
  auto services = model_services();
  std::size_t persisted = 0;
  services.persist = [&](const dialogue::SessionContext&) { ++persisted; };
  const int bound = dialogue::max_user_turns(services.config);
  const auto& pool = non_answers();
  int ended = 0;
  int worst = 0;
  std::size_t consent_yes = 0;
  Rng rng(7);
  for (int s = 0; s < 1000; ++s) {
    auto step = dialogue::start(services);
    int turns = 0;
    while (step.state.phase != dialogue::Phase::ended && turns < bound) {
      const auto& msg = pool[rng.below(pool.size())];
      if (step.state.phase == dialogue::Phase::consent_query &&
          dialogue::interpret_yes_no(msg) == dialogue::Answer::yes) {
        ++consent_yes;
      }
      step = dialogue::advance(step.state, std::move(step.context), msg, services);
      ++turns;
    }
    if (step.state.phase == dialogue::Phase::ended) ++ended;
    worst = std::max(worst, turns);
  }
  return {ended == 1000 && persisted == consent_yes && persisted == 0,
          fmt::format("{}/1000 ended, longest {} turns (bound {}), {} persist calls", ended, worst, bound, persisted)};
}

// ---- service concurrency ---------------------------------------------------------------------

struct Turn {
  std::vector<std::pair<std::string, std::string>> replies;  // kind, text
  std::string state;
  bool operator==(const Turn&) const = default;
};

Turn turn_of(const dialogue::Step& step) {
  Turn t{{}, dialogue::to_string(step.state)};
  for (const auto& r : step.replies) t.replies.emplace_back(dialogue::reply_kind_name(r.kind), r.text);
  return t;
}

Turn turn_of(const json& body) {
  Turn t{{}, body.at("state").get<std::string>()};
  for (const auto& r : body.at("replies")) t.replies.emplace_back(r.at("kind"), r.at("text"));
  return t;
}

struct Replay {
  std::vector<std::string> sent;
  std::vector<Turn> turns;  // turns[0] is the greeting
  std::string accumulated_text;
  bool persisted = false;
};

Replay serial_replay(const dialogue::Services& base, const std::vector<std::string>& script) {
  auto services = base;
  Replay r;
  services.persist = [&](const dialogue::SessionContext&) { r.persisted = true; };
  auto step = dialogue::start(services);
  r.turns.push_back(turn_of(step));
  for (const auto& msg : script) {
    if (step.state.phase == dialogue::Phase::ended) break;
    r.sent.push_back(msg);
    step = dialogue::advance(step.state, std::move(step.context), msg, services);
    r.turns.push_back(turn_of(step));
  }
  r.accumulated_text = step.context.accumulated_text;
  return r;
}

std::vector<std::string> session_script(Rng& rng, std::size_t n) {
  static const std::vector<std::string> incidents{
      "A man grabbed me and touched me against my will",
      "A group of guys shouted sexual comments at me and called me names",
      "A man kept staring at me and followed me for a long time"};
  static const std::vector<std::string> answers{
      "yes", "no", "yes", "no", "in Maastricht", "yesterday", "at 10pm", "Heerlen actually",
      "last Friday", "around 3pm", "I do not know", "near Vrijthof", "on 12 June", "hello?"};
  std::vector<std::string> s{incidents[rng.below(incidents.size())] + " (" + std::to_string(rng.below(1000)) + ")"};
  while (s.size() < n) s.push_back(answers[rng.below(answers.size())]);
  return s;
}

struct Live {
  std::vector<Turn> turns;
  std::vector<std::string> ids;  // session_id of every response
  std::string id;
  bool transport_ok = true;
};

Live drive(int port, const std::vector<std::string>& script) {
  Live live;
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60);
  auto created = client.Post("/sessions", "", "application/json");
  if (!created || created->status != 201) {
    live.transport_ok = false;
    return live;
  }
  auto body = json::parse(created->body);
  live.id = body.at("session_id");
  live.ids.push_back(live.id);
  live.turns.push_back(turn_of(body));
  for (const auto& msg : script) {
    if (live.turns.back().state == "ENDED") break;
    auto r = client.Post("/sessions/" + live.id + "/messages", json{{"text", msg}}.dump(), "application/json");
    if (!r || r->status != 200) {
      live.transport_ok = false;
      return live;
    }
    body = json::parse(r->body);
    live.ids.push_back(body.at("session_id"));
    live.turns.push_back(turn_of(body));
  }
  return live;
}

// Runs every script in its own thread, all released by one barrier.
std::vector<Live> drive_all(int port, const std::vector<std::vector<std::string>>& scripts) {
  std::vector<Live> out(scripts.size());
  std::barrier go(static_cast<std::ptrdiff_t>(scripts.size()));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    threads.emplace_back([&, i] {
      go.arrive_and_wait();
      out[i] = drive(port, scripts[i]);
    });
  }
  for (auto& t : threads) t.join();
  return out;
}

Outcome concurrency() {
  const auto services = model_services();
  support::TempDir dir("acceptance");
  auto store = std::make_shared<service::ReportStore>(dir / "reports.jsonl");
  service::SessionManager sessions(services, store, {.max_sessions = 200});
  service::Health health;
  for (auto* s : {&health.model, &health.gazetteer, &health.phrases, &health.guidance, &health.store}) {
    *s = {true, "acceptance"};
  }
  service::HttpServer server(sessions, health, std::nullopt, 16);
  if (!server.bind("127.0.0.1", 0)) return {false, "cannot bind a loopback port"};
  std::thread serving([&] { server.serve(); });

  Rng rng(50);
  std::vector<std::vector<std::string>> scripts;
  for (int i = 0; i < 50; ++i) scripts.push_back(session_script(rng, 10));
  std::vector<Replay> expected;
  std::size_t expected_stored = 0;
  for (const auto& s : scripts) {
    expected.push_back(serial_replay(services, s));
    expected_stored += expected.back().persisted ? 1 : 0;
  }

  const auto live = drive_all(server.port(), scripts);
  int equal = 0;
  int leaks = 0;
  std::size_t messages = 0;
  int transport_failures = 0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    transport_failures += live[i].transport_ok ? 0 : 1;
    messages += live[i].turns.empty() ? 0 : live[i].turns.size() - 1;
    if (live[i].turns == expected[i].turns) ++equal;
    for (const auto& id : live[i].ids) leaks += id == live[i].id ? 0 : 1;
    const auto ctx = sessions.context(live[i].id);
    if (!ctx || ctx->accumulated_text != expected[i].accumulated_text) ++leaks;
  }
  const auto stored_lines = store->read_all().size();

  // Consent-no conversations must not touch the store.
  const auto before = std::filesystem::exists(store->path()) ? io::read_file(store->path()) : std::string();
  std::vector<std::vector<std::string>> declines(50, support::read_script("scenario2"));
  const auto declined = drive_all(server.port(), declines);
  const auto after = std::filesystem::exists(store->path()) ? io::read_file(store->path()) : std::string();
  bool declines_ended = true;
  for (const auto& d : declined) {
    declines_ended = declines_ended && d.transport_ok && !d.turns.empty() && d.turns.back().state == "ENDED";
  }

  server.stop();
  serving.join();
  const bool pass = transport_failures == 0 && equal == 50 && leaks == 0 && stored_lines == expected_stored && before == after &&
                    declines_ended;
  return {pass, fmt::format("{}/50 transcripts equal serial replay ({} messages, {} transport failures), {} leaks, "
                            "{} stored (expected {}), store {} after 50 consent-no sessions",
                            equal, messages, transport_failures, leaks, stored_lines, expected_stored,
                            before == after ? "byte-identical" : "CHANGED")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  bool needs_model = false;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"tfidf matches the brute-force oracle", tfidf_oracle},
      {"dbow step gradient matches finite differences", dbow_gradient},
      {"classification held-out accuracy", classification},
      {"ner validation accuracy", ner_validation_run},
      {"temporal expressions", temporal},
      {"dialogue golden transcripts", golden, true},
      {"dialogue termination fuzz", termination_fuzz, true},
      {"service concurrency", concurrency, true},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      if (c.needs_model && !g_runtime) {
        if (!g_model) throw std::runtime_error("no trained model");
        g_runtime.emplace(support::runtime_with(
            std::make_shared<const classify::EnsembleClassifier>(g_model->ensemble)));
      }
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
