#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "safechat/app.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/ner_validation.hpp"
#include "safechat/service.hpp"
#include "safechat/text.hpp"

namespace safechat::app {

namespace {

void require_file(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw Error(Errc::resource_missing, std::string(what) + " not found: " + p.string());
  }
}

ner::TemporalRef ref_from(const std::optional<std::string>& iso) {
  if (!iso) return ner::system_ref();
  const auto d = ner::parse_iso(*iso);
  if (!d) throw Error(Errc::invalid_config, "--ref-date must be YYYY-MM-DD, got '" + *iso + "'");
  ner::TemporalRef ref;
  ref.date = *d;
  return ref;
}

int report_error(std::ostream& err, const std::exception& e, int code) {
  err << "error: " << e.what() << '\n';
  return code;
}

}  // namespace

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SAFECHAT_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return SAFECHAT_DATA_DIR;
}

RuntimePaths RuntimePaths::defaults() {
  const auto d = data_dir();
  RuntimePaths p;
  p.gazetteer = d / "gazetteer.csv";
  p.stoplist = d / "gazetteer_stoplist.txt";
  p.phrases = d / "phrases.json";
  p.guidance = d / "guidance.json";
  p.resources = d;
  p.kb_fixture = d / "kb_fixture.tsv";
  return p;
}

Runtime load_runtime(const RuntimePaths& paths) {
  require_file(paths.bundle, "model bundle");
  Runtime rt;
  rt.resources = preprocess::Resources::load_directory(paths.resources);
  rt.classifier = std::make_shared<const classify::EnsembleClassifier>(
      classify::load_bundle(paths.bundle, rt.resources));
  rt.gazetteer = ner::Gazetteer::load(paths.gazetteer, paths.stoplist);
  if (paths.live_kb) {
    rt.kb = std::make_shared<ner::WikidataKB>(paths.kb);
  } else if (paths.kb_fixture) {
    rt.kb = std::make_shared<ner::FixtureKB>(ner::FixtureKB::load(*paths.kb_fixture));
  }
  rt.phrases = dialogue::Phrases::load(paths.phrases);
  rt.guidance = dialogue::GuidanceDirectory::load(paths.guidance);
  return rt;
}

ner::SlotExtraction extract_report(std::string_view text, const ner::TemporalRef& ref,
                                   const ner::Gazetteer& gazetteer, ner::KBClient* kb,
                                   const preprocess::Resources& resources) {
  const auto normalized =
      preprocess::preprocess_pipeline(text, preprocess::PipelineConfig::ner_defaults(), resources);
  return ner::extract_all(normalized.text, ref, gazetteer, kb);
}

dialogue::Services Runtime::services(std::function<ner::TemporalRef()> ref,
                                     dialogue::MachineConfig config) const {
  dialogue::Services s;
  auto clf = classifier;
  s.classify = [clf](std::string_view text) { return clf->predict(text); };
  s.extract = [this, ref = std::move(ref)](std::string_view text) {
    return extract_report(text, ref(), gazetteer, kb.get(), resources);
  };
  s.phrases = &phrases;
  s.guidance = &guidance;
  s.config = config;
  return s;
}

std::string transcript_line(dialogue::Speaker speaker, std::string_view text) {
  return fmt::format("{}: {}", dialogue::speaker_name(speaker), text);
}

std::string metrics_table(const classify::EvalReport& report) {
  std::string out = fmt::format("{:<18} {:>6} {:>9} {:>10} {:>7} {:>7}\n", "task", "n", "accuracy",
                                "precision", "recall", "f1");
  for (auto t : classify::kTasks) {
    const auto& m = report.per_task[static_cast<std::size_t>(t)];
    if (!m) continue;
    out += fmt::format("{:<18} {:>6} {:>9.4f} {:>10.4f} {:>7.4f} {:>7.4f}\n", classify::task_name(t),
                       m->confusion.total(), m->accuracy, m->precision, m->recall, m->f1);
  }
  return out;
}

std::string metrics_json(const classify::EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto t : classify::kTasks) {
    const auto& m = report.per_task[static_cast<std::size_t>(t)];
    if (!m) continue;
    j[std::string(classify::task_name(t))] = {
        {"n", m->confusion.total()}, {"accuracy", m->accuracy}, {"precision", m->precision},
        {"recall", m->recall},       {"f1", m->f1},             {"tp", m->confusion.tp},
        {"tn", m->confusion.tn},     {"fp", m->confusion.fp},   {"fn", m->confusion.fn}};
  }
  return j.dump(2);
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<classify::LabeledReport> reports;
  std::vector<std::string> negatives;
  preprocess::Resources resources;
  classify::TrainOptions opt;
  try {
    require_file(args.corpus, "corpus");
    require_file(args.negatives, "negatives");
    reports = classify::load_corpus_csv(args.corpus);
    negatives = classify::load_negatives(args.negatives);
    resources = preprocess::Resources::load_directory(args.resources);
    // One seed drives every random stage, offset so the default seed reproduces
    // the library defaults.
    opt.dbow.seed = args.seed;
    opt.logreg.seed = args.seed + 10;
    opt.split.seed = args.seed + 6;
    opt.balance_seed = args.seed + 4;
    opt.dbow.dim = args.dbow_dim;
    opt.dbow.epochs = args.dbow_epochs;
    opt.logreg.epochs = args.logreg_epochs;
    opt.logreg.learning_rate = args.learning_rate;
    opt.logreg.lambda = args.lambda;
    opt.ngram_max = args.ngram_max;
    opt.cutoff = args.cutoff;
    opt.dbow.validate();
    opt.logreg.validate();
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }
  try {
    auto outcome = classify::train_ensemble(reports, negatives, opt, resources);
    classify::save_bundle(outcome.ensemble, args.out);
    out << metrics_table(outcome.held_out);
    if (args.metrics_json) io::write_file(*args.metrics_json, metrics_json(outcome.held_out) + "\n");
    err << "bundle written to " << args.out.string() << '\n';
    return kOk;
  } catch (const std::exception& e) {
    return report_error(err, e, kTrainFailed);
  }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    require_file(args.corpus, "corpus");
    const auto resources = preprocess::Resources::load_directory(args.resources);
    const auto model = classify::load_bundle(args.bundle, resources);
    const auto reports = classify::load_corpus_csv(args.corpus);
    std::vector<std::string> negatives;
    if (args.negatives) negatives = classify::load_negatives(*args.negatives);
    const auto report = classify::evaluate(model, reports, negatives);
    out << metrics_table(report);
    if (args.metrics_json) io::write_file(*args.metrics_json, metrics_json(report) + "\n");
    return kOk;
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }
}

int cmd_validate_ner(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto templates = ner_validation::load_templates(args.templates);
    const auto gazetteer = ner::Gazetteer::load(args.gazetteer, args.stoplist);
    const auto resources = preprocess::Resources::load_directory(args.resources);
    std::optional<ner::FixtureKB> kb;
    if (args.kb_fixture) kb = ner::FixtureKB::load(*args.kb_fixture);
    const auto ref = ref_from(args.ref_date);
    auto extractor = [&](std::string_view text) {
      return extract_report(text, ref, gazetteer, kb ? &*kb : nullptr, resources);
    };
    const auto result =
        ner_validation::validate(extractor, templates, args.n, gazetteer, ref, args.seed);
    out << result.table();
    if (args.json) io::write_file(*args.json, result.to_json() + "\n");
    return kOk;
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }
}

int cmd_chat(const ChatArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Runtime rt;
  ner::TemporalRef fixed_ref;
  std::optional<service::ReportStore> store;
  try {
    rt = load_runtime(args.paths);
    if (args.ref_date) fixed_ref = ref_from(args.ref_date);
    if (args.store) store.emplace(*args.store);
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }

  const bool fixed = args.ref_date.has_value();
  auto services = rt.services([fixed, fixed_ref] { return fixed ? fixed_ref : ner::system_ref(); },
                              dialogue::MachineConfig{args.gate_cap});
  services.persist = [&](const dialogue::SessionContext& ctx) {
    if (!store) {
      err << "note: consent given; no --store configured, nothing written\n";
      return;
    }
    try {
      store->append(service::make_report(ctx, service::Clock::now()));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
    }
  };

  auto print = [&](const dialogue::Step& step) {
    for (const auto& r : step.replies) out << transcript_line(dialogue::Speaker::bot, r.text) << '\n';
    if (args.show_state) out << '[' << dialogue::to_string(step.state) << "]\n";
    out.flush();
  };

  auto step = dialogue::start(services);
  print(step);
  std::string line;
  while (step.state.phase != dialogue::Phase::ended && std::getline(in, line)) {
    const auto text = std::string(text::trim(line));
    if (text == "/quit") break;
    if (text.empty()) {
      out << "(type a message, or /quit to leave)\n";
      continue;
    }
    if (args.echo_input) out << transcript_line(dialogue::Speaker::user, text) << '\n';
    step = dialogue::advance(step.state, std::move(step.context), text, services);
    print(step);
  }
  return kOk;
}

namespace {

service::Health health_of(const Runtime& rt, const service::ServiceConfig& c,
                          const service::ReportStore& store) {
  service::Health h;
  h.model = {rt.classifier && rt.classifier->trained(), c.bundle.string()};
  h.gazetteer = {!rt.gazetteer.empty(), fmt::format("{} names", rt.gazetteer.size())};
  h.phrases = {rt.phrases.size() > 0, fmt::format("{} keys", rt.phrases.size())};
  h.guidance = {true, c.guidance.string()};
  h.store = {store.writable(), c.store.string()};
  return h;
}

}  // namespace

int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  service::ServiceConfig config;
  Runtime rt;
  std::shared_ptr<service::ReportStore> store;
  try {
    if (args.config) {
      config = service::ServiceConfig::load(*args.config);
    } else {
      if (!args.bundle || !args.store) {
        throw Error(Errc::invalid_config, "--bundle and --store are required without --config");
      }
      const auto d = RuntimePaths::defaults();
      config.gazetteer = d.gazetteer;
      config.gazetteer_stoplist = d.stoplist;
      config.phrases = d.phrases;
      config.guidance = d.guidance;
      config.resources = d.resources;
      config.kb_fixture = d.kb_fixture;
    }
    config.apply_env([](const char* k) { return std::getenv(k); });
    if (args.port) config.port = *args.port;
    if (args.host) config.host = *args.host;
    if (args.bundle) config.bundle = *args.bundle;
    if (args.store) config.store = *args.store;
    if (args.static_dir) config.static_dir = *args.static_dir;
    config.validate();

    RuntimePaths paths;
    paths.bundle = config.bundle;
    paths.gazetteer = config.gazetteer;
    paths.stoplist = config.gazetteer_stoplist;
    paths.phrases = config.phrases;
    paths.guidance = config.guidance;
    paths.resources = config.resources.value_or(data_dir());
    paths.kb_fixture = config.kb_fixture;
    paths.live_kb = config.live_kb;
    paths.kb = config.kb;
    rt = load_runtime(paths);
    store = std::make_shared<service::ReportStore>(config.store);
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }

  // Termination signals are taken by a dedicated thread through sigwait, so no
  // handler runs in signal context.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::SessionManager sessions(
      rt.services([] { return ner::system_ref(); }, dialogue::MachineConfig{config.gate_cap}),
      store,
      service::SessionLimits{config.max_sessions, std::chrono::minutes(config.idle_minutes)});
  service::HttpServer server(sessions, health_of(rt, config, *store), config.static_dir,
                             config.threads);
  if (!server.bind(config.host, config.port)) {
    err << "error: cannot bind " << config.host << ':' << config.port << " (address in use?)\n";
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    return kPortBusy;
  }
  out << "listening on " << config.host << ':' << server.port() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}: shutting down", sig);
    server.stop();
  });
  server.serve();
  // serve() can also return on its own (socket error); wake the waiter then.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  err << "stopped; " << sessions.stored() << " report(s) stored this run\n";
  return kOk;
}

int cmd_gencorpus(const GenCorpusArgs& args, std::ostream& out, std::ostream& err) {
  try {
    classify::SyntheticSpec spec;
    spec.n_docs = args.n_docs;
    spec.seed = args.seed;
    spec.label_noise = args.label_noise;
    const auto corpus = classify::generate_synthetic(spec);
    std::filesystem::create_directories(args.out_dir);
    classify::write_corpus_csv(corpus.reports, args.out_dir / "corpus.csv");
    classify::write_negatives(corpus.negatives, args.out_dir / "negatives.txt");
    out << corpus.reports.size() << " reports, " << corpus.negatives.size() << " negatives -> "
        << args.out_dir.string() << '\n';
    return kOk;
  } catch (const std::exception& e) {
    return report_error(err, e, kBadInput);
  }
}

}  // namespace safechat::app
