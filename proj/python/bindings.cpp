#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "safechat/app.hpp"
#include "safechat/error.hpp"
#include "safechat/features.hpp"
#include "safechat/ner_validation.hpp"
#include "safechat/service.hpp"

namespace py = pybind11;
using namespace safechat;

namespace {

const preprocess::Resources& resources() {
  static const auto r = preprocess::Resources::load_directory(app::data_dir());
  return r;
}

struct NerData {
  ner::Gazetteer gazetteer;
  ner::FixtureKB kb;
};

NerData& ner_data() {
  static NerData d{
      ner::Gazetteer::load(app::data_dir() / "gazetteer.csv", app::data_dir() / "gazetteer_stoplist.txt"),
      ner::FixtureKB::load(app::data_dir() / "kb_fixture.tsv")};
  return d;
}

ner::TemporalRef ref_of(const std::optional<std::string>& iso) {
  if (!iso) return ner::system_ref();
  const auto d = ner::parse_iso(*iso);
  if (!d) throw py::value_error("ref_date must be YYYY-MM-DD, got '" + *iso + "'");
  ner::TemporalRef r;
  r.date = *d;
  return r;
}

py::object span_dict(const std::optional<ner::EntitySpan>& s) {
  if (!s) return py::none();
  py::dict d;
  d["surface"] = s->surface;
  d["begin"] = s->begin;
  d["end"] = s->end;
  d["value"] = ner::describe(*s);
  return d;
}

py::dict prediction_dict(const classify::Prediction& p) {
  py::dict probs;
  for (auto t : classify::kTasks) probs[py::str(std::string(classify::task_name(t)))] = p.scores[static_cast<std::size_t>(t)].p;
  std::vector<std::string> types;
  for (auto t : p.types.ordered()) types.emplace_back(classify::type_name(t));
  py::dict d;
  d["harassment"] = p.harassment;
  d["types"] = types;
  d["probabilities"] = probs;
  return d;
}

py::dict metrics_dict(const classify::EvalReport& r) {
  py::dict out;
  for (auto t : classify::kTasks) {
    const auto& m = r.per_task[static_cast<std::size_t>(t)];
    if (!m) continue;
    py::dict d;
    d["accuracy"] = m->accuracy;
    d["precision"] = m->precision;
    d["recall"] = m->recall;
    d["f1"] = m->f1;
    out[py::str(std::string(classify::task_name(t)))] = d;
  }
  return out;
}

classify::TypeSet types_from(const std::vector<std::string>& names) {
  classify::TypeSet s;
  for (const auto& n : names) {
    bool found = false;
    for (auto t : {classify::HarassmentType::verbal, classify::HarassmentType::non_verbal,
                   classify::HarassmentType::physical}) {
      if (classify::type_name(t) == n) {
        s.insert(t);
        found = true;
      }
    }
    if (!found) throw py::value_error("unknown harassment type '" + n + "'");
  }
  return s;
}

struct Model {
  std::shared_ptr<const classify::EnsembleClassifier> ensemble;
};

py::tuple train(const std::vector<py::dict>& reports, const std::vector<std::string>& negatives,
                std::uint64_t seed) {
  std::vector<classify::LabeledReport> rs;
  for (const auto& d : reports) {
    classify::LabeledReport r;
    r.text = d["text"].cast<std::string>();
    r.labels = types_from(d.contains("labels") ? d["labels"].cast<std::vector<std::string>>() : std::vector<std::string>{});
    r.is_harassment = true;
    rs.push_back(std::move(r));
  }
  classify::TrainOptions opt;
  opt.dbow.seed = seed;
  opt.logreg.seed = seed + 10;
  opt.split.seed = seed + 6;
  opt.balance_seed = seed + 4;
  auto outcome = [&] {
    py::gil_scoped_release release;
    return classify::train_ensemble(rs, negatives, opt, resources());
  }();
  Model m{std::make_shared<const classify::EnsembleClassifier>(std::move(outcome.ensemble))};
  return py::make_tuple(m, metrics_dict(outcome.held_out));
}

// One conversation with the shipped phrases, guidance and gazetteer.
class Chat {
 public:
  Chat(const Model& model, std::optional<std::string> ref_date, int gate_cap)
      : runtime_(std::make_unique<app::Runtime>()) {
    const auto d = app::data_dir();
    runtime_->resources = resources();
    runtime_->classifier = model.ensemble;
    runtime_->gazetteer = ner_data().gazetteer;
    runtime_->kb = std::make_shared<ner::FixtureKB>(ner_data().kb);
    runtime_->phrases = dialogue::Phrases::load(d / "phrases.json");
    runtime_->guidance = dialogue::GuidanceDirectory::load(d / "guidance.json");
    const auto ref = ref_of(ref_date);
    services_ = runtime_->services([ref] { return ref; }, dialogue::MachineConfig{gate_cap});
    services_.persist = [this](const dialogue::SessionContext&) { consented_ = true; };
    step_ = dialogue::start(services_);
    greeting_ = replies(step_);
  }
  // Services refer back to this object.
  Chat(const Chat&) = delete;
  Chat& operator=(const Chat&) = delete;

  const std::vector<std::pair<std::string, std::string>>& greeting() const { return greeting_; }

  std::vector<std::pair<std::string, std::string>> send(const std::string& text) {
    step_ = dialogue::advance(step_.state, std::move(step_.context), text, services_);
    return replies(step_);
  }

  std::string state() const { return dialogue::to_string(step_.state); }
  bool ended() const { return step_.state.phase == dialogue::Phase::ended; }
  bool consented() const { return consented_; }
  py::object report() const {
    if (!consented_) return py::none();
    return py::str(service::to_json_line(service::make_report(step_.context, service::Clock::now())));
  }

 private:
  static std::vector<std::pair<std::string, std::string>> replies(const dialogue::Step& s) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& r : s.replies) out.emplace_back(dialogue::reply_kind_name(r.kind), r.text);
    return out;
  }

  std::unique_ptr<app::Runtime> runtime_;
  dialogue::Services services_;
  dialogue::Step step_;
  std::vector<std::pair<std::string, std::string>> greeting_;
  bool consented_ = false;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<Error>(m, "SafechatError", PyExc_RuntimeError);

  m.def("data_dir", [] { return app::data_dir(); });

  m.def(
      "preprocess",
      [](const std::string& text, const std::string& mode) {
        if (mode != "classify" && mode != "ner") throw py::value_error("mode must be 'classify' or 'ner'");
        const auto cfg = mode == "ner" ? preprocess::PipelineConfig::ner_defaults()
                                       : preprocess::PipelineConfig::classify_defaults();
        return preprocess::preprocess_pipeline(text, cfg, resources()).text;
      },
      py::arg("text"), py::arg("mode") = "classify");

  m.def(
      "tfidf",
      [](const std::vector<std::string>& corpus, std::size_t ngram_max, std::size_t min_df) {
        const auto model = features::tfidf_fit(corpus, features::build_vocabulary(corpus, ngram_max, min_df));
        std::vector<std::string> vocab;
        for (std::uint32_t i = 0; i < model.dim(); ++i) vocab.push_back(model.vocabulary().ngram(i));
        std::vector<std::vector<double>> rows;
        for (const auto& doc : corpus) {
          const auto v = features::tfidf_transform(model, doc);
          std::vector<double> row(v.dim, 0.0);
          for (std::size_t k = 0; k < v.nnz(); ++k) row[v.indices[k]] = v.values[k];
          rows.push_back(std::move(row));
        }
        return py::make_tuple(vocab, rows);
      },
      py::arg("corpus"), py::arg("ngram_max") = 3, py::arg("min_df") = 2);

  m.def(
      "extract",
      [](const std::string& text, std::optional<std::string> ref_date) {
        const auto x = app::extract_report(text, ref_of(ref_date), ner_data().gazetteer,
                                           &ner_data().kb, resources());
        py::dict d;
        d["location"] = span_dict(x.location);
        d["date"] = span_dict(x.date);
        d["time"] = span_dict(x.time);
        return d;
      },
      py::arg("text"), py::arg("ref_date") = py::none());

  m.def(
      "generate_corpus",
      [](std::size_t n_docs, std::uint64_t seed) {
        const auto c = classify::generate_synthetic({.n_docs = n_docs, .seed = seed});
        py::list reports;
        for (const auto& r : c.reports) {
          std::vector<std::string> labels;
          for (auto t : r.labels.ordered()) labels.emplace_back(classify::type_name(t));
          py::dict d;
          d["text"] = r.text;
          d["labels"] = labels;
          reports.append(d);
        }
        return py::make_tuple(reports, c.negatives);
      },
      py::arg("n_docs") = 2000, py::arg("seed") = 2020);

  py::class_<Model>(m, "Model")
      .def_static("load",
                  [](const std::filesystem::path& p) {
                    return Model{std::make_shared<const classify::EnsembleClassifier>(
                        classify::load_bundle(p, resources()))};
                  })
      .def("save", [](const Model& self, const std::filesystem::path& p) { classify::save_bundle(*self.ensemble, p); })
      .def("predict", [](const Model& self, const std::string& text) { return prediction_dict(self.ensemble->predict(text)); });

  m.def("train", &train, py::arg("reports"), py::arg("negatives"), py::arg("seed") = 1,
        "Fits the ensemble; returns (model, held-out metrics).");

  py::class_<Chat>(m, "Chat")
      .def(py::init<const Model&, std::optional<std::string>, int>(), py::arg("model"), py::arg("ref_date") = py::none(), py::arg("gate_cap") = 10)
      .def("greeting", &Chat::greeting)
      .def("send", &Chat::send, py::arg("text"))
      .def_property_readonly("state", &Chat::state)
      .def_property_readonly("ended", &Chat::ended)
      .def_property_readonly("consented", &Chat::consented)
      .def("report", &Chat::report, "The anonymized stored-report line, once consent was given.");

  m.def(
      "validate_ner",
      [](std::size_t n, std::uint64_t seed, std::optional<std::string> ref_date) {
        const auto d = app::data_dir();
        const auto templates = ner_validation::load_templates(d / "ner_templates.txt");
        const auto ref = ref_of(ref_date);
        auto& nd = ner_data();
        auto extractor = [&](std::string_view text) {
          return app::extract_report(text, ref, nd.gazetteer, &nd.kb, resources());
        };
        return ner_validation::validate(extractor, templates, n, nd.gazetteer, ref, seed).to_json();
      },
      py::arg("n") = 100, py::arg("seed") = 42, py::arg("ref_date") = py::none());
}
