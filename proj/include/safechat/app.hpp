#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safechat/classify.hpp"
#include "safechat/dialogue.hpp"
#include "safechat/ner.hpp"
#include "safechat/preprocess.hpp"

// Operator commands behind the safechat and safechat_gencorpus executables.
namespace safechat::app {

enum ExitCode : int { kOk = 0, kBadInput = 2, kTrainFailed = 3, kPortBusy = 4 };

// SAFECHAT_DATA_DIR from the environment, else the build-time data directory.
std::filesystem::path data_dir();

struct RuntimePaths {
  std::filesystem::path bundle;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> stoplist;
  std::filesystem::path phrases;
  std::filesystem::path guidance;
  std::filesystem::path resources;  // preprocessing lexicons
  std::optional<std::filesystem::path> kb_fixture;
  bool live_kb = false;
  ner::WikidataConfig kb;

  // Everything under data_dir(); bundle left empty.
  static RuntimePaths defaults();
};

// Loaded, read-only state shared by chat and serve.
struct Runtime {
  preprocess::Resources resources;
  std::shared_ptr<const classify::EnsembleClassifier> classifier;
  ner::Gazetteer gazetteer;
  std::shared_ptr<ner::KBClient> kb;  // may be null
  dialogue::Phrases phrases;
  dialogue::GuidanceDirectory guidance;

  // Classifier and NER-mode extraction with the given date reference. The result
  // refers to this Runtime, which must outlive it and stay in place.
  dialogue::Services services(std::function<ner::TemporalRef()> ref,
                              dialogue::MachineConfig config = {}) const;
};

Runtime load_runtime(const RuntimePaths& paths);

// Case-preserving preprocessing, then extract_all.
ner::SlotExtraction extract_report(std::string_view text, const ner::TemporalRef& ref,
                                   const ner::Gazetteer& gazetteer, ner::KBClient* kb,
                                   const preprocess::Resources& resources);

// "bot: ...", "user: ...", "note: ..." lines; with states, "[STATE]" after each turn.
std::string transcript_line(dialogue::Speaker speaker, std::string_view text);

struct TrainArgs {
  std::filesystem::path corpus;
  std::filesystem::path negatives;
  std::filesystem::path out;
  std::filesystem::path resources;
  std::uint64_t seed = 1;
  std::size_t dbow_dim = 100;
  std::size_t dbow_epochs = 20;
  std::size_t logreg_epochs = 50;
  double learning_rate = 5.0;
  double lambda = 1e-4;
  std::size_t ngram_max = 3;
  double cutoff = 0.5;
  std::optional<std::filesystem::path> metrics_json;
};

struct EvalArgs {
  std::filesystem::path bundle;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> negatives;
  std::filesystem::path resources;
  std::optional<std::filesystem::path> metrics_json;
};

struct ValidateArgs {
  std::filesystem::path templates;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> stoplist;
  std::optional<std::filesystem::path> kb_fixture;
  std::filesystem::path resources;
  std::size_t n = 100;
  std::uint64_t seed = 42;
  std::optional<std::string> ref_date;  // ISO; today when absent
  std::optional<std::filesystem::path> json;
};

struct ChatArgs {
  RuntimePaths paths;
  std::optional<std::string> ref_date;
  std::optional<std::filesystem::path> store;  // consented reports go here when set
  int gate_cap = 10;
  bool echo_input = false;
  bool show_state = false;
};

// Without a config file, data files come from data_dir() and --bundle and --store
// are required. Flags override the file and the environment.
struct ServeArgs {
  std::optional<std::filesystem::path> config;
  std::optional<int> port;
  std::optional<std::string> host;
  std::optional<std::filesystem::path> bundle;
  std::optional<std::filesystem::path> store;
  std::optional<std::filesystem::path> static_dir;
};

struct GenCorpusArgs {
  std::filesystem::path out_dir;
  std::size_t n_docs = 2000;
  std::uint64_t seed = 2020;
  double label_noise = 0.0;
};

std::string metrics_table(const classify::EvalReport& report);
std::string metrics_json(const classify::EvalReport& report);

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_validate_ner(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_chat(const ChatArgs& args, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err);
int cmd_gencorpus(const GenCorpusArgs& args, std::ostream& out, std::ostream& err);

}  // namespace safechat::app
