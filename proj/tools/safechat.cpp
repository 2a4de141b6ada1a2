#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "safechat/app.hpp"

namespace app = safechat::app;

namespace {

// With no path given, the lexicons and data files ship under data_dir().
void add_runtime_flags(CLI::App& cmd, app::RuntimePaths& p) {
  cmd.add_option("--models,--bundle", p.bundle, "Model bundle from train")->required();
  cmd.add_option("--gazetteer", p.gazetteer, "Place-name CSV");
  cmd.add_option("--stoplist", p.stoplist, "Gazetteer names that need a locative cue");
  cmd.add_option("--phrases", p.phrases, "Dialogue phrase JSON");
  cmd.add_option("--guidance", p.guidance, "Guidance directory JSON");
  cmd.add_option("--resources", p.resources, "Preprocessing lexicon directory");
  cmd.add_option("--kb-fixture", p.kb_fixture, "Offline knowledge-base TSV");
  cmd.add_flag("--live-kb", p.live_kb, "Query Wikidata instead of the fixture");
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  CLI::App cli{"Harassment-report assistant: training, evaluation, NER validation, chat, serving"};
  cli.require_subcommand(1, 1);
  bool verbose = false;
  cli.add_flag("-v,--verbose", verbose, "Log progress to the error stream");

  const auto data = app::data_dir();

  app::TrainArgs train;
  train.resources = data;
  auto* train_cmd = cli.add_subcommand("train", "Train the ensemble and report held-out metrics");
  train_cmd->add_option("--corpus", train.corpus, "Labeled reports CSV")->required();
  train_cmd->add_option("--negatives", train.negatives, "Non-harassment documents, one per line")
      ->required();
  train_cmd->add_option("--out", train.out, "Bundle path to write")->required();
  train_cmd->add_option("--resources", train.resources, "Preprocessing lexicon directory");
  train_cmd->add_option("--seed", train.seed, "Seed for every random stage");
  train_cmd->add_option("--dbow-dim", train.dbow_dim, "Document vector size");
  train_cmd->add_option("--dbow-epochs", train.dbow_epochs, "DBOW training epochs");
  train_cmd->add_option("--logreg-epochs", train.logreg_epochs, "Logistic regression epochs");
  train_cmd->add_option("--learning-rate", train.learning_rate, "Logistic regression base step");
  train_cmd->add_option("--lambda", train.lambda, "L2 penalty");
  train_cmd->add_option("--ngram-max", train.ngram_max, "Largest TF-IDF n-gram order");
  train_cmd->add_option("--cutoff", train.cutoff, "Decision threshold");
  train_cmd->add_option("--metrics-json", train.metrics_json, "Also write metrics as JSON");

  app::EvalArgs eval;
  eval.resources = data;
  auto* eval_cmd = cli.add_subcommand("eval", "Score a saved bundle on a labeled CSV");
  eval_cmd->add_option("--models,--bundle", eval.bundle, "Model bundle")->required();
  eval_cmd->add_option("--corpus", eval.corpus, "Labeled reports CSV")->required();
  eval_cmd->add_option("--negatives", eval.negatives, "Non-harassment documents");
  eval_cmd->add_option("--resources", eval.resources, "Preprocessing lexicon directory");
  eval_cmd->add_option("--metrics-json", eval.metrics_json, "Also write metrics as JSON");

  app::ValidateArgs val;
  val.templates = data / "ner_templates.txt";
  val.gazetteer = data / "gazetteer.csv";
  val.stoplist = data / "gazetteer_stoplist.txt";
  val.kb_fixture = data / "kb_fixture.tsv";
  val.resources = data;
  auto* val_cmd = cli.add_subcommand("validate-ner", "Score the extractor on generated reports");
  val_cmd->add_option("--templates", val.templates, "Report templates");
  val_cmd->add_option("--gazetteer", val.gazetteer, "Place-name CSV");
  val_cmd->add_option("--stoplist", val.stoplist, "Gazetteer stoplist");
  val_cmd->add_option("--kb-fixture", val.kb_fixture, "Offline knowledge-base TSV");
  val_cmd->add_option("--resources", val.resources, "Preprocessing lexicon directory");
  val_cmd->add_option("--n", val.n, "Variants per template")->check(CLI::PositiveNumber);
  val_cmd->add_option("--seed", val.seed, "Generator seed");
  val_cmd->add_option("--ref-date", val.ref_date, "Reference date YYYY-MM-DD (default today)");
  val_cmd->add_option("--json", val.json, "Write the result as JSON");

  app::ChatArgs chat;
  chat.paths = app::RuntimePaths::defaults();
  auto* chat_cmd = cli.add_subcommand("chat", "Interactive session on the terminal");
  add_runtime_flags(*chat_cmd, chat.paths);
  chat_cmd->add_option("--ref-date", chat.ref_date, "Reference date YYYY-MM-DD (default today)");
  chat_cmd->add_option("--store", chat.store, "JSONL file for consented reports");
  chat_cmd->add_option("--gate-cap", chat.gate_cap, "Non-incident messages before moving on")
      ->check(CLI::PositiveNumber);
  chat_cmd->add_flag("--echo", chat.echo_input, "Echo user lines into the transcript");
  chat_cmd->add_flag("--show-state", chat.show_state, "Print the dialogue state after each turn");

  app::ServeArgs serve;
  auto* serve_cmd = cli.add_subcommand("serve", "Run the HTTP chat service");
  serve_cmd->add_option("--config", serve.config, "Service config JSON");
  serve_cmd->add_option("--port", serve.port, "Listen port (0 picks a free one)");
  serve_cmd->add_option("--host", serve.host, "Listen address");
  serve_cmd->add_option("--models,--bundle", serve.bundle, "Model bundle");
  serve_cmd->add_option("--store", serve.store, "JSONL file for consented reports");
  serve_cmd->add_option("--static-dir", serve.static_dir, "Directory served under /");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kOk : app::kBadInput;
  }
  if (verbose) spdlog::set_level(spdlog::level::info);

  if (*train_cmd) return app::cmd_train(train, std::cout, std::cerr);
  if (*eval_cmd) return app::cmd_eval(eval, std::cout, std::cerr);
  if (*val_cmd) return app::cmd_validate_ner(val, std::cout, std::cerr);
  if (*chat_cmd) return app::cmd_chat(chat, std::cin, std::cout, std::cerr);
  return app::cmd_serve(serve, std::cout, std::cerr);
}
