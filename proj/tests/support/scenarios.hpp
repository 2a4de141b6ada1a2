#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "safechat/app.hpp"
#include "safechat/dialogue.hpp"

// Shared fixtures: the reference model, the shipped runtime files and the
// checked-in scenario transcripts.
namespace support {

inline constexpr const char* kScenarioRef = "2019-07-06";
inline constexpr std::array<const char*, 3> kScenarios{"scenario1", "scenario2", "scenario3"};

std::filesystem::path golden_dir();
std::filesystem::path data_dir();

// Synthetic corpus from the generator defaults.
safechat::classify::SyntheticCorpus reference_corpus();
// Ensemble trained on reference_corpus() with the CLI's default options, so it
// matches `safechat_gencorpus` followed by `safechat train`.
safechat::classify::TrainOutcome train_reference_model();
safechat::classify::TrainOptions reference_options();

// Shipped data files around the given classifier; KB from the fixture.
safechat::app::Runtime runtime_with(
    std::shared_ptr<const safechat::classify::EnsembleClassifier> classifier);

safechat::ner::TemporalRef scenario_ref();

// Keyword rules standing in for a trained model where only the machine is under test.
safechat::classify::Prediction keyword_classifier(std::string_view text);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// User lines of tests/golden/<name>.in.
std::vector<std::string> read_script(const std::string& name);
std::string read_golden(const std::string& name);

// Transcript in golden-file form:
//   "> user text", "bot[kind]: text", "state: STATE" after each turn.
std::string render_session(const safechat::dialogue::Services& services,
                           std::span<const std::string> inputs);

// A golden transcript split at user turns; turn 0 is the greeting and has no user text.
struct GoldenTurn {
  std::string user;
  std::vector<std::pair<std::string, std::string>> bot;  // kind, text
  std::string state;
};
std::vector<GoldenTurn> parse_golden(const std::string& golden);

// The same transcript as `safechat chat --echo --show-state` prints it.
std::string golden_to_cli(const std::string& golden);

}  // namespace support
