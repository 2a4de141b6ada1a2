#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safechat/classify.hpp"
#include "safechat/ner.hpp"

// Slot-filling dialogue: gate on the harassment classifier, fill and confirm
// location, date and time, then guidance, police, helpfulness and consent.
namespace safechat::dialogue {

using classify::HarassmentType;
using classify::TypeSet;
using ner::EntityKind;

inline constexpr std::array<EntityKind, 3> kSlotOrder{EntityKind::location, EntityKind::date,
                                                      EntityKind::time};
inline constexpr int kMaxAttempts = 3;

enum class Phase : std::uint8_t {
  greeting,
  await_incident,
  confirm_slot,
  ask_slot,
  guidance,  // waiting for the medical-assistance answer
  police_query,
  helpful_query,
  consent_query,
  ended,
};

struct DialogueState {
  Phase phase = Phase::greeting;
  EntityKind slot = EntityKind::location;  // confirm_slot / ask_slot only
  int attempt = 0;                         // ask_slot only, 1..kMaxAttempts

  static DialogueState at(Phase p) { return {p, EntityKind::location, 0}; }
  static DialogueState confirm(EntityKind k) { return {Phase::confirm_slot, k, 0}; }
  static DialogueState ask(EntityKind k, int attempt) { return {Phase::ask_slot, k, attempt}; }

  bool operator==(const DialogueState&) const = default;
};

std::string_view phase_name(Phase p) noexcept;       // GREETING, ASK_SLOT, ...
std::string to_string(const DialogueState& s);        // "ASK_SLOT(DATE,2)", "ENDED"
std::optional<DialogueState> parse_state(std::string_view s);

enum class TriState : std::uint8_t { unknown, yes, no };
std::string_view tri_name(TriState t) noexcept;

enum class Answer : std::uint8_t { yes, no, unclear };
std::string_view answer_name(Answer a) noexcept;

// Word-level lexicon match; a message containing both kinds of word is unclear.
Answer interpret_yes_no(std::string_view message);

enum class ReplyKind : std::uint8_t { question, confirmation_request, guidance, closing };
std::string_view reply_kind_name(ReplyKind k) noexcept;

struct BotReply {
  std::string text;
  ReplyKind kind = ReplyKind::question;
  bool operator==(const BotReply&) const = default;
};

// ---- phrases ------------------------------------------------------------------

// State-keyed utterance templates with {location}/{date}/{time}/{value}/{name}/
// {description}/{contact} interpolation. Variants are chosen by attempt number.
class Phrases {
 public:
  Phrases() = default;
  explicit Phrases(std::map<std::string, std::vector<std::string>> table);
  static Phrases load(const std::filesystem::path& path);
  static Phrases parse(std::string_view json_text, std::string_view origin = "phrases");

  // Throws Errc::resource_missing if the key is absent.
  const std::vector<std::string>& variants(std::string_view key) const;
  std::string render(std::string_view key, const std::map<std::string, std::string>& values = {},
                     std::size_t variant = 0) const;
  bool contains(std::string_view key) const { return table_.contains(std::string(key)); }
  std::size_t size() const noexcept { return table_.size(); }

  // Keys the machine uses; load() fails if any is missing.
  static const std::vector<std::string_view>& required_keys();

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

std::string interpolate(std::string_view tmpl, const std::map<std::string, std::string>& values);

// ---- guidance -------------------------------------------------------------------

struct Resource {
  std::string id;
  std::string name;
  std::string description;
  std::string contact;
  bool medical_only = false;  // listed only when medical assistance is wanted
};

class GuidanceDirectory {
 public:
  GuidanceDirectory() = default;
  GuidanceDirectory(std::array<std::vector<Resource>, 3> by_type, Resource police);
  static GuidanceDirectory load(const std::filesystem::path& path);
  static GuidanceDirectory parse(std::string_view json_text, std::string_view origin = "guidance");

  const std::vector<Resource>& resources(HarassmentType t) const {
    return by_type_[static_cast<std::size_t>(t)];
  }
  const Resource& police() const noexcept { return police_; }

 private:
  std::array<std::vector<Resource>, 3> by_type_;
  Resource police_;
};

// Union over intents, physical first, deduplicated by id. Medical-only entries are
// included (ahead of the rest) only when medical is true.
std::vector<Resource> resources_for(TypeSet intents, const GuidanceDirectory& dir, bool medical);

// Physical intents lead with the medical-assistance question, then the resource list.
// Throws Errc::empty_intents for an empty set.
std::vector<BotReply> guidance_for(TypeSet intents, const GuidanceDirectory& dir,
                                   const Phrases& phrases);

// ---- machine ----------------------------------------------------------------------

enum class Speaker : std::uint8_t { user, bot, note };
std::string_view speaker_name(Speaker s) noexcept;

struct TranscriptEntry {
  Speaker speaker = Speaker::user;
  std::string text;
  bool operator==(const TranscriptEntry&) const = default;
};

struct SlotState {
  std::optional<ner::EntitySpan> value;
  bool confirmed = false;
  bool exhausted = false;  // given up after kMaxAttempts asks
  int attempts = 0;        // asks issued so far
  std::vector<std::string> rejected;  // normalized values the user said no to
};

struct SessionContext {
  std::string accumulated_text;  // non-blank user turns joined by single spaces
  std::optional<classify::Prediction> classification;
  std::array<SlotState, 3> slots;  // kSlotOrder
  TypeSet intents;
  std::vector<TranscriptEntry> transcript;
  TriState medical = TriState::unknown;
  TriState police_reported = TriState::unknown;
  TriState helpful = TriState::unknown;
  TriState consent = TriState::unknown;
  int gate_attempts = 0;   // non-incident messages seen in AWAIT_INCIDENT
  bool reprompted = false; // the current yes/no question was already repeated once

  SlotState& slot(EntityKind k);
  const SlotState& slot(EntityKind k) const;
};

struct MachineConfig {
  int gate_cap = 10;  // AWAIT_INCIDENT messages before moving on without a report
  void validate() const;
};

struct Services {
  std::function<classify::Prediction(std::string_view)> classify;
  std::function<ner::SlotExtraction(std::string_view)> extract;
  const Phrases* phrases = nullptr;
  const GuidanceDirectory* guidance = nullptr;
  // Invoked once, on consent = yes, before the goodbye.
  std::function<void(const SessionContext&)> persist;
  MachineConfig config;
};

struct Step {
  DialogueState state;
  SessionContext context;
  std::vector<BotReply> replies;
};

// First bot utterance for a fresh session: GREETING -> AWAIT_INCIDENT.
Step start(const Services& services);

// One user turn. Throws Errc::terminal_state when state is ENDED.
Step advance(const DialogueState& state, SessionContext context, std::string_view message,
             const Services& services);

// Upper bound on user turns before ENDED, for any input sequence.
int max_user_turns(const MachineConfig& config);

}  // namespace safechat::dialogue
