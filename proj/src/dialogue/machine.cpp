#include <algorithm>

#include "safechat/dialogue.hpp"
#include "safechat/error.hpp"
#include "safechat/text.hpp"

namespace safechat::dialogue {

namespace {

std::size_t slot_index(EntityKind k) {
  switch (k) {
    case EntityKind::location: return 0;
    case EntityKind::date: return 1;
    case EntityKind::time: return 2;
    case EntityKind::candidate: break;
  }
  throw Error(Errc::invalid_config, "dialogue: CANDIDATE is not a slot");
}

std::string slot_key(EntityKind k) {
  switch (k) {
    case EntityKind::location: return "location";
    case EntityKind::date: return "date";
    default: return "time";
  }
}

const std::optional<ner::EntitySpan>& pick(const ner::SlotExtraction& x, EntityKind k) {
  switch (k) {
    case EntityKind::location: return x.location;
    case EntityKind::date: return x.date;
    default: return x.time;
  }
}

bool rejected(const SlotState& s, const ner::EntitySpan& span) {
  return std::find(s.rejected.begin(), s.rejected.end(), ner::describe(span)) != s.rejected.end();
}

bool ambiguous_time(const SlotState& s) {
  return s.value && s.value->time() && s.value->time()->clock && s.value->time()->ambiguous;
}

// am/pm read from a clarification such as "in the evening" or "pm".
std::optional<bool> meridiem_pm(std::string_view message) {
  for (const auto& raw : text::split_whitespace(text::to_lower(message))) {
    std::string w;
    for (char c : raw) {
      if (text::is_ascii_alpha(c)) w += c;
    }
    if (w == "am" || w == "morning") return false;
    if (w == "pm" || w == "afternoon" || w == "evening" || w == "night" || w == "tonight") {
      return true;
    }
  }
  return std::nullopt;
}

// One user turn in progress.
class Turn {
 public:
  Turn(SessionContext ctx, const Services& svc) : ctx_(std::move(ctx)), svc_(svc) {}

  Step finish(DialogueState state) {
    for (const auto& r : replies_) ctx_.transcript.push_back({Speaker::bot, r.text});
    return {state, std::move(ctx_), std::move(replies_)};
  }

  SessionContext& ctx() { return ctx_; }
  const Phrases& phrases() const { return *svc_.phrases; }

  void say(std::string text, ReplyKind kind) { replies_.push_back({std::move(text), kind}); }
  void say_key(std::string_view key, ReplyKind kind, const std::map<std::string, std::string>& v = {},
               std::size_t variant = 0) {
    say(phrases().render(key, v, variant), kind);
  }

  // Latest message first, then the whole conversation; never a value already refused.
  void refresh_slots(const ner::SlotExtraction& latest, const ner::SlotExtraction& all) {
    for (auto k : kSlotOrder) {
      auto& s = ctx_.slot(k);
      const auto& fresh = pick(latest, k);
      if (s.confirmed) {
        if (fresh && ner::describe(*fresh) != ner::describe(*s.value)) {
          ctx_.transcript.push_back(
              {Speaker::note, phrases().render("contradiction_note",
                                               {{"slot", slot_key(k)},
                                                {"value", ner::describe(*s.value)},
                                                {"new", ner::describe(*fresh)}})});
        }
        continue;
      }
      if (s.exhausted || s.value) continue;
      if (fresh && !rejected(s, *fresh)) {
        s.value = fresh;
      } else if (const auto& older = pick(all, k); older && !rejected(s, *older)) {
        s.value = older;
      }
    }
  }

  std::string confirm_question(EntityKind k) const {
    const auto& s = ctx_.slot(k);
    if (k == EntityKind::time && ambiguous_time(s)) {
      return phrases().render("clarify_time", {{"value", s.value->surface}});
    }
    return phrases().render("confirm_" + slot_key(k), {{"value", ner::describe(*s.value)}});
  }

  // Next open slot in order, else guidance.
  DialogueState proceed() {
    ctx_.reprompted = false;
    for (auto k : kSlotOrder) {
      auto& s = ctx_.slot(k);
      if (s.confirmed || s.exhausted) continue;
      if (s.value) {
        say(confirm_question(k), ReplyKind::confirmation_request);
        return DialogueState::confirm(k);
      }
      if (s.attempts < kMaxAttempts) {
        ++s.attempts;
        say_key("ask_" + slot_key(k), ReplyKind::question, {},
                static_cast<std::size_t>(s.attempts - 1));
        return DialogueState::ask(k, s.attempts);
      }
      s.exhausted = true;
      say_key("slot_skipped", ReplyKind::guidance, {{"slot", slot_key(k)}});
    }
    return enter_guidance();
  }

  DialogueState enter_guidance() {
    ctx_.reprompted = false;
    if (ctx_.intents.empty()) return ask_police();
    say_key("guidance_intro", ReplyKind::guidance);
    if (ctx_.intents.contains(HarassmentType::physical)) {
      say_key("medical_query", ReplyKind::question);
      return DialogueState::at(Phase::guidance);
    }
    list_resources(false);
    return ask_police();
  }

  void list_resources(bool medical) {
    for (const auto& r : resources_for(ctx_.intents, *svc_.guidance, medical)) {
      say_key("resource", ReplyKind::guidance,
              {{"name", r.name}, {"description", r.description}, {"contact", r.contact}});
    }
  }

  DialogueState ask_police() {
    ctx_.reprompted = false;
    say_key("police_query", ReplyKind::question);
    return DialogueState::at(Phase::police_query);
  }

  // Resolves an unclear yes/no: one repetition of the question, then NO.
  std::optional<Answer> settle(Answer a, const DialogueState& state, std::string question,
                               ReplyKind kind) {
    if (a != Answer::unclear) return a;
    if (!ctx_.reprompted) {
      ctx_.reprompted = true;
      say_key("reprompt_yes_no", ReplyKind::question);
      say(std::move(question), kind);
      repeat_ = state;
      return std::nullopt;
    }
    return Answer::no;
  }

  std::optional<DialogueState> repeat_;

 private:
  SessionContext ctx_;
  const Services& svc_;
  std::vector<BotReply> replies_;
};

TypeSet intents_of(const classify::Prediction& p) {
  if (!p.types.empty()) return p.types;
  // Harassment without a confident type: fall back to the most likely one.
  HarassmentType best = HarassmentType::verbal;
  double best_p = -1.0;
  for (auto t : classify::kTasks) {
    const auto type = classify::type_of(t);
    if (!type) continue;
    const double p_t = p.scores[static_cast<std::size_t>(t)].p;
    if (p_t > best_p) {
      best_p = p_t;
      best = *type;
    }
  }
  return TypeSet{best};
}

void check_services(const Services& s) {
  if (!s.classify || !s.extract || s.phrases == nullptr || s.guidance == nullptr) {
    throw Error(Errc::invalid_config, "dialogue: services are incomplete");
  }
  s.config.validate();
}

}  // namespace

SlotState& SessionContext::slot(EntityKind k) { return slots[slot_index(k)]; }
const SlotState& SessionContext::slot(EntityKind k) const { return slots[slot_index(k)]; }

void MachineConfig::validate() const {
  if (gate_cap < 1) throw Error(Errc::invalid_config, "dialogue: gate_cap must be at least 1");
}

int max_user_turns(const MachineConfig& config) {
  // Per slot: up to kMaxAttempts asks, and up to kMaxAttempts + 1 proposed values, each
  // confirmed in at most two turns (one repetition). Closing: medical, police, helpful
  // and consent questions, each at most two turns.
  const int per_slot = kMaxAttempts + 2 * (kMaxAttempts + 1);
  return config.gate_cap + static_cast<int>(kSlotOrder.size()) * per_slot + 4 * 2;
}

Step start(const Services& services) {
  check_services(services);
  Turn turn(SessionContext{}, services);
  turn.say_key("greeting", ReplyKind::question);
  return turn.finish(DialogueState::at(Phase::await_incident));
}

Step advance(const DialogueState& state, SessionContext context, std::string_view message,
             const Services& services) {
  if (state.phase == Phase::ended) {
    throw Error(Errc::terminal_state, "dialogue: conversation has ended");
  }
  check_services(services);

  Turn turn(std::move(context), services);
  auto& ctx = turn.ctx();
  ctx.transcript.push_back({Speaker::user, std::string(message)});
  if (!text::trim(message).empty()) {
    if (!ctx.accumulated_text.empty()) ctx.accumulated_text += ' ';
    ctx.accumulated_text += message;
  }

  const auto prediction = services.classify(ctx.accumulated_text);
  ctx.classification = prediction;
  const bool gate_open = state.phase != Phase::greeting && state.phase != Phase::await_incident;
  if (gate_open && prediction.harassment) ctx.intents |= prediction.types;

  turn.refresh_slots(services.extract(message), services.extract(ctx.accumulated_text));

  const auto answer = interpret_yes_no(message);
  switch (state.phase) {
    case Phase::greeting:
      turn.say_key("greeting", ReplyKind::question);
      [[fallthrough]];
    case Phase::await_incident: {
      if (prediction.harassment) {
        ctx.intents |= intents_of(prediction);
        return turn.finish(turn.proceed());
      }
      ++ctx.gate_attempts;
      if (ctx.gate_attempts >= services.config.gate_cap) {
        turn.say_key("gate_exhausted", ReplyKind::guidance);
        return turn.finish(turn.ask_police());
      }
      turn.say_key("ask_incident", ReplyKind::question, {},
                   static_cast<std::size_t>(ctx.gate_attempts - 1));
      return turn.finish(DialogueState::at(Phase::await_incident));
    }

    case Phase::ask_slot:
      return turn.finish(turn.proceed());

    case Phase::confirm_slot: {
      auto& s = ctx.slot(state.slot);
      if (!s.value) return turn.finish(turn.proceed());
      if (state.slot == EntityKind::time && ambiguous_time(s)) {
        if (const auto pm = meridiem_pm(message)) {
          auto t = *s.value->time();
          t.clock->hour = t.clock->hour % 12 + (*pm ? 12 : 0);
          t.ambiguous = false;
          s.value->normalized = t;
          s.confirmed = true;
          return turn.finish(turn.proceed());
        }
      }
      const auto fresh = services.extract(message);
      const auto& correction = pick(fresh, state.slot);
      if (answer != Answer::yes && correction &&
          ner::describe(*correction) != ner::describe(*s.value) && !rejected(s, *correction)) {
        s.rejected.push_back(ner::describe(*s.value));
        ++s.attempts;
        if (s.attempts > kMaxAttempts) {
          s.value.reset();
          s.exhausted = true;
          turn.say_key("slot_skipped", ReplyKind::guidance, {{"slot", slot_key(state.slot)}});
        } else {
          s.value = correction;
        }
        return turn.finish(turn.proceed());
      }
      const auto settled = turn.settle(answer, state, turn.confirm_question(state.slot),
                                       ReplyKind::confirmation_request);
      if (!settled) return turn.finish(*turn.repeat_);
      if (*settled == Answer::yes) {
        s.confirmed = true;
      } else {
        s.rejected.push_back(ner::describe(*s.value));
        s.value.reset();
      }
      return turn.finish(turn.proceed());
    }

    case Phase::guidance: {
      const auto settled =
          turn.settle(answer, state, turn.phrases().render("medical_query"), ReplyKind::question);
      if (!settled) return turn.finish(*turn.repeat_);
      ctx.medical = *settled == Answer::yes ? TriState::yes : TriState::no;
      turn.list_resources(ctx.medical == TriState::yes);
      return turn.finish(turn.ask_police());
    }

    case Phase::police_query: {
      const auto settled =
          turn.settle(answer, state, turn.phrases().render("police_query"), ReplyKind::question);
      if (!settled) return turn.finish(*turn.repeat_);
      ctx.police_reported = *settled == Answer::yes ? TriState::yes : TriState::no;
      if (ctx.police_reported == TriState::no) {
        const auto& p = services.guidance->police();
        turn.say_key("police_info", ReplyKind::guidance,
                     {{"name", p.name}, {"description", p.description}, {"contact", p.contact}});
      }
      ctx.reprompted = false;
      turn.say_key("helpful_query", ReplyKind::question);
      return turn.finish(DialogueState::at(Phase::helpful_query));
    }

    case Phase::helpful_query: {
      const auto settled =
          turn.settle(answer, state, turn.phrases().render("helpful_query"), ReplyKind::question);
      if (!settled) return turn.finish(*turn.repeat_);
      ctx.helpful = *settled == Answer::yes ? TriState::yes : TriState::no;
      turn.say_key(ctx.helpful == TriState::yes ? "helpful_yes" : "helpful_no", ReplyKind::guidance);
      ctx.reprompted = false;
      turn.say_key("consent_query", ReplyKind::question);
      return turn.finish(DialogueState::at(Phase::consent_query));
    }

    case Phase::consent_query: {
      const auto settled =
          turn.settle(answer, state, turn.phrases().render("consent_query"), ReplyKind::question);
      if (!settled) return turn.finish(*turn.repeat_);
      ctx.consent = *settled == Answer::yes ? TriState::yes : TriState::no;
      ctx.reprompted = false;
      if (ctx.consent == TriState::yes) {
        if (services.persist) services.persist(ctx);
        turn.say_key("goodbye_stored", ReplyKind::closing);
      } else {
        turn.say_key("goodbye", ReplyKind::closing);
      }
      return turn.finish(DialogueState::at(Phase::ended));
    }

    case Phase::ended:
      break;
  }
  throw Error(Errc::terminal_state, "dialogue: conversation has ended");
}

std::string_view phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::greeting: return "GREETING";
    case Phase::await_incident: return "AWAIT_INCIDENT";
    case Phase::confirm_slot: return "CONFIRM_SLOT";
    case Phase::ask_slot: return "ASK_SLOT";
    case Phase::guidance: return "GUIDANCE";
    case Phase::police_query: return "POLICE_QUERY";
    case Phase::helpful_query: return "HELPFUL_QUERY";
    case Phase::consent_query: return "CONSENT_QUERY";
    case Phase::ended: return "ENDED";
  }
  return "?";
}

std::string to_string(const DialogueState& s) {
  std::string out(phase_name(s.phase));
  if (s.phase == Phase::confirm_slot) {
    out += "(" + std::string(ner::kind_name(s.slot)) + ")";
  } else if (s.phase == Phase::ask_slot) {
    out += "(" + std::string(ner::kind_name(s.slot)) + "," + std::to_string(s.attempt) + ")";
  }
  return out;
}

std::optional<DialogueState> parse_state(std::string_view s) {
  const auto open = s.find('(');
  const auto head = s.substr(0, open);
  std::optional<Phase> phase;
  for (int p = 0; p <= static_cast<int>(Phase::ended); ++p) {
    if (phase_name(static_cast<Phase>(p)) == head) phase = static_cast<Phase>(p);
  }
  if (!phase) return std::nullopt;
  const bool slotted = *phase == Phase::confirm_slot || *phase == Phase::ask_slot;
  if (!slotted) {
    if (open != std::string_view::npos) return std::nullopt;
    return DialogueState::at(*phase);
  }
  if (open == std::string_view::npos || !s.ends_with(")")) return std::nullopt;
  auto args = s.substr(open + 1, s.size() - open - 2);
  const auto comma = args.find(',');
  const auto kind_text = args.substr(0, comma);
  std::optional<EntityKind> kind;
  for (auto k : kSlotOrder) {
    if (ner::kind_name(k) == kind_text) kind = k;
  }
  if (!kind) return std::nullopt;
  if (*phase == Phase::confirm_slot) {
    if (comma != std::string_view::npos) return std::nullopt;
    return DialogueState::confirm(*kind);
  }
  if (comma == std::string_view::npos) return std::nullopt;
  const auto n = args.substr(comma + 1);
  if (n.size() != 1 || n[0] < '1' || n[0] > '0' + kMaxAttempts) return std::nullopt;
  return DialogueState::ask(*kind, n[0] - '0');
}

}  // namespace safechat::dialogue
