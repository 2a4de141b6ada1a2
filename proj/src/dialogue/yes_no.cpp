#include <algorithm>
#include <array>

#include "safechat/dialogue.hpp"
#include "safechat/text.hpp"

namespace safechat::dialogue {

namespace {

constexpr std::array<std::string_view, 16> kYes{
    "yes", "y", "yeah", "yep", "yup", "ya", "sure", "correct", "right",
    "ok", "okay", "indeed", "absolutely", "definitely", "affirmative", "true"};
constexpr std::array<std::string_view, 12> kNo{
    "no", "n", "nope", "nah", "not", "never", "wrong", "incorrect",
    "don't", "didn't", "haven't", "false"};

bool word_char(char c) { return text::is_ascii_alpha(c) || c == '\''; }

}  // namespace

Answer interpret_yes_no(std::string_view message) {
  bool yes = false;
  bool no = false;
  const auto lower = text::to_lower(message);
  std::size_t i = 0;
  while (i < lower.size()) {
    while (i < lower.size() && !word_char(lower[i])) ++i;
    std::size_t j = i;
    while (j < lower.size() && word_char(lower[j])) ++j;
    if (j > i) {
      const std::string_view w(lower.data() + i, j - i);
      yes = yes || std::find(kYes.begin(), kYes.end(), w) != kYes.end();
      no = no || std::find(kNo.begin(), kNo.end(), w) != kNo.end();
    }
    i = j;
  }
  if (yes == no) return Answer::unclear;
  return yes ? Answer::yes : Answer::no;
}

std::string_view answer_name(Answer a) noexcept {
  switch (a) {
    case Answer::yes: return "YES";
    case Answer::no: return "NO";
    case Answer::unclear: return "UNCLEAR";
  }
  return "?";
}

std::string_view tri_name(TriState t) noexcept {
  switch (t) {
    case TriState::unknown: return "unknown";
    case TriState::yes: return "yes";
    case TriState::no: return "no";
  }
  return "?";
}

std::string_view reply_kind_name(ReplyKind k) noexcept {
  switch (k) {
    case ReplyKind::question: return "question";
    case ReplyKind::confirmation_request: return "confirmation";
    case ReplyKind::guidance: return "guidance";
    case ReplyKind::closing: return "closing";
  }
  return "?";
}

std::string_view speaker_name(Speaker s) noexcept {
  switch (s) {
    case Speaker::user: return "user";
    case Speaker::bot: return "bot";
    case Speaker::note: return "note";
  }
  return "?";
}

}  // namespace safechat::dialogue
