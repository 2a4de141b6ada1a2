#include <algorithm>

#include "safechat/ner.hpp"
#include "safechat/text.hpp"
#include "spans.hpp"

namespace safechat::ner {

namespace {

using detail::in_list;
using detail::make_span;

constexpr std::size_t kMaxProperRun = 4;

constexpr std::array<std::string_view, 31> kTemporalWords{
    "january", "february", "march",   "april",    "may",      "june",      "july",
    "august",  "september", "october", "november", "december", "monday",    "tuesday",
    "wednesday", "thursday", "friday", "saturday", "sunday",  "today",     "yesterday",
    "tonight", "morning",  "afternoon", "evening", "night",    "noon",      "midnight",
    "christmas", "weekend", "i"};

bool is_cue(const Token& t) { return t.word && in_list(kLocativeCues, t.lower()); }

// A locative preposition directly before token i, optionally followed by "the".
bool cue_before(const std::vector<Token>& tokens, std::size_t i) {
  if (i >= 1 && is_cue(tokens[i - 1])) return true;
  return i >= 2 && tokens[i - 1].word && tokens[i - 1].lower() == "the" && is_cue(tokens[i - 2]);
}

bool ends_with_suffix(std::string_view word) {
  const auto lw = text::to_lower(word);
  return std::any_of(kStreetSuffixes.begin(), kStreetSuffixes.end(),
                     [&](std::string_view s) { return lw.size() >= s.size() && lw.ends_with(s); });
}

}  // namespace

std::vector<EntitySpan> extract_locations(std::string_view text, const Gazetteer& gazetteer) {
  const auto tokens = tokenize(text);
  std::vector<EntitySpan> found;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].word) continue;
    const bool cue = cue_before(tokens, i);
    const bool upper = text::starts_with_upper(tokens[i].text);
    const auto longest = std::min(gazetteer.max_tokens(), tokens.size() - i);
    for (std::size_t n = longest; n >= 1; --n) {
      const auto key = Gazetteer::key_of(std::span<const Token>(tokens).subspan(i, n));
      const auto name = gazetteer.find(key);
      if (!name) continue;
      // Names that double as common words need both a cue and a capital letter.
      const bool accept = gazetteer.stoplisted(key) ? (cue && upper) : (cue || upper);
      if (accept) {
        found.push_back(make_span(text, tokens, i, i + n - 1, EntityKind::location,
                                  SpanSource::gazetteer, std::string(*name)));
        break;
      }
    }
  }

  const auto gazetteer_hits = found.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].word || !cue_before(tokens, i)) continue;
    // A known place name is not re-read as part of a longer unknown proper noun.
    const bool known = std::any_of(found.begin(), found.begin() + gazetteer_hits,
                                   [&](const EntitySpan& g) { return g.begin == tokens[i].begin; });
    std::size_t run = 0;
    while (i + run < tokens.size() && run < kMaxProperRun) {
      const auto& t = tokens[i + run];
      if (!t.word || !text::starts_with_upper(t.text) || in_list(kTemporalWords, t.lower())) break;
      ++run;
    }
    if (run == 0) continue;
    std::optional<std::size_t> street;
    for (std::size_t k = run; k >= 1; --k) {
      if (ends_with_suffix(tokens[i + k - 1].text)) {
        street = k;
        break;
      }
    }
    if (street) {
      found.push_back(make_span(text, tokens, i, i + *street - 1, EntityKind::location,
                                SpanSource::suffix_cue));
    } else if (!known) {
      found.push_back(make_span(text, tokens, i, i + run - 1, EntityKind::candidate,
                                SpanSource::proper_noun));
    }
  }

  return detail::resolve_overlaps(std::move(found));
}

}  // namespace safechat::ner
