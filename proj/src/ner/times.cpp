#include <regex>

#include "safechat/ner.hpp"
#include "safechat/text.hpp"
#include "spans.hpp"

namespace safechat::ner {

namespace {

using detail::make_span;

constexpr std::array<std::string_view, 13> kHourWords{
    "zero", "one", "two", "three", "four", "five", "six",
    "seven", "eight", "nine", "ten", "eleven", "twelve"};

enum class Meridiem { none, am, pm };

Meridiem meridiem_of(std::string_view w) {
  if (w == "am" || w == "a.m" || w == "a.m.") return Meridiem::am;
  if (w == "pm" || w == "p.m" || w == "p.m.") return Meridiem::pm;
  return Meridiem::none;
}

std::optional<ClockTime> twelve_hour(int hour, int minute, Meridiem m) {
  if (hour < 1 || hour > 12 || minute < 0 || minute > 59) return std::nullopt;
  const int h = (hour % 12) + (m == Meridiem::pm ? 12 : 0);
  return ClockTime{h, minute};
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text), tokens_(tokenize(text)) {
    lower_.reserve(tokens_.size());
    for (const auto& t : tokens_) lower_.push_back(t.lower());
  }

  std::vector<EntitySpan> run() {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!tokens_[i].word) continue;
      clock(i);
      oclock(i);
      named(i);
      bucket(i);
    }
    return detail::resolve_overlaps(std::move(found_));
  }

 private:
  bool word_at(std::size_t i) const { return i < tokens_.size() && tokens_[i].word; }
  bool is(std::size_t i, std::string_view w) const { return word_at(i) && lower_[i] == w; }

  void emit(std::size_t first, std::size_t last, SpanSource source, ResolvedTime value) {
    found_.push_back(make_span(text_, tokens_, first, last, EntityKind::time, source, value));
  }

  // "10am", "10:30pm", "10 pm", "10 a.m.", "22:30"
  void clock(std::size_t i) {
    static const std::regex attached(R"(^(\d{1,2})(?::(\d{2}))?(am|pm|a\.m\.?|p\.m\.?)$)");
    static const std::regex bare(R"(^(\d{1,2})(?::(\d{2}))?$)");
    std::smatch m;
    const auto& w = lower_[i];
    if (std::regex_match(w, m, attached)) {
      const int minute = m[2].matched ? std::stoi(m[2].str()) : 0;
      if (auto c = twelve_hour(std::stoi(m[1].str()), minute, meridiem_of(m[3].str()))) {
        emit(i, i, SpanSource::clock, {c, false, std::nullopt});
      }
      return;
    }
    if (!std::regex_match(w, m, bare)) return;
    const int hour = std::stoi(m[1].str());
    const int minute = m[2].matched ? std::stoi(m[2].str()) : 0;
    if (word_at(i + 1)) {
      const auto mer = meridiem_of(lower_[i + 1]);
      if (mer != Meridiem::none) {
        std::size_t last = i + 1;
        // "a.m." tokenizes as "a.m" plus a trailing "."; keep the dot in the span.
        if (last + 1 < tokens_.size() && tokens_[last + 1].text == "." &&
            tokens_[last + 1].begin == tokens_[last].end && lower_[last].size() == 3) {
          ++last;
        }
        if (auto c = twelve_hour(hour, minute, mer)) {
          emit(i, last, SpanSource::clock, {c, false, std::nullopt});
        }
        return;
      }
    }
    if (m[2].matched && hour < 24 && minute < 60) {
      emit(i, i, SpanSource::clock, {ClockTime{hour, minute}, false, std::nullopt});
    }
  }

  std::optional<int> hour_at(std::size_t i) const {
    if (!word_at(i)) return std::nullopt;
    const auto& w = lower_[i];
    for (std::size_t k = 1; k < kHourWords.size(); ++k) {
      if (w == kHourWords[k]) return static_cast<int>(k);
    }
    static const std::regex re(R"(^\d{1,2}$)");
    if (std::regex_match(w, re)) return std::stoi(w);
    return std::nullopt;
  }

  // "10 o'clock"; am/pm stays unknown unless a part of day follows.
  void oclock(std::size_t i) {
    const auto h = hour_at(i);
    if (!h || !word_at(i + 1)) return;
    const auto& w = lower_[i + 1];
    if (w != "o'clock" && w != "oclock" && w != "o’clock") return;
    if (*h < 1 || *h > 12) {
      if (*h >= 13 && *h <= 23) emit(i, i + 1, SpanSource::clock, {ClockTime{*h, 0}, false, {}});
      return;
    }
    Meridiem mer = Meridiem::none;
    if (is(i + 2, "in") && is(i + 3, "the")) {
      if (is(i + 4, "morning")) mer = Meridiem::am;
      if (is(i + 4, "afternoon") || is(i + 4, "evening")) mer = Meridiem::pm;
    } else if (is(i + 2, "at") && is(i + 3, "night")) {
      mer = *h >= 6 ? Meridiem::pm : Meridiem::am;
    }
    if (mer == Meridiem::none) {
      emit(i, i + 1, SpanSource::clock, {ClockTime{*h, 0}, true, std::nullopt});
    } else {
      emit(i, i + 1, SpanSource::clock, {twelve_hour(*h, 0, mer), false, std::nullopt});
    }
  }

  void named(std::size_t i) {
    const auto& w = lower_[i];
    if (w == "noon" || w == "midday") emit(i, i, SpanSource::clock, {ClockTime{12, 0}, false, {}});
    if (w == "midnight") emit(i, i, SpanSource::clock, {ClockTime{0, 0}, false, {}});
  }

  void bucket(std::size_t i) {
    const auto& w = lower_[i];
    std::optional<TimeBucket> b;
    if (w == "morning") b = TimeBucket::morning;
    if (w == "afternoon") b = TimeBucket::afternoon;
    if (w == "evening") b = TimeBucket::evening;
    if (w == "night" || w == "tonight") b = TimeBucket::night;
    if (b) emit(i, i, SpanSource::bucket, {std::nullopt, false, b});
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::vector<std::string> lower_;
  std::vector<EntitySpan> found_;
};

}  // namespace

std::vector<EntitySpan> extract_times(std::string_view text) { return Scanner(text).run(); }

}  // namespace safechat::ner
