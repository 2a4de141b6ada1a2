#include <regex>

#include "safechat/ner.hpp"
#include "safechat/text.hpp"
#include "spans.hpp"

namespace safechat::ner {

namespace {

using namespace std::chrono;
using detail::in_list;
using detail::make_span;

constexpr std::array<std::string_view, 12> kMonths{
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};
constexpr std::array<std::string_view, 12> kMonthAbbrev{
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
constexpr std::array<std::string_view, 7> kWeekdays{
    "sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};
constexpr std::array<std::string_view, 13> kNumberWords{
    "zero", "one", "two", "three", "four", "five", "six",
    "seven", "eight", "nine", "ten", "eleven", "twelve"};
constexpr std::array<std::string_view, 5> kDateCues{"on", "since", "from", "date", "dated"};

// Relative offsets beyond this many units are left unresolved rather than leaving
// the supported calendar range.
constexpr int kMaxAgo = 1000;

class Scanner {
 public:
  Scanner(std::string_view text, const TemporalRef& ref)
      : text_(text), tokens_(tokenize(text)), ref_(ref) {
    lower_.reserve(tokens_.size());
    for (const auto& t : tokens_) lower_.push_back(t.lower());
  }

  std::vector<EntitySpan> run() {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!tokens_[i].word) continue;
      numeric(i);
      day_first(i);
      month_first(i);
      relative_word(i);
      ago(i);
      last_unit(i);
      day_name(i);
    }
    return detail::resolve_overlaps(std::move(found_));
  }

 private:
  bool word_at(std::size_t i) const { return i < tokens_.size() && tokens_[i].word; }
  bool is(std::size_t i, std::string_view w) const { return word_at(i) && lower_[i] == w; }
  bool punct(std::size_t i, char c) const {
    return i < tokens_.size() && !tokens_[i].word && tokens_[i].text.size() == 1 &&
           tokens_[i].text[0] == c;
  }

  bool date_cue_before(std::size_t i) const {
    if (i >= 1 && word_at(i - 1) && in_list(kDateCues, lower_[i - 1])) return true;
    return i >= 2 && is(i - 1, "the") && word_at(i - 2) && in_list(kDateCues, lower_[i - 2]);
  }

  void emit(std::size_t first, std::size_t last, SpanSource source, std::optional<Date> date,
            std::string reason = {}) {
    ResolvedDate value;
    if (date && date->ok()) {
      value.date = *date;
    } else {
      // Malformed dates are reported only when the text signals that a date was meant.
      if (!date_cue_before(first)) return;
      value.reason = reason.empty() ? "not a calendar date" : std::move(reason);
    }
    found_.push_back(make_span(text_, tokens_, first, last, EntityKind::date, source, value));
  }

  std::optional<unsigned> month_at(std::size_t i) const {
    if (!word_at(i)) return std::nullopt;
    const auto& w = lower_[i];
    for (std::size_t m = 0; m < 12; ++m) {
      if (w == kMonths[m] || w == kMonthAbbrev[m] || (m == 8 && w == "sept")) {
        return static_cast<unsigned>(m + 1);
      }
    }
    return std::nullopt;
  }

  struct Day {
    unsigned value;
    bool ordinal;
  };

  std::optional<Day> day_at(std::size_t i) const {
    if (!word_at(i)) return std::nullopt;
    static const std::regex re(R"(^(\d{1,2})(st|nd|rd|th)?$)");
    std::smatch m;
    if (!std::regex_match(lower_[i], m, re)) return std::nullopt;
    return Day{static_cast<unsigned>(std::stoi(m[1].str())), m[2].matched};
  }

  std::optional<int> year_at(std::size_t i) const {
    if (!word_at(i)) return std::nullopt;
    static const std::regex re(R"(^\d{4}$)");
    if (!std::regex_match(lower_[i], re)) return std::nullopt;
    return std::stoi(lower_[i]);
  }

  // Optional ", YYYY" or " YYYY" after token `last`; returns the new last token.
  std::pair<std::size_t, std::optional<int>> trailing_year(std::size_t last) const {
    if (auto y = year_at(last + 1)) return {last + 1, y};
    if (punct(last + 1, ',')) {
      if (auto y = year_at(last + 2)) return {last + 2, y};
    }
    return {last, std::nullopt};
  }

  std::optional<Date> calendar(std::optional<int> y, unsigned m, unsigned d) const {
    if (y) return Date{year{*y}, month{m}, day{d}};
    // No year given: the most recent such day not after the reference date.
    Date guess{ref_.date.year(), month{m}, day{d}};
    if (guess.ok() && sys_days{guess} > sys_days{ref_.date}) {
      guess = Date{ref_.date.year() - years{1}, month{m}, day{d}};
    }
    return guess;
  }

  void numeric(std::size_t i) {
    static const std::regex mdy(R"(^(\d{1,2})[/-](\d{1,2})[/-](\d{2}|\d{4})$)");
    static const std::regex iso(R"(^(\d{4})-(\d{1,2})-(\d{1,2})$)");
    std::smatch m;
    const auto& w = lower_[i];
    if (std::regex_match(w, m, iso)) {
      emit(i, i, SpanSource::numeric_date,
           Date{year{std::stoi(m[1].str())}, month{static_cast<unsigned>(std::stoi(m[2].str()))},
                day{static_cast<unsigned>(std::stoi(m[3].str()))}});
    } else if (std::regex_match(w, m, mdy)) {
      int y = std::stoi(m[3].str());
      if (m[3].length() == 2) {
        const int ref_year = static_cast<int>(ref_.date.year());
        y = (2000 + y <= ref_year) ? 2000 + y : 1900 + y;
      }
      emit(i, i, SpanSource::numeric_date,
           Date{year{y}, month{static_cast<unsigned>(std::stoi(m[1].str()))},
                day{static_cast<unsigned>(std::stoi(m[2].str()))}});
    }
  }

  // "5th July 2019", "the 5th of July", "5 Jul, 2019"
  void day_first(std::size_t i) {
    const auto d = day_at(i);
    if (!d) return;
    std::size_t j = i + 1;
    if (is(j, "of")) ++j;
    const auto m = month_at(j);
    if (!m) return;
    if (punct(j + 1, '.')) ++j;
    const auto [last, y] = trailing_year(j);
    emit(i, last, SpanSource::explicit_date, calendar(y, *m, d->value));
  }

  // "July 5, 2019", "July 5th"
  void month_first(std::size_t i) {
    const auto m = month_at(i);
    if (!m) return;
    std::size_t j = i + 1;
    if (punct(j, '.')) ++j;
    const auto d = day_at(j);
    if (!d) return;
    const auto [last, y] = trailing_year(j);
    // "may 10 people" is not a date: lowercase month words need an ordinal or a year.
    const bool anchored = text::starts_with_upper(tokens_[i].text) || d->ordinal || y.has_value();
    if (!anchored) return;
    emit(i, last, SpanSource::explicit_date, calendar(y, *m, d->value));
  }

  void relative_word(std::size_t i) {
    const auto& w = lower_[i];
    const auto today = ref_.date;
    if (w == "today" || w == "tonight") {
      emit(i, i, SpanSource::relative_date, today);
    } else if (w == "yesterday") {
      if (i >= 2 && is(i - 1, "before") && is(i - 2, "day")) {
        const std::size_t first = (i >= 3 && is(i - 3, "the")) ? i - 3 : i - 2;
        emit(first, i, SpanSource::relative_date, add_days(today, -2));
      }
      emit(i, i, SpanSource::relative_date, add_days(today, -1));
    } else if (w == "last" && is(i + 1, "night")) {
      emit(i, i + 1, SpanSource::relative_date, add_days(today, -1));
    } else if (w == "this" && (is(i + 1, "morning") || is(i + 1, "afternoon") ||
                               is(i + 1, "evening"))) {
      emit(i, i + 1, SpanSource::relative_date, today);
    }
  }

  std::optional<int> count_at(std::size_t i) const {
    if (!word_at(i)) return std::nullopt;
    const auto& w = lower_[i];
    if (w == "a" || w == "an") return 1;
    for (std::size_t k = 0; k < kNumberWords.size(); ++k) {
      if (w == kNumberWords[k]) return static_cast<int>(k);
    }
    static const std::regex re(R"(^\d{1,6}$)");
    if (std::regex_match(w, re)) return std::stoi(w);
    return std::nullopt;
  }

  static std::optional<char> unit_of(std::string_view w) {
    if (w == "day" || w == "days") return 'd';
    if (w == "week" || w == "weeks") return 'w';
    if (w == "month" || w == "months") return 'm';
    if (w == "year" || w == "years") return 'y';
    return std::nullopt;
  }

  std::optional<Date> shift(int n, char unit) const {
    if (n > kMaxAgo) return std::nullopt;
    switch (unit) {
      case 'd': return add_days(ref_.date, -n);
      case 'w': return add_days(ref_.date, -7 * n);
      case 'm': return add_months(ref_.date, -n);
      default: return add_months(ref_.date, -12 * n);
    }
  }

  // "5 months ago", "a week ago"
  void ago(std::size_t i) {
    const auto n = count_at(i);
    if (!n || !word_at(i + 1) || !is(i + 2, "ago")) return;
    const auto unit = unit_of(lower_[i + 1]);
    if (!unit) return;
    const auto d = shift(*n, *unit);
    if (d) {
      emit(i, i + 2, SpanSource::relative_date, d);
    } else {
      ResolvedDate value{std::nullopt, "offset too large"};
      found_.push_back(make_span(text_, tokens_, i, i + 2, EntityKind::date,
                                 SpanSource::relative_date, value));
    }
  }

  // "last week" is taken as seven days back, "last month" one calendar month.
  void last_unit(std::size_t i) {
    if (lower_[i] != "last" || !word_at(i + 1)) return;
    const auto& w = lower_[i + 1];
    if (w == "week" || w == "month" || w == "year") {
      emit(i, i + 1, SpanSource::relative_date, shift(1, *unit_of(w)));
    }
  }

  // "on Monday" / "Monday": the latest such day not after the reference date;
  // "last Monday": strictly before it.
  void day_name(std::size_t i) {
    const auto it = std::find(kWeekdays.begin(), kWeekdays.end(), lower_[i]);
    if (it == kWeekdays.end()) return;
    const bool last = i >= 1 && is(i - 1, "last");
    const bool anchored =
        last || text::starts_with_upper(tokens_[i].text) || (i >= 1 && is(i - 1, "on"));
    if (!anchored) return;
    const auto target = static_cast<unsigned>(it - kWeekdays.begin());
    const auto today = std::chrono::weekday(sys_days{ref_.date}).c_encoding();
    int back = static_cast<int>((today + 7 - target) % 7);
    if (back == 0 && last) back = 7;
    emit(last ? i - 1 : i, i, SpanSource::relative_date, add_days(ref_.date, -back));
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::vector<std::string> lower_;
  const TemporalRef& ref_;
  std::vector<EntitySpan> found_;
};

}  // namespace

std::vector<EntitySpan> extract_dates(std::string_view text, const TemporalRef& ref) {
  return Scanner(text, ref).run();
}

}  // namespace safechat::ner
