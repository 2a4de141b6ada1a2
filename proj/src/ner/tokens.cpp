#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>

#include <fmt/format.h>

#include "safechat/ner.hpp"
#include "safechat/text.hpp"

namespace safechat::ner {

namespace {

// Stripping '.' keeps "Maastricht." clean; abbreviations such as "a.m." lose
// only the final dot, which the time grammar accepts.
bool edge_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '"':
    case '(': case ')': case '[': case ']': case '\'':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string Token::lower() const { return text::to_lower(text); }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !text::is_space(s[j])) ++j;
    if (i == j) break;

    std::size_t b = i;
    std::size_t e = j;
    std::vector<Token> trailing;
    while (b < e && edge_punct(s[b])) {
      out.push_back({s.substr(b, 1), b, b + 1, false});
      ++b;
    }
    while (e > b && edge_punct(s[e - 1])) {
      trailing.push_back({s.substr(e - 1, 1), e - 1, e, false});
      --e;
    }
    if (b < e) out.push_back({s.substr(b, e - b), b, e, true});
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    i = j;
  }
  return out;
}

std::string_view kind_name(EntityKind k) noexcept {
  switch (k) {
    case EntityKind::location: return "LOCATION";
    case EntityKind::date: return "DATE";
    case EntityKind::time: return "TIME";
    case EntityKind::candidate: return "CANDIDATE";
  }
  return "?";
}

std::string_view source_name(SpanSource s) noexcept {
  switch (s) {
    case SpanSource::gazetteer: return "gazetteer";
    case SpanSource::suffix_cue: return "suffix_cue";
    case SpanSource::kb_confirmed: return "kb_confirmed";
    case SpanSource::proper_noun: return "proper_noun";
    case SpanSource::explicit_date: return "explicit_date";
    case SpanSource::numeric_date: return "numeric_date";
    case SpanSource::relative_date: return "relative_date";
    case SpanSource::clock: return "clock";
    case SpanSource::bucket: return "bucket";
  }
  return "?";
}

std::string_view bucket_name(TimeBucket b) noexcept {
  switch (b) {
    case TimeBucket::morning: return "MORNING";
    case TimeBucket::afternoon: return "AFTERNOON";
    case TimeBucket::evening: return "EVENING";
    case TimeBucket::night: return "NIGHT";
  }
  return "?";
}

TemporalRef system_ref() {
  const std::time_t now = std::time(nullptr);
  std::tm local{};
  localtime_r(&now, &local);
  TemporalRef ref;
  ref.date = Date{std::chrono::year{local.tm_year + 1900},
                  std::chrono::month{static_cast<unsigned>(local.tm_mon + 1)},
                  std::chrono::day{static_cast<unsigned>(local.tm_mday)}};
  ref.zone = local.tm_zone != nullptr ? local.tm_zone : "local";
  return ref;
}

std::string format_iso(const Date& d) {
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

std::optional<Date> parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t k = pos; k < pos + len; ++k) {
      if (!text::is_digit(s[k])) return std::nullopt;
      v = v * 10 + (s[k] - '0');
    }
    return v;
  };
  const auto y = num(0, 4);
  const auto m = num(5, 2);
  const auto d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date out{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
           std::chrono::day{static_cast<unsigned>(*d)}};
  if (!out.ok()) return std::nullopt;
  return out;
}

namespace {

constexpr std::array<std::string_view, 12> kMonthNames{
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

std::string ordinal(unsigned d) {
  const unsigned tens = d % 100;
  std::string_view suffix = "th";
  if (tens < 11 || tens > 13) {
    switch (d % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
      default: break;
    }
  }
  return std::to_string(d) + std::string(suffix);
}

}  // namespace

std::string format_long(const Date& d) {
  return fmt::format("{} {} {}", ordinal(static_cast<unsigned>(d.day())),
                     kMonthNames[static_cast<unsigned>(d.month()) - 1], static_cast<int>(d.year()));
}

std::string format_time(const ResolvedTime& t) {
  if (t.clock) {
    auto s = fmt::format("{:02}:{:02}", t.clock->hour, t.clock->minute);
    if (t.ambiguous) s += " (am/pm unclear)";
    return s;
  }
  if (t.bucket) return std::string(bucket_name(*t.bucket));
  return "unknown";
}

std::string describe(const EntitySpan& s) {
  if (const auto* loc = s.location()) return *loc;
  if (const auto* d = s.date()) return d->resolved() ? format_iso(*d->date) : "unresolved date";
  if (const auto* t = s.time()) return format_time(*t);
  return s.surface;
}

Date add_days(const Date& d, int days) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

Date add_months(const Date& d, int months) {
  const auto ym = std::chrono::year_month{d.year(), d.month()} + std::chrono::months{months};
  const auto last = std::chrono::year_month_day_last{ym.year(), std::chrono::month_day_last{ym.month()}};
  const auto day = std::min(d.day(), last.day());
  return Date{ym.year(), ym.month(), day};
}

}  // namespace safechat::ner
