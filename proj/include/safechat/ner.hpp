#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

// Rule- and gazetteer-based extraction of incident location, date and time from
// case-preserved text.
namespace safechat::ner {

// ---- tokens ---------------------------------------------------------------

struct Token {
  std::string_view text;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
  bool word = false;  // false for standalone punctuation

  std::string lower() const;
};

// Whitespace-separated chunks with leading/trailing punctuation (.,;:!?"()[]) split off.
// Internal punctuation stays ("10:30", "07/05/19", "o'clock", "a.m").
std::vector<Token> tokenize(std::string_view text);

// ---- entity types -----------------------------------------------------------

enum class EntityKind : std::uint8_t { location, date, time, candidate };
std::string_view kind_name(EntityKind k) noexcept;  // LOCATION, DATE, TIME, CANDIDATE

enum class SpanSource : std::uint8_t {
  gazetteer,
  suffix_cue,
  kb_confirmed,
  proper_noun,  // capitalized unknown after a locative cue, awaiting the KB pass
  explicit_date,
  numeric_date,
  relative_date,
  clock,
  bucket,
};
std::string_view source_name(SpanSource s) noexcept;

using Date = std::chrono::year_month_day;

struct ResolvedDate {
  std::optional<Date> date;  // empty when unresolved
  std::string reason;        // why it could not be resolved

  bool resolved() const noexcept { return date.has_value(); }
  bool operator==(const ResolvedDate&) const = default;
};

enum class TimeBucket : std::uint8_t { morning, afternoon, evening, night };
std::string_view bucket_name(TimeBucket b) noexcept;  // MORNING, ...

struct ClockTime {
  int hour = 0;    // [0, 24)
  int minute = 0;  // [0, 60)
  bool operator==(const ClockTime&) const = default;
};

struct ResolvedTime {
  std::optional<ClockTime> clock;
  bool ambiguous = false;  // am/pm unknown ("10 o'clock")
  std::optional<TimeBucket> bucket;
  bool operator==(const ResolvedTime&) const = default;
};

struct EntitySpan {
  EntityKind kind = EntityKind::location;
  std::string surface;
  std::size_t begin = 0;
  std::size_t end = 0;
  SpanSource source = SpanSource::gazetteer;
  // Canonical place name for locations and candidates.
  std::variant<std::string, ResolvedDate, ResolvedTime> normalized;

  const std::string* location() const { return std::get_if<std::string>(&normalized); }
  const ResolvedDate* date() const { return std::get_if<ResolvedDate>(&normalized); }
  const ResolvedTime* time() const { return std::get_if<ResolvedTime>(&normalized); }
  bool overlaps(const EntitySpan& o) const noexcept { return begin < o.end && o.begin < end; }
};

struct TemporalRef {
  Date date{std::chrono::year{2019}, std::chrono::month{7}, std::chrono::day{6}};
  std::string zone = "local";
};

// Today's date in the local time zone.
TemporalRef system_ref();

// ISO "YYYY-MM-DD".
std::string format_iso(const Date& d);
std::optional<Date> parse_iso(std::string_view s);
// "5th July 2019" style, the form read back by the explicit-date grammar.
std::string format_long(const Date& d);
// "10:00", "10 o'clock (am/pm unclear)", "EVENING".
std::string format_time(const ResolvedTime& t);
// Plain rendering of a span's normalized value for prompts and storage.
std::string describe(const EntitySpan& s);

// Calendar arithmetic with the day clamped to the target month's length.
Date add_months(const Date& d, int months);
Date add_days(const Date& d, int days);

// ---- gazetteer ----------------------------------------------------------------

class Gazetteer {
 public:
  Gazetteer() = default;
  // names: display names; stoplist: names that are also common words.
  Gazetteer(std::vector<std::string> names, std::vector<std::string> stoplist = {});

  // CSV with a "city" column (extra columns ignored); optional stoplist file, one name per line.
  static Gazetteer load(const std::filesystem::path& csv_path,
                        const std::optional<std::filesystem::path>& stoplist_path = std::nullopt);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t max_tokens() const noexcept { return max_tokens_; }

  // Canonical name for a key built by key_of(); case-insensitive.
  std::optional<std::string_view> find(std::string_view key) const;
  bool stoplisted(std::string_view key) const;

  // Lowercased tokens joined by single spaces.
  static std::string key_of(std::string_view name);
  static std::string key_of(std::span<const Token> tokens);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> stop_;
  std::size_t max_tokens_ = 0;
};

// ---- knowledge base -------------------------------------------------------------

class KBClient {
 public:
  virtual ~KBClient() = default;
  // true/false when the knowledge base answered; nullopt when the lookup failed.
  virtual std::optional<bool> has_coordinates(std::string_view name) = 0;
};

// Offline table from "name<TAB>true|false" lines. Misses count as false.
class FixtureKB final : public KBClient {
 public:
  FixtureKB() = default;
  explicit FixtureKB(std::unordered_map<std::string, bool> table);
  static FixtureKB load(const std::filesystem::path& path);

  std::optional<bool> has_coordinates(std::string_view name) override;

 private:
  std::unordered_map<std::string, bool> table_;  // lowercase keys
};

struct WikidataConfig {
  std::string endpoint = "https://query.wikidata.org/sparql";
  std::string property = "P625";  // coordinate location
  std::string language = "en";
  int timeout_seconds = 5;
};

// Live SPARQL ASK lookups with a shared cache. Failures are not cached.
class WikidataKB final : public KBClient {
 public:
  explicit WikidataKB(WikidataConfig config);

  std::optional<bool> has_coordinates(std::string_view name) override;
  std::string query_for(std::string_view name) const;

 private:
  WikidataConfig config_;
  std::shared_mutex mutex_;
  std::unordered_map<std::string, bool> cache_;
};

// ---- extraction -----------------------------------------------------------------

inline constexpr std::array<std::string_view, 5> kLocativeCues{"in", "at", "near", "on", "down"};
inline constexpr std::array<std::string_view, 7> kStreetSuffixes{
    "straat", "street", "road", "laan", "avenue", "plein", "square"};

std::vector<EntitySpan> extract_locations(std::string_view text, const Gazetteer& gazetteer);
std::vector<EntitySpan> extract_dates(std::string_view text, const TemporalRef& ref);
std::vector<EntitySpan> extract_times(std::string_view text);

// CANDIDATE spans become LOCATION (kb_confirmed) when the KB reports coordinates,
// are dropped when it reports none, and stay CANDIDATE when the lookup fails.
std::vector<EntitySpan> kb_relabel(std::vector<EntitySpan> spans, KBClient& client);

struct SlotExtraction {
  std::optional<EntitySpan> location;
  std::optional<EntitySpan> date;
  std::optional<EntitySpan> time;
  std::vector<EntitySpan> all;  // every span kept after overlap and KB passes, by position
};

// Best span per slot: gazetteer > suffix cue > KB-confirmed; explicit/numeric >
// relative (resolved before unresolved); clock > bucket. Leftmost wins ties.
SlotExtraction extract_all(std::string_view text, const TemporalRef& ref,
                           const Gazetteer& gazetteer, KBClient* client);

}  // namespace safechat::ner
