#include <algorithm>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/ner_validation.hpp"
#include "safechat/rng.hpp"
#include "safechat/text.hpp"

namespace safechat::ner_validation {

namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 7> kPrefixes{"in", "at", "on", "near", "the", "around",
                                                    "about"};
constexpr std::array<std::string_view, 12> kMonthNames{
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};
constexpr std::array<std::string_view, 4> kUnits{"day", "week", "month", "year"};

std::size_t slot_index(EntityKind k) {
  switch (k) {
    case EntityKind::location: return 0;
    case EntityKind::date: return 1;
    case EntityKind::time: return 2;
    case EntityKind::candidate: break;
  }
  throw Error(Errc::invalid_config, "validation: CANDIDATE is not a slot kind");
}

struct Drawn {
  std::string surface;
  std::string normalized;
};

Drawn draw_location(Rng& rng, const ner::Gazetteer& g) {
  const auto& name = rng.pick(g.names());
  return {name, name};
}

Drawn draw_date(Rng& rng, const ner::TemporalRef& ref) {
  const auto back = static_cast<int>(rng.below(5 * 365)) + 1;
  const auto d = ner::add_days(ref.date, -back);
  const auto month = static_cast<unsigned>(d.month());
  const auto day = static_cast<unsigned>(d.day());
  const int year = static_cast<int>(d.year());
  switch (rng.below(7)) {
    case 0: return {"yesterday", ner::format_iso(ner::add_days(ref.date, -1))};
    case 1: return {"today", ner::format_iso(ref.date)};
    case 2: {
      const int n = static_cast<int>(rng.below(11)) + 1;
      const auto unit = kUnits[rng.below(kUnits.size())];
      ner::Date shifted = ref.date;
      if (unit == "day") shifted = ner::add_days(ref.date, -n);
      if (unit == "week") shifted = ner::add_days(ref.date, -7 * n);
      if (unit == "month") shifted = ner::add_months(ref.date, -n);
      if (unit == "year") shifted = ner::add_months(ref.date, -12 * n);
      const auto surface = n == 1 ? fmt::format("a {} ago", unit)
                                  : fmt::format("{} {}s ago", n, unit);
      return {surface, ner::format_iso(shifted)};
    }
    case 3: return {"on the " + ner::format_long(d), ner::format_iso(d)};
    case 4:
      return {fmt::format("on {} {}, {}", kMonthNames[month - 1], day, year), ner::format_iso(d)};
    case 5:
      return {fmt::format("on {:02}/{:02}/{:02}", month, day, year % 100), ner::format_iso(d)};
    default:
      return {fmt::format("on {:02}/{:02}/{}", month, day, year), ner::format_iso(d)};
  }
}

Drawn draw_time(Rng& rng) {
  ner::ResolvedTime t;
  std::string surface;
  switch (rng.below(6)) {
    case 0: {
      const int h = static_cast<int>(rng.below(12)) + 1;
      const bool pm = rng.below(2) == 1;
      surface = fmt::format("around {}{}", h, pm ? "pm" : "am");
      t.clock = ner::ClockTime{h % 12 + (pm ? 12 : 0), 0};
      break;
    }
    case 1: {
      const int h = static_cast<int>(rng.below(12)) + 1;
      surface = fmt::format("at {} o'clock", h);
      t.clock = ner::ClockTime{h, 0};
      t.ambiguous = true;
      break;
    }
    case 2:
      surface = "at night";
      t.bucket = ner::TimeBucket::night;
      break;
    case 3: {
      constexpr std::array<std::pair<std::string_view, ner::TimeBucket>, 3> parts{
          {{"morning", ner::TimeBucket::morning},
           {"afternoon", ner::TimeBucket::afternoon},
           {"evening", ner::TimeBucket::evening}}};
      const auto& [word, bucket] = parts[rng.below(parts.size())];
      surface = fmt::format("in the {}", word);
      t.bucket = bucket;
      break;
    }
    case 4: {
      const int h = static_cast<int>(rng.below(24));
      const int m = static_cast<int>(rng.below(60));
      surface = fmt::format("at {:02}:{:02}", h, m);
      t.clock = ner::ClockTime{h, m};
      break;
    }
    default: {
      const int h = static_cast<int>(rng.below(12)) + 1;
      const int m = static_cast<int>(rng.below(60));
      const bool pm = rng.below(2) == 1;
      surface = fmt::format("at {}:{:02} {}", h, m, pm ? "pm" : "am");
      t.clock = ner::ClockTime{h % 12 + (pm ? 12 : 0), m};
      break;
    }
  }
  return {surface, ner::format_time(t)};
}

constexpr std::array<std::pair<std::string_view, EntityKind>, 3> kPlaceholders{
    {{"{location}", EntityKind::location}, {"{date}", EntityKind::date}, {"{time}", EntityKind::time}}};

// Splits a template into literal text and placeholder kinds.
struct Piece {
  std::string literal;
  std::optional<EntityKind> slot;
};

std::vector<Piece> pieces_of(const ReportTemplate& t) {
  std::vector<Piece> out;
  std::string_view rest = t.text;
  while (!rest.empty()) {
    const auto open = rest.find('{');
    if (open == std::string_view::npos) {
      out.push_back({std::string(rest), std::nullopt});
      break;
    }
    if (open > 0) out.push_back({std::string(rest.substr(0, open)), std::nullopt});
    rest.remove_prefix(open);
    bool matched = false;
    for (const auto& [name, kind] : kPlaceholders) {
      if (rest.starts_with(name)) {
        out.push_back({{}, kind});
        rest.remove_prefix(name.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      const auto close = rest.find('}');
      throw Error(Errc::parse, "template " + t.id + ": unknown placeholder '" +
                                   std::string(rest.substr(0, close == std::string_view::npos
                                                                  ? rest.size()
                                                                  : close + 1)) +
                                   "'");
    }
  }
  return out;
}

}  // namespace

ReportTemplate parse_template(std::string id, std::string text) {
  ReportTemplate t{std::move(id), std::move(text)};
  const auto opens = std::count(t.text.begin(), t.text.end(), '{');
  if (opens != std::count(t.text.begin(), t.text.end(), '}')) {
    throw Error(Errc::parse, "template " + t.id + ": unbalanced braces");
  }
  pieces_of(t);
  return t;
}

std::vector<ReportTemplate> parse_templates(std::string_view contents) {
  std::vector<ReportTemplate> out;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    const auto line = text::trim(contents.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') {
      out.push_back(parse_template("T" + std::to_string(out.size() + 1), std::string(line)));
    }
    pos = nl + 1;
  }
  return out;
}

std::vector<ReportTemplate> load_templates(const std::filesystem::path& path) {
  auto out = parse_templates(io::read_file(path));
  if (out.empty()) throw Error(Errc::parse, "templates: " + path.string() + " has no templates");
  return out;
}

std::vector<GroundTruthInstance> generate_variants(const ReportTemplate& tmpl, std::size_t n,
                                                   const ner::Gazetteer& gazetteer,
                                                   const ner::TemporalRef& ref,
                                                   std::uint64_t seed) {
  if (gazetteer.empty()) throw Error(Errc::empty_gazetteer, "generate_variants: empty gazetteer");
  if (n == 0) throw Error(Errc::invalid_config, "generate_variants: n must be at least 1");
  const auto pieces = pieces_of(tmpl);
  Rng rng(seed);
  std::vector<GroundTruthInstance> out;
  out.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    GroundTruthInstance inst{tmpl.id, {}, {}};
    for (const auto& p : pieces) {
      if (!p.slot) {
        inst.text += p.literal;
        continue;
      }
      Drawn d;
      switch (*p.slot) {
        case EntityKind::location: d = draw_location(rng, gazetteer); break;
        case EntityKind::date: d = draw_date(rng, ref); break;
        default: d = draw_time(rng); break;
      }
      inst.truth.push_back({*p.slot, d.surface, inst.text.size(), d.normalized});
      inst.text += d.surface;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::string strip_prefix(std::string_view surface) {
  auto rest = text::trim(surface);
  for (;;) {
    std::size_t end = 0;
    while (end < rest.size() && !text::is_space(rest[end])) ++end;
    if (end == rest.size()) break;  // the last token is never stripped
    const auto head = text::to_lower(rest.substr(0, end));
    if (std::find(kPrefixes.begin(), kPrefixes.end(), head) == kPrefixes.end()) break;
    rest = text::trim(rest.substr(end));
  }
  return std::string(rest);
}

bool surface_match(std::string_view a, std::string_view b) {
  return text::to_lower(strip_prefix(a)) == text::to_lower(strip_prefix(b));
}

const KindScore& ValidationResult::of(EntityKind k) const { return surface[slot_index(k)]; }

std::string ValidationResult::table() const {
  std::string out = fmt::format("{:<10} {:>8} {:>6} {:>9}   {:>10}\n", "entity", "matched", "total",
                                "accuracy", "normalized");
  for (auto k : kSlotKinds) {
    const auto& s = surface[slot_index(k)];
    const auto& nrm = normalized[slot_index(k)];
    out += fmt::format("{:<10} {:>8} {:>6} {:>9.3f}   {:>10.3f}\n", ner::kind_name(k), s.matched,
                       s.total, s.accuracy(), nrm.accuracy());
  }
  for (const auto& t : per_template) {
    out += fmt::format("  {:<4}", t.template_id);
    for (auto k : kSlotKinds) {
      const auto& s = t.surface[slot_index(k)];
      if (s.total > 0) {
        out += fmt::format("  {} {}/{}", ner::kind_name(k), s.matched, s.total);
      }
    }
    out += '\n';
  }
  return out;
}

std::string ValidationResult::to_json() const {
  nlohmann::json j;
  auto score = [](const KindScore& s) {
    return nlohmann::json{{"matched", s.matched}, {"total", s.total}, {"accuracy", s.accuracy()}};
  };
  for (auto k : kSlotKinds) {
    j[std::string(ner::kind_name(k))] = score(surface[slot_index(k)]);
    j["normalized"][std::string(ner::kind_name(k))] = score(normalized[slot_index(k)]);
  }
  for (const auto& t : per_template) {
    nlohmann::json tj;
    for (auto k : kSlotKinds) tj[std::string(ner::kind_name(k))] = score(t.surface[slot_index(k)]);
    j["templates"][t.template_id] = tj;
  }
  return j.dump(2);
}

ValidationResult validate(const Extractor& extractor, const std::vector<ReportTemplate>& templates,
                          std::size_t n, const ner::Gazetteer& gazetteer,
                          const ner::TemporalRef& ref, std::uint64_t seed) {
  if (templates.empty()) throw Error(Errc::invalid_config, "validate: no templates");
  ValidationResult result;
  for (std::size_t ti = 0; ti < templates.size(); ++ti) {
    TemplateScore ts{templates[ti].id, {}};
    for (const auto& inst : generate_variants(templates[ti], n, gazetteer, ref, seed + ti)) {
      const auto got = extractor(inst.text);
      for (auto k : kSlotKinds) {
        const auto i = slot_index(k);
        bool expected_kind = false;
        bool surface_hit = false;
        bool value_hit = false;
        const auto& slot = k == EntityKind::location ? got.location
                           : k == EntityKind::date   ? got.date
                                                     : got.time;
        for (const auto& e : inst.truth) {
          if (e.kind != k) continue;
          expected_kind = true;
          if (!slot) continue;
          surface_hit = surface_hit || surface_match(slot->surface, e.surface);
          value_hit = value_hit || ner::describe(*slot) == e.normalized;
        }
        if (!expected_kind) continue;
        ++ts.surface[i].total;
        ++result.surface[i].total;
        ++result.normalized[i].total;
        if (surface_hit) {
          ++ts.surface[i].matched;
          ++result.surface[i].matched;
        }
        if (value_hit) ++result.normalized[i].matched;
      }
    }
    result.per_template.push_back(std::move(ts));
  }
  return result;
}

}  // namespace safechat::ner_validation
