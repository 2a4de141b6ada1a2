#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "safechat/ner.hpp"

// Placeholder-template harness: instantiate report templates with random entities of
// known value and score an extractor against them.
namespace safechat::ner_validation {

using ner::EntityKind;

inline constexpr std::array<EntityKind, 3> kSlotKinds{EntityKind::location, EntityKind::date,
                                                      EntityKind::time};

struct ReportTemplate {
  std::string id;
  std::string text;  // {location}, {date}, {time} placeholders
};

// Throws Errc::parse on any '{...}' that is not one of the three placeholders.
ReportTemplate parse_template(std::string id, std::string text);
// One template per non-blank line; ids T1, T2, ...
std::vector<ReportTemplate> load_templates(const std::filesystem::path& path);
std::vector<ReportTemplate> parse_templates(std::string_view contents);

struct ExpectedEntity {
  EntityKind kind = EntityKind::location;
  std::string surface;
  std::size_t begin = 0;   // offset of surface in the instance text
  std::string normalized;  // ner::describe() rendering of the true value
};

struct GroundTruthInstance {
  std::string template_id;
  std::string text;
  std::vector<ExpectedEntity> truth;
};

// Dates are drawn no later than ref; relative forms are normalized against it.
std::vector<GroundTruthInstance> generate_variants(const ReportTemplate& tmpl, std::size_t n,
                                                   const ner::Gazetteer& gazetteer,
                                                   const ner::TemporalRef& ref,
                                                   std::uint64_t seed);

// Drops leading {in, at, on, near, the, around, about} tokens repeatedly, then trims.
std::string strip_prefix(std::string_view surface);
// Case-insensitive equality after strip_prefix on both sides.
bool surface_match(std::string_view a, std::string_view b);

struct KindScore {
  std::size_t matched = 0;
  std::size_t total = 0;
  double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
  }
};

struct TemplateScore {
  std::string template_id;
  std::array<KindScore, 3> surface;
};

struct ValidationResult {
  std::array<KindScore, 3> surface;     // the headline, string-level comparison
  std::array<KindScore, 3> normalized;  // extension: compares normalized values
  std::vector<TemplateScore> per_template;

  const KindScore& of(EntityKind k) const;
  std::string table() const;
  std::string to_json() const;  // {"LOCATION": {matched, total, accuracy}, ..., "normalized": {...}}
};

using Extractor = std::function<ner::SlotExtraction(std::string_view text)>;

// Per instance and kind, the extractor's chosen span for that slot is compared with
// the expected entity (any of them, if the template repeats a placeholder).
ValidationResult validate(const Extractor& extractor, const std::vector<ReportTemplate>& templates,
                          std::size_t n, const ner::Gazetteer& gazetteer,
                          const ner::TemporalRef& ref, std::uint64_t seed);

}  // namespace safechat::ner_validation
