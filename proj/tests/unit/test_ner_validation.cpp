#include <doctest.h>

#include <map>

#include <nlohmann/json.hpp>

#include "safechat/error.hpp"
#include "safechat/ner_validation.hpp"
#include "scenarios.hpp"

using namespace safechat;
using namespace safechat::ner_validation;

namespace {

const ner::Gazetteer& gaz() {
  static const ner::Gazetteer g = ner::Gazetteer::load(support::data_dir() / "gazetteer.csv",
                                                       support::data_dir() / "gazetteer_stoplist.txt");
  return g;
}

const ner::TemporalRef kRef{};

std::vector<ReportTemplate> shipped() {
  return load_templates(support::data_dir() / "ner_templates.txt");
}

}  // namespace

TEST_CASE("templates parse and reject unknown placeholders") {
  const auto t = shipped();
  CHECK(t.size() == 5);
  CHECK(t[0].id == "T1");
  CHECK_THROWS_AS(parse_template("X", "in {place}"), Error);
  CHECK_THROWS_AS(parse_template("X", "in {location"), Error);
  CHECK(parse_templates("# comment\n\nno placeholders here\n").size() == 1);
}

TEST_CASE("variant generation") {
  const auto all3 = parse_template("A", "in {location} {date} {time}");
  const auto v = generate_variants(all3, 100, gaz(), kRef, 42);
  REQUIRE(v.size() == 100);
  for (const auto& inst : v) {
    REQUIRE(inst.truth.size() == 3);
    for (const auto& e : inst.truth) CHECK(inst.text.substr(e.begin, e.surface.size()) == e.surface);
  }
  const auto again = generate_variants(all3, 100, gaz(), kRef, 42);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i].text == again[i].text);

  const auto plain = parse_template("B", "nothing to fill");
  for (const auto& inst : generate_variants(plain, 5, gaz(), kRef, 1)) {
    CHECK(inst.text == "nothing to fill");
    CHECK(inst.truth.empty());
  }
}

TEST_CASE("prefix stripping and matching") {
  CHECK(strip_prefix("in Maastricht") == "Maastricht");
  CHECK(strip_prefix("Maastricht") == "Maastricht");
  CHECK(strip_prefix("at around 10am") == "10am");
  CHECK(strip_prefix("  on the 5th July 2019 ") == "5th July 2019");
  CHECK(surface_match("in maastricht", "Maastricht"));
  const std::vector<std::string> s{"in Maastricht", "MAASTRICHT", "at 10am", "10am", "the park", ""};
  for (const auto& a : s) {
    for (const auto& b : s) CHECK(surface_match(a, b) == surface_match(b, a));
  }
}

TEST_CASE("perfect and empty extractors") {
  const auto templates = shipped();
  std::map<std::string, GroundTruthInstance> truth;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    for (auto& inst : generate_variants(templates[i], 10, gaz(), kRef, 7 + i)) {
      truth.emplace(inst.text, inst);
    }
  }
  auto perfect = [&](std::string_view text) {
    ner::SlotExtraction x;
    const auto& inst = truth.at(std::string(text));
    for (const auto& e : inst.truth) {
      ner::EntitySpan s;
      s.kind = e.kind;
      s.surface = e.surface;
      s.begin = e.begin;
      s.end = e.begin + e.surface.size();
      if (e.kind == ner::EntityKind::location) x.location = s;
      if (e.kind == ner::EntityKind::date) x.date = s;
      if (e.kind == ner::EntityKind::time) x.time = s;
    }
    return x;
  };
  const auto good = validate(perfect, templates, 10, gaz(), kRef, 7);
  for (auto k : kSlotKinds) {
    CHECK(good.of(k).accuracy() == 1.0);
    CHECK(good.of(k).total == 50);
  }
  const auto none = validate([](std::string_view) { return ner::SlotExtraction{}; }, templates, 10,
                             gaz(), kRef, 7);
  for (auto k : kSlotKinds) CHECK(none.of(k).accuracy() == 0.0);
}

TEST_CASE("n = 1 totals equal the template count; JSON is stable") {
  const auto templates = shipped();
  auto extractor = [&](std::string_view text) { return ner::extract_all(text, kRef, gaz(), nullptr); };
  const auto r = validate(extractor, templates, 1, gaz(), kRef, 42);
  for (auto k : kSlotKinds) {
    CHECK(r.of(k).total == templates.size());
    CHECK(r.of(k).matched <= r.of(k).total);
  }
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("LOCATION").at("total") == templates.size());
  CHECK(j.contains("normalized"));
  CHECK(validate(extractor, templates, 1, gaz(), kRef, 42).to_json() == r.to_json());
  CHECK(r.table().find("LOCATION") != std::string::npos);
}
