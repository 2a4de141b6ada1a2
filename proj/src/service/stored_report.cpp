#include <ctime>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "safechat/error.hpp"
#include "safechat/service.hpp"

namespace safechat::service {

namespace {

using ojson = nlohmann::ordered_json;

std::optional<std::string> confirmed_value(const dialogue::SessionContext& ctx, ner::EntityKind k) {
  const auto& s = ctx.slot(k);
  if (!s.confirmed || !s.value) return std::nullopt;
  return ner::describe(*s.value);
}

}  // namespace

std::string iso_utc(Clock::time_point t) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  const std::time_t tt = Clock::to_time_t(secs);
  std::tm utc{};
  gmtime_r(&tt, &utc);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", utc.tm_year + 1900, utc.tm_mon + 1,
                     utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
}

StoredReport make_report(const dialogue::SessionContext& ctx, Clock::time_point consent_time) {
  StoredReport r;
  r.intents = ctx.intents;
  r.location = confirmed_value(ctx, ner::EntityKind::location);
  r.date = confirmed_value(ctx, ner::EntityKind::date);
  r.time = confirmed_value(ctx, ner::EntityKind::time);
  if (ctx.classification) {
    for (auto t : classify::kTasks) {
      const auto i = static_cast<std::size_t>(t);
      r.probabilities[i] = ctx.classification->scores[i].p;
    }
  }
  r.consent_timestamp = iso_utc(consent_time);
  return r;
}

std::string to_json_line(const StoredReport& r) {
  ojson j;
  j["schema_version"] = r.schema_version;
  ojson intents = ojson::array();
  for (auto t : r.intents.ordered()) intents.push_back(classify::type_name(t));
  j["intents"] = intents;
  auto opt = [](const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); };
  j["location"] = opt(r.location);
  j["date"] = opt(r.date);
  j["time"] = opt(r.time);
  ojson probs = ojson::object();
  for (auto t : classify::kTasks) probs[std::string(classify::task_name(t))] = r.probabilities[static_cast<std::size_t>(t)];
  j["probabilities"] = probs;
  j["consent_timestamp"] = r.consent_timestamp;
  return j.dump();
}

StoredReport report_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    StoredReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion) {
      throw Error(Errc::bad_format, "stored report: unsupported schema_version");
    }
    for (const auto& name : j.at("intents")) {
      const auto s = name.get<std::string>();
      bool known = false;
      for (auto t : {classify::HarassmentType::verbal, classify::HarassmentType::non_verbal,
                     classify::HarassmentType::physical}) {
        if (classify::type_name(t) == s) {
          r.intents.insert(t);
          known = true;
        }
      }
      if (!known) throw Error(Errc::bad_format, "stored report: unknown intent " + s);
    }
    auto opt = [&](const char* key) -> std::optional<std::string> {
      const auto& v = j.at(key);
      if (v.is_null()) return std::nullopt;
      return v.get<std::string>();
    };
    r.location = opt("location");
    r.date = opt("date");
    r.time = opt("time");
    const auto& probs = j.at("probabilities");
    for (auto t : classify::kTasks) {
      r.probabilities[static_cast<std::size_t>(t)] = probs.at(std::string(classify::task_name(t))).get<double>();
    }
    r.consent_timestamp = j.at("consent_timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::bad_format, std::string("stored report: ") + ex.what());
  }
}

}  // namespace safechat::service
