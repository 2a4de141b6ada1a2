#include <nlohmann/json.hpp>

#include "safechat/dialogue.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"

namespace safechat::dialogue {

std::string interpolate(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto key = std::string(tmpl.substr(i + 1, close - i - 1));
        if (auto it = values.find(key); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

const std::vector<std::string_view>& Phrases::required_keys() {
  static const std::vector<std::string_view> keys{
      "greeting",      "ask_incident",   "gate_exhausted", "ask_location",    "ask_date",
      "ask_time",      "confirm_location", "confirm_date", "confirm_time",    "clarify_time",
      "slot_skipped",  "reprompt_yes_no", "guidance_intro", "medical_query",  "resource",
      "police_query",  "police_info",    "helpful_query",  "helpful_yes",     "helpful_no",
      "consent_query", "goodbye_stored", "goodbye",        "contradiction_note"};
  return keys;
}

Phrases::Phrases(std::map<std::string, std::vector<std::string>> table) : table_(std::move(table)) {
  for (const auto& [key, variants] : table_) {
    if (variants.empty()) throw Error(Errc::bad_format, "phrases: key '" + key + "' has no utterances");
    for (const auto& v : variants) {
      if (v.empty()) throw Error(Errc::bad_format, "phrases: empty utterance for '" + key + "'");
    }
  }
}

Phrases Phrases::parse(std::string_view json_text, std::string_view origin) {
  std::map<std::string, std::vector<std::string>> table;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw Error(Errc::bad_format, std::string(origin) + ": expected an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_string()) {
        table[key] = {value.get<std::string>()};
      } else {
        table[key] = value.get<std::vector<std::string>>();
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::bad_format, std::string(origin) + ": " + ex.what());
  }
  Phrases p(std::move(table));
  for (auto key : required_keys()) {
    if (!p.contains(key)) {
      throw Error(Errc::resource_missing,
                  std::string(origin) + ": missing phrase key '" + std::string(key) + "'");
    }
  }
  return p;
}

Phrases Phrases::load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

const std::vector<std::string>& Phrases::variants(std::string_view key) const {
  const auto it = table_.find(std::string(key));
  if (it == table_.end()) {
    throw Error(Errc::resource_missing, "phrases: no key '" + std::string(key) + "'");
  }
  return it->second;
}

std::string Phrases::render(std::string_view key, const std::map<std::string, std::string>& values,
                            std::size_t variant) const {
  const auto& v = variants(key);
  return interpolate(v[variant % v.size()], values);
}

}  // namespace safechat::dialogue
