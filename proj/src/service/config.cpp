#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/service.hpp"

namespace safechat::service {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(std::string_view key, std::string_view why) {
  throw Error(Errc::invalid_config, "config key '" + std::string(key) + "': " + std::string(why));
}

std::filesystem::path path_at(const json& j, const char* key, const std::filesystem::path& base) {
  const auto& v = j.at(key);
  if (!v.is_string() || v.get<std::string>().empty()) bad_key(key, "expected a non-empty path string");
  std::filesystem::path p = v.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

template <class T>
T number_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad_key(key, "expected an integer");
  return v.get<T>();
}

bool bool_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) bad_key(key, "expected true or false");
  return v.get<bool>();
}

std::string string_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) bad_key(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "config: expected a JSON object");
  static const std::set<std::string> known{
      "bundle",   "gazetteer",  "gazetteer_stoplist", "phrases",      "guidance",
      "store",    "kb_fixture", "static_dir",         "resources",    "live_kb",
      "kb_endpoint", "kb_property", "kb_language",    "kb_timeout_seconds", "host",
      "port",     "max_sessions", "idle_minutes",     "gate_cap",     "threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) bad_key(key, "unknown key");
  }
  for (const char* key : {"bundle", "gazetteer", "phrases", "guidance", "store"}) {
    if (!j.contains(key)) bad_key(key, "required");
  }

  ServiceConfig c;
  c.bundle = path_at(j, "bundle", base);
  c.gazetteer = path_at(j, "gazetteer", base);
  c.phrases = path_at(j, "phrases", base);
  c.guidance = path_at(j, "guidance", base);
  c.store = path_at(j, "store", base);
  if (j.contains("gazetteer_stoplist")) c.gazetteer_stoplist = path_at(j, "gazetteer_stoplist", base);
  if (j.contains("kb_fixture")) c.kb_fixture = path_at(j, "kb_fixture", base);
  if (j.contains("static_dir")) c.static_dir = path_at(j, "static_dir", base);
  if (j.contains("resources")) c.resources = path_at(j, "resources", base);
  if (j.contains("live_kb")) c.live_kb = bool_at(j, "live_kb");
  if (j.contains("kb_endpoint")) c.kb.endpoint = string_at(j, "kb_endpoint");
  if (j.contains("kb_property")) c.kb.property = string_at(j, "kb_property");
  if (j.contains("kb_language")) c.kb.language = string_at(j, "kb_language");
  if (j.contains("kb_timeout_seconds")) c.kb.timeout_seconds = number_at<int>(j, "kb_timeout_seconds");
  if (j.contains("host")) c.host = string_at(j, "host");
  if (j.contains("port")) c.port = number_at<int>(j, "port");
  if (j.contains("max_sessions")) {
    const auto v = number_at<long long>(j, "max_sessions");
    if (v < 1) bad_key("max_sessions", "must be at least 1");
    c.max_sessions = static_cast<std::size_t>(v);
  }
  if (j.contains("idle_minutes")) c.idle_minutes = number_at<int>(j, "idle_minutes");
  if (j.contains("gate_cap")) c.gate_cap = number_at<int>(j, "gate_cap");
  if (j.contains("threads")) c.threads = number_at<int>(j, "threads");
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& ex) {
    throw Error(Errc::invalid_config, "config " + path.string() + ": " + ex.what());
  }
  return from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

void ServiceConfig::apply_env(const std::function<const char*(const char*)>& getenv_fn) {
  if (const char* p = getenv_fn("SAFECHAT_PORT"); p != nullptr && *p != '\0') {
    const std::string_view s(p);
    int v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw Error(Errc::invalid_config, "environment SAFECHAT_PORT: not an integer");
    }
    port = v;
  }
  if (const char* s = getenv_fn("SAFECHAT_STORE"); s != nullptr && *s != '\0') store = s;
  validate();
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) bad_key("port", "must be in [0, 65535]");
  if (idle_minutes < 1) bad_key("idle_minutes", "must be at least 1");
  if (gate_cap < 1) bad_key("gate_cap", "must be at least 1");
  if (threads < 1) bad_key("threads", "must be at least 1");
  if (kb.timeout_seconds < 1) bad_key("kb_timeout_seconds", "must be at least 1");
  if (live_kb && kb.endpoint.empty()) bad_key("kb_endpoint", "required when live_kb is true");
}

}  // namespace safechat::service
