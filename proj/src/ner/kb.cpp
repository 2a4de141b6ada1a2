#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/ner.hpp"
#include "safechat/text.hpp"

namespace safechat::ner {

FixtureKB::FixtureKB(std::unordered_map<std::string, bool> table) {
  for (auto& [name, value] : table) table_[text::to_lower(text::trim(name))] = value;
}

FixtureKB FixtureKB::load(const std::filesystem::path& path) {
  std::unordered_map<std::string, bool> table;
  for (const auto& [name, value] : io::read_tsv_pairs(path)) {
    const auto v = text::to_lower(text::trim(value));
    if (v != "true" && v != "false") {
      throw Error(Errc::bad_format,
                  "kb fixture " + path.string() + ": value for '" + name + "' is not true/false");
    }
    table[name] = v == "true";
  }
  return FixtureKB(std::move(table));
}

std::optional<bool> FixtureKB::has_coordinates(std::string_view name) {
  const auto it = table_.find(text::to_lower(text::trim(name)));
  return it != table_.end() && it->second;
}

WikidataKB::WikidataKB(WikidataConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(Errc::invalid_config, "kb: empty endpoint URL");
}

std::string WikidataKB::query_for(std::string_view name) const {
  std::string literal;
  for (char c : name) {
    if (c == '"' || c == '\\') literal += '\\';
    literal += c;
  }
  return "ASK { ?item rdfs:label \"" + literal + "\"@" + config_.language + " ; wdt:" +
         config_.property + " ?coord . }";
}

std::optional<bool> WikidataKB::has_coordinates(std::string_view name) {
  const std::string key(text::trim(name));
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  // Split "scheme://host[:port]/path" into the client base and the request path.
  const auto scheme_end = config_.endpoint.find("://");
  const auto path_start = config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const auto base = config_.endpoint.substr(0, path_start);
  const auto path = path_start == std::string::npos ? std::string("/") : config_.endpoint.substr(path_start);

  std::optional<bool> answer;
  try {
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    const httplib::Params params{{"query", query_for(key)}, {"format", "json"}};
    const httplib::Headers headers{{"Accept", "application/sparql-results+json"},
                                   {"User-Agent", "safechat-kb/1.0"}};
    auto res = client.Get(path, params, headers);
    if (res && res->status == 200) {
      const auto body = nlohmann::json::parse(res->body);
      answer = body.at("boolean").get<bool>();
    } else {
      spdlog::warn("kb: lookup for '{}' failed ({})", key,
                   res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error()));
    }
  } catch (const std::exception& ex) {
    spdlog::warn("kb: lookup for '{}' failed: {}", key, ex.what());
  }
  if (answer) {
    std::unique_lock lock(mutex_);
    cache_[key] = *answer;
  }
  return answer;
}

std::vector<EntitySpan> kb_relabel(std::vector<EntitySpan> spans, KBClient& client) {
  std::vector<EntitySpan> out;
  out.reserve(spans.size());
  for (auto& s : spans) {
    if (s.kind != EntityKind::candidate) {
      out.push_back(std::move(s));
      continue;
    }
    const auto found = client.has_coordinates(s.surface);
    if (!found) {
      spdlog::warn("kb: '{}' kept as CANDIDATE, knowledge base unavailable", s.surface);
      out.push_back(std::move(s));
    } else if (*found) {
      s.kind = EntityKind::location;
      s.source = SpanSource::kb_confirmed;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace safechat::ner
