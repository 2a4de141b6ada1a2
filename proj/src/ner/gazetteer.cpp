#include <algorithm>

#include "safechat/csv.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/ner.hpp"
#include "safechat/text.hpp"

namespace safechat::ner {

std::string Gazetteer::key_of(std::span<const Token> tokens) {
  std::string key;
  for (const auto& t : tokens) {
    if (!key.empty()) key += ' ';
    key += t.lower();
  }
  return key;
}

std::string Gazetteer::key_of(std::string_view name) {
  const auto tokens = tokenize(name);
  return key_of(std::span<const Token>(tokens));
}

Gazetteer::Gazetteer(std::vector<std::string> names, std::vector<std::string> stoplist) {
  for (auto& n : names) {
    const auto trimmed = std::string(text::trim(n));
    if (trimmed.empty()) continue;
    auto key = key_of(trimmed);
    // Duplicate names (Victoria, Reading) keep the first, most populous entry.
    if (index_.contains(key)) continue;
    max_tokens_ = std::max(max_tokens_, tokenize(trimmed).size());
    index_.emplace(key, names_.size());
    // "New York City" is also known as "New York".
    if (key.size() > 5 && key.ends_with(" city")) {
      index_.try_emplace(key.substr(0, key.size() - 5), names_.size());
    }
    names_.push_back(trimmed);
  }
  for (const auto& s : stoplist) {
    const auto key = key_of(s);
    if (!key.empty()) stop_.insert(key);
  }
}

Gazetteer Gazetteer::load(const std::filesystem::path& csv_path,
                          const std::optional<std::filesystem::path>& stoplist_path) {
  const auto table = csv::read_table(csv_path);
  const auto col = table.column("city");
  if (!col) {
    throw Error(Errc::bad_format, "gazetteer: " + csv_path.string() + " has no 'city' column");
  }
  std::vector<std::string> names;
  names.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (*col < row.size()) names.push_back(row[*col]);
  }
  std::vector<std::string> stop;
  if (stoplist_path) stop = io::read_lines(*stoplist_path);
  Gazetteer g(std::move(names), std::move(stop));
  if (g.empty()) throw Error(Errc::empty_gazetteer, "gazetteer: " + csv_path.string() + " is empty");
  return g;
}

std::optional<std::string_view> Gazetteer::find(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return names_[it->second];
}

bool Gazetteer::stoplisted(std::string_view key) const { return stop_.contains(std::string(key)); }

}  // namespace safechat::ner
