#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safechat::csv {

// RFC 4180 records: comma-separated, fields optionally double-quoted, "" escapes a quote,
// quoted fields may span lines.
std::vector<std::vector<std::string>> parse(std::string_view contents);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name, compared case-insensitively ignoring spaces, '_' and '-'.
  std::optional<std::size_t> column(std::string_view name) const;
};

Table read_table(const std::filesystem::path& path);

std::string escape(std::string_view field);

}  // namespace safechat::csv
