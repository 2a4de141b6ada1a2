#include "safechat/csv.hpp"

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/text.hpp"

namespace safechat::csv {

std::vector<std::vector<std::string>> parse(std::string_view s) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // tolerated before '\n'
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw Error(Errc::parse, "unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {
std::string squash(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out += text::to_lower(c);
  }
  return out;
}
}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto want = squash(name);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (squash(text::trim(header[i])) == want) return i;
  }
  return std::nullopt;
}

Table read_table(const std::filesystem::path& path) {
  std::string contents = io::read_file(path);
  if (contents.starts_with("\xEF\xBB\xBF")) contents.erase(0, 3);
  auto rows = parse(contents);
  if (rows.empty()) throw Error(Errc::parse, path.string() + ": missing CSV header");
  Table t;
  t.header = std::move(rows.front());
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace safechat::csv
