#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safechat::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Reads "key<TAB>value" records. Blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_tsv_pairs(const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> parse_tsv_pairs(std::string_view contents,
                                                                 std::string_view origin);

// Non-comment, non-blank lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Little-endian binary encoding used by the model bundle.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void bytes(std::string_view s) { buf_.append(s); }
  void str(std::string_view s);  // u64 length prefix
  const std::string& data() const noexcept { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}
  std::uint8_t u8();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t n);
  std::string_view bytes(std::size_t n);
  std::string str();
  bool eof() const noexcept { return pos_ >= data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace safechat::io
