#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Byte-level helpers for UTF-8 text. Case folding is ASCII-only; bytes >= 0x80
// are treated as letters so that accented names survive tokenization intact.
namespace safechat::text {

inline bool is_ascii_alpha(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_high(char c) noexcept { return static_cast<unsigned char>(c) >= 0x80; }
inline char to_lower(char c) noexcept { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }
inline char to_upper(char c) noexcept {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_upper(std::string_view s) noexcept;
bool all_ascii_lower_alpha(std::string_view s) noexcept;

// Decodes one code point starting at s[i] and advances i. Invalid sequences
// decode as U+FFFD and advance by one byte.
char32_t next_codepoint(std::string_view s, std::size_t& i) noexcept;

// Letters for tokenization purposes: ASCII letters plus non-ASCII code points
// outside punctuation/symbol/emoji blocks. Apostrophes (U+0027, U+2019) are not letters.
bool is_letter_codepoint(char32_t cp) noexcept;

// 64-bit FNV-1a; stable across platforms, used to derive per-document seeds.
std::uint64_t fnv1a(std::string_view s) noexcept;

}  // namespace safechat::text
