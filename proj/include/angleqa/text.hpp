#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace angleqa::text {

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

/// Splits on a single-character delimiter, trimming each piece and dropping
/// empty pieces.
std::vector<std::string> split_list(std::string_view s, char delim = ',');

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string to_lower_ascii(std::string_view s);

}  // namespace angleqa::text
