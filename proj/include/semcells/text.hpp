#pragma once

// Small text utilities: tokenization, number formatting and CSV fields.

#include <array>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "semcells/core.hpp"

namespace semcells::text {

inline constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// ASCII punctuation only; bytes of multi-byte UTF-8 sequences are kept.
inline constexpr bool is_punct(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) ||
         (u >= 0x5b && u <= 0x60) || (u >= 0x7b && u <= 0x7e);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Shortest decimal that parses back to the same double.
inline std::string format_double(double value) {
  std::array<char, 32> buffer{};
  const auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

// Whitespace split, ASCII lowercase, leading/trailing punctuation stripped,
// duplicates collapsed in first-occurrence order.
inline std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    const std::size_t start = i;
    while (i < sentence.size() && !is_space(sentence[i])) ++i;
    std::string_view word = sentence.substr(start, i - start);
    while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && is_punct(word.back())) word.remove_suffix(1);
    if (word.empty()) continue;
    std::string token(word);
    for (auto& c : token) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    tokens.push_back(std::move(token));
  }
  return dedupe_items(std::move(tokens));
}

inline std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Parses one CSV record (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> parse_csv_line(std::string_view line,
                                               std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      field_was_quoted = false;
    } else if (c == '"' && current.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else {
      current += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::MalformedCsv, "unterminated quoted field", line_no);
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace semcells::text
