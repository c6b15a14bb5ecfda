// Internal: shared line/token machinery for the frame and scenario languages.
// Whitespace splits tokens, '#' starts a comment, errors carry line/column.
#pragma once

#include <cctype>
#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "sefm/error.hpp"

namespace sefm::dsl {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
  std::vector<int> columns;  // 1-based column of each token
};

inline std::vector<Line> tokenize_lines(const std::string& text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++number;
    Line line;
    line.number = number;
    std::size_t i = pos;
    while (i < eol) {
      char c = text[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < eol && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '#') ++i;
      line.tokens.push_back(text.substr(start, i - start));
      line.columns.push_back(static_cast<int>(start - pos) + 1);
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  return lines;
}

[[noreturn]] inline void syntax_error(const Line& line, int token_index,
                                      const std::string& message) {
  int column = 1;
  if (token_index >= 0 && token_index < static_cast<int>(line.columns.size()))
    column = line.columns[token_index];
  std::ostringstream os;
  os << "line " << line.number << ", column " << column << ": " << message;
  throw Error(errkind::kSyntax, os.str(), line.number, column);
}

inline bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return true;
}

inline std::string require_identifier(const Line& line, int idx, const std::string& what) {
  if (idx >= static_cast<int>(line.tokens.size()))
    syntax_error(line, static_cast<int>(line.tokens.size()) - 1, "expected " + what);
  const std::string& tok = line.tokens[idx];
  if (!is_identifier(tok)) syntax_error(line, idx, "invalid " + what + " '" + tok + "'");
  return tok;
}

inline double require_number(const Line& line, int idx, const std::string& what) {
  if (idx >= static_cast<int>(line.tokens.size()))
    syntax_error(line, static_cast<int>(line.tokens.size()) - 1, "expected " + what);
  const std::string& tok = line.tokens[idx];
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    syntax_error(line, idx, "invalid " + what + " '" + tok + "'");
  return value;
}

// Shortest round-trip text for a double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace sefm::dsl
