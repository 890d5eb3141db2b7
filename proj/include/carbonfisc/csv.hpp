#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "carbonfisc/error.hpp"

namespace carbonfisc::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Comma-delimited reader with RFC 4180 quoting. Quoted fields may span lines.
// A leading UTF-8 byte-order mark is dropped. Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delim_(delimiter) {}

  std::optional<Record> next() {
    Record rec;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any = false;
    int c;
    while (true) {
      c = in_.get();
      if (c == EOF) break;
      if (!started_) {
        started_ = true;
        if (c == 0xEF && in_.peek() == 0xBB) {
          in_.get();
          if (in_.peek() == 0xBF) in_.get();
          continue;
        }
      }
      if (!any) {
        rec.line = line_;
        any = true;
      }
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && !field_was_quoted && trim(field).empty()) {
        field.clear();
        in_quotes = true;
        field_was_quoted = true;
      } else if (ch == delim_) {
        rec.fields.push_back(finish(field, field_was_quoted));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\n') {
        ++line_;
        rec.fields.push_back(finish(field, field_was_quoted));
        if (rec.fields.size() == 1 && rec.fields[0].empty() && !field_was_quoted) {
          rec.fields.clear();
          any = false;
          field.clear();
          field_was_quoted = false;
          continue;
        }
        return rec;
      } else {
        field.push_back(ch);
      }
    }
    if (in_quotes) {
      throw DataError("unterminated quoted field starting on line " + std::to_string(rec.line));
    }
    if (!any) return std::nullopt;
    rec.fields.push_back(finish(field, field_was_quoted));
    if (rec.fields.size() == 1 && rec.fields[0].empty()) return std::nullopt;
    return rec;
  }

 private:
  static std::string finish(const std::string& field, bool quoted) {
    if (quoted) return field;
    return std::string(trim(field));
  }

  std::istream& in_;
  char delim_;
  std::size_t line_ = 1;
  bool started_ = false;
};

inline std::vector<Record> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Record> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

// Strict numeric parse: the whole trimmed field must be consumed.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shortest representation that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace carbonfisc::csv
