#include "cloudrisk/csv.hpp"

#include <charconv>
#include <cmath>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

int CsvReader::get() {
  const int c = in_.get();
  if (c != std::char_traits<char>::eof()) ++offset_;
  return c;
}

std::optional<CsvRecord> CsvReader::next() {
  constexpr int kEof = std::char_traits<char>::eof();
  if (peek() == kEof) return std::nullopt;

  CsvRecord rec;
  rec.line = line_;
  rec.offset = offset_;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  for (;;) {
    const int c = get();
    if (c == kEof) {
      if (quoted) {
        throw InputError("unterminated quoted field in record starting at line " +
                         std::to_string(rec.line) + " (byte offset " +
                         std::to_string(rec.offset) + ")");
      }
      rec.fields.push_back(std::move(field));
      rec.terminated = false;
      return rec;
    }
    if (quoted) {
      if (c == '"') {
        if (peek() == '"') {
          get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\r' && peek() == '\n') {
      continue;
    } else if (c == '\n') {
      ++line_;
      rec.fields.push_back(std::move(field));
      return rec;
    } else if (c == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
}

std::optional<std::string> CsvReader::raw_line() {
  constexpr int kEof = std::char_traits<char>::eof();
  if (peek() == kEof) return std::nullopt;
  std::string s;
  for (int c = get(); c != kEof && c != '\n'; c = get()) {
    s.push_back(static_cast<char>(c));
  }
  ++line_;
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string csv_escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  if (text == "nan" || text == "NaN") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw InputError("invalid number '" + std::string(text) + "' in " +
                     std::string(what));
  }
  return v;
}

long long parse_int(std::string_view text, std::string_view what) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw InputError("invalid integer '" + std::string(text) + "' in " +
                     std::string(what));
  }
  return v;
}

}  // namespace cloudrisk
