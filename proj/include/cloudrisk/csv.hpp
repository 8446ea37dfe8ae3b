#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cloudrisk {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;    // 1-based line where the record starts
  std::size_t offset = 0;  // byte offset where the record starts
  bool terminated = true;  // ended with a line break
};

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
// breaks; CRLF and LF line ends are both accepted.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Throws InputError on an
  // unterminated quoted field.
  std::optional<CsvRecord> next();

  // Next physical line without its terminator; used for preambles.
  std::optional<std::string> raw_line();

  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }

 private:
  int get();
  int peek() { return in_.peek(); }

  std::istream& in_;
  std::size_t offset_ = 0;
  std::size_t line_ = 1;
};

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);
// Whole-field parse; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace cloudrisk
