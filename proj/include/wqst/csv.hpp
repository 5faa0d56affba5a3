#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wqst::csv {

// Reads comma-separated records. Quoted fields may contain commas, doubled
// quotes and line breaks. A trailing '\r' on each line is dropped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // False at end of input.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_line(std::string_view line);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace wqst::csv
