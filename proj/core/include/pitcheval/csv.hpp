#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pitcheval {

// Minimal CSV support for the flat files this toolkit exchanges.
// Lines starting with '#' are metadata comments and are skipped on read.
// Quoted fields with doubled-quote escapes are handled; embedded newlines
// are not.

std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

// Shortest round-trip decimal form of a double ("nan"/"inf" spelled out).
std::string format_double(double value);
std::string format_int(std::int64_t value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; -1 when absent.
  int column(const std::string& name) const;
};

// Reads a whole CSV file. Throws Error(EmptyFile) when there is no header
// row, Error(IoFailure) when the file cannot be opened.
CsvTable read_csv(const std::string& path);

class CsvWriter {
 public:
  void comment_block(const std::string& comments) { comments_ += comments; }
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return body_; }
  std::string full() const { return comments_ + body_; }
  void save(const std::string& path) const;

 private:
  std::string comments_;
  std::string body_;
};

std::optional<double> parse_double(const std::string& text);
std::optional<std::int64_t> parse_int(const std::string& text);

}  // namespace pitcheval
