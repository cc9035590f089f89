#pragma once

// Small CSV layer: RFC-4180 quoting, UTF-8 passthrough, and shortest
// round-trip float formatting so identical runs produce identical bytes.

#include <fstream>
#include <string>
#include <vector>

namespace coalesce::csv {

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

// Quotes the field if it contains a comma, quote, CR, or LF.
std::string escape(const std::string& field);

class Writer {
 public:
  // Throws std::runtime_error if the file cannot be opened.
  explicit Writer(const std::string& path);

  void row(const std::vector<std::string>& fields);
  void flush();

 private:
  std::string path_;
  std::ofstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Parses a whole file; the first record is the header. Handles quoted fields
// and CRLF line endings. Throws std::runtime_error on unreadable or
// malformed input.
Table read(const std::string& path);

// Throws std::runtime_error naming the file when the header differs.
void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::string& path);

}  // namespace coalesce::csv
