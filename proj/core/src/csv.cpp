#include "coalesce/csv.h"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace coalesce::csv {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec != std::errc())
    throw std::runtime_error("failed to format double");
  return std::string(buffer, result.ptr);
}

std::string escape(const std::string& field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

Writer::Writer(const std::string& path) : path_(path), out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed on " + path_);
}

void Writer::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("write failed on " + path_);
}

Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  Table table;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any_field = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    any_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty())
      table.header = std::move(record);
    else
      table.rows.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !any_field) {
      quoted = true;
      any_field = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
    } else {
      field += c;
      any_field = true;
    }
  }
  if (quoted) throw std::runtime_error(path + ": unterminated quoted field");
  if (any_field || !field.empty() || !record.empty()) end_record();

  if (table.header.empty())
    throw std::runtime_error(path + ": empty CSV file");
  return table;
}

void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::string& path) {
  if (table.header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) want += ',';
      want += expected[i];
    }
    throw std::runtime_error(path + ": unexpected CSV header, want \"" + want +
                             "\"");
  }
}

}  // namespace coalesce::csv
