#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace iforge {

// Minimal RFC 4180 CSV: comma-delimited, UTF-8, fields quoted when they
// contain commas, quotes, or newlines; embedded quotes doubled.

struct CsvRecord {
  std::vector<std::string> fields;
  size_t line_no = 0;  // physical line the record starts on (1-based)
};

std::string csv_escape(std::string_view field);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// First record is the header. Throws std::runtime_error on unterminated
// quoted fields.
std::vector<CsvRecord> read_csv(const std::filesystem::path& path);

}  // namespace iforge
