#include "iforge/csvio.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "iforge/jsonl.hpp"

namespace iforge {

namespace fs = std::filesystem;

std::string csv_escape(std::string_view field) {
  bool needs_quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string buf;
  auto append_row = [&buf](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) buf.push_back(',');
      buf += csv_escape(row[i]);
    }
    buf.push_back('\n');
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  atomic_write_file(path, buf);
}

std::vector<CsvRecord> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<CsvRecord> records;
  CsvRecord cur;
  cur.line_no = 1;
  std::string field;
  bool in_quotes = false;
  bool record_has_data = false;
  size_t line = 1;

  auto end_field = [&]() {
    cur.fields.push_back(field);
    field.clear();
  };
  auto end_record = [&]() {
    if (record_has_data || !cur.fields.empty() || !field.empty()) {
      end_field();
      records.push_back(cur);
    }
    cur = CsvRecord{};
    cur.line_no = line;
    record_has_data = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') ++line;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else if (c == '\r') {
        // normalized away
      } else {
        field.push_back(c);
      }
      record_has_data = true;
    } else {
      switch (c) {
        case '"':
          in_quotes = true;
          record_has_data = true;
          break;
        case ',':
          end_field();
          record_has_data = true;
          break;
        case '\r':
          break;
        case '\n':
          end_record();
          break;
        default:
          field.push_back(c);
          record_has_data = true;
      }
    }
  }
  if (in_quotes) {
    throw std::runtime_error(path.string() + ": unterminated quoted field");
  }
  end_record();
  return records;
}

}  // namespace iforge
