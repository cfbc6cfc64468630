#include "iforge/jsonl.hpp"

#include <fstream>
#include <sstream>

namespace iforge {

namespace fs = std::filesystem;

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  for_each_jsonl(path, [&](size_t, const json& j) { out.push_back(j); });
  return out;
}

void for_each_jsonl(const fs::path& path,
                    const std::function<void(size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JsonlError("cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw JsonlError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed JSON line");
    }
    fn(line_no, j);
  }
}

size_t count_jsonl_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JsonlError("cannot open " + path.string());
  size_t count = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ++count;
  }
  return count;
}

void atomic_write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  fs::rename(tmp, path);
}

void write_jsonl(const fs::path& path, const std::vector<json>& records) {
  std::string buf;
  for (const json& j : records) {
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace iforge
