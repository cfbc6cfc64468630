#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace iforge {

using json = nlohmann::json;

// Parse errors carry the path and 1-based line number.
struct JsonlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<json> read_jsonl(const std::filesystem::path& path);

// Calls fn(line_number, record) per non-empty line; throws JsonlError on the
// first malformed line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(size_t, const json&)>& fn);

size_t count_jsonl_records(const std::filesystem::path& path);

// Whole-file atomic write: content goes to a sibling temp file which is
// renamed into place on success and removed on failure.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view content);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& records);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace iforge
