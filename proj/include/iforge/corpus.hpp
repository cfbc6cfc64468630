#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iforge/jsonl.hpp"

namespace iforge {

enum class SourceCategory { traffic_engineering, thesis, examination, report, other };

std::string to_string(SourceCategory c);
std::optional<SourceCategory> parse_category(std::string_view s);
const std::vector<SourceCategory>& all_categories();

struct DocumentRecord {
  std::string doc_id;  // sha256 prefix of normalized body + ingest sequence
  SourceCategory source_category = SourceCategory::other;
  std::string title;
  std::string body;  // normalized
  int est_tokens = 0;
};

enum class BoundaryKind { paragraph, sentence, heading, hard_cut };

std::string to_string(BoundaryKind k);
std::optional<BoundaryKind> parse_boundary_kind(std::string_view s);

struct Chunk {
  std::string chunk_id;  // "<doc_id>#<zero-based index, 4 digits>"
  std::string doc_id;
  std::string text;
  int est_tokens = 0;
  BoundaryKind boundary_kind = BoundaryKind::paragraph;
};

struct IngestError {
  std::string path;
  std::string message;
};

struct IngestResult {
  std::vector<DocumentRecord> documents;
  std::vector<IngestError> errors;    // unreadable files
  std::vector<std::string> skipped;   // empty files
};

// Walks a directory tree of .txt/.md files. When `forced` is empty, the
// category comes from the top-level directory name under `root` (unknown
// names map to `other`); files directly under root are `other`.
IngestResult ingest(const std::filesystem::path& root,
                    std::optional<SourceCategory> forced = std::nullopt);

// Splits a normalized body into chunks bounded by [min_tokens, max_tokens],
// preferring heading > paragraph > sentence > hard cuts. In-order
// concatenation of the chunk texts reproduces the body exactly. The final
// chunk may fall below min_tokens; a document that is entirely below
// min_tokens becomes a single hard_cut chunk.
std::vector<Chunk> split_into_chunks(const DocumentRecord& doc,
                                     int min_tokens, int max_tokens);

// Ablation variant: the whole document as one chunk, bounds not enforced.
std::vector<Chunk> whole_document_chunk(const DocumentRecord& doc);

std::string make_chunk_id(const std::string& doc_id, size_t index);
// "<doc_id>#NNNN" -> doc_id; returns input unchanged if no '#'.
std::string doc_id_of_chunk(const std::string& chunk_id);

json to_json(const Chunk& chunk);
Chunk chunk_from_json(const json& j);
json to_json(const DocumentRecord& doc);
DocumentRecord document_from_json(const json& j);

}  // namespace iforge
