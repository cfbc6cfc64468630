#include "iforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "iforge/text.hpp"

namespace iforge {

namespace fs = std::filesystem;

std::string to_string(SourceCategory c) {
  switch (c) {
    case SourceCategory::traffic_engineering: return "traffic_engineering";
    case SourceCategory::thesis: return "thesis";
    case SourceCategory::examination: return "examination";
    case SourceCategory::report: return "report";
    case SourceCategory::other: return "other";
  }
  return "other";
}

std::optional<SourceCategory> parse_category(std::string_view s) {
  if (s == "traffic_engineering") return SourceCategory::traffic_engineering;
  if (s == "thesis") return SourceCategory::thesis;
  if (s == "examination") return SourceCategory::examination;
  if (s == "report") return SourceCategory::report;
  if (s == "other") return SourceCategory::other;
  return std::nullopt;
}

const std::vector<SourceCategory>& all_categories() {
  static const std::vector<SourceCategory> cats = {
      SourceCategory::traffic_engineering, SourceCategory::thesis,
      SourceCategory::examination, SourceCategory::report,
      SourceCategory::other};
  return cats;
}

std::string to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::paragraph: return "paragraph";
    case BoundaryKind::sentence: return "sentence";
    case BoundaryKind::heading: return "heading";
    case BoundaryKind::hard_cut: return "hard_cut";
  }
  return "paragraph";
}

std::optional<BoundaryKind> parse_boundary_kind(std::string_view s) {
  if (s == "paragraph") return BoundaryKind::paragraph;
  if (s == "sentence") return BoundaryKind::sentence;
  if (s == "heading") return BoundaryKind::heading;
  if (s == "hard_cut") return BoundaryKind::hard_cut;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

bool is_corpus_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".txt" || ext == ".md";
}

bool is_heading_line(std::string_view line) {
  size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  return hashes >= 1 && hashes <= 6 && hashes < line.size() &&
         line[hashes] == ' ';
}

std::string title_from(const std::string& body, const fs::path& file) {
  for (const std::string& line : split_lines(body)) {
    if (is_heading_line(line)) {
      size_t hashes = line.find(' ');
      return trim(line.substr(hashes));
    }
    break;
  }
  return file.stem().string();
}

}  // namespace

IngestResult ingest(const fs::path& root, std::optional<SourceCategory> forced) {
  if (!fs::exists(root)) {
    throw std::runtime_error("corpus path does not exist: " + root.string());
  }

  struct Entry {
    std::string rel;
    fs::path abs;
  };
  std::vector<Entry> files;
  if (fs::is_regular_file(root)) {
    files.push_back({root.filename().string(), root});
  } else {
    for (const auto& de : fs::recursive_directory_iterator(root)) {
      if (de.is_regular_file() && is_corpus_file(de.path())) {
        files.push_back(
            {fs::relative(de.path(), root).generic_string(), de.path()});
      }
    }
  }
  // Byte-wise path order fixes doc_id sequence numbers across runs.
  std::sort(files.begin(), files.end(),
            [](const Entry& a, const Entry& b) { return a.rel < b.rel; });

  IngestResult result;
  size_t seq = 0;
  for (const Entry& entry : files) {
    std::ifstream in(entry.abs, std::ios::binary);
    if (!in) {
      result.errors.push_back({entry.rel, "unreadable file"});
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
      result.errors.push_back({entry.rel, "read failed"});
      continue;
    }

    DocumentRecord doc;
    doc.body = normalize_body(ss.str());
    if (doc.body.empty()) {
      result.skipped.push_back(entry.rel);
      continue;
    }

    if (forced) {
      doc.source_category = *forced;
    } else {
      const size_t slash = entry.rel.find('/');
      if (slash == std::string::npos) {
        doc.source_category = SourceCategory::other;
      } else {
        doc.source_category = parse_category(entry.rel.substr(0, slash))
                                  .value_or(SourceCategory::other);
      }
    }

    char seq_buf[8];
    std::snprintf(seq_buf, sizeof(seq_buf), "%04zu", seq);
    doc.doc_id = sha256_hex(doc.body).substr(0, 12) + "-" + seq_buf;
    doc.title = title_from(doc.body, entry.abs);
    doc.est_tokens = estimate_tokens(doc.body);
    result.documents.push_back(std::move(doc));
    ++seq;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Chunking
// ---------------------------------------------------------------------------

namespace {

struct Piece {
  std::string text;           // includes its trailing separator
  BoundaryKind after;         // kind of the boundary that follows this piece
  bool heading_start = false; // piece begins a heading block
  bool splittable = true;     // false once reduced to a single sentence
};

// Segments the normalized body into blocks (heading lines and paragraphs),
// each carrying the exact separator that follows it, so that concatenating
// all pieces reproduces the body byte for byte.
std::vector<Piece> segment_blocks(const std::string& body) {
  const std::vector<std::string> lines = split_lines(body);
  struct Block {
    std::string text;
    std::string sep;
    bool heading = false;
  };
  std::vector<Block> blocks;
  size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].empty()) {  // separator handled below
      ++i;
      continue;
    }
    Block blk;
    if (is_heading_line(lines[i])) {
      blk.text = lines[i];
      blk.heading = true;
      ++i;
    } else {
      std::string text = lines[i];
      ++i;
      while (i < lines.size() && !lines[i].empty() &&
             !is_heading_line(lines[i])) {
        text += "\n" + lines[i];
        ++i;
      }
      blk.text = std::move(text);
    }
    if (i < lines.size()) {
      blk.sep = lines[i].empty() ? "\n\n" : "\n";
    }
    blocks.push_back(std::move(blk));
  }

  std::vector<Piece> pieces;
  pieces.reserve(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    Piece p;
    p.text = blocks[b].text + blocks[b].sep;
    p.heading_start = blocks[b].heading;
    const bool next_is_heading = b + 1 < blocks.size() && blocks[b + 1].heading;
    p.after = next_is_heading ? BoundaryKind::heading : BoundaryKind::paragraph;
    p.splittable = !blocks[b].heading;
    pieces.push_back(std::move(p));
  }
  return pieces;
}

bool is_sentence_end(char32_t cp) {
  return cp == U'。' || cp == U'！' || cp == U'？' || cp == U'；' ||
         cp == U'…';
}

bool is_latin_sentence_end(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U';';
}

// Splits a block's text into sentence pieces. Cut points fall after CJK
// sentence punctuation, or after Latin sentence punctuation followed by
// whitespace (keeping token estimates additive across pieces). Returns a
// single piece when no cut point exists.
std::vector<std::string> split_sentences(const std::string& text) {
  const std::vector<char32_t> cps = decode_utf8(text);
  std::vector<size_t> cut_after;  // codepoint index the sentence ends on
  for (size_t i = 0; i + 1 < cps.size(); ++i) {
    if (is_sentence_end(cps[i])) {
      cut_after.push_back(i);
    } else if (is_latin_sentence_end(cps[i]) && is_space_cp(cps[i + 1])) {
      // keep the following whitespace with the finished sentence
      size_t j = i + 1;
      while (j + 1 < cps.size() && is_space_cp(cps[j + 1])) ++j;
      cut_after.push_back(j);
      i = j;
    }
  }
  if (cut_after.empty()) return {text};

  std::vector<std::string> out;
  size_t start_cp = 0;
  for (size_t idx : cut_after) {
    const size_t from = byte_offset_of_codepoint(text, start_cp);
    const size_t to = byte_offset_of_codepoint(text, idx + 1);
    if (to > from) out.push_back(text.substr(from, to - from));
    start_cp = idx + 1;
  }
  const size_t tail_from = byte_offset_of_codepoint(text, start_cp);
  if (tail_from < text.size()) out.push_back(text.substr(tail_from));
  if (out.size() <= 1) return {text};
  return out;
}

// Incremental mirror of estimate_tokens: CJK = 10 tenths, each non-CJK
// run = 16 tenths, ceil at the end.
struct EstState {
  uint64_t tenths = 0;
  bool in_run = false;
  void feed(char32_t cp) {
    if (is_space_cp(cp)) {
      in_run = false;
    } else if (is_cjk_cp(cp)) {
      tenths += 10;
      in_run = false;
    } else if (!in_run) {
      tenths += 16;
      in_run = true;
    }
  }
  int tokens() const { return static_cast<int>((tenths + 9) / 10); }
};

// Longest codepoint prefix of `text` keeping estimate(cur + prefix) <= cap.
// Token estimates grow by at most 2 per codepoint, so this always lands in
// [cap-1, cap] when the full text would overflow.
size_t hard_cut_bytes(const std::string& cur, const std::string& text,
                      int cap) {
  EstState state;
  for (char32_t cp : decode_utf8(cur)) state.feed(cp);

  size_t best_bytes = 0;
  size_t i = 0;
  while (i < text.size()) {
    state.feed(decode_one_utf8(text, i));
    if (state.tokens() > cap) break;
    best_bytes = i;
  }
  return best_bytes;
}

}  // namespace

std::vector<Chunk> split_into_chunks(const DocumentRecord& doc,
                                     int min_tokens, int max_tokens) {
  if (min_tokens <= 0 || min_tokens >= max_tokens) {
    throw std::invalid_argument("chunk bounds require 0 < min < max, got min=" +
                                std::to_string(min_tokens) +
                                " max=" + std::to_string(max_tokens));
  }

  std::vector<Piece> queue = segment_blocks(doc.body);
  std::vector<Chunk> chunks;
  std::string cur;
  BoundaryKind cur_after = BoundaryKind::paragraph;

  auto close = [&](BoundaryKind kind) {
    Chunk c;
    c.doc_id = doc.doc_id;
    c.chunk_id = make_chunk_id(doc.doc_id, chunks.size());
    c.text = cur;
    c.est_tokens = estimate_tokens(cur);
    c.boundary_kind = kind;
    chunks.push_back(std::move(c));
    cur.clear();
  };

  size_t qi = 0;
  while (qi < queue.size()) {
    Piece& p = queue[qi];

    // Prefer cutting where a new section starts.
    if (p.heading_start && !cur.empty() &&
        estimate_tokens(cur) >= min_tokens) {
      close(BoundaryKind::heading);
      continue;
    }

    if (estimate_tokens(cur + p.text) <= max_tokens) {
      cur += p.text;
      cur_after = p.after;
      ++qi;
      continue;
    }

    // The piece overflows. Descend to sentences before giving up on it.
    if (p.splittable) {
      std::vector<std::string> sentences = split_sentences(p.text);
      if (sentences.size() > 1) {
        std::vector<Piece> expanded;
        for (size_t s = 0; s < sentences.size(); ++s) {
          Piece sp;
          sp.text = std::move(sentences[s]);
          sp.after =
              (s + 1 == sentences.size()) ? p.after : BoundaryKind::sentence;
          sp.heading_start = (s == 0) && p.heading_start;
          sp.splittable = false;
          expanded.push_back(std::move(sp));
        }
        queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(qi));
        queue.insert(queue.begin() + static_cast<std::ptrdiff_t>(qi),
                     expanded.begin(), expanded.end());
        continue;
      }
      p.splittable = false;
    }

    if (estimate_tokens(cur) >= min_tokens) {
      close(cur_after);
      continue;
    }

    // A single sentence that cannot fit: hard character cut.
    const size_t bytes = hard_cut_bytes(cur, p.text, max_tokens);
    cur += p.text.substr(0, bytes);
    p.text.erase(0, bytes);
    close(BoundaryKind::hard_cut);
  }

  if (!cur.empty() || chunks.empty()) {
    const bool whole_doc_under_min =
        chunks.empty() && estimate_tokens(cur) < min_tokens;
    close(whole_doc_under_min ? BoundaryKind::hard_cut : cur_after);
  }
  return chunks;
}

std::vector<Chunk> whole_document_chunk(const DocumentRecord& doc) {
  Chunk c;
  c.doc_id = doc.doc_id;
  c.chunk_id = make_chunk_id(doc.doc_id, 0);
  c.text = doc.body;
  c.est_tokens = estimate_tokens(doc.body);
  c.boundary_kind = BoundaryKind::paragraph;
  return {c};
}

std::string make_chunk_id(const std::string& doc_id, size_t index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return doc_id + "#" + buf;
}

std::string doc_id_of_chunk(const std::string& chunk_id) {
  const size_t pos = chunk_id.find('#');
  return pos == std::string::npos ? chunk_id : chunk_id.substr(0, pos);
}

json to_json(const Chunk& chunk) {
  return json{{"chunk_id", chunk.chunk_id},
              {"doc_id", chunk.doc_id},
              {"text", chunk.text},
              {"est_tokens", chunk.est_tokens},
              {"boundary_kind", to_string(chunk.boundary_kind)}};
}

Chunk chunk_from_json(const json& j) {
  Chunk c;
  c.chunk_id = j.at("chunk_id").get<std::string>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.est_tokens = j.at("est_tokens").get<int>();
  auto kind = parse_boundary_kind(j.at("boundary_kind").get<std::string>());
  if (!kind) throw std::runtime_error("bad boundary_kind in chunk record");
  c.boundary_kind = *kind;
  return c;
}

json to_json(const DocumentRecord& doc) {
  return json{{"doc_id", doc.doc_id},
              {"source_category", to_string(doc.source_category)},
              {"title", doc.title},
              {"body", doc.body},
              {"est_tokens", doc.est_tokens}};
}

DocumentRecord document_from_json(const json& j) {
  DocumentRecord d;
  d.doc_id = j.at("doc_id").get<std::string>();
  auto cat = parse_category(j.at("source_category").get<std::string>());
  if (!cat) throw std::runtime_error("bad source_category in document record");
  d.source_category = *cat;
  d.title = j.value("title", "");
  d.body = j.at("body").get<std::string>();
  d.est_tokens = j.at("est_tokens").get<int>();
  return d;
}

}  // namespace iforge
