#include "iforge/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iforge {

char32_t decode_one_utf8(std::string_view text, size_t& i) {
  const size_t n = text.size();
  unsigned char c = static_cast<unsigned char>(text[i]);
  if (c < 0x80) {
    ++i;
    return c;
  }
  if ((c & 0xE0) == 0xC0 && i + 1 < n && (text[i + 1] & 0xC0) == 0x80) {
    char32_t cp = (char32_t(c & 0x1F) << 6) | char32_t(text[i + 1] & 0x3F);
    i += 2;
    return cp;
  }
  if ((c & 0xF0) == 0xE0 && i + 2 < n && (text[i + 1] & 0xC0) == 0x80 &&
      (text[i + 2] & 0xC0) == 0x80) {
    char32_t cp = (char32_t(c & 0x0F) << 12) |
                  (char32_t(text[i + 1] & 0x3F) << 6) |
                  char32_t(text[i + 2] & 0x3F);
    i += 3;
    return cp;
  }
  if ((c & 0xF8) == 0xF0 && i + 3 < n && (text[i + 1] & 0xC0) == 0x80 &&
      (text[i + 2] & 0xC0) == 0x80 && (text[i + 3] & 0xC0) == 0x80) {
    char32_t cp = (char32_t(c & 0x07) << 18) |
                  (char32_t(text[i + 1] & 0x3F) << 12) |
                  (char32_t(text[i + 2] & 0x3F) << 6) |
                  char32_t(text[i + 3] & 0x3F);
    i += 4;
    return cp;
  }
  ++i;
  return 0xFFFD;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    out.push_back(decode_one_utf8(text, i));
  }
  return out;
}

std::string encode_utf8(const std::vector<char32_t>& codepoints) {
  std::string out;
  out.reserve(codepoints.size() * 3);
  for (char32_t cp : codepoints) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

size_t codepoint_count(std::string_view text) {
  size_t count = 0;
  for (char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

size_t byte_offset_of_codepoint(std::string_view text, size_t n) {
  size_t seen = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if ((text[i] & 0xC0) != 0x80) {
      if (seen == n) return i;
      ++seen;
    }
  }
  return text.size();
}

bool is_ascii_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v';
}

bool is_space_cp(char32_t cp) { return is_ascii_space(cp) || cp == 0x3000; }

bool is_cjk_cp(char32_t cp) {
  return (cp >= 0x2E80 && cp <= 0x2EFF) ||   // radicals
         (cp >= 0x3001 && cp <= 0x303F) ||   // CJK punctuation (not U+3000)
         (cp >= 0x3040 && cp <= 0x30FF) ||   // kana
         (cp >= 0x3400 && cp <= 0x4DBF) ||   // ideographs ext A
         (cp >= 0x4E00 && cp <= 0x9FFF) ||   // ideographs
         (cp >= 0xF900 && cp <= 0xFAFF) ||   // compatibility ideographs
         (cp >= 0xFF00 && cp <= 0xFFEF);     // fullwidth forms
}

bool is_word_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') ||
           (cp >= U'a' && cp <= U'z');
  }
  return (cp >= 0xFF10 && cp <= 0xFF19) ||  // fullwidth digits
         (cp >= 0xFF21 && cp <= 0xFF3A) ||  // fullwidth A-Z
         (cp >= 0xFF41 && cp <= 0xFF5A) ||  // fullwidth a-z
         (cp >= 0x3040 && cp <= 0x30FF) ||
         (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xF900 && cp <= 0xFAFF);
}

int estimate_tokens(std::string_view text) {
  // Weights in tenths of a token keep the arithmetic exact: CJK = 10,
  // each non-CJK run = 16, ceil once at the end.
  uint64_t tenths = 0;
  bool in_run = false;
  for (char32_t cp : decode_utf8(text)) {
    if (is_space_cp(cp)) {
      in_run = false;
    } else if (is_cjk_cp(cp)) {
      tenths += 10;
      in_run = false;
    } else {
      if (!in_run) {
        tenths += 16;
        in_run = true;
      }
    }
  }
  return static_cast<int>((tenths + 9) / 10);
}

std::string normalize_body(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\r') continue;
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);

  for (std::string& line : lines) {
    size_t end = line.size();
    while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' ||
                       line[end - 1] == '\f' || line[end - 1] == '\v')) {
      --end;
    }
    line.resize(end);
  }

  std::vector<std::string> kept;
  bool prev_blank = true;  // drops leading blank lines
  for (std::string& line : lines) {
    bool blank = line.empty();
    if (blank && prev_blank) continue;
    kept.push_back(std::move(line));
    prev_blank = blank;
  }
  while (!kept.empty() && kept.back().empty()) kept.pop_back();

  std::string out;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += kept[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\r') continue;
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

std::string normalize_for_compare(std::string_view s) {
  std::string out;
  bool pending_space = false;
  bool seen_any = false;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space_cp(cp)) {
      pending_space = seen_any;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(cp))));
    } else {
      out += encode_utf8({cp});
    }
    seen_any = true;
  }
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

std::string substitute_placeholders(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(values.begin(), values.end(),
                               [&](const auto& p) { return p.first == name; });
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

uint64_t rand_below(std::mt19937_64& rng, uint64_t n) {
  if (n == 0) throw std::invalid_argument("rand_below: n must be positive");
  // Rejection sampling; unlike uniform_int_distribution this is identical
  // on every standard library.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::vector<size_t> sample_indices(size_t population, size_t k,
                                   std::mt19937_64& rng) {
  if (k > population) {
    throw std::invalid_argument("sample_indices: k exceeds population");
  }
  std::vector<size_t> idx(population);
  for (size_t i = 0; i < population; ++i) idx[i] = i;
  // Partial Fisher-Yates: only the first k slots are settled.
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rand_below(rng, population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

uint64_t derive_seed(uint64_t base, std::string_view salt) {
  std::string material = std::to_string(base);
  material.push_back('\x1e');
  material += salt;
  const std::string h = sha256_hex(material);
  uint64_t seed = 0;
  for (int i = 0; i < 16; ++i) {
    char c = h[i];
    seed = (seed << 4) |
           static_cast<uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return seed;
}

}  // namespace iforge
