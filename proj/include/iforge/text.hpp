#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace iforge {

// ---------------------------------------------------------------------------
// UTF-8
// ---------------------------------------------------------------------------

// Decodes UTF-8 leniently: an invalid byte becomes U+FFFD and the scan
// advances by one byte, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view text);

// Decodes the codepoint starting at byte offset `i` and advances `i` past it.
char32_t decode_one_utf8(std::string_view text, size_t& i);

std::string encode_utf8(const std::vector<char32_t>& codepoints);

size_t codepoint_count(std::string_view text);

// Byte length of the first `n` codepoints of `text` (clamped to the end).
size_t byte_offset_of_codepoint(std::string_view text, size_t n);

bool is_ascii_space(char32_t cp);
bool is_space_cp(char32_t cp);  // ASCII whitespace plus U+3000

// CJK for token-estimation purposes: ideographs, kana, CJK punctuation,
// and fullwidth forms all count as one token each.
bool is_cjk_cp(char32_t cp);

// "Word" codepoints for boundary checks: ASCII alphanumerics, fullwidth
// alphanumerics, ideographs and kana. CJK punctuation is not a word char.
bool is_word_cp(char32_t cp);

// ---------------------------------------------------------------------------
// Token estimation
//
// Fixed estimator used everywhere bounds or totals are computed: each CJK
// codepoint counts 1 token, each maximal run of non-CJK non-space codepoints
// counts 1.6 tokens, and the sum is rounded up once at the end.
// ---------------------------------------------------------------------------

int estimate_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// CRLF -> LF, trailing whitespace stripped per line, runs of blank lines
// collapsed to one, leading/trailing blank lines removed. No final newline.
std::string normalize_body(std::string_view text);

std::string trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

// Lowercases ASCII letters, trims, and collapses internal whitespace runs to
// a single space. Used for stem/option comparisons.
std::string normalize_for_compare(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

// Substitutes every occurrence of {name} placeholders given as (name, value)
// pairs. Unknown placeholders are left untouched.
std::string substitute_placeholders(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& values);

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data);
std::string sha256_hex_of_file(const std::string& path);

// ---------------------------------------------------------------------------
// Deterministic randomness
//
// std::shuffle and std::uniform_int_distribution are implementation-defined,
// so anything that must reproduce bit-for-bit across machines goes through
// these helpers on top of the fully specified mt19937_64.
// ---------------------------------------------------------------------------

uint64_t rand_below(std::mt19937_64& rng, uint64_t n);

// k distinct indices drawn uniformly from [0, population), in draw order.
std::vector<size_t> sample_indices(size_t population, size_t k,
                                   std::mt19937_64& rng);

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rand_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Stable 64-bit seed derived from a base seed and a string salt, so that
// per-item RNG streams do not depend on scheduling order.
uint64_t derive_seed(uint64_t base, std::string_view salt);

}  // namespace iforge
