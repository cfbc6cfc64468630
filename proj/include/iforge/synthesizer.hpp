#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iforge/corpus.hpp"
#include "iforge/gateway.hpp"

namespace iforge {

struct SeedQuestion {
  std::string seed_id;
  std::string text;  // must end with a question mark (？ or ?)
  SourceCategory category = SourceCategory::other;
};

struct CandidateQuestion {
  std::string question_id;  // "<chunk_id>-qNN"
  std::string chunk_id;
  std::string text;
  std::vector<std::string> seeds_used;
  std::string gen_model_id;
  double gen_temperature = 0.0;
};

struct RawQAPair {
  std::string pair_id;  // equals question_id
  std::string chunk_id;
  std::string question;
  std::string raw_answer;
  bool answer_markers_found = false;
};

struct AnswerMarkers {
  std::string begin = "«ANS»";
  std::string end = "«/ANS»";
};

// Validated at load: the named placeholders must be present; missing ones
// are configuration errors raised before any generation starts.
struct PromptTemplate {
  std::string text;
  static PromptTemplate load(const std::filesystem::path& path,
                             const std::vector<std::string>& required);
  static PromptTemplate from_string(std::string text,
                                    const std::vector<std::string>& required);
};

// Shipped defaults, used when the config does not name template files.
const std::string& default_question_template();
const std::string& default_answer_template();
const std::string& default_standing_instruction();

std::vector<SeedQuestion> load_seed_library(const std::filesystem::path& path);
void validate_seed(const SeedQuestion& seed);  // throws on bad records

struct SynthesizerConfig {
  int k_seeds = 3;
  int n_questions = 3;
  PromptTemplate question_template;
  PromptTemplate answer_template;
  AnswerMarkers markers;
  std::string standing_instruction;  // appended to answer prompts if absent
  double temperature = 0.7;
  int max_output_tokens = 1024;
  uint64_t rng_seed = 0;
};

SynthesizerConfig make_default_synth_config(uint64_t rng_seed);

// Seed examples for one chunk: uniform draw without replacement from the
// category-matched subset, falling back to the whole library when the subset
// is smaller than k. Deterministic in (rng_seed, chunk_id).
std::vector<SeedQuestion> sample_seeds(const std::vector<SeedQuestion>& library,
                                       SourceCategory category, int k,
                                       uint64_t rng_seed,
                                       const std::string& chunk_id);

// Parses model output into candidate questions: one per line, enumeration
// prefixes stripped, only lines ending in ？/? kept, truncated to n.
std::vector<std::string> parse_question_lines(const std::string& model_output,
                                              int n);

struct QuestionGenOutcome {
  std::vector<CandidateQuestion> questions;
  std::optional<std::string> error;  // transport-level failure for the chunk
};

QuestionGenOutcome generate_questions(const Chunk& chunk,
                                      SourceCategory category,
                                      const std::vector<SeedQuestion>& seeds,
                                      const SynthesizerConfig& cfg,
                                      ChatGateway& gateway);

std::string build_question_prompt(const Chunk& chunk,
                                  const std::vector<SeedQuestion>& sampled,
                                  const SynthesizerConfig& cfg);

// Step 3: substitutes {chunk} and {question} verbatim and guarantees the
// standing no-answer instruction is present.
std::string build_prompt(const std::string& question_text, const Chunk& chunk,
                         const PromptTemplate& answer_template,
                         const std::string& standing_instruction);

struct AnswerExtraction {
  std::string raw_answer;
  bool markers_found = false;
};

// First begin..end span wins; without markers the whole trimmed output is
// kept and flagged.
AnswerExtraction extract_marked_answer(const std::string& model_output,
                                       const AnswerMarkers& markers);

struct SynthRunResult {
  std::vector<RawQAPair> pairs;  // sorted by pair_id
  std::vector<std::string> errors;
  size_t chunks_with_no_questions = 0;
};

// Full Steps 2-4 pass. Parallelism comes from the gateway's batch bound;
// output is re-sorted by pair_id so worker count never changes the result.
SynthRunResult synthesize(const std::vector<Chunk>& chunks,
                          const std::vector<SeedQuestion>& seed_library,
                          const std::vector<DocumentRecord>& documents,
                          const SynthesizerConfig& cfg, ChatGateway& gateway);

json to_json(const RawQAPair& pair);
RawQAPair raw_pair_from_json(const json& j);
json to_json(const SeedQuestion& seed);

}  // namespace iforge
