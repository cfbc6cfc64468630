#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iforge {

// Thrown for problems that must be reported before any request goes out:
// bad URLs, zero timeouts, malformed rule files, invalid requests.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FinishReason { complete, truncated, refused, transport_error };

std::string to_string(FinishReason r);

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.7;
  int max_output_tokens = 1024;
  std::string request_tag;  // opaque, for logging and mock replay
};

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::transport_error;
  int64_t latency_ms = 0;
  int attempt_count = 1;
};

struct GatewayConfig {
  std::string base_url;  // http(s)://... or mock:echo | mock:synth |
                         // mock:rules:<path> | mock:transcript:<path>
  std::string model_id = "unknown";
  int max_in_flight = 4;
  int max_retries = 2;
  int backoff_ms = 100;
  int timeout_ms = 30000;
  std::string api_key_env = "LLM_API_KEY";
};

void validate(const GatewayConfig& cfg);  // throws ConfigError

// Stable hash used to key transcript records; independent of request_tag.
std::string prompt_hash(std::string_view system_text,
                        std::string_view user_text);

class ChatGateway {
 public:
  virtual ~ChatGateway() = default;

  // Retries transport failures only (never refusals or empty generations),
  // with linear backoff. Never throws for model-side failures.
  CompletionResult complete(const CompletionRequest& req);

  // Results align with requests by index; at most cfg.max_in_flight calls
  // are outstanding at once; per-item failures are embedded in the results.
  std::vector<CompletionResult> complete_batch(
      std::span<const CompletionRequest> reqs);

  const GatewayConfig& config() const { return cfg_; }

 protected:
  explicit ChatGateway(GatewayConfig cfg);

  struct AttemptOutcome {
    bool transport_ok = false;
    std::string text;
    FinishReason finish = FinishReason::transport_error;
    // Mocks report a simulated latency so results are byte-stable; -1 means
    // "measure wall clock".
    int64_t simulated_latency_ms = -1;
  };
  virtual AttemptOutcome run_attempt(const CompletionRequest& req) = 0;

  GatewayConfig cfg_;
};

// ---------------------------------------------------------------------------
// Mock gateway: first-class implementation used by every test and by the
// offline pipeline mode. Pure function of the request, at any concurrency.
// ---------------------------------------------------------------------------

struct MockRule {
  std::string match;  // substring of user_text
  std::string response;
  FinishReason finish = FinishReason::complete;
};

class MockGateway : public ChatGateway {
 public:
  // mock:echo —响应 = user_text verbatim.
  static std::unique_ptr<MockGateway> echo(GatewayConfig cfg);
  // mock:rules:<path> — ordered substring rules from a JSON file.
  static std::unique_ptr<MockGateway> from_rules_file(
      GatewayConfig cfg, const std::filesystem::path& path);
  static std::unique_ptr<MockGateway> from_rules(GatewayConfig cfg,
                                                 std::vector<MockRule> rules,
                                                 std::string default_response);
  // mock:transcript:<path> — replay by request_tag, then by prompt_hash.
  static std::unique_ptr<MockGateway> from_transcript(
      GatewayConfig cfg, const std::filesystem::path& path);
  // Programmatic map: request_tag -> canned text (e.g. gold-echo for eval).
  static std::unique_ptr<MockGateway> canned(
      GatewayConfig cfg, std::map<std::string, std::string> by_tag);
  // mock:synth — deterministic content generator for the shipped pipeline
  // templates; output derived from a hash of the prompt.
  static std::unique_ptr<MockGateway> pipeline_synth(GatewayConfig cfg);

  // --- test instrumentation ---
  // First n attempts (across all requests) fail at the transport level.
  void fail_first_attempts(int n) { fail_remaining_ = n; }
  // Every attempt fails; models a dead endpoint.
  void fail_always() { fail_always_ = true; }
  // Simulated latency per request; also really sleeps so concurrency tests
  // can scramble completion order.
  void set_latency_fn(std::function<int64_t(const CompletionRequest&)> fn) {
    latency_fn_ = std::move(fn);
  }
  int high_water_mark() const { return high_water_.load(); }
  int total_attempts() const { return attempts_.load(); }

  struct TranscriptEntry {
    std::string request_tag;
    std::string prompt_hash;
    std::string response_text;
  };
  // Call log sorted by request_tag; serializable as a transcript file.
  std::vector<TranscriptEntry> transcript() const;
  void dump_transcript(const std::filesystem::path& path) const;

 protected:
  AttemptOutcome run_attempt(const CompletionRequest& req) override;

 private:
  explicit MockGateway(GatewayConfig cfg) : ChatGateway(std::move(cfg)) {}

  std::function<AttemptOutcome(const CompletionRequest&)> responder_;
  std::function<int64_t(const CompletionRequest&)> latency_fn_;
  std::atomic<int> fail_remaining_{0};
  bool fail_always_ = false;

  std::atomic<int> in_flight_{0};
  std::atomic<int> high_water_{0};
  std::atomic<int> attempts_{0};
  mutable std::mutex log_mutex_;
  std::vector<TranscriptEntry> log_;
};

// ---------------------------------------------------------------------------
// Live HTTP gateway: POST {base_url}/v1/chat/completions, OpenAI-style body,
// bearer token taken from the environment variable named in the config.
// ---------------------------------------------------------------------------

class HttpGateway : public ChatGateway {
 public:
  explicit HttpGateway(GatewayConfig cfg);

 protected:
  AttemptOutcome run_attempt(const CompletionRequest& req) override;
};

// Dispatches on the base_url scheme. Throws ConfigError for unknown schemes
// and for mock:gold (which needs task context; see make_gold_gateway).
std::unique_ptr<ChatGateway> make_gateway(const GatewayConfig& cfg);

}  // namespace iforge
