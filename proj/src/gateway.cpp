#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "iforge/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "iforge/jsonl.hpp"
#include "iforge/text.hpp"

namespace iforge {

namespace {

struct ParsedUrl {
  std::string scheme_host;  // scheme://host[:port]
  std::string path_prefix;  // possibly empty, no trailing slash
};

ParsedUrl parse_http_url(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("bad base_url (no scheme): " + url);
  }
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported scheme '" + scheme + "' in " + url);
  }
  size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host = url;
  } else {
    out.scheme_host = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  if (out.scheme_host.size() <= scheme.size() + 3) {
    throw ConfigError("bad base_url (no host): " + url);
  }
  return out;
}

void validate_request(const CompletionRequest& req) {
  if (req.user_text.empty()) {
    throw ConfigError("completion request has empty user_text");
  }
  if (req.temperature < 0.0 || req.temperature > 2.0) {
    throw ConfigError("temperature out of [0,2]: " +
                      std::to_string(req.temperature));
  }
  if (req.max_output_tokens < 1) {
    throw ConfigError("max_output_tokens must be >= 1");
  }
}

}  // namespace

std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::complete: return "complete";
    case FinishReason::truncated: return "truncated";
    case FinishReason::refused: return "refused";
    case FinishReason::transport_error: return "transport_error";
  }
  return "unknown";
}

void validate(const GatewayConfig& cfg) {
  if (cfg.base_url.empty()) throw ConfigError("base_url is empty");
  if (cfg.base_url.rfind("mock:", 0) != 0) {
    parse_http_url(cfg.base_url);
  }
  if (cfg.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (cfg.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (cfg.backoff_ms <= 0) throw ConfigError("backoff_ms must be positive");
  if (cfg.timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
}

std::string prompt_hash(std::string_view system_text,
                        std::string_view user_text) {
  std::string material(system_text);
  material.push_back('\x1e');
  material += user_text;
  return sha256_hex(material);
}

ChatGateway::ChatGateway(GatewayConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
}

CompletionResult ChatGateway::complete(const CompletionRequest& req) {
  validate_request(req);
  const auto t0 = std::chrono::steady_clock::now();
  CompletionResult res;
  int attempts = 0;
  for (;;) {
    ++attempts;
    AttemptOutcome out = run_attempt(req);
    if (out.transport_ok) {
      res.text = std::move(out.text);
      res.finish_reason = out.finish;
      res.latency_ms = out.simulated_latency_ms;
      break;
    }
    if (attempts > cfg_.max_retries) {
      res.text.clear();
      res.finish_reason = FinishReason::transport_error;
      res.latency_ms = out.simulated_latency_ms;
      break;
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(int64_t(cfg_.backoff_ms) * attempts));
  }
  res.attempt_count = attempts;
  if (res.latency_ms < 0) {
    res.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  }
  return res;
}

std::vector<CompletionResult> ChatGateway::complete_batch(
    std::span<const CompletionRequest> reqs) {
  for (const auto& r : reqs) validate_request(r);
  std::vector<CompletionResult> results(reqs.size());
  if (reqs.empty()) return results;

  const size_t workers =
      std::min<size_t>(static_cast<size_t>(cfg_.max_in_flight), reqs.size());
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= reqs.size()) break;
        results[i] = complete(reqs[i]);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------
// MockGateway
// ---------------------------------------------------------------------------

std::unique_ptr<MockGateway> MockGateway::echo(GatewayConfig cfg) {
  auto gw = std::unique_ptr<MockGateway>(new MockGateway(std::move(cfg)));
  gw->responder_ = [](const CompletionRequest& req) {
    AttemptOutcome out;
    out.transport_ok = true;
    out.finish = FinishReason::complete;
    out.text = req.user_text;
    return out;
  };
  return gw;
}

std::unique_ptr<MockGateway> MockGateway::from_rules(
    GatewayConfig cfg, std::vector<MockRule> rules,
    std::string default_response) {
  auto gw = std::unique_ptr<MockGateway>(new MockGateway(std::move(cfg)));
  gw->responder_ = [rules = std::move(rules),
                    default_response = std::move(default_response)](
                       const CompletionRequest& req) {
    AttemptOutcome out;
    out.transport_ok = true;
    out.finish = FinishReason::complete;
    for (const MockRule& rule : rules) {
      if (contains(req.user_text, rule.match)) {
        out.text = rule.response;
        out.finish = rule.finish;
        return out;
      }
    }
    out.text = default_response;
    return out;
  };
  return gw;
}

std::unique_ptr<MockGateway> MockGateway::from_rules_file(
    GatewayConfig cfg, const std::filesystem::path& path) {
  json spec;
  try {
    spec = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw ConfigError("bad mock rules file " + path.string() + ": " +
                      e.what());
  }
  std::vector<MockRule> rules;
  for (const json& r : spec.value("rules", json::array())) {
    MockRule rule;
    rule.match = r.at("match").get<std::string>();
    rule.response = r.value("response", "");
    std::string finish = r.value("finish", "complete");
    if (finish == "complete") rule.finish = FinishReason::complete;
    else if (finish == "refused") rule.finish = FinishReason::refused;
    else if (finish == "truncated") rule.finish = FinishReason::truncated;
    else throw ConfigError("bad finish value in " + path.string() + ": " + finish);
    rules.push_back(std::move(rule));
  }
  return from_rules(std::move(cfg), std::move(rules),
                    spec.value("default_response", ""));
}

std::unique_ptr<MockGateway> MockGateway::from_transcript(
    GatewayConfig cfg, const std::filesystem::path& path) {
  std::map<std::string, std::string> by_tag;
  std::map<std::string, std::string> by_hash;
  try {
    for_each_jsonl(path, [&](size_t, const json& j) {
      const std::string text = j.at("response_text").get<std::string>();
      if (j.contains("request_tag") && !j["request_tag"].get<std::string>().empty()) {
        by_tag[j["request_tag"].get<std::string>()] = text;
      }
      if (j.contains("prompt_hash")) {
        by_hash[j["prompt_hash"].get<std::string>()] = text;
      }
    });
  } catch (const std::exception& e) {
    throw ConfigError("bad transcript file " + path.string() + ": " + e.what());
  }
  auto gw = std::unique_ptr<MockGateway>(new MockGateway(std::move(cfg)));
  gw->responder_ = [by_tag = std::move(by_tag), by_hash = std::move(by_hash)](
                       const CompletionRequest& req) {
    AttemptOutcome out;
    auto it = by_tag.find(req.request_tag);
    if (it == by_tag.end()) {
      it = by_hash.find(prompt_hash(req.system_text, req.user_text));
      if (it == by_hash.end()) return out;  // replay miss -> transport failure
    }
    out.transport_ok = true;
    out.finish = FinishReason::complete;
    out.text = it->second;
    return out;
  };
  return gw;
}

std::unique_ptr<MockGateway> MockGateway::canned(
    GatewayConfig cfg, std::map<std::string, std::string> by_tag) {
  auto gw = std::unique_ptr<MockGateway>(new MockGateway(std::move(cfg)));
  gw->responder_ = [by_tag = std::move(by_tag)](const CompletionRequest& req) {
    AttemptOutcome out;
    auto it = by_tag.find(req.request_tag);
    if (it == by_tag.end()) return out;
    out.transport_ok = true;
    out.finish = FinishReason::complete;
    out.text = it->second;
    return out;
  };
  return gw;
}

namespace {

// Markers that identify which of the shipped templates produced a prompt.
// mock:synth is a fixture for the default templates; custom templates fall
// back to echo.
constexpr const char* kQuestionMarker = "请根据下面的资料段落";
constexpr const char* kAnswerMarker = "请仅依据下面的资料段落回答问题";
constexpr const char* kMcqMarker = "改写成一道单项选择题";
constexpr const char* kEvalMarker = "只输出选项字母";

std::string synth_questions(const std::string& h) {
  const std::string key = h.substr(0, 8);
  std::string out;
  out += "1. 资料中要点" + key + "的第一项细节是什么？\n";
  out += "2. 资料中要点" + key + "的第二部分说明了什么？\n";
  out += "3. 资料中要点" + key + "的第三条要点如何理解？\n";
  out += "4. 资料中要点" + key + "的第四处关键信息是什么？\n";
  return out;
}

std::string synth_answer(const std::string& h) {
  const std::string key = h.substr(0, 8);
  return "«ANS»根据给定资料，关于该问题的要点如下：要点编码" + key +
         "，性质为示例性说明，用于离线流水线演练。«/ANS»";
}

std::string synth_mcq(const std::string& h, const std::string& prompt) {
  std::string answer;
  size_t pos = prompt.rfind("答案：");
  if (pos != std::string::npos) {
    answer = trim(prompt.substr(pos + std::string("答案：").size()));
  }
  if (answer.empty()) answer = "示例答案" + h.substr(0, 8);
  std::replace(answer.begin(), answer.end(), '\n', ' ');

  const int key_idx = static_cast<int>(h[0] % 4);
  const std::string suffix = h.substr(0, 6);
  std::vector<std::string> options = {
      "与上述内容无关的干扰说法一（" + suffix + "）",
      "与上述内容无关的干扰说法二（" + suffix + "）",
      "与上述内容无关的干扰说法三（" + suffix + "）"};
  options.insert(options.begin() + key_idx, answer);

  std::string out = "Stem: 关于要点" + suffix + "，下列说法正确的是？\n";
  const char labels[4] = {'A', 'B', 'C', 'D'};
  for (int i = 0; i < 4; ++i) {
    out += std::string(1, labels[i]) + ". " + options[i] + "\n";
  }
  out += std::string("Key: ") + labels[key_idx] + "\n";
  return out;
}

}  // namespace

std::unique_ptr<MockGateway> MockGateway::pipeline_synth(GatewayConfig cfg) {
  auto gw = std::unique_ptr<MockGateway>(new MockGateway(std::move(cfg)));
  gw->responder_ = [](const CompletionRequest& req) {
    AttemptOutcome out;
    out.transport_ok = true;
    out.finish = FinishReason::complete;
    const std::string h = prompt_hash(req.system_text, req.user_text);
    if (contains(req.user_text, kMcqMarker)) {
      out.text = synth_mcq(h, req.user_text);
    } else if (contains(req.user_text, kAnswerMarker)) {
      out.text = synth_answer(h);
    } else if (contains(req.user_text, kQuestionMarker)) {
      out.text = synth_questions(h);
    } else if (contains(req.user_text, kEvalMarker)) {
      out.text = "A";
    } else {
      out.text = req.user_text;
    }
    return out;
  };
  return gw;
}

MockGateway::AttemptOutcome MockGateway::run_attempt(
    const CompletionRequest& req) {
  attempts_.fetch_add(1);
  const int cur = in_flight_.fetch_add(1) + 1;
  int hw = high_water_.load();
  while (cur > hw && !high_water_.compare_exchange_weak(hw, cur)) {
  }

  int64_t latency = latency_fn_ ? latency_fn_(req) : 0;
  if (latency > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(latency));
  }

  AttemptOutcome out;
  out.simulated_latency_ms = latency;

  bool fail = fail_always_;
  if (!fail) {
    int v = fail_remaining_.load();
    while (v > 0) {
      if (fail_remaining_.compare_exchange_weak(v, v - 1)) {
        fail = true;
        break;
      }
    }
  }
  if (!fail) {
    AttemptOutcome r = responder_(req);
    out.transport_ok = r.transport_ok;
    out.text = std::move(r.text);
    out.finish = r.finish;
    if (out.transport_ok) {
      std::lock_guard<std::mutex> lock(log_mutex_);
      log_.push_back({req.request_tag,
                      prompt_hash(req.system_text, req.user_text), out.text});
    }
  }
  in_flight_.fetch_sub(1);
  return out;
}

std::vector<MockGateway::TranscriptEntry> MockGateway::transcript() const {
  std::lock_guard<std::mutex> lock(log_mutex_);
  std::vector<TranscriptEntry> entries = log_;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const TranscriptEntry& a, const TranscriptEntry& b) {
                     return a.request_tag < b.request_tag;
                   });
  return entries;
}

void MockGateway::dump_transcript(const std::filesystem::path& path) const {
  std::string buf;
  for (const TranscriptEntry& e : transcript()) {
    json j{{"request_tag", e.request_tag},
           {"prompt_hash", e.prompt_hash},
           {"response_text", e.response_text}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

// ---------------------------------------------------------------------------
// HttpGateway
// ---------------------------------------------------------------------------

HttpGateway::HttpGateway(GatewayConfig cfg) : ChatGateway(std::move(cfg)) {
  parse_http_url(cfg_.base_url);  // validated eagerly
}

HttpGateway::AttemptOutcome HttpGateway::run_attempt(
    const CompletionRequest& req) {
  AttemptOutcome out;
  const ParsedUrl url = parse_http_url(cfg_.base_url);

  httplib::Client cli(url.scheme_host);
  const auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* token = std::getenv(cfg_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  json messages = json::array();
  if (!req.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user_text}});
  const json body{{"model", cfg_.model_id},
                  {"messages", messages},
                  {"temperature", req.temperature},
                  {"max_tokens", req.max_output_tokens}};

  auto res = cli.Post(url.path_prefix + "/v1/chat/completions", headers,
                      body.dump(), "application/json");
  if (!res || res->status < 200 || res->status >= 300) {
    return out;  // transport failure
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") ||
      !parsed["choices"].is_array() || parsed["choices"].empty()) {
    return out;
  }
  const json& choice = parsed["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    return out;
  }
  out.transport_ok = true;
  out.text = choice["message"]["content"].get<std::string>();
  const std::string finish = choice.value("finish_reason", "stop");
  if (finish == "length") out.finish = FinishReason::truncated;
  else if (finish == "content_filter") out.finish = FinishReason::refused;
  else out.finish = FinishReason::complete;
  return out;
}

std::unique_ptr<ChatGateway> make_gateway(const GatewayConfig& cfg) {
  validate(cfg);
  const std::string& url = cfg.base_url;
  if (url.rfind("mock:", 0) == 0) {
    const std::string kind = url.substr(5);
    if (kind == "echo") return MockGateway::echo(cfg);
    if (kind == "synth") return MockGateway::pipeline_synth(cfg);
    if (kind.rfind("rules:", 0) == 0) {
      return MockGateway::from_rules_file(cfg, kind.substr(6));
    }
    if (kind.rfind("transcript:", 0) == 0) {
      return MockGateway::from_transcript(cfg, kind.substr(11));
    }
    if (kind == "gold") {
      throw ConfigError(
          "mock:gold needs task context; it is constructed by the eval "
          "runner, not make_gateway");
    }
    throw ConfigError("unknown mock kind: " + url);
  }
  return std::make_unique<HttpGateway>(cfg);
}

}  // namespace iforge
