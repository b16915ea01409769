// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ann/common.hpp"

namespace ann::llm {

enum class BackendKind { Live, Scripted };

struct ChatRequest {
  std::string model_name;
  std::optional<std::string> system_text;
  std::string user_text;            // non-empty
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct UsageRecord {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double cumulative_cost_estimate = 0.0;
};

struct ChatResponse {
  std::string text;
  UsageRecord usage;  // totals for the run after this call
  UsageRecord call;   // this call alone; stable across replays
  BackendKind backend = BackendKind::Scripted;
};

/// Per-million-token prices for one model. Zero when not configured.
struct ModelPrice {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

/// Run-wide usage accounting. Cumulative cost is monotone non-decreasing;
/// add() is atomic so concurrent executors can share one meter.
class UsageMeter {
 public:
  void set_price(const std::string& model_name, ModelPrice price);
  /// Returns the new run total; `call_out`, when given, receives this call's
  /// own tokens and cost.
  UsageRecord add(const std::string& model_name, std::int64_t input_tokens,
                  std::int64_t output_tokens, UsageRecord* call_out = nullptr);
  UsageRecord snapshot() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ModelPrice> prices_;
  UsageRecord total_;
};

/// One chat-completion provider. complete_once performs a single attempt;
/// retry and accounting live in Gateway.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::string complete_once(const ChatRequest& request,
                                    std::int64_t& input_tokens,
                                    std::int64_t& output_tokens) = 0;
};

/// Deterministic replay backend. A rule fires when every `match` fragment
/// appears as a substring of the rendered request (system text, newline,
/// user text); the first matching rule wins. Token counts are derived from
/// character counts so replays are byte-identical.
struct ScriptedRule {
  std::vector<std::string> match;
  std::string reply;
};

class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;

  /// Accepts either a bare array of {match, reply} or an object
  /// {"rules": [...], "default_reply": "..."}; `match` may be a single
  /// string or an array of fragments that must all appear.
  static std::shared_ptr<ScriptedBackend> from_json(const std::string& json_text);
  static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);

  void add_rule(ScriptedRule rule);
  void set_default_reply(std::string reply);

  BackendKind kind() const override { return BackendKind::Scripted; }
  std::string complete_once(const ChatRequest& request, std::int64_t& input_tokens,
                            std::int64_t& output_tokens) override;

  /// Rendered request texts in arrival order, for assertions in tests.
  std::vector<std::string> request_log() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptedRule> rules_;
  std::optional<std::string> default_reply_;
  std::vector<std::string> log_;
};

/// OpenAI-compatible chat-completions endpoint.
struct LiveConfig {
  std::string base_url;            // e.g. "https://api.openai.com"
  std::string completions_path = "/v1/chat/completions";
  std::string api_key;
  int connect_timeout_seconds = 10;
  int read_timeout_seconds = 120;
};

class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveConfig config);

  BackendKind kind() const override { return BackendKind::Live; }
  std::string complete_once(const ChatRequest& request, std::int64_t& input_tokens,
                            std::int64_t& output_tokens) override;

 private:
  LiveConfig config_;
};

struct RetryPolicy {
  int max_attempts = 3;          // total attempts, not retries
  int initial_backoff_ms = 250;
  double backoff_multiplier = 2.0;
};

/// Front door for every model call. Bounds in-flight requests, retries
/// transient failures (Timeout, RateLimited) with exponential backoff, and
/// records usage. Semantic failures are never retried.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, int parallelism,
          std::shared_ptr<UsageMeter> meter);

  ChatResponse complete(const ChatRequest& request);

  UsageRecord usage() const { return meter_->snapshot(); }
  BackendKind backend_kind() const { return backend_->kind(); }

 private:
  std::shared_ptr<Backend> backend_;
  RetryPolicy retry_;
  std::shared_ptr<UsageMeter> meter_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int free_slots_;
};

// --- tagged-output parsing shared by all prompt protocols ---

/// Content of the first `<tag>...</tag>` pair, trimmed. Tag names are
/// case-sensitive; surrounding prose is ignored. Throws Error(MissingTag)
/// when neither tag appears, Error(UnbalancedTag) on a lone open or close.
std::string extract_tagged(const std::string& text, const std::string& tag);

/// The four canonical judge option sentences.
namespace verdict_text {
inline constexpr const char* kCorrect = "The answer is correct.";
inline constexpr const char* kApproximated =
    "The answer is approximated but should be correct.";
inline constexpr const char* kIncorrectPrefix = "The answer is incorrect.";
inline constexpr const char* kNoAnswer = "The reply doesn't contain an answer.";
}  // namespace verdict_text

struct Verdict {
  enum class Kind { Correct, Approximated, Incorrect, NoAnswer };
  Kind kind = Kind::NoAnswer;
  std::string ground_truth;  // Kind::Incorrect only
  std::string extracted;     // Kind::Incorrect only

  /// Correct and Approximated count as passing.
  bool passing() const {
    return kind == Kind::Correct || kind == Kind::Approximated;
  }
};

/// Maps a judge reply onto one of the four canonical options by prefix match
/// after whitespace normalization. Incorrect captures the ground-truth and
/// extracted-answer spans. Throws Error(UnrecognizedVerdict) otherwise.
Verdict extract_verdict(const std::string& text);

}  // namespace ann::llm
