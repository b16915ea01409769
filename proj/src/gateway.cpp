// SPDX-License-Identifier: Apache-2.0
#include "ann/gateway.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#ifdef ANN_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace ann::llm {

using json = nlohmann::json;

void UsageMeter::set_price(const std::string& model_name, ModelPrice price) {
  std::lock_guard<std::mutex> lock(mutex_);
  prices_[model_name] = price;
}

UsageRecord UsageMeter::add(const std::string& model_name, std::int64_t input_tokens,
                            std::int64_t output_tokens, UsageRecord* call_out) {
  std::lock_guard<std::mutex> lock(mutex_);
  ModelPrice price;
  if (auto it = prices_.find(model_name); it != prices_.end()) price = it->second;
  double call_cost =
      static_cast<double>(input_tokens) * price.input_per_million / 1e6 +
      static_cast<double>(output_tokens) * price.output_per_million / 1e6;
  total_.input_tokens += input_tokens;
  total_.output_tokens += output_tokens;
  total_.cumulative_cost_estimate += call_cost;
  if (call_out) {
    call_out->input_tokens = input_tokens;
    call_out->output_tokens = output_tokens;
    call_out->cumulative_cost_estimate = call_cost;
  }
  return total_;
}

UsageRecord UsageMeter::snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return total_;
}

namespace {

std::string render_request_text(const ChatRequest& request) {
  if (request.system_text) return *request.system_text + "\n" + request.user_text;
  return request.user_text;
}

// Stand-in tokenizer for the scripted backend: one token per four characters,
// rounded up. Only relative magnitudes matter in tests.
std::int64_t approximate_tokens(const std::string& text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

}  // namespace

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const std::string& json_text) {
  json parsed = json::parse(json_text, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::ParseError, "script: malformed JSON");
  }
  auto backend = std::make_shared<ScriptedBackend>();
  const json* rules = nullptr;
  if (parsed.is_array()) {
    rules = &parsed;
  } else if (parsed.is_object()) {
    if (parsed.contains("default_reply")) {
      backend->set_default_reply(parsed.at("default_reply").get<std::string>());
    }
    if (parsed.contains("rules")) rules = &parsed.at("rules");
  } else {
    throw Error(ErrorCode::ParseError, "script: expected array or object");
  }
  if (rules) {
    for (const auto& entry : *rules) {
      if (!entry.is_object() || !entry.contains("match") || !entry.contains("reply")) {
        throw Error(ErrorCode::ParseError, "script rule needs match and reply");
      }
      ScriptedRule rule;
      const auto& match = entry.at("match");
      if (match.is_string()) {
        rule.match.push_back(match.get<std::string>());
      } else if (match.is_array()) {
        for (const auto& fragment : match) {
          rule.match.push_back(fragment.get<std::string>());
        }
      } else {
        throw Error(ErrorCode::ParseError, "script rule match must be string or array");
      }
      rule.reply = entry.at("reply").get<std::string>();
      backend->add_rule(std::move(rule));
    }
  }
  return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read script file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void ScriptedBackend::add_rule(ScriptedRule rule) {
  std::lock_guard<std::mutex> lock(mutex_);
  rules_.push_back(std::move(rule));
}

void ScriptedBackend::set_default_reply(std::string reply) {
  std::lock_guard<std::mutex> lock(mutex_);
  default_reply_ = std::move(reply);
}

std::string ScriptedBackend::complete_once(const ChatRequest& request,
                                           std::int64_t& input_tokens,
                                           std::int64_t& output_tokens) {
  const std::string rendered = render_request_text(request);
  std::lock_guard<std::mutex> lock(mutex_);
  log_.push_back(rendered);
  for (const auto& rule : rules_) {
    bool all = true;
    for (const auto& fragment : rule.match) {
      if (rendered.find(fragment) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) {
      input_tokens = approximate_tokens(rendered);
      output_tokens = approximate_tokens(rule.reply);
      return rule.reply;
    }
  }
  if (default_reply_) {
    input_tokens = approximate_tokens(rendered);
    output_tokens = approximate_tokens(*default_reply_);
    return *default_reply_;
  }
  throw Error(ErrorCode::NoMatchingRule,
              "no scripted rule matches request: " +
                  rendered.substr(0, std::min<size_t>(rendered.size(), 160)));
}

std::vector<std::string> ScriptedBackend::request_log() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "live backend needs a base_url");
  }
}

std::string LiveBackend::complete_once(const ChatRequest& request,
                                       std::int64_t& input_tokens,
                                       std::int64_t& output_tokens) {
  json body;
  body["model"] = request.model_name;
  body["messages"] = json::array();
  if (request.system_text) {
    body["messages"].push_back({{"role", "system"}, {"content", *request.system_text}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", request.user_text}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.connect_timeout_seconds, 0);
  client.set_read_timeout(config_.read_timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  auto result = client.Post(config_.completions_path, headers, body.dump(),
                            "application/json");
  if (!result) {
    throw Error(ErrorCode::Timeout,
                "provider unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status == 429) {
    throw Error(ErrorCode::RateLimited, "provider returned 429");
  }
  if (result->status >= 500) {
    throw Error(ErrorCode::Timeout,
                "provider returned " + std::to_string(result->status));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::Io, "provider returned " + std::to_string(result->status) +
                                   ": " + result->body.substr(0, 200));
  }

  json reply = json::parse(result->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
      !reply["choices"][0].contains("message")) {
    throw Error(ErrorCode::MalformedProviderReply,
                "reply lacks choices[0].message: " + result->body.substr(0, 200));
  }
  const auto& message = reply["choices"][0]["message"];
  if (!message.contains("content") || !message["content"].is_string()) {
    throw Error(ErrorCode::MalformedProviderReply, "message content missing");
  }
  input_tokens = 0;
  output_tokens = 0;
  if (reply.contains("usage")) {
    input_tokens = reply["usage"].value("prompt_tokens", 0);
    output_tokens = reply["usage"].value("completion_tokens", 0);
  }
  return message["content"].get<std::string>();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, int parallelism,
                 std::shared_ptr<UsageMeter> meter)
    : backend_(std::move(backend)),
      retry_(retry),
      meter_(std::move(meter)),
      free_slots_(parallelism > 0 ? parallelism : 1) {
  if (!backend_) throw Error(ErrorCode::InvalidArgument, "gateway needs a backend");
  if (!meter_) meter_ = std::make_shared<UsageMeter>();
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (request.user_text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "request user_text is empty");
  }

  std::unique_lock<std::mutex> lock(slots_mutex_);
  slots_cv_.wait(lock, [this] { return free_slots_ > 0; });
  --free_slots_;
  lock.unlock();

  struct SlotGuard {
    Gateway* self;
    ~SlotGuard() {
      std::lock_guard<std::mutex> lock(self->slots_mutex_);
      ++self->free_slots_;
      self->slots_cv_.notify_one();
    }
  } guard{this};

  int backoff_ms = retry_.initial_backoff_ms;
  int attempts = std::max(retry_.max_attempts, 1);
  for (int attempt = 1;; ++attempt) {
    try {
      std::int64_t input_tokens = 0;
      std::int64_t output_tokens = 0;
      std::string text = backend_->complete_once(request, input_tokens, output_tokens);
      ChatResponse response;
      response.text = std::move(text);
      response.usage =
          meter_->add(request.model_name, input_tokens, output_tokens, &response.call);
      response.backend = backend_->kind();
      return response;
    } catch (const Error& e) {
      bool transient =
          e.code() == ErrorCode::Timeout || e.code() == ErrorCode::RateLimited;
      if (!transient || attempt >= attempts) throw;
      if (backoff_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms = static_cast<int>(backoff_ms * retry_.backoff_multiplier);
      }
    }
  }
}

std::string extract_tagged(const std::string& text, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  size_t begin = text.find(open);
  if (begin == std::string::npos) {
    if (text.find(close) != std::string::npos) {
      throw Error(ErrorCode::UnbalancedTag, "closing tag without opener: " + tag);
    }
    throw Error(ErrorCode::MissingTag, tag);
  }
  size_t content = begin + open.size();
  size_t end = text.find(close, content);
  if (end == std::string::npos) {
    throw Error(ErrorCode::UnbalancedTag, "opening tag without closer: " + tag);
  }
  return trim(std::string_view(text).substr(content, end - content));
}

namespace {

// Payload of the incorrect-verdict sentence between two markers, with any
// angle-bracket tokens removed. Handles both "<tag> 7 </tag>" and bare "7".
std::string verdict_span(const std::string& text, const std::string& after,
                         const std::string& until) {
  size_t begin = text.find(after);
  if (begin == std::string::npos) return "";
  begin += after.size();
  size_t end = until.empty() ? text.size() : text.find(until, begin);
  if (end == std::string::npos) end = text.size();
  std::string segment = text.substr(begin, end - begin);
  std::string cleaned;
  bool in_token = false;
  for (char c : segment) {
    if (c == '<') {
      in_token = true;
      continue;
    }
    if (c == '>') {
      in_token = false;
      continue;
    }
    if (!in_token) cleaned.push_back(c);
  }
  cleaned = trim(cleaned);
  while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
  return trim(cleaned);
}

}  // namespace

Verdict extract_verdict(const std::string& text) {
  const std::string normalized = normalize_whitespace(text);
  Verdict verdict;
  if (starts_with(normalized, verdict_text::kApproximated)) {
    verdict.kind = Verdict::Kind::Approximated;
    return verdict;
  }
  if (starts_with(normalized, verdict_text::kCorrect)) {
    verdict.kind = Verdict::Kind::Correct;
    return verdict;
  }
  if (starts_with(normalized, verdict_text::kIncorrectPrefix)) {
    verdict.kind = Verdict::Kind::Incorrect;
    verdict.ground_truth = verdict_span(normalized, "Correct Answer:", "|");
    verdict.extracted = verdict_span(normalized, "Answer extracted:", "");
    return verdict;
  }
  if (starts_with(normalized, verdict_text::kNoAnswer)) {
    verdict.kind = Verdict::Kind::NoAnswer;
    return verdict;
  }
  throw Error(ErrorCode::UnrecognizedVerdict,
              normalized.substr(0, std::min<size_t>(normalized.size(), 120)));
}

}  // namespace ann::llm
