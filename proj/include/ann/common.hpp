// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ann {

/// Failure categories shared by every engine module. Recoverable conditions
/// (validation findings, judge misfires) travel as data; these codes cover
/// the cases that abort an operation outright.
enum class ErrorCode {
  InvalidArgument,
  ConfigInvalid,
  Io,
  ParseError,
  PathExists,
  CycleDetected,
  MissingBinding,
  MissingTag,
  UnbalancedTag,
  UnrecognizedVerdict,
  NoMatchingRule,
  Timeout,
  RateLimited,
  MalformedProviderReply,
  UnresolvableVariable,
  NodeExecutionFailed,
  JudgeUnparseable,
  RubricUnparseable,
  MixedOutcomeKinds,
  GradientUnparseable,
  LayerwiseUnparseable,
  EditBudgetExceeded,
  UnknownLayerReference,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// --- small string helpers used across modules ---

/// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view text);

/// Collapses every whitespace run to a single space and trims the ends.
/// Used wherever two pieces of model-facing text are compared for equality.
std::string normalize_whitespace(std::string_view text);

bool starts_with(std::string_view text, std::string_view prefix);

}  // namespace ann
