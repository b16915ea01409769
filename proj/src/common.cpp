// SPDX-License-Identifier: Apache-2.0
#include "ann/common.hpp"

#include <cctype>

namespace ann {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PathExists: return "PathExists";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::MissingTag: return "MissingTag";
    case ErrorCode::UnbalancedTag: return "UnbalancedTag";
    case ErrorCode::UnrecognizedVerdict: return "UnrecognizedVerdict";
    case ErrorCode::NoMatchingRule: return "NoMatchingRule";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedProviderReply: return "MalformedProviderReply";
    case ErrorCode::UnresolvableVariable: return "UnresolvableVariable";
    case ErrorCode::NodeExecutionFailed: return "NodeExecutionFailed";
    case ErrorCode::JudgeUnparseable: return "JudgeUnparseable";
    case ErrorCode::RubricUnparseable: return "RubricUnparseable";
    case ErrorCode::MixedOutcomeKinds: return "MixedOutcomeKinds";
    case ErrorCode::GradientUnparseable: return "GradientUnparseable";
    case ErrorCode::LayerwiseUnparseable: return "LayerwiseUnparseable";
    case ErrorCode::EditBudgetExceeded: return "EditBudgetExceeded";
    case ErrorCode::UnknownLayerReference: return "UnknownLayerReference";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

std::string trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

bool starts_with(std::string_view text, std::string_view prefix) {
  return text.size() >= prefix.size() && text.substr(0, prefix.size()) == prefix;
}

}  // namespace ann
