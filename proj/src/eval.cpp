// SPDX-License-Identifier: Apache-2.0
#include "ann/eval.hpp"

#include <cctype>
#include <cstdlib>

#include "ann/prompts.hpp"

namespace ann::eval {

namespace {

llm::ChatResponse call_judge(const Engine& engine, const std::string& user_text) {
  llm::ChatRequest request;
  request.model_name = engine.config.judge_model.name;
  request.user_text = user_text;
  request.temperature = engine.config.judge_model.temperature;
  request.max_output_tokens = engine.config.judge_model.max_output_tokens;
  return engine.gateway->complete(request);
}

// Number following "<label>:", tolerating an opening bracket and trailing
// prose ("Coherence: [8, tight structure]" and "Coherence: 8" both parse).
bool parse_labeled_score(const std::string& text, const std::string& label,
                         double* value) {
  size_t at = text.find(label + ":");
  if (at == std::string::npos) return false;
  size_t cursor = at + label.size() + 1;
  while (cursor < text.size() &&
         (std::isspace(static_cast<unsigned char>(text[cursor])) ||
          text[cursor] == '[' || text[cursor] == '*')) {
    ++cursor;
  }
  const char* begin = text.c_str() + cursor;
  char* end = nullptr;
  double parsed = std::strtod(begin, &end);
  if (end == begin) return false;
  *value = parsed;
  return true;
}

bool parse_labeled_text(const std::string& text, const std::string& label,
                        std::string* value) {
  size_t at = text.find(label + ":");
  if (at == std::string::npos) return false;
  size_t begin = at + label.size() + 1;
  size_t end = text.find('\n', begin);
  if (end == std::string::npos) end = text.size();
  std::string line = trim(text.substr(begin, end - begin));
  if (!line.empty() && line.front() == '[' && line.back() == ']') {
    line = trim(line.substr(1, line.size() - 2));
  }
  *value = line;
  return true;
}

}  // namespace

RubricScore parse_rubric(const std::string& text) {
  RubricScore score;
  std::string missing;
  auto require_score = [&](const char* label, double* slot) {
    if (!parse_labeled_score(text, label, slot)) {
      if (!missing.empty()) missing += ", ";
      missing += label;
    }
  };
  require_score("Coherence", &score.coherence);
  require_score("Engagement", &score.engagement);
  require_score("Adherence", &score.adherence);
  require_score("Creativity", &score.creativity);
  require_score("Overall Score", &score.overall);
  if (!parse_labeled_text(text, "Suggestions for Improvement", &score.suggestions)) {
    if (!missing.empty()) missing += ", ";
    missing += "Suggestions for Improvement";
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::RubricUnparseable, "missing fields: " + missing);
  }
  for (double value :
       {score.coherence, score.engagement, score.adherence, score.creativity,
        score.overall}) {
    if (value < 0.0 || value > 10.0) {
      throw Error(ErrorCode::RubricUnparseable,
                  "score out of [0,10]: " + std::to_string(value));
    }
  }
  return score;
}

EvalOutcome verify_with_ground_truth(const Engine& engine, const std::string& problem,
                                     const std::string& final_answer,
                                     const std::string& solution) {
  std::string rendered =
      graph::render_prompt(prompts::verify_with_ground_truth(),
                           {{"problem", problem},
                            {"final_answer", final_answer},
                            {"solution", solution}});
  auto response = call_judge(engine, rendered);

  EvalOutcome outcome;
  outcome.kind = EvalOutcome::Kind::Verdict;
  outcome.raw_judge_text = response.text;
  try {
    outcome.verdict = llm::extract_verdict(response.text);
    outcome.passed = outcome.verdict.passing();
  } catch (const Error& e) {
    outcome.passed = false;
    outcome.judge_parse_failed = true;
    outcome.diagnostic = std::string("judge reply unparseable: ") + e.what();
    outcome.verdict.kind = llm::Verdict::Kind::NoAnswer;
  }
  return outcome;
}

EvalOutcome score_open_ended(const Engine& engine, const std::string& task_prompt,
                             const std::string& output) {
  std::string rendered = graph::render_prompt(
      prompts::verify_open_ended(),
      {{"task_prompt", task_prompt}, {"output_from_last_layer", output}});
  auto response = call_judge(engine, rendered);

  EvalOutcome outcome;
  outcome.kind = EvalOutcome::Kind::Rubric;
  outcome.raw_judge_text = response.text;
  try {
    outcome.rubric = parse_rubric(response.text);
    outcome.passed = outcome.rubric.overall >= engine.config.rubric_pass_threshold;
  } catch (const Error& e) {
    outcome.passed = false;
    outcome.judge_parse_failed = true;
    outcome.diagnostic = std::string("rubric reply unparseable: ") + e.what();
  }
  return outcome;
}

EvalOutcome evaluate_task(const Engine& engine, const exec::TaskInstance& task,
                          const std::string& final_output) {
  if (task.ground_truth) {
    return verify_with_ground_truth(engine, task.task_prompt, final_output,
                                    *task.ground_truth);
  }
  return score_open_ended(engine, task.task_prompt, final_output);
}

double dataset_metric(const std::vector<EvalOutcome>& outcomes) {
  if (outcomes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "dataset_metric needs outcomes");
  }
  const auto kind = outcomes.front().kind;
  for (const auto& outcome : outcomes) {
    if (outcome.kind != kind) {
      throw Error(ErrorCode::MixedOutcomeKinds,
                  "verdict and rubric outcomes in one dataset");
    }
  }
  if (kind == EvalOutcome::Kind::Verdict) {
    size_t passed = 0;
    for (const auto& outcome : outcomes) passed += outcome.passed ? 1 : 0;
    return static_cast<double>(passed) / static_cast<double>(outcomes.size());
  }
  double sum = 0.0;
  for (const auto& outcome : outcomes) sum += outcome.rubric.overall;
  return sum / static_cast<double>(outcomes.size());
}

}  // namespace ann::eval
