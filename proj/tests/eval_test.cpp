// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "ann/eval.hpp"

using namespace ann;
using namespace ann::eval;

namespace {

Engine make_engine() {
  EngineConfig config;
  config.backend = "scripted";
  config.retry.initial_backoff_ms = 0;
  return Engine::create(config);
}

EvalOutcome verdict_outcome(bool passed) {
  EvalOutcome outcome;
  outcome.kind = EvalOutcome::Kind::Verdict;
  outcome.verdict.kind =
      passed ? llm::Verdict::Kind::Correct : llm::Verdict::Kind::Incorrect;
  outcome.passed = passed;
  return outcome;
}

EvalOutcome rubric_outcome(double overall) {
  EvalOutcome outcome;
  outcome.kind = EvalOutcome::Kind::Rubric;
  outcome.rubric.overall = overall;
  outcome.passed = overall >= 7.0;
  return outcome;
}

const char* kFullRubric =
    "Coherence: [8, tight structure]\n"
    "Engagement: [7, holds attention]\n"
    "Adherence: [9, follows the brief]\n"
    "Creativity: [6, conventional choices]\n"
    "Suggestions for Improvement: [Add sensory detail to the middle section]\n"
    "Overall Score: [7.5]\n";

}  // namespace

TEST_CASE("judge verdict controls pass/fail") {
  auto engine = make_engine();
  engine.scripted->add_rule({{"problem-alpha"}, "The answer is correct."});
  engine.scripted->add_rule(
      {{"problem-beta"}, "The answer is approximated but should be correct."});
  engine.scripted->add_rule(
      {{"problem-gamma"},
       "The answer is incorrect. Correct Answer: <ground truth answer> 7 "
       "</ground truth answer> | Answer extracted: <answer extracted> 9 "
       "</answer extracted>."});

  auto correct = verify_with_ground_truth(engine, "problem-alpha", "4", "4");
  CHECK(correct.passed);
  CHECK(correct.verdict.kind == llm::Verdict::Kind::Correct);

  auto approximated = verify_with_ground_truth(engine, "problem-beta", "3.99", "4");
  CHECK(approximated.passed);

  auto incorrect = verify_with_ground_truth(engine, "problem-gamma", "9", "7");
  CHECK_FALSE(incorrect.passed);
  CHECK(incorrect.verdict.ground_truth == "7");
  CHECK(incorrect.verdict.extracted == "9");
}

TEST_CASE("judge prompt carries problem, reply, and ground truth") {
  auto engine = make_engine();
  engine.scripted->set_default_reply("The answer is correct.");
  verify_with_ground_truth(engine, "P-text", "A-text", "G-text");
  auto log = engine.scripted->request_log();
  REQUIRE(log.size() == 1);
  for (const char* fragment : {"P-text", "A-text", "G-text", "verify the answer"}) {
    CHECK(log[0].find(fragment) != std::string::npos);
  }
}

TEST_CASE("free-prose judge reply becomes a flagged failed outcome") {
  auto engine = make_engine();
  engine.scripted->set_default_reply("Looks good to me!");
  auto outcome = verify_with_ground_truth(engine, "p", "a", "g");
  CHECK_FALSE(outcome.passed);
  CHECK(outcome.judge_parse_failed);
  CHECK(outcome.raw_judge_text == "Looks good to me!");
  CHECK(!outcome.diagnostic.empty());
}

TEST_CASE("rubric parsing accepts bracketed and bare numbers") {
  auto score = parse_rubric(kFullRubric);
  CHECK(score.coherence == 8);
  CHECK(score.engagement == 7);
  CHECK(score.adherence == 9);
  CHECK(score.creativity == 6);
  CHECK(score.overall == 7.5);
  CHECK(score.suggestions == "Add sensory detail to the middle section");

  auto bare = parse_rubric(
      "Coherence: 8\nEngagement: 7\nAdherence: 9\nCreativity: 6\n"
      "Suggestions for Improvement: none\nOverall Score: 7\n");
  CHECK(bare.overall == 7);
  CHECK(bare.suggestions == "none");
}

TEST_CASE("rubric parsing reports every missing field") {
  try {
    parse_rubric("Coherence: 8\nEngagement: 7\nOverall Score: 7\n"
                 "Suggestions for Improvement: x\n");
    FAIL("expected RubricUnparseable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RubricUnparseable);
    CHECK(std::string(e.what()).find("Adherence") != std::string::npos);
    CHECK(std::string(e.what()).find("Creativity") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_rubric(
                      "Coherence: 11\nEngagement: 7\nAdherence: 9\nCreativity: 6\n"
                      "Suggestions for Improvement: x\nOverall Score: 7\n"),
                  Error);
}

TEST_CASE("open-ended scoring applies the inclusive threshold") {
  auto engine = make_engine();
  engine.scripted->add_rule({{"story-A"}, kFullRubric});
  auto outcome = score_open_ended(engine, "write a story", "story-A");
  CHECK(outcome.passed);  // 7.5 >= 7.0
  CHECK(outcome.rubric.overall == 7.5);

  auto boundary_engine = make_engine();
  boundary_engine.scripted->set_default_reply(
      "Coherence: 7\nEngagement: 7\nAdherence: 7\nCreativity: 7\n"
      "Suggestions for Improvement: none\nOverall Score: 7.0\n");
  CHECK(score_open_ended(boundary_engine, "p", "o").passed);

  auto below = make_engine();
  below.scripted->set_default_reply(
      "Coherence: 6\nEngagement: 6\nAdherence: 6\nCreativity: 6\n"
      "Suggestions for Improvement: tighten\nOverall Score: 6.9\n");
  CHECK_FALSE(score_open_ended(below, "p", "o").passed);
}

TEST_CASE("missing rubric line becomes a flagged failed outcome") {
  auto engine = make_engine();
  engine.scripted->set_default_reply(
      "Coherence: 8\nEngagement: 7\nAdherence: 9\n"
      "Suggestions for Improvement: x\nOverall Score: 8\n");  // Creativity missing
  auto outcome = score_open_ended(engine, "p", "o");
  CHECK_FALSE(outcome.passed);
  CHECK(outcome.judge_parse_failed);
}

TEST_CASE("evaluate_task dispatches on ground truth presence") {
  auto engine = make_engine();
  engine.scripted->add_rule({{"verify the answer"}, "The answer is correct."});
  engine.scripted->add_rule({{"creative writing piece"}, kFullRubric});

  exec::TaskInstance with_truth;
  with_truth.task_id = "t1";
  with_truth.task_prompt = "2+2";
  with_truth.ground_truth = "4";
  CHECK(evaluate_task(engine, with_truth, "4").kind == EvalOutcome::Kind::Verdict);

  exec::TaskInstance open_ended;
  open_ended.task_id = "t2";
  open_ended.task_prompt = "write a poem";
  CHECK(evaluate_task(engine, open_ended, "roses").kind == EvalOutcome::Kind::Rubric);
}

TEST_CASE("dataset metric arithmetic") {
  CHECK(dataset_metric({verdict_outcome(true), verdict_outcome(false),
                        verdict_outcome(true), verdict_outcome(true)}) ==
        doctest::Approx(0.75));
  CHECK(dataset_metric({rubric_outcome(8), rubric_outcome(6)}) == doctest::Approx(7.0));
}

TEST_CASE("forty outcomes with thirty-three passes score 0.825") {
  std::vector<EvalOutcome> outcomes;
  for (int i = 0; i < 40; ++i) outcomes.push_back(verdict_outcome(i < 33));

  // Count oracle, computed independently of dataset_metric.
  int passes = 0;
  for (const auto& outcome : outcomes) passes += outcome.passed ? 1 : 0;
  double expected = static_cast<double>(passes) / 40.0;
  REQUIRE(expected == doctest::Approx(0.825));

  CHECK(dataset_metric(outcomes) == doctest::Approx(expected));
}

TEST_CASE("dataset metric is permutation-invariant") {
  std::vector<EvalOutcome> outcomes;
  for (int i = 0; i < 17; ++i) outcomes.push_back(verdict_outcome(i % 3 == 0));
  double reference = dataset_metric(outcomes);
  std::mt19937 rng(7);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    CHECK(dataset_metric(outcomes) == doctest::Approx(reference));
  }
}

TEST_CASE("mixed outcome kinds and empty lists are rejected") {
  try {
    dataset_metric({verdict_outcome(true), rubric_outcome(8)});
    FAIL("expected MixedOutcomeKinds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MixedOutcomeKinds);
  }
  CHECK_THROWS_AS(dataset_metric({}), Error);
}

TEST_CASE("incorrect and no-answer verdicts never pass") {
  llm::Verdict incorrect;
  incorrect.kind = llm::Verdict::Kind::Incorrect;
  CHECK_FALSE(incorrect.passing());
  llm::Verdict no_answer;
  no_answer.kind = llm::Verdict::Kind::NoAnswer;
  CHECK_FALSE(no_answer.passing());
}
