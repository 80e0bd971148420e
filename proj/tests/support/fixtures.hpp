#pragma once

// Shared fixture builders for the test suites. The regime oracle here is an
// independent table lookup over opaque symbols; it never touches the answer
// comparison machinery, so agreement with the library classifier is a real
// cross-check.

#include "regimekit/analytics.hpp"
#include "regimekit/records.hpp"
#include "regimekit/regime.hpp"

#include <string>
#include <vector>

namespace rktest {

using namespace regimekit;

inline constexpr int kFailSymbol = 4;  // symbols 0..3 are answers

// Direct decision-table oracle over (prev, next, truth) symbols.
inline Regime oracle_classify(int prev, int next, int truth) {
  if (prev == kFailSymbol || next == kFailSymbol || truth == kFailSymbol) {
    return Regime::ParseFail;
  }
  struct Row {
    bool detected;
    bool prev_correct;
    bool next_correct;
    Regime regime;
  };
  static constexpr Row kTable[] = {
      {false, true, true, Regime::Boundary},
      {false, false, false, Regime::IP},
      {true, false, true, Regime::DC},
      {true, false, false, Regime::DM},
      {true, true, false, Regime::DM},  // fold
      {true, true, true, Regime::BenignRevision},
  };
  const bool detected = prev != next;
  const bool prev_correct = prev == truth;
  const bool next_correct = next == truth;
  for (const Row& row : kTable) {
    if (row.detected == detected && row.prev_correct == prev_correct &&
        row.next_correct == next_correct) {
      return row.regime;
    }
  }
  return Regime::ParseFail;  // unreachable: D=0 forces prev==next equivalence
}

// Maps a symbol to a parsed numeric answer (or a parse failure).
inline ParseOutcome symbol_outcome(int symbol) {
  if (symbol == kFailSymbol) {
    return ParseFailure{ParseFailReason::NoNumericToken};
  }
  return parse_ground_truth(std::to_string(11 + 7 * symbol), Benchmark::Gsm8k);
}

inline ParsedAnswer numeric_answer(const std::string& literal) {
  return answer_of(parse_ground_truth(literal, Benchmark::Gsm8k));
}

// GSM8K-shaped record; `answer` empty means an unparseable turn.
inline TrajectoryRecord make_record(const std::string& item_id, int replicate,
                                    int agent_id, int round,
                                    const std::string& answer,
                                    const std::string& truth,
                                    const std::string& cohort_id = "fixture") {
  TrajectoryRecord r;
  r.cohort_id = cohort_id;
  r.model_name = "fixture";
  r.benchmark = Benchmark::Gsm8k;
  r.method = Method::E1;
  r.replicate = replicate;
  r.item_id = item_id;
  r.round = round;
  r.agent_id = agent_id;
  r.prompt_digest = "-";
  r.raw_text = answer.empty() ? "I could not settle on an answer."
                              : "So the final answer is " + answer + ".";
  r.parsed = extract_answer(r.raw_text, r.benchmark);
  r.ground_truth = numeric_answer(truth);
  r.timestamp = 0;
  return r;
}

// One single-agent trajectory from a list of per-round answers.
inline std::vector<TrajectoryRecord> make_trajectory(
    const std::vector<std::string>& answers, const std::string& truth,
    const std::string& item_id = "item_0", int replicate = 0, int agent = 0) {
  std::vector<TrajectoryRecord> records;
  for (size_t round = 0; round < answers.size(); ++round) {
    records.push_back(make_record(item_id, replicate, agent,
                                  static_cast<int>(round), answers[round],
                                  truth));
  }
  return records;
}

// Synthetic transition with only the fields aggregation cares about.
inline Transition make_transition(Regime regime, int round_from = 0,
                                  const std::string& item_id = "item_0") {
  Transition t;
  t.item_id = item_id;
  t.round_from = round_from;
  t.round_to = round_from + 1;
  ParsedAnswer truth = numeric_answer("1");
  ParsedAnswer wrong_a = numeric_answer("2");
  ParsedAnswer wrong_b = numeric_answer("3");
  switch (regime) {
    case Regime::Boundary:
      t.prev = truth; t.next = truth;
      t.d_flag = 0; t.prev_correct = true; t.next_correct = true;
      break;
    case Regime::IP:
      t.prev = wrong_a; t.next = wrong_a;
      t.d_flag = 0; t.prev_correct = false; t.next_correct = false;
      break;
    case Regime::DC:
      t.prev = wrong_a; t.next = truth;
      t.d_flag = 1; t.prev_correct = false; t.next_correct = true;
      break;
    case Regime::DM:
      t.prev = wrong_a; t.next = wrong_b;
      t.d_flag = 1; t.prev_correct = false; t.next_correct = false;
      break;
    case Regime::BenignRevision:
      t.prev = truth; t.next = truth;
      t.d_flag = 1; t.prev_correct = true; t.next_correct = true;
      break;
    case Regime::ParseFail:
      t.prev = ParseFailure{ParseFailReason::NoNumericToken};
      t.next = truth;
      break;
  }
  t.regime = regime;
  return t;
}

}  // namespace rktest
