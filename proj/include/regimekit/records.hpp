#pragma once

#include "regimekit/answer.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace regimekit {

enum class Method { E1, E2 };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

// One agent turn in one round of one replicate of one item; the JSONL unit.
// (cohort_id, replicate, item_id, round, agent_id) is unique within a log.
struct TrajectoryRecord {
  std::string cohort_id;
  std::string model_name;
  Benchmark benchmark = Benchmark::Gsm8k;
  Method method = Method::E1;
  int replicate = 0;
  std::string item_id;
  int round = 0;
  int agent_id = 0;
  std::string prompt_digest;
  std::string raw_text;  // absent when dropped
  ParseOutcome parsed = ParseFailure{ParseFailReason::EmptyResponse};
  ParsedAnswer ground_truth;
  std::int64_t timestamp = 0;  // ms since epoch; excluded from determinism checks
  bool dropped = false;
};

struct ItemSpec {
  std::string item_id;
  std::string question;
  std::string ground_truth_text;
  ParsedAnswer ground_truth;
};

// Re-extracts the answer from the logged response text, so classification is
// a pure function of raw_text and the benchmark regardless of what the
// producing run logged in `parsed`.
ParseOutcome parsed_of(const TrajectoryRecord& r,
                       const NormalizeOptions& opts = {});

}  // namespace regimekit
