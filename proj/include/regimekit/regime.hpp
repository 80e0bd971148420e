#pragma once

#include "regimekit/answer.hpp"
#include "regimekit/records.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regimekit {

// Response regimes for an adjacent-round answer pair, determined by the
// detection flag D, the upstream correctness T(prev) and, when D = 1, the
// correctness of the revised answer:
//
//   BOUNDARY         D=0, prev correct
//   IP               D=0, prev incorrect      (inherit-propagate)
//   DC               D=1, prev incorrect, next correct   (detect-correct)
//   DM               D=1, next incorrect, any prev       (detect-miscorrect;
//                    the correct->incorrect corner folds in here)
//   BENIGN_REVISION  D=1, prev correct, next correct
//   PARSE_FAIL       either endpoint failed extraction
//
// BENIGN_REVISION counts as a detection event but never as DM; PARSE_FAIL is
// excluded from detection-event counts entirely.
enum class Regime { Boundary, IP, DC, DM, BenignRevision, ParseFail };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

struct Transition {
  std::string item_id;
  int replicate = 0;
  int agent_id = 0;
  int round_from = 0;
  int round_to = 0;
  ParseOutcome prev = ParseFailure{};
  ParseOutcome next = ParseFailure{};
  std::optional<int> d_flag;          // absent iff regime == PARSE_FAIL
  std::optional<bool> prev_correct;   // ditto
  std::optional<bool> next_correct;   // ditto
  Regime regime = Regime::ParseFail;
};

// 0 iff the two answers match at the tier, 1 otherwise.
int detect(const ParsedAnswer& prev, const ParsedAnswer& next,
           ComparatorTier tier, Benchmark benchmark);

// Truth table above. A ground truth that failed to parse makes correctness
// undeterminable and classifies as PARSE_FAIL.
Regime classify_regime(const ParseOutcome& prev, const ParseOutcome& next,
                       const ParseOutcome& truth, ComparatorTier tier,
                       Benchmark benchmark);

Transition classify_transition(const ParseOutcome& prev,
                               const ParseOutcome& next,
                               const ParsedAnswer& truth, ComparatorTier tier,
                               Benchmark benchmark);

// Classifies one trajectory (records of a single item x replicate x agent,
// any order). Throws DataError when the round sequence has a gap; transitions
// touching dropped records are skipped and reported via dropped_transitions.
struct TrajectoryClassification {
  std::vector<Transition> transitions;
  long long dropped_transitions = 0;
};
TrajectoryClassification classify_trajectory(
    std::span<const TrajectoryRecord> records, ComparatorTier tier,
    const NormalizeOptions& opts = {});

// Classifies a whole log: groups rows into trajectories and merges their
// transitions in deterministic (item, replicate, agent, round) order.
struct ClassifiedLog {
  std::vector<Transition> transitions;
  long long dropped_transitions = 0;
  long long implied_transitions = 0;  // sum over trajectories of rounds-1
};
ClassifiedLog classify_records(std::span<const TrajectoryRecord> records,
                               ComparatorTier tier,
                               const NormalizeOptions& opts = {});

}  // namespace regimekit
