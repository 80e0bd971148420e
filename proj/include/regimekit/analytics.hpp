#pragma once

#include "regimekit/records.hpp"
#include "regimekit/regime.hpp"
#include "regimekit/stats.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regimekit {

enum class AccuracyMetric { PerAgentMean, MajorityVote };

std::string_view to_string(AccuracyMetric m);
AccuracyMetric accuracy_metric_from_string(std::string_view s);

// Cohorts with fewer detection events than this are reported descriptively
// rather than inferentially.
inline constexpr long long kDescriptiveOnlyThreshold = 30;

struct CohortReport {
  std::string cohort_id;
  std::string model_name;
  Benchmark benchmark = Benchmark::Gsm8k;
  Method method = Method::E1;
  std::map<Regime, long long> regime_counts;
  long long n_transitions_valid = 0;
  long long n_detection = 0;  // DC + DM + BENIGN_REVISION
  double detection_rate = 0.0;
  std::optional<IntervalEstimate> dm_conditional;  // absent when n_detection == 0
  bool descriptive_only = false;  // n_detection < kDescriptiveOnlyThreshold
  std::vector<double> round_accuracy;  // fractions in [0,1], first..last round
  double delta = 0.0;  // (last - first) in percentage points
  double parse_fail_rate = 0.0;  // failed turns / non-dropped turns
  double dropout_rate = 0.0;     // dropped records / all records
  AccuracyMetric accuracy_metric = AccuracyMetric::PerAgentMean;
  long long n_records = 0;
  long long n_dropped_records = 0;
  long long dropped_transitions = 0;
  long long implied_transitions = 0;
};

// Per-round accuracy over the records of one cohort.
//   per_agent_mean  fraction of (item, replicate, agent) turns whose parsed
//                   answer matches ground truth; parse failures count as
//                   incorrect, dropped records are excluded
//   majority_vote   per (item, replicate), correct iff a strict majority of
//                   agents agree (under tier equality) on an answer matching
//                   ground truth; ties and no-majority count as incorrect
// Throws DataError when item coverage differs across rounds.
std::vector<double> round_accuracy(std::span<const TrajectoryRecord> records,
                                   AccuracyMetric metric, ComparatorTier tier,
                                   const NormalizeOptions& opts = {});

// Aggregates one cohort's classified transitions and raw records into the
// headline report quantities. Throws DataError on an empty cohort or on
// records from multiple cohorts.
CohortReport aggregate(std::span<const Transition> transitions,
                       std::span<const TrajectoryRecord> records,
                       AccuracyMetric metric = AccuracyMetric::PerAgentMean,
                       ComparatorTier tier = ComparatorTier::Primary,
                       const NormalizeOptions& opts = {});

// 2x4 table over {BOUNDARY, IP, DC, DM} for two cohorts. PARSE_FAIL is
// excluded; BENIGN_REVISION joins the BOUNDARY column (correct outcome, no
// error introduced) to keep the four-column shape.
struct PairwiseResult {
  ContingencyTable table;
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
  double v = 0.0;
};
PairwiseResult pairwise_contingency(std::span<const Transition> cohort_a,
                                    std::span<const Transition> cohort_b);

// Per transition-round detection counts, for trend tests across rounds.
// Throws DataError when the series has fewer than two rounds.
struct DivergenceSeries {
  std::vector<long long> successes;  // D=1 count per transition round
  std::vector<long long> totals;     // parse-valid transitions per round
};
DivergenceSeries divergence_series(std::span<const Transition> transitions);

// Renderers. JSON mirrors CohortReport; csv and table are shaped like the
// per-cohort report tables (conditional miscorrection, detection rate,
// trajectory) plus a scatter row of (detection_rate, dm_conditional).
std::string render_report_json(const CohortReport& report);
std::string render_report_csv(const CohortReport& report);
std::string render_report_table(const CohortReport& report);
std::string render_pairwise_table(const std::string& label_a,
                                  const std::string& label_b,
                                  const PairwiseResult& result);

}  // namespace regimekit
