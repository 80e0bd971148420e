#pragma once

#include "regimekit/records.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regimekit {

// Generative parameters of the regime-dynamics simulator. Each trajectory
// starts correct with probability a0; at every transition an incorrect answer
// is revised with probability p_detect_incorrect (landing correct with
// probability p_correct_given_revision, otherwise on a fresh distinct wrong
// answer), and a correct answer is revised with probability p_detect_correct
// (landing incorrect with probability p_incorrect_given_correct_revision;
// the still-correct branch re-emits the same form, so no spurious detection
// fires).
struct SimParams {
  int n_items = 100;
  double a0 = 0.5;
  int rounds = 5;
  int agents = 3;
  int replicates = 1;
  double p_detect_incorrect = 0.1;
  double p_correct_given_revision = 0.2;
  double p_detect_correct = 0.0;
  double p_incorrect_given_correct_revision = 1.0;
  double parse_fail_rate = 0.0;  // per-turn chance of an unparseable emission
  std::vector<double> p_detect_incorrect_schedule;  // optional, one per transition
  std::uint64_t seed = 0;
};

// Throws DomainError on out-of-range parameters.
void validate(const SimParams& params);

// Per-transition detection probability given an incorrect current answer.
double detect_incorrect_at(const SimParams& params, int transition_index);

// Synthetic trajectory log, interchangeable with pipeline output: emitted
// answers are well-formed for the benchmark so the real parser and classifier
// run unmodified. Byte-identical for identical params and seed.
std::vector<TrajectoryRecord> simulate(const SimParams& params,
                                       Benchmark benchmark = Benchmark::Gsm8k,
                                       std::string_view cohort_id = "sim");

// Mean-field accuracy recurrence of the simulate() dynamics:
//   a_{t+1} = a_t - a_t * p_dc * p_igr + (1 - a_t) * p_di * p_cg
// iterated rounds-1 times from a0; returns one value per round.
std::vector<double> expected_accuracy_recurrence(const SimParams& params);

// Recurrence-implied pooled marginals over all transitions: the detection
// rate and the conditional miscorrection rate the classifier should recover
// in expectation.
struct PooledMarginals {
  double detection_rate = 0.0;
  double dm_conditional = 0.0;
  double delta_pp = 0.0;
};
PooledMarginals recurrence_marginals(const SimParams& params);

// Inverse calibration: finds params whose recurrence-implied pooled marginals
// match the targets within 1e-3.
//
// Without delta_pp the procedure fixes p_correct_given_revision at
// 1 - dm_conditional and runs scalar bisections on (p_detect_incorrect,
// p_detect_correct); the two pooled targets alone never require a
// correct-answer revision channel, so p_detect_correct settles at
// forced_p_detect_correct (default 0) and the implied accuracy drift is
// non-negative.
//
// With delta_pp the net accuracy change over the trajectory becomes a third
// constraint; p_correct_given_revision is then solved rather than fixed, and
// the correct-flip channel is sized so detection, miscorrection and drift all
// match. Throws InfeasibleError when no parameter setting reaches the
// targets.
struct FitTargets {
  double detection_rate = 0.0;
  double dm_conditional = 0.0;
  double a0 = 0.5;
  int rounds = 5;
  std::optional<double> delta_pp;
  std::optional<double> forced_p_detect_correct;
};
SimParams fit_marginals(const FitTargets& targets);

// Answer material used by the simulator and the parametric mock backend:
// deterministic ground truths and an unbounded pool of distinct wrong
// answers per item.
std::string sim_truth_text(Benchmark benchmark, int item_index);
std::string sim_wrong_text(Benchmark benchmark, int item_index, long long k);
std::string sim_item_id(int item_index);
std::string render_sim_response(Benchmark benchmark, const std::string& answer);
std::string render_sim_parse_failure(Benchmark benchmark);

// One latent trajectory of the generative model; turn(r) is the emission for
// round r. Deterministic in (seed, item, replicate, agent).
class TrajectoryPolicy {
 public:
  TrajectoryPolicy(const SimParams& params, Benchmark benchmark,
                   int item_index, int replicate, int agent);

  struct Turn {
    std::string raw_text;
    bool latent_correct = false;
  };
  // Advances to the next round and returns its emission; first call is round 0.
  Turn step();
  int next_round() const { return round_; }

 private:
  const SimParams& params_;
  Benchmark benchmark_;
  int item_index_;
  std::uint64_t rng_state_;
  int round_ = 0;
  bool correct_ = false;
  long long wrong_counter_ = 0;
  std::string current_answer_;
};

}  // namespace regimekit
