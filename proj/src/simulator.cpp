#include "regimekit/simulator.hpp"

#include "regimekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace regimekit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97f4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double u01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, int item, int replicate,
                          int agent) {
  std::uint64_t s = seed;
  for (std::uint64_t v :
       {static_cast<std::uint64_t>(item) + 1,
        static_cast<std::uint64_t>(replicate) + 1,
        static_cast<std::uint64_t>(agent) + 1}) {
    s ^= splitmix64(s) + v * 0x9E3779B97f4A7C15ULL;
  }
  return s;
}

void check_prob(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(name) + " must be in [0, 1]");
  }
}

long long truth_value(int item_index) { return 3 + 7LL * item_index; }

}  // namespace

void validate(const SimParams& p) {
  if (p.n_items < 1) throw DomainError("n_items must be >= 1");
  if (p.rounds < 1) throw DomainError("rounds must be >= 1");
  if (p.agents < 1) throw DomainError("agents must be >= 1");
  if (p.replicates < 1) throw DomainError("replicates must be >= 1");
  check_prob(p.a0, "a0");
  check_prob(p.p_detect_incorrect, "p_detect_incorrect");
  check_prob(p.p_correct_given_revision, "p_correct_given_revision");
  check_prob(p.p_detect_correct, "p_detect_correct");
  check_prob(p.p_incorrect_given_correct_revision,
             "p_incorrect_given_correct_revision");
  check_prob(p.parse_fail_rate, "parse_fail_rate");
  if (!p.p_detect_incorrect_schedule.empty()) {
    if (static_cast<int>(p.p_detect_incorrect_schedule.size()) != p.rounds - 1) {
      throw DomainError("schedule must have one entry per transition");
    }
    for (double v : p.p_detect_incorrect_schedule) check_prob(v, "schedule entry");
  }
}

double detect_incorrect_at(const SimParams& p, int transition_index) {
  if (p.p_detect_incorrect_schedule.empty()) return p.p_detect_incorrect;
  return p.p_detect_incorrect_schedule[static_cast<size_t>(transition_index)];
}

std::string sim_item_id(int item_index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "item_%05d", item_index);
  return buf;
}

std::string sim_truth_text(Benchmark benchmark, int item_index) {
  if (answer_kind_of(benchmark) == AnswerKind::Letter) {
    return std::string(1, "ABCD"[item_index % 4]);
  }
  return std::to_string(truth_value(item_index));
}

std::string sim_wrong_text(Benchmark benchmark, int item_index, long long k) {
  if (answer_kind_of(benchmark) == AnswerKind::Letter) {
    const char truth = "ABCD"[item_index % 4];
    std::string pool;
    for (char c : {'A', 'B', 'C', 'D'}) {
      if (c != truth) pool.push_back(c);
    }
    return std::string(1, pool[static_cast<size_t>(k % 3)]);
  }
  return std::to_string(truth_value(item_index) + 1 + k);
}

std::string render_sim_response(Benchmark benchmark, const std::string& answer) {
  if (benchmark == Benchmark::Gsm8k) {
    return "After working through the steps once more, the final answer is " +
           answer + ".";
  }
  return "After working through the steps once more, the final answer is "
         "\\boxed{" + answer + "}.";
}

std::string render_sim_parse_failure(Benchmark benchmark) {
  (void)benchmark;
  return "I could not settle on a final answer for this turn.";
}

TrajectoryPolicy::TrajectoryPolicy(const SimParams& params, Benchmark benchmark,
                                   int item_index, int replicate, int agent)
    : params_(params),
      benchmark_(benchmark),
      item_index_(item_index),
      rng_state_(derive_seed(params.seed, item_index, replicate, agent)) {}

TrajectoryPolicy::Turn TrajectoryPolicy::step() {
  if (round_ == 0) {
    correct_ = u01(rng_state_) < params_.a0;
    current_answer_ = correct_ ? sim_truth_text(benchmark_, item_index_)
                               : sim_wrong_text(benchmark_, item_index_,
                                                wrong_counter_++);
  } else {
    const int transition = round_ - 1;
    if (correct_) {
      if (u01(rng_state_) < params_.p_detect_correct) {
        if (u01(rng_state_) < params_.p_incorrect_given_correct_revision) {
          correct_ = false;
          current_answer_ =
              sim_wrong_text(benchmark_, item_index_, wrong_counter_++);
        }
        // else: the revision would land on the same correct form; emission
        // unchanged and no detection fires.
      }
    } else {
      if (u01(rng_state_) < detect_incorrect_at(params_, transition)) {
        if (u01(rng_state_) < params_.p_correct_given_revision) {
          correct_ = true;
          current_answer_ = sim_truth_text(benchmark_, item_index_);
        } else {
          current_answer_ =
              sim_wrong_text(benchmark_, item_index_, wrong_counter_++);
        }
      }
    }
  }
  ++round_;
  Turn turn;
  turn.latent_correct = correct_;
  if (params_.parse_fail_rate > 0.0 && u01(rng_state_) < params_.parse_fail_rate) {
    turn.raw_text = render_sim_parse_failure(benchmark_);
  } else {
    turn.raw_text = render_sim_response(benchmark_, current_answer_);
  }
  return turn;
}

std::vector<TrajectoryRecord> simulate(const SimParams& params,
                                       Benchmark benchmark,
                                       std::string_view cohort_id) {
  validate(params);
  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<size_t>(params.n_items) * params.replicates *
                  params.agents * params.rounds);
  const Method method = params.agents == 1 ? Method::E2 : Method::E1;
  for (int item = 0; item < params.n_items; ++item) {
    const std::string item_id = sim_item_id(item);
    ParseOutcome gt = parse_ground_truth(sim_truth_text(benchmark, item), benchmark);
    const ParsedAnswer& truth = answer_of(gt);
    for (int replicate = 0; replicate < params.replicates; ++replicate) {
      for (int agent = 0; agent < params.agents; ++agent) {
        TrajectoryPolicy policy(params, benchmark, item, replicate, agent);
        for (int round = 0; round < params.rounds; ++round) {
          TrajectoryPolicy::Turn turn = policy.step();
          TrajectoryRecord rec;
          rec.cohort_id = std::string(cohort_id);
          rec.model_name = "parametric-sim";
          rec.benchmark = benchmark;
          rec.method = method;
          rec.replicate = replicate;
          rec.item_id = item_id;
          rec.round = round;
          rec.agent_id = agent;
          rec.prompt_digest = "-";
          rec.raw_text = turn.raw_text;
          rec.parsed = extract_answer(rec.raw_text, benchmark);
          rec.ground_truth = truth;
          rec.timestamp = 0;
          rec.dropped = false;
          records.push_back(std::move(rec));
        }
      }
    }
  }
  return records;
}

std::vector<double> expected_accuracy_recurrence(const SimParams& params) {
  validate(params);
  std::vector<double> acc;
  acc.reserve(static_cast<size_t>(params.rounds));
  double a = params.a0;
  acc.push_back(a);
  for (int t = 0; t + 1 < params.rounds; ++t) {
    a = a - a * params.p_detect_correct * params.p_incorrect_given_correct_revision +
        (1.0 - a) * detect_incorrect_at(params, t) * params.p_correct_given_revision;
    acc.push_back(a);
  }
  return acc;
}

PooledMarginals recurrence_marginals(const SimParams& params) {
  if (params.rounds < 2) {
    throw DomainError("pooled marginals need at least one transition");
  }
  const std::vector<double> acc = expected_accuracy_recurrence(params);
  double sum_det = 0.0;
  double sum_dm = 0.0;
  for (int t = 0; t + 1 < params.rounds; ++t) {
    const double a = acc[static_cast<size_t>(t)];
    const double pdi = detect_incorrect_at(params, t);
    const double flip = a * params.p_detect_correct *
                        params.p_incorrect_given_correct_revision;
    const double inc = (1.0 - a) * pdi;
    sum_det += inc + flip;
    sum_dm += inc * (1.0 - params.p_correct_given_revision) + flip;
  }
  PooledMarginals m;
  m.detection_rate = sum_det / static_cast<double>(params.rounds - 1);
  m.dm_conditional = sum_det > 0.0 ? sum_dm / sum_det : 0.0;
  m.delta_pp = (acc.back() - acc.front()) * 100.0;
  return m;
}

namespace {

double bisect01(const std::function<double(double)>& f) {
  double lo = 0.0;
  double hi = 1.0;
  double flo = f(lo);
  if (std::abs(flo) < 1e-12) return lo;
  double fhi = f(hi);
  if (std::abs(fhi) < 1e-12) return hi;
  if (flo * fhi > 0.0) {
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SimParams fit_marginals(const FitTargets& t) {
  if (!(t.detection_rate > 0.0 && t.detection_rate < 1.0)) {
    throw DomainError("detection_rate target must be in (0, 1)");
  }
  if (!(t.dm_conditional >= 0.0 && t.dm_conditional <= 1.0)) {
    throw DomainError("dm_conditional target must be in [0, 1]");
  }
  if (!(t.a0 > 0.0 && t.a0 < 1.0)) throw DomainError("a0 must be in (0, 1)");
  if (t.rounds < 2) throw DomainError("rounds must be >= 2");

  SimParams p;
  p.a0 = t.a0;
  p.rounds = t.rounds;
  p.p_incorrect_given_correct_revision = 1.0;

  constexpr double kTol = 1e-3;

  if (!t.delta_pp) {
    p.p_correct_given_revision = 1.0 - t.dm_conditional;
    p.p_detect_correct = t.forced_p_detect_correct.value_or(0.0);
    for (int iter = 0; iter < 40; ++iter) {
      p.p_detect_incorrect = bisect01([&](double pdi) {
        SimParams q = p;
        q.p_detect_incorrect = pdi;
        return recurrence_marginals(q).detection_rate - t.detection_rate;
      });
      if (!t.forced_p_detect_correct) {
        p.p_detect_correct = bisect01([&](double pdc) {
          SimParams q = p;
          q.p_detect_correct = pdc;
          return recurrence_marginals(q).dm_conditional - t.dm_conditional;
        });
      }
    }
  } else {
    if (t.forced_p_detect_correct) {
      throw DomainError("delta_pp and forced_p_detect_correct are mutually "
                        "exclusive targets");
    }
    const double transitions = static_cast<double>(t.rounds - 1);
    const double sum_dc = transitions * t.detection_rate * (1.0 - t.dm_conditional);
    const double sum_flip = sum_dc - *t.delta_pp / 100.0;
    const double sum_inc = transitions * t.detection_rate - sum_flip;
    if (sum_flip < 0.0 || sum_inc <= 0.0) {
      throw InfeasibleError("accuracy drift target incompatible with pooled "
                            "marginals");
    }
    const double pcg = sum_dc / sum_inc;
    if (pcg > 1.0) {
      throw InfeasibleError("implied correct-revision probability exceeds 1");
    }
    p.p_correct_given_revision = pcg;
    p.p_detect_incorrect = std::min(1.0, t.detection_rate / (1.0 - t.a0));
    p.p_detect_correct = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
      const std::vector<double> acc = expected_accuracy_recurrence(p);
      double sum_a = 0.0;
      for (int k = 0; k + 1 < t.rounds; ++k) sum_a += acc[static_cast<size_t>(k)];
      const double sum_1ma = transitions - sum_a;
      if (sum_1ma <= 0.0 || (sum_flip > 0.0 && sum_a <= 0.0)) {
        throw InfeasibleError("degenerate accuracy trajectory");
      }
      p.p_detect_incorrect = std::clamp(sum_inc / sum_1ma, 0.0, 1.0);
      p.p_detect_correct = sum_flip <= 0.0
                               ? 0.0
                               : std::clamp(sum_flip / sum_a, 0.0, 1.0);
    }
  }

  const PooledMarginals achieved = recurrence_marginals(p);
  if (std::abs(achieved.detection_rate - t.detection_rate) > kTol ||
      std::abs(achieved.dm_conditional - t.dm_conditional) > kTol ||
      (t.delta_pp && std::abs(achieved.delta_pp - *t.delta_pp) > 0.05)) {
    throw InfeasibleError("no parameter setting reaches the calibration "
                          "targets");
  }
  return p;
}

}  // namespace regimekit
