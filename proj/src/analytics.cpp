#include "regimekit/analytics.hpp"

#include "regimekit/error.hpp"
#include "regimekit/io.hpp"


#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace regimekit {

std::string_view to_string(AccuracyMetric m) {
  return m == AccuracyMetric::PerAgentMean ? "per_agent_mean" : "majority_vote";
}

AccuracyMetric accuracy_metric_from_string(std::string_view s) {
  if (s == "per_agent_mean" || s == "per-agent-mean") {
    return AccuracyMetric::PerAgentMean;
  }
  if (s == "majority_vote" || s == "majority-vote") {
    return AccuracyMetric::MajorityVote;
  }
  throw DomainError("unknown accuracy metric: " + std::string(s));
}

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string pp(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", value);
  return buf;
}

}  // namespace

std::vector<double> round_accuracy(std::span<const TrajectoryRecord> records,
                                   AccuracyMetric metric, ComparatorTier tier,
                                   const NormalizeOptions& opts) {
  if (records.empty()) throw DataError("round_accuracy: no records");
  int max_round = 0;
  for (const auto& r : records) max_round = std::max(max_round, r.round);

  using TurnKey = std::tuple<std::string, int, int>;  // item, replicate, agent
  std::set<TurnKey> coverage0;
  std::vector<std::set<TurnKey>> coverage(max_round + 1);
  for (const auto& r : records) {
    coverage[r.round].insert({r.item_id, r.replicate, r.agent_id});
  }
  for (int round = 1; round <= max_round; ++round) {
    if (coverage[round] != coverage[0]) {
      throw DataError("round " + std::to_string(round) +
                      " covers a different item set than the first round");
    }
  }

  std::vector<double> acc(max_round + 1, 0.0);
  if (metric == AccuracyMetric::PerAgentMean) {
    std::vector<long long> correct(max_round + 1, 0);
    std::vector<long long> total(max_round + 1, 0);
    for (const auto& r : records) {
      if (r.dropped) continue;
      ++total[r.round];
      ParseOutcome parsed = parsed_of(r, opts);
      if (parsed_ok(parsed) &&
          answers_match(answer_of(parsed), r.ground_truth, tier, r.benchmark)) {
        ++correct[r.round];
      }
    }
    for (int round = 0; round <= max_round; ++round) {
      if (total[round] == 0) throw DataError("round with no usable records");
      acc[round] = static_cast<double>(correct[round]) /
                   static_cast<double>(total[round]);
    }
    return acc;
  }

  // Majority vote: group turns per (item, replicate) and round.
  using GroupKey = std::tuple<int, std::string, int>;  // round, item, replicate
  std::map<GroupKey, std::vector<const TrajectoryRecord*>> groups;
  for (const auto& r : records) {
    groups[{r.round, r.item_id, r.replicate}].push_back(&r);
  }
  std::vector<long long> correct(max_round + 1, 0);
  std::vector<long long> total(max_round + 1, 0);
  for (const auto& [key, rows] : groups) {
    const int round = std::get<0>(key);
    ++total[round];
    std::vector<ParsedAnswer> answers;
    for (const auto* r : rows) {
      if (r->dropped) continue;
      ParseOutcome parsed = parsed_of(*r, opts);
      if (parsed_ok(parsed)) answers.push_back(answer_of(parsed));
    }
    if (answers.empty()) continue;
    const Benchmark benchmark = rows.front()->benchmark;
    const size_t majority = rows.size() / 2 + 1;  // strict majority of agents
    std::vector<bool> used(answers.size(), false);
    for (size_t i = 0; i < answers.size(); ++i) {
      if (used[i]) continue;
      size_t votes = 1;
      for (size_t j = i + 1; j < answers.size(); ++j) {
        if (!used[j] && answers_match(answers[i], answers[j], tier, benchmark)) {
          used[j] = true;
          ++votes;
        }
      }
      if (votes >= majority) {
        if (answers_match(answers[i], rows.front()->ground_truth, tier,
                          benchmark)) {
          ++correct[round];
        }
        break;
      }
    }
  }
  for (int round = 0; round <= max_round; ++round) {
    if (total[round] == 0) throw DataError("round with no usable records");
    acc[round] = static_cast<double>(correct[round]) /
                 static_cast<double>(total[round]);
  }
  return acc;
}

CohortReport aggregate(std::span<const Transition> transitions,
                       std::span<const TrajectoryRecord> records,
                       AccuracyMetric metric, ComparatorTier tier,
                       const NormalizeOptions& opts) {
  if (records.empty()) throw DataError("empty cohort");
  CohortReport rep;
  rep.cohort_id = records.front().cohort_id;
  rep.model_name = records.front().model_name;
  rep.benchmark = records.front().benchmark;
  rep.method = records.front().method;
  rep.accuracy_metric = metric;

  long long parse_fail_turns = 0;
  long long live_turns = 0;
  for (const auto& r : records) {
    if (r.cohort_id != rep.cohort_id) {
      throw DataError("records from multiple cohorts: " + rep.cohort_id +
                      " and " + r.cohort_id);
    }
    ++rep.n_records;
    if (r.dropped) {
      ++rep.n_dropped_records;
      continue;
    }
    ++live_turns;
    if (!parsed_ok(parsed_of(r, opts))) ++parse_fail_turns;
  }
  rep.dropout_rate = static_cast<double>(rep.n_dropped_records) /
                     static_cast<double>(rep.n_records);
  rep.parse_fail_rate =
      live_turns == 0 ? 0.0
                      : static_cast<double>(parse_fail_turns) /
                            static_cast<double>(live_turns);

  for (Regime r : {Regime::Boundary, Regime::IP, Regime::DC, Regime::DM,
                   Regime::BenignRevision, Regime::ParseFail}) {
    rep.regime_counts[r] = 0;
  }
  for (const auto& t : transitions) ++rep.regime_counts[t.regime];
  rep.n_transitions_valid =
      static_cast<long long>(transitions.size()) -
      rep.regime_counts[Regime::ParseFail];
  rep.n_detection = rep.regime_counts[Regime::DC] +
                    rep.regime_counts[Regime::DM] +
                    rep.regime_counts[Regime::BenignRevision];
  rep.detection_rate =
      rep.n_transitions_valid == 0
          ? 0.0
          : static_cast<double>(rep.n_detection) /
                static_cast<double>(rep.n_transitions_valid);
  if (rep.n_detection > 0) {
    rep.dm_conditional =
        wilson_interval(rep.regime_counts[Regime::DM], rep.n_detection);
  }
  rep.descriptive_only = rep.n_detection < kDescriptiveOnlyThreshold;

  rep.round_accuracy = round_accuracy(records, metric, tier, opts);
  rep.delta =
      (rep.round_accuracy.back() - rep.round_accuracy.front()) * 100.0;

  // Reconciliation against the records-implied transition count.
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, long long> rounds_per_traj;
  for (const auto& r : records) {
    ++rounds_per_traj[{r.item_id, r.replicate, r.agent_id}];
  }
  for (const auto& [key, count] : rounds_per_traj) {
    rep.implied_transitions += count - 1;
  }
  rep.dropped_transitions =
      rep.implied_transitions - static_cast<long long>(transitions.size());
  return rep;
}

PairwiseResult pairwise_contingency(std::span<const Transition> cohort_a,
                                    std::span<const Transition> cohort_b) {
  auto row_of = [](std::span<const Transition> ts) {
    std::vector<long long> row(4, 0);
    for (const auto& t : ts) {
      switch (t.regime) {
        case Regime::Boundary:
        case Regime::BenignRevision:
          ++row[0];
          break;
        case Regime::IP: ++row[1]; break;
        case Regime::DC: ++row[2]; break;
        case Regime::DM: ++row[3]; break;
        case Regime::ParseFail: break;  // excluded
      }
    }
    return row;
  };
  PairwiseResult res;
  res.table = ContingencyTable::from_rows({row_of(cohort_a), row_of(cohort_b)});
  Chi2Result chi = pearson_chi2(res.table);
  res.chi2 = chi.chi2;
  res.df = chi.df;
  res.p = chi.p;
  res.v = cramers_v_bias_corrected(res.table);
  return res;
}

DivergenceSeries divergence_series(std::span<const Transition> transitions) {
  std::map<int, std::pair<long long, long long>> per_round;  // succ, total
  for (const auto& t : transitions) {
    if (t.regime == Regime::ParseFail) continue;
    auto& [succ, total] = per_round[t.round_from];
    ++total;
    if (*t.d_flag == 1) ++succ;
  }
  if (per_round.size() < 2) {
    throw DataError("divergence series needs at least two transition rounds");
  }
  DivergenceSeries s;
  for (const auto& [round, counts] : per_round) {
    s.successes.push_back(counts.first);
    s.totals.push_back(counts.second);
  }
  return s;
}

std::string render_report_json(const CohortReport& rep) {
  Json j;
  j["cohort_id"] = rep.cohort_id;
  j["model_name"] = rep.model_name;
  j["benchmark"] = to_string(rep.benchmark);
  j["method"] = to_string(rep.method);
  Json counts;
  for (const auto& [regime, count] : rep.regime_counts) {
    counts[std::string(to_string(regime))] = count;
  }
  j["regime_counts"] = counts;
  j["n_transitions_valid"] = rep.n_transitions_valid;
  j["n_detection"] = rep.n_detection;
  j["detection_rate"] = rep.detection_rate;
  if (rep.dm_conditional) {
    Json dm;
    dm["point"] = rep.dm_conditional->point;
    dm["lo"] = rep.dm_conditional->lo;
    dm["hi"] = rep.dm_conditional->hi;
    dm["z"] = rep.dm_conditional->z;
    dm["k"] = rep.dm_conditional->k;
    dm["n"] = rep.dm_conditional->n;
    j["dm_conditional"] = dm;
  } else {
    j["dm_conditional"] = nullptr;
  }
  j["descriptive_only"] = rep.descriptive_only;
  j["round_accuracy"] = rep.round_accuracy;
  j["delta"] = rep.delta;
  j["parse_fail_rate"] = rep.parse_fail_rate;
  j["dropout_rate"] = rep.dropout_rate;
  j["accuracy_metric"] = to_string(rep.accuracy_metric);
  j["n_records"] = rep.n_records;
  j["n_dropped_records"] = rep.n_dropped_records;
  j["dropped_transitions"] = rep.dropped_transitions;
  j["implied_transitions"] = rep.implied_transitions;
  return j.dump(2);
}

std::string render_report_csv(const CohortReport& rep) {
  std::string out;
  out += "section,cohort,method,n_detection,dm_conditional_pct,wilson_lo_pct,"
         "wilson_hi_pct,descriptive_only\n";
  out += "dm_conditional," + rep.cohort_id + "," +
         std::string(to_string(rep.method)) + "," +
         std::to_string(rep.n_detection) + ",";
  if (rep.dm_conditional) {
    out += pct(rep.dm_conditional->point) + "," + pct(rep.dm_conditional->lo) +
           "," + pct(rep.dm_conditional->hi);
  } else {
    out += ",,";
  }
  out += std::string(",") + (rep.descriptive_only ? "yes" : "no") + "\n";
  out += "section,cohort,detection_rate_pct,n_valid\n";
  out += "detection," + rep.cohort_id + "," + pct(rep.detection_rate) + "," +
         std::to_string(rep.n_transitions_valid) + "\n";
  out += "section,cohort,r0_pct,r_last_pct,delta_pp\n";
  out += "trajectory," + rep.cohort_id + "," + pct(rep.round_accuracy.front()) +
         "," + pct(rep.round_accuracy.back()) + "," + pp(rep.delta) + "\n";
  out += "section,cohort,detection_rate,dm_conditional\n";
  out += "scatter," + rep.cohort_id + "," + pct(rep.detection_rate) + "," +
         (rep.dm_conditional ? pct(rep.dm_conditional->point) : "") + "\n";
  return out;
}

std::string render_report_table(const CohortReport& rep) {
  char buf[256];
  std::string out;
  out += "cohort " + rep.cohort_id + " (" + rep.model_name + ", " +
         std::string(to_string(rep.benchmark)) + ", " +
         std::string(to_string(rep.method)) + ")\n";
  out += "regime counts:";
  for (const auto& [regime, count] : rep.regime_counts) {
    out += " " + std::string(to_string(regime)) + "=" + std::to_string(count);
  }
  out += "\n";
  std::snprintf(buf, sizeof(buf),
                "detection        P(D=1) = %s%%  (n_valid = %lld)\n",
                pct(rep.detection_rate).c_str(), rep.n_transitions_valid);
  out += buf;
  if (rep.dm_conditional) {
    std::snprintf(buf, sizeof(buf),
                  "miscorrection    P(DM|D=1) = %s%%  n_D=1 = %lld  "
                  "Wilson 95%% CI [%s, %s]%s\n",
                  pct(rep.dm_conditional->point).c_str(), rep.n_detection,
                  pct(rep.dm_conditional->lo).c_str(),
                  pct(rep.dm_conditional->hi).c_str(),
                  rep.descriptive_only ? "  (descriptive only: n_D=1 < 30)" : "");
    out += buf;
  } else {
    out += "miscorrection    P(DM|D=1) undefined (no detection events)\n";
  }
  std::string rounds;
  for (double a : rep.round_accuracy) {
    if (!rounds.empty()) rounds += " ";
    rounds += pct(a);
  }
  std::snprintf(buf, sizeof(buf),
                "trajectory       R0 = %s%%  R_last = %s%%  delta = %s pp\n",
                pct(rep.round_accuracy.front()).c_str(),
                pct(rep.round_accuracy.back()).c_str(), pp(rep.delta).c_str());
  out += buf;
  out += "per-round        " + rounds + "  (metric: " +
         std::string(to_string(rep.accuracy_metric)) + ")\n";
  std::snprintf(buf, sizeof(buf),
                "hygiene          parse_fail = %s%%  dropout = %s%%\n",
                pct(rep.parse_fail_rate).c_str(), pct(rep.dropout_rate).c_str());
  out += buf;
  out += "scatter          " + rep.cohort_id + "," + pct(rep.detection_rate) +
         "," + (rep.dm_conditional ? pct(rep.dm_conditional->point) : "") + "\n";
  return out;
}

std::string render_pairwise_table(const std::string& label_a,
                                  const std::string& label_b,
                                  const PairwiseResult& result) {
  char buf[256];
  std::string out = "pairwise regime distribution (PARSE_FAIL excluded)\n";
  out += "rows: " + label_a + " | " + label_b + "\n";
  out += "cols: BOUNDARY IP DC DM\n";
  for (int r = 0; r < result.table.rows; ++r) {
    out += r == 0 ? label_a : label_b;
    for (int c = 0; c < result.table.cols; ++c) {
      out += " " + std::to_string(result.table.at(r, c));
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof(buf), "chi2 = %.4f  df = %d  p = %.6g  V = %.3f\n",
                result.chi2, result.df, result.p, result.v);
  out += buf;
  return out;
}

}  // namespace regimekit
