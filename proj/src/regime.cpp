#include "regimekit/regime.hpp"

#include "regimekit/error.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace regimekit {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Boundary: return "BOUNDARY";
    case Regime::IP: return "IP";
    case Regime::DC: return "DC";
    case Regime::DM: return "DM";
    case Regime::BenignRevision: return "BENIGN_REVISION";
    case Regime::ParseFail: return "PARSE_FAIL";
  }
  return "PARSE_FAIL";
}

Regime regime_from_string(std::string_view s) {
  if (s == "BOUNDARY") return Regime::Boundary;
  if (s == "IP") return Regime::IP;
  if (s == "DC") return Regime::DC;
  if (s == "DM") return Regime::DM;
  if (s == "BENIGN_REVISION") return Regime::BenignRevision;
  if (s == "PARSE_FAIL") return Regime::ParseFail;
  throw DomainError("unknown regime: " + std::string(s));
}

ParseOutcome parsed_of(const TrajectoryRecord& r, const NormalizeOptions& opts) {
  return extract_answer(r.raw_text, r.benchmark, opts);
}

std::string_view to_string(Method m) { return m == Method::E1 ? "E1" : "E2"; }

Method method_from_string(std::string_view s) {
  if (s == "E1") return Method::E1;
  if (s == "E2") return Method::E2;
  throw DomainError("unknown method: " + std::string(s));
}

int detect(const ParsedAnswer& prev, const ParsedAnswer& next,
           ComparatorTier tier, Benchmark benchmark) {
  return answers_match(prev, next, tier, benchmark) ? 0 : 1;
}

Regime classify_regime(const ParseOutcome& prev, const ParseOutcome& next,
                       const ParseOutcome& truth, ComparatorTier tier,
                       Benchmark benchmark) {
  if (!parsed_ok(prev) || !parsed_ok(next) || !parsed_ok(truth)) {
    return Regime::ParseFail;
  }
  const ParsedAnswer& p = answer_of(prev);
  const ParsedAnswer& n = answer_of(next);
  const ParsedAnswer& t = answer_of(truth);
  const int d = detect(p, n, tier, benchmark);
  const bool prev_ok = answers_match(p, t, tier, benchmark);
  const bool next_ok = answers_match(n, t, tier, benchmark);
  if (d == 0) {
    return prev_ok ? Regime::Boundary : Regime::IP;
  }
  if (!next_ok) return Regime::DM;  // fold: any revision landing incorrect
  return prev_ok ? Regime::BenignRevision : Regime::DC;
}

Transition classify_transition(const ParseOutcome& prev,
                               const ParseOutcome& next,
                               const ParsedAnswer& truth, ComparatorTier tier,
                               Benchmark benchmark) {
  Transition tr;
  tr.prev = prev;
  tr.next = next;
  tr.regime = classify_regime(prev, next, ParseOutcome(truth), tier, benchmark);
  if (tr.regime != Regime::ParseFail) {
    const ParsedAnswer& p = answer_of(prev);
    const ParsedAnswer& n = answer_of(next);
    tr.d_flag = detect(p, n, tier, benchmark);
    tr.prev_correct = answers_match(p, truth, tier, benchmark);
    tr.next_correct = answers_match(n, truth, tier, benchmark);
  }
  return tr;
}

TrajectoryClassification classify_trajectory(
    std::span<const TrajectoryRecord> records, ComparatorTier tier,
    const NormalizeOptions& opts) {
  std::vector<const TrajectoryRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const TrajectoryRecord* a, const TrajectoryRecord* b) {
              return a->round < b->round;
            });
  TrajectoryClassification out;
  for (size_t i = 0; i + 1 < sorted.size(); ++i) {
    const TrajectoryRecord& a = *sorted[i];
    const TrajectoryRecord& b = *sorted[i + 1];
    if (b.round != a.round + 1) {
      throw DataError("missing round " + std::to_string(a.round + 1) +
                      " for item " + a.item_id + " replicate " +
                      std::to_string(a.replicate) + " agent " +
                      std::to_string(a.agent_id));
    }
    if (a.dropped || b.dropped) {
      ++out.dropped_transitions;
      continue;
    }
    Transition tr = classify_transition(parsed_of(a, opts), parsed_of(b, opts),
                                        a.ground_truth, tier, a.benchmark);
    tr.item_id = a.item_id;
    tr.replicate = a.replicate;
    tr.agent_id = a.agent_id;
    tr.round_from = a.round;
    tr.round_to = b.round;
    out.transitions.push_back(std::move(tr));
  }
  return out;
}

ClassifiedLog classify_records(std::span<const TrajectoryRecord> records,
                               ComparatorTier tier,
                               const NormalizeOptions& opts) {
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, std::vector<const TrajectoryRecord*>> groups;
  for (const auto& r : records) {
    groups[{r.item_id, r.replicate, r.agent_id}].push_back(&r);
  }
  ClassifiedLog out;
  for (auto& [key, rows] : groups) {
    std::vector<TrajectoryRecord> traj;
    traj.reserve(rows.size());
    for (const auto* r : rows) traj.push_back(*r);
    TrajectoryClassification tc = classify_trajectory(traj, tier, opts);
    out.implied_transitions += static_cast<long long>(traj.size()) - 1;
    out.dropped_transitions += tc.dropped_transitions;
    for (auto& tr : tc.transitions) out.transitions.push_back(std::move(tr));
  }
  return out;
}

}  // namespace regimekit
