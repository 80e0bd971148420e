#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regimekit/error.hpp"
#include "regimekit/io.hpp"
#include "regimekit/regime.hpp"
#include "support/fixtures.hpp"

#include <algorithm>
#include <random>

using namespace regimekit;
using rktest::make_record;
using rktest::make_trajectory;
using rktest::numeric_answer;

namespace {

ParsedAnswer math_answer(const std::string& text) {
  return answer_of(parse_ground_truth(text, Benchmark::Math500Hard));
}

std::vector<Regime> regimes_of(const std::vector<Transition>& transitions) {
  std::vector<Regime> out;
  for (const auto& t : transitions) out.push_back(t.regime);
  return out;
}

}  // namespace

TEST_CASE("detect is 0 iff the answers match at the tier") {
  auto a18 = numeric_answer("18");
  CHECK(detect(a18, a18, ComparatorTier::Primary, Benchmark::Gsm8k) == 0);

  auto frac = math_answer("\\frac{1}{2}");
  auto dec = math_answer("0.5");
  CHECK(detect(frac, dec, ComparatorTier::Primary, Benchmark::Math500Hard) == 1);

  auto slash = math_answer("1/2");
  CHECK(detect(slash, frac, ComparatorTier::Lenient, Benchmark::Math500Hard) == 0);
  CHECK(detect(slash, frac, ComparatorTier::Primary, Benchmark::Math500Hard) == 1);
}

TEST_CASE("transition truth table") {
  auto t17 = numeric_answer("17");
  auto t18 = numeric_answer("18");
  auto t19 = numeric_answer("19");
  auto truth = t18;
  auto cls = [&](const ParseOutcome& p, const ParseOutcome& n) {
    return classify_transition(p, n, truth, ComparatorTier::Primary,
                               Benchmark::Gsm8k)
        .regime;
  };
  CHECK(cls(t17, t17) == Regime::IP);
  CHECK(cls(t17, t18) == Regime::DC);
  CHECK(cls(t18, t19) == Regime::DM);  // correct answer revised wrong: folded
  CHECK(cls(t17, t19) == Regime::DM);
  CHECK(cls(t18, t18) == Regime::Boundary);
  CHECK(cls(ParseFailure{ParseFailReason::NoNumericToken}, t18) ==
        Regime::ParseFail);
  CHECK(cls(t18, ParseFailure{ParseFailReason::EmptyResponse}) ==
        Regime::ParseFail);
}

TEST_CASE("a transition into a parse failure is excluded, not a detection") {
  auto truth = numeric_answer("18");
  Transition t = classify_transition(ParseOutcome(numeric_answer("17")),
                                     ParseFailure{ParseFailReason::NoNumericToken},
                                     truth, ComparatorTier::Primary,
                                     Benchmark::Gsm8k);
  CHECK(t.regime == Regime::ParseFail);
  CHECK(!t.d_flag.has_value());
  CHECK(!t.prev_correct.has_value());
  CHECK(!t.next_correct.has_value());
}

TEST_CASE("library classifier agrees with the symbol-table oracle") {
  long long cases = 0;
  for (int prev = 0; prev <= rktest::kFailSymbol; ++prev) {
    for (int next = 0; next <= rktest::kFailSymbol; ++next) {
      for (int truth = 0; truth <= rktest::kFailSymbol; ++truth) {
        Regime expected = rktest::oracle_classify(prev, next, truth);
        Regime got = classify_regime(
            rktest::symbol_outcome(prev), rktest::symbol_outcome(next),
            rktest::symbol_outcome(truth), ComparatorTier::Primary,
            Benchmark::Gsm8k);
        CHECK(got == expected);
        ++cases;
      }
    }
  }
  CHECK(cases == 125);
}

TEST_CASE("d_flag 0 implies prev and next correctness agree") {
  for (int prev = 0; prev < rktest::kFailSymbol; ++prev) {
    for (int next = 0; next < rktest::kFailSymbol; ++next) {
      for (int truth = 0; truth < rktest::kFailSymbol; ++truth) {
        Transition t = classify_transition(
            rktest::symbol_outcome(prev), rktest::symbol_outcome(next),
            answer_of(rktest::symbol_outcome(truth)), ComparatorTier::Primary,
            Benchmark::Gsm8k);
        if (*t.d_flag == 0) CHECK(*t.prev_correct == *t.next_correct);
      }
    }
  }
}

TEST_CASE("benign revision is unreachable under a transitive comparator") {
  // When one tier defines both detection and correctness, prev ~ truth and
  // next ~ truth force prev ~ next, so D = 1 cannot coexist with two correct
  // endpoints.
  std::mt19937_64 rng(11);
  std::vector<std::string> pool = {"1", "2", "3", "1.0", "2.00", "+1", "03"};
  for (int i = 0; i < 2000; ++i) {
    auto pick = [&] { return pool[rng() % pool.size()]; };
    for (ComparatorTier tier :
         {ComparatorTier::StrictString, ComparatorTier::Primary}) {
      Transition t = classify_transition(
          ParseOutcome(numeric_answer(pick())), ParseOutcome(numeric_answer(pick())),
          numeric_answer(pick()), tier, Benchmark::Gsm8k);
      CHECK(t.regime != Regime::BenignRevision);
    }
  }
}

TEST_CASE("five identical correct rounds classify as four boundaries") {
  auto records = make_trajectory({"18", "18", "18", "18", "18"}, "18");
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  CHECK(regimes_of(tc.transitions) ==
        std::vector<Regime>{Regime::Boundary, Regime::Boundary,
                            Regime::Boundary, Regime::Boundary});
}

TEST_CASE("mixed trajectory follows the truth table round by round") {
  auto records = make_trajectory({"7", "7", "18", "18", "9"}, "18");
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  CHECK(regimes_of(tc.transitions) ==
        std::vector<Regime>{Regime::IP, Regime::DC, Regime::Boundary,
                            Regime::DM});
}

TEST_CASE("two-pass self-correction yields one transition") {
  auto records = make_trajectory({"7", "18"}, "18");
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  CHECK(regimes_of(tc.transitions) == std::vector<Regime>{Regime::DC});
}

TEST_CASE("a gap in the round sequence is an error") {
  auto records = make_trajectory({"7", "7", "7"}, "18");
  records[1].round = 5;
  CHECK_THROWS_AS(classify_trajectory(records, ComparatorTier::Primary),
                  DataError);
}

TEST_CASE("transitions touching dropped records are skipped and counted") {
  auto records = make_trajectory({"7", "7", "7", "7"}, "18");
  records[1].dropped = true;
  records[1].raw_text.clear();
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  CHECK(tc.transitions.size() == 1);  // only round 2 -> 3 survives
  CHECK(tc.dropped_transitions == 2);
}

TEST_CASE("unparseable turns classify as PARSE_FAIL transitions") {
  auto records = make_trajectory({"7", "", "9"}, "18");
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  CHECK(regimes_of(tc.transitions) ==
        std::vector<Regime>{Regime::ParseFail, Regime::ParseFail});
}

TEST_CASE("classify_records output order is independent of input order") {
  std::vector<TrajectoryRecord> records;
  std::mt19937_64 rng(5);
  for (int item = 0; item < 4; ++item) {
    for (int rep = 0; rep < 2; ++rep) {
      for (int agent = 0; agent < 2; ++agent) {
        for (int round = 0; round < 3; ++round) {
          std::string answer = std::to_string(rng() % 3 + 1);
          records.push_back(make_record("item_" + std::to_string(item), rep,
                                        agent, round, answer, "1"));
        }
      }
    }
  }
  ClassifiedLog a = classify_records(records, ComparatorTier::Primary);
  std::shuffle(records.begin(), records.end(), rng);
  ClassifiedLog b = classify_records(records, ComparatorTier::Primary);
  REQUIRE(a.transitions.size() == b.transitions.size());
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    CHECK(transition_to_line(a.transitions[i]) ==
          transition_to_line(b.transitions[i]));
  }
  CHECK(a.implied_transitions == 4 * 2 * 2 * 2);
}

TEST_CASE("count conservation over random logs") {
  std::mt19937_64 rng(17);
  std::vector<TrajectoryRecord> records;
  const int items = 10;
  const int rounds = 5;
  for (int item = 0; item < items; ++item) {
    for (int round = 0; round < rounds; ++round) {
      std::string answer;
      if (rng() % 10 == 0) {
        answer = "";  // parse failure
      } else {
        answer = std::to_string(rng() % 4);
      }
      auto rec = make_record("item_" + std::to_string(item), 0, 0, round,
                             answer, "2");
      if (rng() % 12 == 0) {
        rec.dropped = true;
        rec.raw_text.clear();
      }
      records.push_back(std::move(rec));
    }
  }
  ClassifiedLog log = classify_records(records, ComparatorTier::Primary);
  std::map<Regime, long long> counts;
  long long n_detection = 0;
  for (const auto& t : log.transitions) {
    ++counts[t.regime];
    if (t.regime != Regime::ParseFail && *t.d_flag == 1) ++n_detection;
  }
  long long total = 0;
  for (const auto& [regime, count] : counts) total += count;
  CHECK(total == static_cast<long long>(log.transitions.size()));
  CHECK(total + log.dropped_transitions == log.implied_transitions);
  CHECK(log.implied_transitions == items * (rounds - 1));
  CHECK(n_detection == counts[Regime::DC] + counts[Regime::DM] +
                           counts[Regime::BenignRevision]);
}

TEST_CASE("classification of a log is deterministic across repeated runs") {
  std::mt19937_64 rng(23);
  std::vector<TrajectoryRecord> records;
  for (int item = 0; item < 20; ++item) {
    for (int round = 0; round < 4; ++round) {
      records.push_back(make_record("item_" + std::to_string(item), 0, 0,
                                    round, std::to_string(rng() % 5), "3"));
    }
  }
  auto dump = [&] {
    std::string out;
    for (const auto& t : classify_records(records, ComparatorTier::Primary).transitions) {
      out += transition_to_line(t);
      out += '\n';
    }
    return out;
  };
  std::string first = dump();
  CHECK(dump() == first);
  CHECK(dump() == first);
}

TEST_CASE("transition JSON round-trips") {
  auto records = make_trajectory({"7", "18", ""}, "18");
  auto tc = classify_trajectory(records, ComparatorTier::Primary);
  for (const auto& t : tc.transitions) {
    Transition back = transition_from_json(to_json(t));
    CHECK(transition_to_line(back) == transition_to_line(t));
  }
}
