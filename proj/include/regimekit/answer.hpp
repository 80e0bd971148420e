#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace regimekit {

enum class Benchmark { Gsm8k, Math500Hard, GpqaDiamond, Aime };

// Answer kind fixed by the benchmark: GSM8K and AIME grade numerically,
// GPQA-Diamond grades a single letter, MATH-500 grades a LaTeX expression.
enum class AnswerKind { Numeric, Letter, Latex };

// Comparator tiers ordered by leniency: a match at a stricter tier implies a
// match at every more lenient tier.
enum class ComparatorTier { StrictString, Primary, Lenient };

// Exact rational value of a numeric answer; decimal literals are converted
// without any floating-point rounding.
using Rational = boost::multiprecision::cpp_rational;

std::string_view to_string(Benchmark b);
std::string_view to_string(AnswerKind k);
std::string_view to_string(ComparatorTier t);
Benchmark benchmark_from_string(std::string_view s);
AnswerKind answer_kind_from_string(std::string_view s);
ComparatorTier tier_from_string(std::string_view s);

AnswerKind answer_kind_of(Benchmark b);

struct NormalizeOptions {
  // Off by default: intra-argument whitespace (inside brace groups) is
  // preserved, so \frac{(k^2+1)^2}{8 k^2} and \frac{(k^2+1)^2}{8k^2} stay
  // distinct under the primary comparator. Opting in collapses whitespace
  // everywhere.
  bool aggressive_whitespace = false;
};

struct ParsedAnswer {
  AnswerKind kind = AnswerKind::Latex;
  std::string raw_text;    // verbatim extracted span
  std::string canonical;   // normalized form; see normalize()
  std::optional<Rational> numeric_value;  // present iff kind == Numeric
};

enum class ParseFailReason {
  NoBoxedSpan,
  UnbalancedBraces,
  NoNumericToken,
  EmptyResponse,
};

std::string_view to_string(ParseFailReason r);
ParseFailReason parse_fail_reason_from_string(std::string_view s);

struct ParseFailure {
  ParseFailReason reason = ParseFailReason::EmptyResponse;
};

// A turn either yields an answer or is excluded from detection-event counts
// downstream.
using ParseOutcome = std::variant<ParsedAnswer, ParseFailure>;

inline bool parsed_ok(const ParseOutcome& o) {
  return std::holds_alternative<ParsedAnswer>(o);
}
inline const ParsedAnswer& answer_of(const ParseOutcome& o) {
  return std::get<ParsedAnswer>(o);
}
inline const ParseFailure& failure_of(const ParseOutcome& o) {
  return std::get<ParseFailure>(o);
}

// Deterministic canonical form of an extracted answer span: trims, removes
// outer math delimiters and one level of boxed/text wrappers, deletes
// whitespace runs outside brace-delimited arguments, uppercases letter
// answers, and drops thousands separators from numeric answers while
// preserving their literal digits (so "37.70" stays "37.70" for string-tier
// comparison). Total: never fails.
std::string normalize(std::string_view raw, AnswerKind kind,
                      const NormalizeOptions& opts = {});

// Benchmark-specific extraction from a complete model response: the last
// syntactically balanced \boxed{...} span for MATH-500/AIME/GPQA, the last
// numeric token for GSM8K.
ParseOutcome extract_answer(std::string_view raw_text, Benchmark b,
                            const NormalizeOptions& opts = {});

// Parses a released ground-truth answer. Unlike extract_answer the text is
// the answer itself, so no span search is performed.
ParseOutcome parse_ground_truth(std::string_view text, Benchmark b,
                                const NormalizeOptions& opts = {});

// Tiered comparison.
//   STRICT_STRING  byte equality of whitespace-trimmed raw spans
//   PRIMARY        canonical equality; numeric_value equality on numeric
//                  benchmarks
//   LENIENT        PRIMARY plus slash-fraction a/b <-> \frac{a}{b} for
//                  integers |a|,|b| <= 1000 and optional degree-unit suffixes
// Throws KindMismatchError when the kinds differ.
bool answers_match(const ParsedAnswer& a, const ParsedAnswer& b,
                   ComparatorTier tier, Benchmark benchmark);

// Exact parse of a plain decimal literal (optional sign, digits, optional
// fraction part). Rejects anything else, including separators and exponents.
std::optional<Rational> parse_decimal_exact(std::string_view text);

std::string rational_to_string(const Rational& r);
std::optional<Rational> rational_from_string(std::string_view s);

}  // namespace regimekit
