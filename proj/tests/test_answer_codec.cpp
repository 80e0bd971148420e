#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regimekit/answer.hpp"
#include "regimekit/error.hpp"

#include <cstdint>
#include <string>
#include <vector>

using namespace regimekit;

namespace {

ParsedAnswer must_parse(const std::string& text, Benchmark b) {
  ParseOutcome o = extract_answer(text, b);
  REQUIRE(parsed_ok(o));
  return answer_of(o);
}

ParsedAnswer gt(const std::string& text, Benchmark b) {
  ParseOutcome o = parse_ground_truth(text, b);
  REQUIRE(parsed_ok(o));
  return answer_of(o);
}

std::uint64_t mix(std::uint64_t& s) {
  s += 0x9E3779B97f4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("boxed extraction takes the last balanced span") {
  auto a = must_parse("thus \\boxed{42}... recheck: \\boxed{7}",
                      Benchmark::Math500Hard);
  CHECK(a.raw_text == "7");
  CHECK(a.canonical == "7");
  CHECK(a.kind == AnswerKind::Latex);
}

TEST_CASE("nested boxed spans use the last outermost span") {
  auto a = must_parse("\\boxed{a + \\boxed{b}} trailing",
                      Benchmark::Math500Hard);
  CHECK(a.raw_text == "a + \\boxed{b}");
}

TEST_CASE("a balanced inner span inside an unclosed outer span still counts") {
  auto a = must_parse("\\boxed{ first \\boxed{5} and then it trails off",
                      Benchmark::Math500Hard);
  CHECK(a.raw_text == "5");
}

TEST_CASE("unbalanced braces fail extraction") {
  ParseOutcome o = extract_answer("\\boxed{\\frac{1}{2", Benchmark::Math500Hard);
  REQUIRE(!parsed_ok(o));
  CHECK(failure_of(o).reason == ParseFailReason::UnbalancedBraces);
}

TEST_CASE("missing boxed span fails extraction") {
  ParseOutcome o = extract_answer("the answer is 12", Benchmark::Math500Hard);
  REQUIRE(!parsed_ok(o));
  CHECK(failure_of(o).reason == ParseFailReason::NoBoxedSpan);
}

TEST_CASE("empty response fails extraction on every benchmark") {
  for (Benchmark b : {Benchmark::Gsm8k, Benchmark::Math500Hard,
                      Benchmark::GpqaDiamond, Benchmark::Aime}) {
    ParseOutcome o = extract_answer("", b);
    REQUIRE(!parsed_ok(o));
    CHECK(failure_of(o).reason == ParseFailReason::EmptyResponse);
    o = extract_answer("  \n\t ", b);
    REQUIRE(!parsed_ok(o));
    CHECK(failure_of(o).reason == ParseFailReason::EmptyResponse);
  }
}

TEST_CASE("trailing numeric extraction strips thousands separators") {
  auto a = must_parse("The answer is 1,234.", Benchmark::Gsm8k);
  CHECK(a.raw_text == "1,234");
  CHECK(a.canonical == "1234");
  REQUIRE(a.numeric_value.has_value());
  CHECK(*a.numeric_value == Rational(1234));
}

TEST_CASE("trailing numeric extraction takes the last token") {
  auto a = must_parse("First I get 17, then correcting to 18.", Benchmark::Gsm8k);
  CHECK(a.canonical == "18");
  auto b = must_parse("price $3.50, total -7.25", Benchmark::Gsm8k);
  CHECK(b.canonical == "-7.25");
  CHECK(*b.numeric_value == Rational(-725, 100));
}

TEST_CASE("no numeric token fails GSM8K extraction") {
  ParseOutcome o = extract_answer("I cannot decide on an answer.", Benchmark::Gsm8k);
  REQUIRE(!parsed_ok(o));
  CHECK(failure_of(o).reason == ParseFailReason::NoNumericToken);
}

TEST_CASE("AIME boxed content must be numeric") {
  auto a = must_parse("so \\boxed{204}", Benchmark::Aime);
  CHECK(*a.numeric_value == Rational(204));
  ParseOutcome o = extract_answer("so \\boxed{\\frac{1}{2}}", Benchmark::Aime);
  REQUIRE(!parsed_ok(o));
  CHECK(failure_of(o).reason == ParseFailReason::NoNumericToken);
}

TEST_CASE("letter extraction uppercases and enforces the choice set") {
  auto a = must_parse("the correct option is \\boxed{c}", Benchmark::GpqaDiamond);
  CHECK(a.canonical == "C");
  CHECK(a.kind == AnswerKind::Letter);

  auto wrapped = must_parse("\\boxed{\\text{b}}", Benchmark::GpqaDiamond);
  CHECK(wrapped.canonical == "B");

  ParseOutcome bad = extract_answer("\\boxed{42}", Benchmark::GpqaDiamond);
  REQUIRE(!parsed_ok(bad));
  CHECK(failure_of(bad).reason == ParseFailReason::NoBoxedSpan);

  ParseOutcome e = extract_answer("\\boxed{E}", Benchmark::GpqaDiamond);
  CHECK(!parsed_ok(e));
}

TEST_CASE("normalize strips wrappers and outer whitespace") {
  CHECK(normalize("  $\\frac{1}{2}$ ", AnswerKind::Latex) == "\\frac{1}{2}");
  CHECK(normalize("$$ 12 $$", AnswerKind::Latex) == "12");
  CHECK(normalize("\\[x+1\\]", AnswerKind::Latex) == "x+1");
  CHECK(normalize("\\(y\\)", AnswerKind::Latex) == "y");
  CHECK(normalize("\\text{C}", AnswerKind::Letter) == "C");
  CHECK(normalize("\\boxed{7}", AnswerKind::Latex) == "7");
  CHECK(normalize("c", AnswerKind::Letter) == "C");
}

TEST_CASE("normalize keeps paired inline math intact") {
  CHECK(normalize("$a$ + $b$", AnswerKind::Latex) == "$a$+$b$");
}

TEST_CASE("whitespace inside brace arguments is preserved by default") {
  std::string spaced = "\\frac{(k^2+1)^2}{8 k^2}";
  std::string tight = "\\frac{(k^2+1)^2}{8k^2}";
  CHECK(normalize(spaced, AnswerKind::Latex) == spaced);
  CHECK(normalize(spaced, AnswerKind::Latex) != normalize(tight, AnswerKind::Latex));

  NormalizeOptions aggressive{.aggressive_whitespace = true};
  CHECK(normalize(spaced, AnswerKind::Latex, aggressive) ==
        normalize(tight, AnswerKind::Latex, aggressive));
}

TEST_CASE("whitespace outside brace arguments collapses to nothing") {
  CHECK(normalize("\\frac {1}{2}", AnswerKind::Latex) == "\\frac{1}{2}");
  CHECK(normalize("45 ^\\circ", AnswerKind::Latex) == "45^\\circ");
}

TEST_CASE("numeric canonical preserves literal digits") {
  auto a = gt("37.70", Benchmark::Aime);
  CHECK(a.canonical == "37.70");
  CHECK(*a.numeric_value == Rational(377, 10));
}

TEST_CASE("exact decimal parsing has no floating point rounding") {
  auto r = parse_decimal_exact("0.1");
  REQUIRE(r.has_value());
  CHECK(*r == Rational(1, 10));
  auto big = parse_decimal_exact("123456789012345678901234567890.5");
  REQUIRE(big.has_value());
  CHECK(*big * 2 == Rational(boost::multiprecision::cpp_int(
      "246913578024691357802469135781")));
  CHECK(!parse_decimal_exact("1.2.3").has_value());
  CHECK(!parse_decimal_exact("1e3").has_value());
  CHECK(!parse_decimal_exact("").has_value());
  CHECK(!parse_decimal_exact("12.").has_value());
}

TEST_CASE("strict tier compares trimmed raw spans only") {
  auto a = gt("0.5 ", Benchmark::Math500Hard);
  auto b = gt("0.5", Benchmark::Math500Hard);
  CHECK(answers_match(a, b, ComparatorTier::StrictString, Benchmark::Math500Hard));

  auto spaced = gt("\\frac{(k^2+1)^2}{8 k^2}", Benchmark::Math500Hard);
  auto tight = gt("\\frac{(k^2+1)^2}{8k^2}", Benchmark::Math500Hard);
  CHECK(!answers_match(spaced, tight, ComparatorTier::StrictString,
                       Benchmark::Math500Hard));
  CHECK(!answers_match(spaced, tight, ComparatorTier::Primary,
                       Benchmark::Math500Hard));
}

TEST_CASE("primary tier uses numeric value on numeric benchmarks only") {
  auto a_aime = gt("37.70", Benchmark::Aime);
  auto b_aime = gt("37.7", Benchmark::Aime);
  CHECK(answers_match(a_aime, b_aime, ComparatorTier::Primary, Benchmark::Aime));

  auto a_math = gt("37.70", Benchmark::Math500Hard);
  auto b_math = gt("37.7", Benchmark::Math500Hard);
  CHECK(!answers_match(a_math, b_math, ComparatorTier::Primary,
                       Benchmark::Math500Hard));
}

TEST_CASE("lenient tier equates slash and brace fractions") {
  auto a = gt("1/2", Benchmark::Math500Hard);
  auto b = gt("\\frac{1}{2}", Benchmark::Math500Hard);
  CHECK(!answers_match(a, b, ComparatorTier::Primary, Benchmark::Math500Hard));
  CHECK(answers_match(a, b, ComparatorTier::Lenient, Benchmark::Math500Hard));

  // Form equivalence, not value equivalence.
  auto c = gt("2/4", Benchmark::Math500Hard);
  CHECK(!answers_match(c, b, ComparatorTier::Lenient, Benchmark::Math500Hard));

  // Small-integer bound.
  auto big1 = gt("1001/2", Benchmark::Math500Hard);
  auto big2 = gt("\\frac{1001}{2}", Benchmark::Math500Hard);
  CHECK(!answers_match(big1, big2, ComparatorTier::Lenient,
                       Benchmark::Math500Hard));
}

TEST_CASE("lenient tier makes degree suffixes optional") {
  auto deg = gt("45^\\circ", Benchmark::Math500Hard);
  auto plain = gt("45", Benchmark::Math500Hard);
  CHECK(answers_match(deg, plain, ComparatorTier::Lenient, Benchmark::Math500Hard));
  CHECK(!answers_match(deg, plain, ComparatorTier::Primary, Benchmark::Math500Hard));

  auto braced = gt("45^{\\circ}", Benchmark::Math500Hard);
  CHECK(answers_match(braced, plain, ComparatorTier::Lenient,
                      Benchmark::Math500Hard));
  auto words = gt("45 degrees", Benchmark::Math500Hard);
  CHECK(answers_match(words, plain, ComparatorTier::Lenient,
                      Benchmark::Math500Hard));
}

TEST_CASE("lenient tier does not evaluate symbolic expressions") {
  auto symbolic = gt("12\\pi", Benchmark::Math500Hard);
  auto decimal = gt("37.7", Benchmark::Math500Hard);
  CHECK(!answers_match(symbolic, decimal, ComparatorTier::Lenient,
                       Benchmark::Math500Hard));
}

TEST_CASE("kind mismatch throws") {
  auto num = gt("5", Benchmark::Gsm8k);
  auto letter = gt("A", Benchmark::GpqaDiamond);
  CHECK_THROWS_AS(
      answers_match(num, letter, ComparatorTier::Primary, Benchmark::Gsm8k),
      KindMismatchError);
}

TEST_CASE("extraction and normalization are deterministic") {
  std::vector<std::string> inputs = {
      "thus \\boxed{42} and \\boxed{\\frac{a}{b}}",
      "the total is 1,234.50",
      "\\boxed{ 45 ^\\circ }",
      "no answer here",
  };
  for (const auto& s : inputs) {
    for (Benchmark b : {Benchmark::Gsm8k, Benchmark::Math500Hard}) {
      ParseOutcome o1 = extract_answer(s, b);
      ParseOutcome o2 = extract_answer(s, b);
      REQUIRE(parsed_ok(o1) == parsed_ok(o2));
      if (parsed_ok(o1)) {
        CHECK(answer_of(o1).raw_text == answer_of(o2).raw_text);
        CHECK(answer_of(o1).canonical == answer_of(o2).canonical);
      } else {
        CHECK(failure_of(o1).reason == failure_of(o2).reason);
      }
    }
  }
}

TEST_CASE("strict and primary comparators are equivalence relations") {
  // Generated corpus mixing spellings that collide at various tiers.
  std::vector<std::string> pool = {
      "1/2",   "\\frac{1}{2}", "0.5",  "0.50",  "x+1", " x+1 ",
      "45",    "45^\\circ",    "12",   "$12$",  "1,2", "\\frac{1}{2}",
      "\\frac {1}{2}",         "a b",  "ab",
  };
  std::vector<ParsedAnswer> answers;
  for (const auto& s : pool) {
    ParseOutcome o = parse_ground_truth(s, Benchmark::Math500Hard);
    if (parsed_ok(o)) answers.push_back(answer_of(o));
  }
  for (ComparatorTier tier :
       {ComparatorTier::StrictString, ComparatorTier::Primary,
        ComparatorTier::Lenient}) {
    for (const auto& a : answers) {
      CHECK(answers_match(a, a, tier, Benchmark::Math500Hard));  // reflexive
      for (const auto& b : answers) {
        CHECK(answers_match(a, b, tier, Benchmark::Math500Hard) ==
              answers_match(b, a, tier, Benchmark::Math500Hard));  // symmetric
        for (const auto& c : answers) {
          if (answers_match(a, b, tier, Benchmark::Math500Hard) &&
              answers_match(b, c, tier, Benchmark::Math500Hard)) {
            CHECK(answers_match(a, c, tier, Benchmark::Math500Hard));
          }
        }
      }
    }
  }
}

TEST_CASE("matches are monotone in tier leniency") {
  std::vector<std::string> pool = {
      "1/2",  "\\frac{1}{2}", "0.5",      "0.50", "45",  "45^\\circ",
      "45 degrees",           "\\text{A}", "A",    "x^2", "$x^2$",
      "\\frac{1}{3}",         "2/4",       "7",
  };
  std::vector<ParsedAnswer> answers;
  for (const auto& s : pool) {
    ParseOutcome o = parse_ground_truth(s, Benchmark::Math500Hard);
    if (parsed_ok(o)) answers.push_back(answer_of(o));
  }
  for (const auto& a : answers) {
    for (const auto& b : answers) {
      bool strict =
          answers_match(a, b, ComparatorTier::StrictString, Benchmark::Math500Hard);
      bool primary =
          answers_match(a, b, ComparatorTier::Primary, Benchmark::Math500Hard);
      bool lenient =
          answers_match(a, b, ComparatorTier::Lenient, Benchmark::Math500Hard);
      if (strict) CHECK(primary);
      if (primary) CHECK(lenient);
    }
  }
}

TEST_CASE("numeric comparison is monotone in tier leniency under random literals") {
  std::uint64_t seed = 7;
  for (int i = 0; i < 500; ++i) {
    long long x = static_cast<long long>(mix(seed) % 2000) - 1000;
    int zeros = static_cast<int>(mix(seed) % 3);
    std::string a = std::to_string(x);
    std::string b = a;
    if (zeros > 0) {
      b += ".";
      b.append(static_cast<size_t>(zeros), '0');
    }
    auto pa = gt(a, Benchmark::Gsm8k);
    auto pb = gt(b, Benchmark::Gsm8k);
    bool strict = answers_match(pa, pb, ComparatorTier::StrictString, Benchmark::Gsm8k);
    bool primary = answers_match(pa, pb, ComparatorTier::Primary, Benchmark::Gsm8k);
    bool lenient = answers_match(pa, pb, ComparatorTier::Lenient, Benchmark::Gsm8k);
    if (strict) CHECK(primary);
    if (primary) CHECK(lenient);
    CHECK(primary);  // same value by construction
  }
}
