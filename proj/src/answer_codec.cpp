#include "regimekit/answer.hpp"

#include "regimekit/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace regimekit {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Strips math delimiters that wrap the entire string. Only fires when the
// closing delimiter at the end actually pairs with the opening one, e.g.
// "$a$ + $b$" is left alone.
std::string_view strip_math_delims(std::string_view s) {
  for (;;) {
    s = trim(s);
    if (s.size() >= 4 && s.substr(0, 2) == "$$" &&
        s.substr(s.size() - 2) == "$$") {
      std::string_view inner = s.substr(2, s.size() - 4);
      if (inner.find('$') == std::string_view::npos) {
        s = inner;
        continue;
      }
    }
    if (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
      std::string_view inner = s.substr(1, s.size() - 2);
      if (inner.find('$') == std::string_view::npos) {
        s = inner;
        continue;
      }
    }
    if (s.size() >= 4 && s.substr(0, 2) == "\\[" &&
        s.substr(s.size() - 2) == "\\]") {
      std::string_view inner = s.substr(2, s.size() - 4);
      if (inner.find("\\]") == std::string_view::npos) {
        s = inner;
        continue;
      }
    }
    if (s.size() >= 4 && s.substr(0, 2) == "\\(" &&
        s.substr(s.size() - 2) == "\\)") {
      std::string_view inner = s.substr(2, s.size() - 4);
      if (inner.find("\\)") == std::string_view::npos) {
        s = inner;
        continue;
      }
    }
    return s;
  }
}

// If the whole string is \boxed{...} or \text{...}, returns the interior.
std::optional<std::string_view> strip_command_wrapper(std::string_view s) {
  for (std::string_view cmd : {std::string_view("\\boxed{"),
                               std::string_view("\\text{")}) {
    if (s.size() <= cmd.size() || s.substr(0, cmd.size()) != cmd ||
        s.back() != '}') {
      continue;
    }
    // The opening brace must close exactly at the final character.
    int depth = 1;
    size_t i = cmd.size();
    while (i < s.size() && depth > 0) {
      char c = s[i];
      if (c == '\\' && i + 1 < s.size() &&
          (s[i + 1] == '{' || s[i + 1] == '}')) {
        i += 2;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}') --depth;
      ++i;
    }
    if (depth == 0 && i == s.size()) {
      return s.substr(cmd.size(), s.size() - cmd.size() - 1);
    }
  }
  return std::nullopt;
}

std::string collapse_whitespace(std::string_view s, bool aggressive) {
  std::string out;
  out.reserve(s.size());
  int depth = 0;
  for (char c : s) {
    if (c == '{') {
      ++depth;
      out.push_back(c);
      continue;
    }
    if (c == '}') {
      depth = std::max(0, depth - 1);
      out.push_back(c);
      continue;
    }
    if (is_space(c) && (depth == 0 || aggressive)) continue;
    out.push_back(c);
  }
  return out;
}

struct BoxedScan {
  std::optional<std::string_view> last_span;
  bool saw_any = false;
};

// Finds the last balanced \boxed{...} span. Outermost spans are preferred
// (scanning resumes after a balanced span), but when an occurrence never
// closes, the scan descends into it so an inner balanced span still counts.
BoxedScan scan_boxed(std::string_view s) {
  static constexpr std::string_view kCmd = "\\boxed{";
  BoxedScan result;
  size_t pos = 0;
  while (true) {
    size_t p = s.find(kCmd, pos);
    if (p == std::string_view::npos) break;
    result.saw_any = true;
    size_t content = p + kCmd.size();
    int depth = 1;
    size_t i = content;
    while (i < s.size() && depth > 0) {
      char c = s[i];
      if (c == '\\' && i + 1 < s.size() &&
          (s[i + 1] == '{' || s[i + 1] == '}')) {
        i += 2;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}') --depth;
      ++i;
    }
    if (depth == 0) {
      result.last_span = s.substr(content, i - 1 - content);
      pos = i;
    } else {
      pos = content;
    }
  }
  return result;
}

// Last numeric token: optional sign, digits possibly grouped with commas,
// optional fraction part.
std::optional<std::string_view> last_numeric_token(std::string_view s) {
  std::optional<std::string_view> best;
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    size_t b = i;
    if (b > 0 && (s[b - 1] == '-' || s[b - 1] == '+') &&
        (b < 2 || !is_digit(s[b - 2]))) {
      b = b - 1;
    }
    size_t j = i;
    while (j < n) {
      if (is_digit(s[j])) {
        ++j;
      } else if (s[j] == ',' && j + 1 < n && is_digit(s[j + 1])) {
        ++j;
      } else {
        break;
      }
    }
    if (j < n && s[j] == '.' && j + 1 < n && is_digit(s[j + 1])) {
      ++j;
      while (j < n && is_digit(s[j])) ++j;
    }
    best = s.substr(b, j - b);
    i = j;
  }
  return best;
}

ParseOutcome make_numeric(std::string_view span, const NormalizeOptions& opts) {
  ParsedAnswer a;
  a.kind = AnswerKind::Numeric;
  a.raw_text = std::string(span);
  a.canonical = normalize(span, AnswerKind::Numeric, opts);
  a.numeric_value = parse_decimal_exact(a.canonical);
  if (!a.numeric_value) {
    return ParseFailure{ParseFailReason::NoNumericToken};
  }
  return a;
}

ParseOutcome make_letter(std::string_view span, const NormalizeOptions& opts) {
  ParsedAnswer a;
  a.kind = AnswerKind::Letter;
  a.raw_text = std::string(span);
  a.canonical = normalize(span, AnswerKind::Letter, opts);
  // Letter-benchmark closure: only the released choice letters count as an
  // extractable answer.
  if (a.canonical.size() != 1 || a.canonical[0] < 'A' || a.canonical[0] > 'D') {
    return ParseFailure{ParseFailReason::NoBoxedSpan};
  }
  return a;
}

std::string_view strip_degree_suffix(std::string_view s) {
  static constexpr std::array<std::string_view, 4> kSuffixes = {
      "^{\\circ}", "^\\circ", "\\circ", "\xc2\xb0"};
  for (std::string_view suf : kSuffixes) {
    if (s.size() > suf.size() && s.substr(s.size() - suf.size()) == suf) {
      return s.substr(0, s.size() - suf.size());
    }
  }
  for (std::string_view word : {std::string_view("degrees"),
                                std::string_view("degree")}) {
    if (s.size() > word.size()) {
      std::string_view tail = s.substr(s.size() - word.size());
      bool eq = std::equal(tail.begin(), tail.end(), word.begin(),
                           [](char a, char b) {
                             return std::tolower(static_cast<unsigned char>(a)) == b;
                           });
      if (eq) return s.substr(0, s.size() - word.size());
    }
  }
  return s;
}

bool parse_bounded_int(std::string_view s, long long limit, long long* out) {
  if (s.empty()) return false;
  size_t i = 0;
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) return false;
  long long v = 0;
  for (; i < s.size(); ++i) {
    if (!is_digit(s[i])) return false;
    v = v * 10 + (s[i] - '0');
    if (v > limit) return false;
  }
  *out = neg ? -v : v;
  return true;
}

// Rewrites a slash fraction a/b of small integers to the brace form so the
// two spellings compare equal under the lenient tier.
std::string lenient_form(std::string_view canonical) {
  std::string_view s = strip_degree_suffix(canonical);
  size_t slash = s.find('/');
  if (slash != std::string_view::npos && slash > 0 && slash + 1 < s.size() &&
      s.find('/', slash + 1) == std::string_view::npos) {
    long long num = 0;
    long long den = 0;
    if (parse_bounded_int(s.substr(0, slash), 1000, &num) &&
        parse_bounded_int(s.substr(slash + 1), 1000, &den) && den != 0) {
      std::string out = "\\frac{";
      out += s.substr(0, slash);
      out += "}{";
      out += s.substr(slash + 1);
      out += "}";
      return out;
    }
  }
  return std::string(s);
}

}  // namespace

std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::Gsm8k: return "GSM8K";
    case Benchmark::Math500Hard: return "MATH500_HARD";
    case Benchmark::GpqaDiamond: return "GPQA_DIAMOND";
    case Benchmark::Aime: return "AIME";
  }
  return "GSM8K";
}

std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::Numeric: return "numeric";
    case AnswerKind::Letter: return "letter";
    case AnswerKind::Latex: return "latex";
  }
  return "latex";
}

std::string_view to_string(ComparatorTier t) {
  switch (t) {
    case ComparatorTier::StrictString: return "strict";
    case ComparatorTier::Primary: return "primary";
    case ComparatorTier::Lenient: return "lenient";
  }
  return "primary";
}

std::string_view to_string(ParseFailReason r) {
  switch (r) {
    case ParseFailReason::NoBoxedSpan: return "no_boxed_span";
    case ParseFailReason::UnbalancedBraces: return "unbalanced_braces";
    case ParseFailReason::NoNumericToken: return "no_numeric_token";
    case ParseFailReason::EmptyResponse: return "empty_response";
  }
  return "empty_response";
}

Benchmark benchmark_from_string(std::string_view s) {
  if (s == "GSM8K") return Benchmark::Gsm8k;
  if (s == "MATH500_HARD") return Benchmark::Math500Hard;
  if (s == "GPQA_DIAMOND") return Benchmark::GpqaDiamond;
  if (s == "AIME") return Benchmark::Aime;
  throw DomainError("unknown benchmark: " + std::string(s));
}

AnswerKind answer_kind_from_string(std::string_view s) {
  if (s == "numeric") return AnswerKind::Numeric;
  if (s == "letter") return AnswerKind::Letter;
  if (s == "latex") return AnswerKind::Latex;
  throw DomainError("unknown answer kind: " + std::string(s));
}

ComparatorTier tier_from_string(std::string_view s) {
  if (s == "strict" || s == "STRICT_STRING") return ComparatorTier::StrictString;
  if (s == "primary" || s == "PRIMARY") return ComparatorTier::Primary;
  if (s == "lenient" || s == "LENIENT") return ComparatorTier::Lenient;
  throw DomainError("unknown comparator tier: " + std::string(s));
}

ParseFailReason parse_fail_reason_from_string(std::string_view s) {
  if (s == "no_boxed_span") return ParseFailReason::NoBoxedSpan;
  if (s == "unbalanced_braces") return ParseFailReason::UnbalancedBraces;
  if (s == "no_numeric_token") return ParseFailReason::NoNumericToken;
  if (s == "empty_response") return ParseFailReason::EmptyResponse;
  throw DomainError("unknown parse failure reason: " + std::string(s));
}

AnswerKind answer_kind_of(Benchmark b) {
  switch (b) {
    case Benchmark::Gsm8k:
    case Benchmark::Aime:
      return AnswerKind::Numeric;
    case Benchmark::GpqaDiamond:
      return AnswerKind::Letter;
    case Benchmark::Math500Hard:
      return AnswerKind::Latex;
  }
  return AnswerKind::Latex;
}

std::string normalize(std::string_view raw, AnswerKind kind,
                      const NormalizeOptions& opts) {
  std::string_view s = strip_math_delims(raw);
  if (auto inner = strip_command_wrapper(s)) {
    s = strip_math_delims(*inner);
  }
  std::string out = collapse_whitespace(s, opts.aggressive_whitespace);
  if (kind == AnswerKind::Letter) {
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
      return static_cast<char>(std::toupper(c));
    });
  } else if (kind == AnswerKind::Numeric) {
    out.erase(std::remove(out.begin(), out.end(), ','), out.end());
  }
  return out;
}

ParseOutcome extract_answer(std::string_view raw_text, Benchmark b,
                            const NormalizeOptions& opts) {
  if (trim(raw_text).empty()) {
    return ParseFailure{ParseFailReason::EmptyResponse};
  }
  if (b == Benchmark::Gsm8k) {
    auto token = last_numeric_token(raw_text);
    if (!token) return ParseFailure{ParseFailReason::NoNumericToken};
    return make_numeric(*token, opts);
  }
  BoxedScan scan = scan_boxed(raw_text);
  if (!scan.last_span) {
    return ParseFailure{scan.saw_any ? ParseFailReason::UnbalancedBraces
                                     : ParseFailReason::NoBoxedSpan};
  }
  switch (answer_kind_of(b)) {
    case AnswerKind::Numeric:
      return make_numeric(*scan.last_span, opts);
    case AnswerKind::Letter:
      return make_letter(*scan.last_span, opts);
    case AnswerKind::Latex: {
      ParsedAnswer a;
      a.kind = AnswerKind::Latex;
      a.raw_text = std::string(*scan.last_span);
      a.canonical = normalize(*scan.last_span, AnswerKind::Latex, opts);
      return a;
    }
  }
  return ParseFailure{ParseFailReason::NoBoxedSpan};
}

ParseOutcome parse_ground_truth(std::string_view text, Benchmark b,
                                const NormalizeOptions& opts) {
  if (trim(text).empty()) {
    return ParseFailure{ParseFailReason::EmptyResponse};
  }
  switch (answer_kind_of(b)) {
    case AnswerKind::Numeric:
      return make_numeric(trim(text), opts);
    case AnswerKind::Letter:
      return make_letter(trim(text), opts);
    case AnswerKind::Latex: {
      ParsedAnswer a;
      a.kind = AnswerKind::Latex;
      a.raw_text = std::string(trim(text));
      a.canonical = normalize(text, AnswerKind::Latex, opts);
      return a;
    }
  }
  return ParseFailure{ParseFailReason::EmptyResponse};
}

bool answers_match(const ParsedAnswer& a, const ParsedAnswer& b,
                   ComparatorTier tier, Benchmark benchmark) {
  (void)benchmark;
  if (a.kind != b.kind) {
    throw KindMismatchError("cannot compare answers of kinds " +
                            std::string(to_string(a.kind)) + " and " +
                            std::string(to_string(b.kind)));
  }
  if (tier == ComparatorTier::StrictString) {
    return trim(a.raw_text) == trim(b.raw_text);
  }
  bool primary = a.kind == AnswerKind::Numeric
                     ? a.numeric_value == b.numeric_value
                     : a.canonical == b.canonical;
  if (tier == ComparatorTier::Primary || primary) {
    return primary;
  }
  // Lenient additions apply to expression answers only; numeric benchmarks
  // already compare by exact value and letters have a single spelling.
  if (a.kind != AnswerKind::Latex) return false;
  return lenient_form(a.canonical) == lenient_form(b.canonical);
}

std::optional<Rational> parse_decimal_exact(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  size_t int_begin = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == int_begin) return std::nullopt;
  std::string digits(s.substr(int_begin, i - int_begin));
  size_t frac_len = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    size_t frac_begin = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    frac_len = i - frac_begin;
    if (frac_len == 0) return std::nullopt;
    digits += s.substr(frac_begin, frac_len);
  }
  if (i != s.size()) return std::nullopt;
  boost::multiprecision::cpp_int num(digits);
  boost::multiprecision::cpp_int den(1);
  for (size_t k = 0; k < frac_len; ++k) den *= 10;
  Rational r(num, den);
  return neg ? Rational(-r) : r;
}

std::string rational_to_string(const Rational& r) { return r.str(); }

std::optional<Rational> rational_from_string(std::string_view s) {
  try {
    return Rational(std::string(s));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace regimekit
