#pragma once

#include <span>
#include <vector>

namespace regimekit {

// Two-sided 95% critical value of the standard normal.
inline constexpr double kDefaultZ = 1.959964;

struct IntervalEstimate {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double z = kDefaultZ;
  long long k = 0;
  long long n = 0;
};

// Wilson score interval for k successes in n trials. Throws DomainError on
// k > n or n == 0.
IntervalEstimate wilson_interval(long long k, long long n,
                                 double z = kDefaultZ);

struct ContingencyTable {
  int rows = 0;
  int cols = 0;
  std::vector<long long> counts;  // row-major
  long long n = 0;

  static ContingencyTable from_rows(
      const std::vector<std::vector<long long>>& data);

  long long at(int r, int c) const { return counts[static_cast<size_t>(r) * cols + c]; }
  long long row_sum(int r) const;
  long long col_sum(int c) const;

  // Throws DegenerateTableError on an all-zero row or column or a malformed
  // shape; tables must be validated before testing.
  void validate() const;
};

struct Chi2Result {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

// Pearson chi-square test of independence; the p-value is the exact
// upper-tail chi-square probability (regularized incomplete gamma), no
// continuity correction.
Chi2Result pearson_chi2(const ContingencyTable& table);

// Cramer's V with the Bergsma small-sample bias correction. Returns 0 when
// the corrected association or the denominator vanishes.
double cramers_v_bias_corrected(const ContingencyTable& table);

struct TrendResult {
  double z_stat = 0.0;
  double p = 1.0;
};

// Cochran-Armitage test for a monotone trend in binomial proportions across
// ordered groups. Scores default to the group indices 0..g-1. Two-sided by
// default. Throws ZeroVarianceError when the pooled rate is 0 or 1 or the
// scores collapse.
TrendResult cochran_armitage(std::span<const long long> successes,
                             std::span<const long long> totals,
                             std::span<const double> scores = {},
                             bool two_sided = true);

// Upper-tail probability helpers used by the tests as well.
double chi2_upper_tail(double chi2, int df);
double normal_upper_tail(double z);

}  // namespace regimekit
