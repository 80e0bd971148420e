#include "regimekit/stats.hpp"

#include "regimekit/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace regimekit {

double chi2_upper_tail(double chi2, int df) {
  if (chi2 <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, chi2 / 2.0);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

IntervalEstimate wilson_interval(long long k, long long n, double z) {
  if (n <= 0) throw DomainError("wilson_interval: n must be positive");
  if (k < 0 || k > n) throw DomainError("wilson_interval: k must be in [0, n]");
  if (z <= 0.0) throw DomainError("wilson_interval: z must be positive");
  const double nn = static_cast<double>(n);
  const double p_hat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p_hat + z2 / (2.0 * nn)) / denom;
  const double half_width =
      z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / denom;
  IntervalEstimate est;
  est.point = p_hat;
  est.lo = std::max(0.0, center - half_width);
  est.hi = std::min(1.0, center + half_width);
  est.z = z;
  est.k = k;
  est.n = n;
  return est;
}

ContingencyTable ContingencyTable::from_rows(
    const std::vector<std::vector<long long>>& data) {
  ContingencyTable t;
  t.rows = static_cast<int>(data.size());
  t.cols = data.empty() ? 0 : static_cast<int>(data[0].size());
  for (const auto& row : data) {
    if (static_cast<int>(row.size()) != t.cols) {
      throw DegenerateTableError("ragged contingency table");
    }
    for (long long v : row) {
      if (v < 0) throw DegenerateTableError("negative count");
      t.counts.push_back(v);
      t.n += v;
    }
  }
  return t;
}

long long ContingencyTable::row_sum(int r) const {
  long long s = 0;
  for (int c = 0; c < cols; ++c) s += at(r, c);
  return s;
}

long long ContingencyTable::col_sum(int c) const {
  long long s = 0;
  for (int r = 0; r < rows; ++r) s += at(r, c);
  return s;
}

void ContingencyTable::validate() const {
  if (rows < 2 || cols < 2) {
    throw DegenerateTableError("contingency table needs at least 2x2");
  }
  if (static_cast<size_t>(rows) * cols != counts.size()) {
    throw DegenerateTableError("count matrix does not match shape");
  }
  for (int r = 0; r < rows; ++r) {
    if (row_sum(r) == 0) throw DegenerateTableError("all-zero row");
  }
  for (int c = 0; c < cols; ++c) {
    if (col_sum(c) == 0) throw DegenerateTableError("all-zero column");
  }
}

Chi2Result pearson_chi2(const ContingencyTable& table) {
  table.validate();
  const double n = static_cast<double>(table.n);
  double chi2 = 0.0;
  for (int r = 0; r < table.rows; ++r) {
    const double rs = static_cast<double>(table.row_sum(r));
    for (int c = 0; c < table.cols; ++c) {
      const double expected = rs * static_cast<double>(table.col_sum(c)) / n;
      const double diff = static_cast<double>(table.at(r, c)) - expected;
      chi2 += diff * diff / expected;
    }
  }
  Chi2Result res;
  res.chi2 = chi2;
  res.df = (table.rows - 1) * (table.cols - 1);
  res.p = chi2_upper_tail(chi2, res.df);
  return res;
}

double cramers_v_bias_corrected(const ContingencyTable& table) {
  table.validate();
  if (table.n < 2) throw DegenerateTableError("need n >= 2 for effect size");
  const double n = static_cast<double>(table.n);
  const double r = table.rows;
  const double c = table.cols;
  const double phi2 = pearson_chi2(table).chi2 / n;
  const double phi2_t = std::max(0.0, phi2 - (r - 1.0) * (c - 1.0) / (n - 1.0));
  const double r_t = r - (r - 1.0) * (r - 1.0) / (n - 1.0);
  const double c_t = c - (c - 1.0) * (c - 1.0) / (n - 1.0);
  const double denom = std::min(r_t - 1.0, c_t - 1.0);
  if (denom <= 0.0) return 0.0;
  return std::sqrt(phi2_t / denom);
}

TrendResult cochran_armitage(std::span<const long long> successes,
                             std::span<const long long> totals,
                             std::span<const double> scores, bool two_sided) {
  const size_t g = successes.size();
  if (g < 2 || totals.size() != g) {
    throw DomainError("cochran_armitage: need >= 2 equal-length groups");
  }
  std::vector<double> default_scores;
  if (scores.empty()) {
    default_scores.resize(g);
    std::iota(default_scores.begin(), default_scores.end(), 0.0);
    scores = default_scores;
  }
  if (scores.size() != g) {
    throw DomainError("cochran_armitage: scores length mismatch");
  }
  double sum_k = 0.0;
  double sum_t = 0.0;
  for (size_t i = 0; i < g; ++i) {
    if (totals[i] <= 0) throw DomainError("cochran_armitage: totals must be positive");
    if (successes[i] < 0 || successes[i] > totals[i]) {
      throw DomainError("cochran_armitage: successes out of range");
    }
    sum_k += static_cast<double>(successes[i]);
    sum_t += static_cast<double>(totals[i]);
  }
  const double p_bar = sum_k / sum_t;
  if (p_bar <= 0.0 || p_bar >= 1.0) {
    throw ZeroVarianceError("cochran_armitage: pooled rate is degenerate");
  }
  double num = 0.0;
  double sum_ts = 0.0;
  double sum_ts2 = 0.0;
  for (size_t i = 0; i < g; ++i) {
    const double t = static_cast<double>(totals[i]);
    num += scores[i] * (static_cast<double>(successes[i]) - t * p_bar);
    sum_ts += t * scores[i];
    sum_ts2 += t * scores[i] * scores[i];
  }
  const double variance =
      p_bar * (1.0 - p_bar) * (sum_ts2 - sum_ts * sum_ts / sum_t);
  if (variance <= 0.0) {
    throw ZeroVarianceError("cochran_armitage: scores carry no variance");
  }
  TrendResult res;
  res.z_stat = num / std::sqrt(variance);
  const double tail = normal_upper_tail(std::abs(res.z_stat));
  res.p = two_sided ? std::min(1.0, 2.0 * tail) : tail;
  return res;
}

}  // namespace regimekit
