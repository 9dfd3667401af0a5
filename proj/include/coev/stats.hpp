#pragma once

// Mann-Whitney U (Wilcoxon rank-sum), two-sided, with midranks for ties.
// Small samples (both below 20) get a tie-aware exact p via a subset-sum
// count over doubled midranks; larger samples use the normal approximation
// with tie-corrected variance and continuity correction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace coev {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct MannWhitneyResult {
  double u;    // min(u_a, u_b) — the reported statistic
  double u_a;  // U of the first sample
  double u_b;  // U of the second sample
  double p;    // two-sided
  bool exact;  // exact enumeration used (otherwise normal approximation)
};

inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  if (n1 == 0 || n2 == 0) throw std::invalid_argument("mann-whitney: empty sample");
  const std::size_t n = n1 + n2;

  // Pool and sort: value + group flag.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (const double v : a) pooled.emplace_back(v, 0);
  for (const double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  // Doubled midranks stay integral even through ties: a tie run occupying
  // 1-based ranks [i..j] gets doubled midrank i+j for every member.
  std::vector<long long> dRank(n);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
    const long long dr = static_cast<long long>(i + 1) + static_cast<long long>(j + 1);
    for (std::size_t k = i; k <= j; ++k) dRank[k] = dr;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  long long dRankSumA = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (pooled[k].second == 0) dRankSumA += dRank[k];
  }

  // Doubled U statistics: 2*U_a = 2*R_a - n1(n1+1).
  const long long dU_a =
      dRankSumA - static_cast<long long>(n1) * static_cast<long long>(n1 + 1);
  const long long dU_total = 2LL * static_cast<long long>(n1) * static_cast<long long>(n2);
  const long long dU_b = dU_total - dU_a;
  const long long dU_min = std::min(dU_a, dU_b);

  MannWhitneyResult res;
  res.u_a = static_cast<double>(dU_a) / 2.0;
  res.u_b = static_cast<double>(dU_b) / 2.0;
  res.u = static_cast<double>(dU_min) / 2.0;

  if (n1 < 20 && n2 < 20) {
    // Exact: count size-n1 subsets of the pooled doubled ranks by rank sum.
    // Counts fit comfortably in doubles (at most C(38,19) ~ 1.8e10).
    res.exact = true;
    long long dTotal = 0;
    for (const long long dr : dRank) dTotal += dr;
    const std::size_t max_sum = static_cast<std::size_t>(dTotal);
    std::vector<std::vector<double>> dp(
        n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    dp[0][0] = 1.0;
    for (std::size_t item = 0; item < n; ++item) {
      const auto dr = static_cast<std::size_t>(dRank[item]);
      const std::size_t kmax = std::min(n1, item + 1);
      for (std::size_t k = kmax; k >= 1; --k) {
        auto& row = dp[k];
        const auto& prev = dp[k - 1];
        for (std::size_t s = max_sum; s >= dr; --s) {
          if (prev[s - dr] != 0.0) row[s] += prev[s - dr];
        }
      }
    }
    // P(U_a <= U_min) via the rank-sum threshold for subsets of size n1.
    const long long dThreshold =
        dU_min + static_cast<long long>(n1) * static_cast<long long>(n1 + 1);
    double below = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      total += dp[n1][s];
      if (static_cast<long long>(s) <= dThreshold) below += dp[n1][s];
    }
    // The U distribution is symmetric about n1*n2/2 (ties included), so the
    // two-sided p doubles the lower tail of the smaller U.
    res.p = std::min(1.0, 2.0 * below / total);
  } else {
    res.exact = false;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double mean_u = dn1 * dn2 / 2.0;
    double tie_term = 0.0;
    for (const std::size_t t : tie_sizes) {
      const double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
    const double var_u =
        dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (var_u <= 0.0) {
      res.p = 1.0;  // every pooled value identical
      return res;
    }
    const double z = (res.u + 0.5 - mean_u) / std::sqrt(var_u);
    res.p = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return res;
}

}  // namespace coev
