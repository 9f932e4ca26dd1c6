// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poisrec {

/// Discrete law on integer support.
struct Pmf {
  std::vector<std::int64_t> support;
  std::vector<double> probabilities;
};

/// One verification result. pass means value <= threshold, or value equal
/// to the threshold for exact-match rows.
struct TestReport {
  std::string suite;
  std::string statistic;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// One-sample Kolmogorov-Smirnov statistic sup_x |ECDF(x) - F(x)|,
/// evaluated exactly at the jump points (both one-sided gaps).
template <class Cdf>
double ks_one_sample(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty())
    throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

/// Two-sample KS statistic: sup over the merged support of |ECDF_a - ECDF_b|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

/// Unbiased sample covariance of two columns of a replicate-by-gridpoint
/// value table.
inline double empirical_cov(const std::vector<std::vector<double>>& table,
                            std::size_t i, std::size_t j) {
  if (table.size() < 2)
    throw std::invalid_argument("empirical_cov: need at least two replicates");
  const double n = static_cast<double>(table.size());
  double mean_i = 0.0, mean_j = 0.0;
  for (const auto& row : table) {
    mean_i += row.at(i);
    mean_j += row.at(j);
  }
  mean_i /= n;
  mean_j /= n;
  double acc = 0.0;
  for (const auto& row : table)
    acc += (row[i] - mean_i) * (row[j] - mean_j);
  return acc / (n - 1.0);
}

/// Exact law of the number of records among n i.i.d. continuous lifetimes.
/// The record indicators are independent Bernoulli(1/k), so the law is a
/// Bernoulli convolution; equivalently unsigned Stirling numbers of the
/// first kind over n!. Small n uses the integer Stirling recursion (exact,
/// and bit-identical to permutation enumeration), larger n the probability
/// recursion.
inline Pmf record_count_pmf(std::int64_t n) {
  if (n < 1)
    throw std::invalid_argument("record_count_pmf: n must be >= 1");
  Pmf pmf;
  pmf.support.resize(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k)
    pmf.support[static_cast<std::size_t>(k - 1)] = k;
  pmf.probabilities.assign(static_cast<std::size_t>(n), 0.0);

  if (n <= 20) {  // counts up to 20! fit in 64 bits
    std::vector<std::uint64_t> stirling(static_cast<std::size_t>(n) + 1, 0);
    stirling[1] = 1;
    std::uint64_t factorial = 1;
    for (std::int64_t m = 2; m <= n; ++m) {
      for (std::int64_t k = m; k >= 1; --k) {
        stirling[static_cast<std::size_t>(k)] =
            stirling[static_cast<std::size_t>(k - 1)] +
            static_cast<std::uint64_t>(m - 1) * stirling[static_cast<std::size_t>(k)];
      }
      factorial *= static_cast<std::uint64_t>(m);
    }
    for (std::int64_t k = 1; k <= n; ++k)
      pmf.probabilities[static_cast<std::size_t>(k - 1)] =
          static_cast<double>(stirling[static_cast<std::size_t>(k)]) /
          static_cast<double>(factorial);
  } else {
    std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
    p[1] = 1.0;
    for (std::int64_t m = 2; m <= n; ++m) {
      const double q = 1.0 / static_cast<double>(m);
      for (std::int64_t k = m; k >= 1; --k)
        p[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] * (1.0 - q) +
                                         p[static_cast<std::size_t>(k - 1)] * q;
    }
    for (std::int64_t k = 1; k <= n; ++k)
      pmf.probabilities[static_cast<std::size_t>(k - 1)] =
          p[static_cast<std::size_t>(k)];
  }
  return pmf;
}

/// Total-variation distance between two integer-support pmfs.
inline double total_variation(const Pmf& a, const Pmf& b) {
  std::map<std::int64_t, double> diff;
  for (std::size_t i = 0; i < a.support.size(); ++i)
    diff[a.support[i]] += a.probabilities[i];
  for (std::size_t i = 0; i < b.support.size(); ++i)
    diff[b.support[i]] -= b.probabilities[i];
  double acc = 0.0;
  for (const auto& [value, d] : diff) acc += std::abs(d);
  return 0.5 * acc;
}

// ---------------------------------------------------------------------------
// Reference distributions
// ---------------------------------------------------------------------------

inline double normal_cdf(double x, double mean = 0.0, double variance = 1.0) {
  if (!(variance > 0.0))
    throw std::invalid_argument("normal_cdf: variance must be positive");
  return 0.5 * std::erfc(-(x - mean) /
                         (std::numbers::sqrt2 * std::sqrt(variance)));
}

/// Standard Gumbel, F(x) = exp(-e^{-x}).
inline double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

/// Limit law of the renewal-sampled normalized rank: density -log x on
/// (0, 1), CDF x - x log x.
inline double rank_limit_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x - x * std::log(x);
}

/// Current-age law at inspection time t of a rate-lambda Poisson process:
/// truncated exponential on [0, t) with an atom of mass e^{-lambda t} at t.
inline double age_truncated_exp_cdf(double x, double rate, double t) {
  if (!(rate > 0.0) || !(t >= 0.0))
    throw std::invalid_argument("age_truncated_exp_cdf: bad parameters");
  if (x < 0.0) return 0.0;
  if (x >= t) return 1.0;
  return -std::expm1(-rate * x);
}

/// Law of sup_{0<=s<=1} |B_s| by the alternating reflection series
///   P(sup |B| <= x) = sum_k (-1)^k (Phi((2k+1)x) - Phi((2k-1)x)),
/// truncated once a slice falls below 1e-12.
inline double sup_abs_bm_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double total = 2.0 * normal_cdf(x) - 1.0;
  double sign = -1.0;
  for (int k = 1; k < 1000; ++k) {
    const double slice =
        normal_cdf((2.0 * k + 1.0) * x) - normal_cdf((2.0 * k - 1.0) * x);
    total += 2.0 * sign * slice;
    if (slice < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(total, 0.0, 1.0);
}

enum class ReferenceLaw {
  normal,             // params: mean, variance
  gumbel,             // no params
  sup_abs_bm,         // no params
  rank_limit,         // no params
  age_truncated_exp,  // params: rate, t
};

inline double reference_cdf(ReferenceLaw law, std::span<const double> params,
                            double x) {
  const auto need = [&](std::size_t count) {
    if (params.size() != count)
      throw std::invalid_argument("reference_cdf: wrong parameter count");
  };
  switch (law) {
    case ReferenceLaw::normal:
      need(2);
      return normal_cdf(x, params[0], params[1]);
    case ReferenceLaw::gumbel:
      need(0);
      return gumbel_cdf(x);
    case ReferenceLaw::sup_abs_bm:
      need(0);
      return sup_abs_bm_cdf(x);
    case ReferenceLaw::rank_limit:
      need(0);
      return rank_limit_cdf(x);
    case ReferenceLaw::age_truncated_exp:
      need(2);
      return age_truncated_exp_cdf(x, params[0], params[1]);
  }
  throw std::invalid_argument("reference_cdf: unknown law");
}

inline double reference_cdf(std::string_view law, std::span<const double> params,
                            double x) {
  if (law == "normal") return reference_cdf(ReferenceLaw::normal, params, x);
  if (law == "gumbel") return reference_cdf(ReferenceLaw::gumbel, params, x);
  if (law == "sup_abs_bm")
    return reference_cdf(ReferenceLaw::sup_abs_bm, params, x);
  if (law == "rank_limit")
    return reference_cdf(ReferenceLaw::rank_limit, params, x);
  if (law == "age_truncated_exp")
    return reference_cdf(ReferenceLaw::age_truncated_exp, params, x);
  throw std::invalid_argument("reference_cdf: unknown law");
}

/// Rank of the last entry: #{i : sample[i] >= sample.back()}.
inline std::int64_t rank_of_last(std::span<const double> sample) {
  if (sample.empty())
    throw std::invalid_argument("rank_of_last: empty sample");
  const double last = sample.back();
  std::int64_t rank = 0;
  for (const double v : sample)
    if (v >= last) ++rank;
  return rank;
}

/// Asymptotic one-sample KS quantile at the 1% level.
inline double ks_one_sample_threshold(std::int64_t n) {
  return 1.63 / std::sqrt(static_cast<double>(n));
}

/// Asymptotic two-sample KS quantile at the 1% level (equal sample sizes).
inline double ks_two_sample_threshold(std::int64_t n) {
  return 1.63 * std::sqrt(2.0 / static_cast<double>(n));
}

}  // namespace poisrec
