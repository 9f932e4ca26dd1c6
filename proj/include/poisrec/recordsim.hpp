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

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "poisrec/random.hpp"

namespace poisrec {

/// State of the stochastic recurrence Y_{n+1} = (Y_n + V_n) U_{n+1}.
struct PerpetuityState {
  double value = 0.0;
  std::int64_t step = 0;
};

/// Record values directly: R_k is a prefix sum of i.i.d. Exp(rate)
/// increments, so huge record indices never require simulating the
/// underlying lifetime sequence.
inline std::vector<double> simulate_record_values(uniform_source auto& src,
                                                  double rate, std::int64_t n) {
  if (n < 1)
    throw std::invalid_argument("simulate_record_values: n must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& v : values) {
    sum += sample_exp(src, rate);
    v = sum;
  }
  return values;
}

namespace detail {

// -log(1 - e^{-r}) without cancellation: expm1 keeps the small-r branch
// accurate, log1p the large-r branch. Crossover at r = log 2 where both
// are exact to rounding.
inline double log_geometric_rate(double r) {
  if (r > 0.6931471805599453)
    return -std::log1p(-std::exp(-r));
  return -std::log(-std::expm1(-r));
}

// Bracket operator [x] = floor(x) + 1. For the almost-surely non-integer
// arguments arising at runtime this equals the ceiling.
inline double floor_plus_one(double x) { return std::floor(x) + 1.0; }

}  // namespace detail

/// Record times from record values:
///   L_n = 1 + sum_{i<n} [ V_i / (-log(1 - e^{-R_i})) ],
/// with fresh unit exponentials V_i drawn from src (which must be
/// independent of the stream that produced the record values) and the
/// bracket meaning floor-plus-one. Given K record values, returns
/// L_1..L_{K+1}.
inline std::vector<std::int64_t> record_times_ceil_rep(
    uniform_source auto& src, std::span<const double> record_values) {
  double prev = 0.0;
  for (const double r : record_values) {
    if (!(r > prev))
      throw std::invalid_argument(
          "record_times_ceil_rep: record values must be positive and strictly increasing");
    prev = r;
  }
  std::vector<std::int64_t> times;
  times.reserve(record_values.size() + 1);
  std::int64_t l = 1;
  times.push_back(1);
  for (const double r : record_values) {
    const double v = sample_exp(src, 1.0);
    const double summand =
        detail::floor_plus_one(v / detail::log_geometric_rate(r));
    if (!(summand < 9.0e18 - static_cast<double>(l)))
      throw std::overflow_error("record_times_ceil_rep: record time exceeds 64-bit range");
    l += static_cast<std::int64_t>(summand);
    times.push_back(l);
  }
  return times;
}

/// Record times as a Markov chain: from state k the next record time is
/// ceil(k / U) with U uniform on (0, 1), which realizes the tail law
/// P(next > m | k) = k/m for integers m >= k.
inline std::vector<std::int64_t> record_times_markov(uniform_source auto& src,
                                                     std::int64_t n) {
  if (n < 1)
    throw std::invalid_argument("record_times_markov: n must be >= 1");
  std::vector<std::int64_t> times(static_cast<std::size_t>(n));
  times[0] = 1;
  double k = 1.0;
  for (std::int64_t j = 1; j < n; ++j) {
    double next = std::ceil(k / src.next_uniform());
    // u rounding k/u back down to k is a ~1e-16 event; records still
    // strictly increase, so bump to the next representable value.
    if (next <= k) next = k + 1.0;
    if (next > 9.0e18)
      throw std::overflow_error("record_times_markov: record time exceeds 64-bit range");
    k = next;
    times[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(next);
  }
  return times;
}

inline PerpetuityState perpetuity_step(const PerpetuityState& state, double v,
                                       double u) {
  if (!(v > 0.0))
    throw std::invalid_argument("perpetuity_step: v must be positive");
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("perpetuity_step: u must be in (0, 1)");
  return PerpetuityState{(state.value + v) * u, state.step + 1};
}

/// Direct-sum form Y_n = e^{-R_n} + sum_{i<n} V_i e^{-(R_n - R_i)}.
/// Iterating perpetuity_step from Y_1 = e^{-R_1} with U_{i+1} = e^{-(R_{i+1}-R_i)}
/// reproduces this value up to rounding.
inline double perpetuity_direct(std::span<const double> record_values,
                                std::span<const double> exponentials) {
  if (record_values.empty())
    throw std::invalid_argument("perpetuity_direct: need at least one record value");
  if (exponentials.size() + 1 != record_values.size())
    throw std::invalid_argument("perpetuity_direct: need exactly n-1 exponentials");
  double prev = 0.0;
  for (const double r : record_values) {
    if (!(r > prev))
      throw std::invalid_argument(
          "perpetuity_direct: record values must be positive and strictly increasing");
    prev = r;
  }
  const double r_n = record_values.back();
  double sum = std::exp(-r_n);
  for (std::size_t i = 0; i + 1 < record_values.size(); ++i)
    sum += exponentials[i] * std::exp(-(r_n - record_values[i]));
  return sum;
}

/// One draw from the (approximately) stationary law of the perpetuity
/// Y = sum_n V_n prod_{k<=n} U_k: iterate the recurrence from 0 for
/// burn_in steps with V ~ Exp(1) and U ~ Unif(0,1).
inline double sample_stationary_perpetuity(uniform_source auto& src,
                                           std::int64_t burn_in = 100) {
  if (burn_in < 1)
    throw std::invalid_argument("sample_stationary_perpetuity: burn_in must be >= 1");
  PerpetuityState state;
  for (std::int64_t i = 0; i < burn_in; ++i) {
    const double v = sample_exp(src, 1.0);
    const double u = src.next_uniform();
    state = perpetuity_step(state, v, u);
  }
  return state.value;
}

}  // namespace poisrec
