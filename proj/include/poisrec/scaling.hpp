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
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "poisrec/pathsim.hpp"

namespace poisrec {

/// A cadlag function on [0, 1] sampled on a finite grid, interpreted as a
/// right-continuous step interpolation between grid points.
struct SampledPath {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Equally spaced grid 0 = t_0 < ... < t_{points-1} = 1.
inline std::vector<double> unit_grid(std::size_t points = 513) {
  if (points < 2)
    throw std::invalid_argument("unit_grid: need at least two points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

namespace detail {

inline void check_unit_grid(std::span<const double> grid) {
  if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0)
    throw std::invalid_argument("grid must run from 0 to 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("grid must be strictly increasing");
}

// The exponential clock e^{nt} - 1 needs the whole path up to e^n - 1.
inline void check_exp_horizon(const PoissonPath& path, double n,
                              std::span<const double> grid) {
  check_unit_grid(grid);
  if (!(n >= 1.0))
    throw std::invalid_argument("scale parameter must be >= 1");
  if (path.horizon < std::expm1(n * grid.back()))
    throw std::out_of_range("path horizon shorter than the rescaling clock");
}

}  // namespace detail

/// Stochastic clock  Phi_n(t) = A_{N(e^{nt}-1)} / n.
inline SampledPath stochastic_clock(const PoissonPath& path,
                                    const RecordTrace& trace, double n,
                                    std::span<const double> grid) {
  detail::check_exp_horizon(path, n, grid);
  SampledPath out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double clock_time = std::expm1(n * grid[g]);
    const auto core = detail::core_at(path, trace, clock_time);
    out.values[g] = static_cast<double>(core.records) / n;
  }
  return out;
}

/// Rescaled record count  n^{-1/2} (C(e^{nt} - 1) - nt), evaluated as
/// sqrt(n) (Phi_n(t) - t) so the identity with the stochastic clock holds
/// bit for bit on every grid point.
inline SampledPath rescaled_count(const PoissonPath& path,
                                  const RecordTrace& trace, double n,
                                  std::span<const double> grid) {
  SampledPath out = stochastic_clock(path, trace, n, grid);
  const double root_n = std::sqrt(n);
  for (std::size_t g = 0; g < grid.size(); ++g)
    out.values[g] = root_n * (out.values[g] - grid[g]);
  return out;
}

/// Rescaled time in records  (rate / n^{3/2}) (W(e^{nt} - 1) - (nt)^2 / (2 rate)).
/// W is read from the closed form; the piecewise integral evaluator serves
/// as the cross-check oracle elsewhere.
inline SampledPath rescaled_time_in_records(const PoissonPath& path,
                                            const RecordTrace& trace, double n,
                                            std::span<const double> grid) {
  detail::check_exp_horizon(path, n, grid);
  const double rate = path.rate;
  const double scale = rate / std::pow(n, 1.5);
  SampledPath out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double nt = n * grid[g];
    const double clock_time = std::expm1(nt);
    const auto core = detail::core_at(path, trace, clock_time);
    out.values[g] = scale * (core.time_in_records - nt * nt / (2.0 * rate));
  }
  return out;
}

/// Cube-root clock version: the grid value at t is
///   (rate sqrt(3) / (log n)^{3/2}) (W((n+1)^{t^{1/3}} - 1) - t^{2/3} (log n)^2 / (2 rate)),
/// which has Brownian motion itself as its large-n limit.
inline SampledPath cuberoot_rescaled_time_in_records(
    const PoissonPath& path, const RecordTrace& trace, std::int64_t n,
    std::span<const double> grid) {
  detail::check_unit_grid(grid);
  if (n < 2)
    throw std::invalid_argument("cuberoot_rescaled_time_in_records: n must be >= 2");
  if (path.horizon < static_cast<double>(n))
    throw std::out_of_range("path horizon shorter than the rescaling clock");
  const double rate = path.rate;
  const double log_n = std::log(static_cast<double>(n));
  const double scale = rate * std::numbers::sqrt3 / std::pow(log_n, 1.5);
  SampledPath out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double cbrt_t = std::cbrt(grid[g]);
    const double clock_time = std::pow(static_cast<double>(n) + 1.0, cbrt_t) - 1.0;
    const auto core = detail::core_at(path, trace, clock_time);
    const double centering = cbrt_t * cbrt_t * log_n * log_n / (2.0 * rate);
    out.values[g] = scale * (core.time_in_records - centering);
  }
  return out;
}

namespace detail {

// Times s > 0 where the reference curve (log(1+s))^2 / (2 rate) has unit
// slope, i.e. solutions u > 1 of log u = rate u with u = 1 + s. There are
// none for rate > 1/e and at most two otherwise.
inline std::vector<double> unit_slope_times(double rate) {
  std::vector<double> times;
  const double u_star = 1.0 / rate;  // maximizer of log(u) - rate u
  if (-std::log(rate) - 1.0 < 0.0) return times;
  const auto f = [rate](double u) { return std::log(u) - rate * u; };
  const auto bisect = [&f](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (f(lo) * f(mid) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  times.push_back(bisect(1.0, u_star) - 1.0);
  double upper = u_star;
  while (f(upper) >= 0.0) upper *= 2.0;
  times.push_back(bisect(u_star, upper) - 1.0);
  return times;
}

}  // namespace detail

/// Exact supremum over [0, t] of |W_s - (log(1+s))^2 / (2 rate)|.
/// On each interval between arrivals W is affine with slope 0 or 1 and the
/// reference curve is smooth, so the supremum is attained at an interval
/// endpoint or at an interior point where the difference has zero slope;
/// the latter can only happen on record segments, at the precomputed
/// unit-slope times of the reference curve. No grid, hence no grid bias.
inline double sup_deviation(const PoissonPath& path, const RecordTrace& trace,
                            double t) {
  detail::check_query_time(path, t);
  const double rate = path.rate;
  const auto reference = [rate](double s) {
    const double l = std::log1p(s);
    return l * l / (2.0 * rate);
  };
  const std::vector<double> critical = detail::unit_slope_times(rate);

  double sup = 0.0;
  double w_start = 0.0;
  double seg_start = 0.0;
  for (std::size_t k = 0;; ++k) {
    const bool record = trace.indicators[k] != 0;
    const double seg_end = std::min(path.arrivals[k], t);
    const double w_end = w_start + (record ? seg_end - seg_start : 0.0);
    sup = std::max(sup, std::abs(w_end - reference(seg_end)));
    if (record) {
      for (const double s : critical)
        if (s > seg_start && s < seg_end)
          sup = std::max(sup, std::abs(w_start + (s - seg_start) - reference(s)));
    }
    if (seg_end >= t) break;
    w_start = w_end;
    seg_start = seg_end;
  }
  return sup;
}

/// Strong-law diagnostics, both normalized to converge to 1:
/// (C_t / log t, 2 rate W_t / (log t)^2).
struct SllnRatios {
  double count_ratio;
  double time_ratio;
};

inline SllnRatios slln_ratios(const PoissonPath& path, const RecordTrace& trace,
                              double t) {
  if (!(t > 1.0))
    throw std::invalid_argument("slln_ratios: t must exceed 1");
  detail::check_query_time(path, t);
  const auto core = detail::core_at(path, trace, t);
  const double log_t = std::log(t);
  return SllnRatios{
      static_cast<double>(core.records) / log_t,
      2.0 * path.rate * core.time_in_records / (log_t * log_t),
  };
}

}  // namespace poisrec
