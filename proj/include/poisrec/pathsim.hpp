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
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poisrec/random.hpp"

namespace poisrec {

/// One simulated Poisson trajectory. The last interarrival always overshoots
/// the horizon (S_{m-1} <= horizon < S_m), so the lifetime in progress at any
/// query time t <= horizon is fully known. Without the overshoot the
/// time-in-records functional is not computable at the horizon.
struct PoissonPath {
  double rate = 1.0;
  double horizon = 0.0;
  std::vector<double> interarrivals;  // X_1..X_m, X_m ends past the horizon
  std::vector<double> arrivals;       // S_1..S_m, strict prefix sums
};

/// Record structure derived from a path: indicator bits, running record
/// counts, and the times / values / value prefix sums of the records.
struct RecordTrace {
  std::vector<std::uint8_t> indicators;   // I_1..I_m
  std::vector<std::int64_t> counts;       // A_n = I_1 + ... + I_n
  std::vector<std::int64_t> record_times; // L_1..L_K (1-based indices)
  std::vector<double> record_values;      // R_1..R_K
  std::vector<double> record_sums;        // T_j = R_1 + ... + R_j
};

/// Everything observable at a fixed time: the event count N_t, completed
/// record count C_t, cumulative time in records W_t, current age t - S_{N_t},
/// and the running maximum of the completed lifetimes (absent when N_t = 0,
/// so degenerate paths can be filtered rather than mistaken for max 0).
struct Observables {
  std::int64_t count = 0;
  std::int64_t records = 0;
  double time_in_records = 0.0;
  double age = 0.0;
  std::optional<double> current_max;
};

/// Indicator bits: entry n is 1 iff the n-th value strictly exceeds every
/// earlier one. The first entry is always 1.
inline std::vector<std::uint8_t> record_indicators(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("record_indicators: empty input");
  std::vector<std::uint8_t> bits(values.size());
  double running_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::invalid_argument("record_indicators: entries must be positive");
    bits[i] = values[i] > running_max ? 1 : 0;
    if (bits[i]) running_max = values[i];
  }
  return bits;
}

/// Builds a path from given interarrivals, validating the overshoot
/// invariant. Used by tests that script exact lifetimes.
inline PoissonPath make_path(double rate, double horizon,
                             std::vector<double> interarrivals) {
  if (!(rate > 0.0))
    throw std::invalid_argument("make_path: rate must be positive");
  if (!(horizon >= 0.0))
    throw std::invalid_argument("make_path: horizon must be non-negative");
  if (interarrivals.empty())
    throw std::invalid_argument("make_path: need at least the overshoot lifetime");
  std::vector<double> arrivals(interarrivals.size());
  double s = 0.0;
  for (std::size_t i = 0; i < interarrivals.size(); ++i) {
    if (!(interarrivals[i] > 0.0))
      throw std::invalid_argument("make_path: interarrivals must be positive");
    const double next = s + interarrivals[i];
    if (!(next > s))
      throw std::invalid_argument("make_path: arrivals must strictly increase");
    if (i + 1 < interarrivals.size() && next > horizon)
      throw std::invalid_argument("make_path: only the last arrival may pass the horizon");
    s = next;
    arrivals[i] = s;
  }
  if (!(s > horizon))
    throw std::invalid_argument("make_path: last arrival must pass the horizon");
  return PoissonPath{rate, horizon, std::move(interarrivals), std::move(arrivals)};
}

/// Draws i.i.d. Exp(rate) interarrivals until the first arrival beyond the
/// horizon, which is retained.
inline PoissonPath simulate_path(uniform_source auto& src, double rate,
                                 double horizon) {
  if (!(rate > 0.0))
    throw std::invalid_argument("simulate_path: rate must be positive");
  if (!(horizon >= 0.0))
    throw std::invalid_argument("simulate_path: horizon must be non-negative");
  PoissonPath path;
  path.rate = rate;
  path.horizon = horizon;
  double s = 0.0;
  do {
    const double x = sample_exp(src, rate);
    s += x;
    path.interarrivals.push_back(x);
    path.arrivals.push_back(s);
  } while (s <= horizon);
  return path;
}

inline RecordTrace build_trace(const PoissonPath& path) {
  const auto& x = path.interarrivals;
  RecordTrace trace;
  trace.indicators.resize(x.size());
  trace.counts.resize(x.size());
  double running_max = -std::numeric_limits<double>::infinity();
  double record_sum = 0.0;
  std::int64_t records = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > running_max) {
      running_max = x[i];
      record_sum += x[i];
      ++records;
      trace.indicators[i] = 1;
      trace.record_times.push_back(static_cast<std::int64_t>(i) + 1);
      trace.record_values.push_back(x[i]);
      trace.record_sums.push_back(record_sum);
    } else {
      trace.indicators[i] = 0;
    }
    trace.counts[i] = records;
  }
  return trace;
}

namespace detail {

inline void check_query_time(const PoissonPath& path, double t) {
  if (!(t >= 0.0) || t > path.horizon)
    throw std::out_of_range("query time outside [0, horizon]");
}

// N_t = #{n : S_n <= t} (arrival epochs count as already arrived).
inline std::int64_t count_at(const PoissonPath& path, double t) {
  const auto it =
      std::upper_bound(path.arrivals.begin(), path.arrivals.end(), t);
  return static_cast<std::int64_t>(it - path.arrivals.begin());
}

struct CoreObservables {
  std::int64_t count;
  std::int64_t records;
  double time_in_records;
};

// N_t, A_{N_t} and the closed-form W_t, without the O(N_t) max scan.
// The grid evaluators in the scaling module call this per grid point.
inline CoreObservables core_at(const PoissonPath& path, const RecordTrace& trace,
                               double t) {
  const std::int64_t n = count_at(path, t);
  const std::int64_t a_n = n > 0 ? trace.counts[n - 1] : 0;
  const double sum_a = a_n > 0 ? trace.record_sums[a_n - 1] : 0.0;
  const double s_n = n > 0 ? path.arrivals[n - 1] : 0.0;
  const double w =
      sum_a + (trace.indicators[static_cast<std::size_t>(n)] ? t - s_n : 0.0);
  return CoreObservables{n, a_n, w};
}

}  // namespace detail

/// Observables at time t via the closed form
/// W_t = T_{A_{N_t}} + (t - S_{N_t}) I_{N_t+1}, with the conventions
/// S_0 = 0, A_0 = 0, T_0 = 0 (so W_t = t before the first arrival).
inline Observables observables_at(const PoissonPath& path,
                                  const RecordTrace& trace, double t) {
  detail::check_query_time(path, t);
  const auto core = detail::core_at(path, trace, t);
  Observables obs;
  obs.count = core.count;
  obs.records = core.records;
  obs.age = core.count > 0 ? t - path.arrivals[core.count - 1] : t;
  obs.time_in_records = core.time_in_records;
  if (core.count > 0) {
    obs.current_max = *std::max_element(
        path.interarrivals.begin(), path.interarrivals.begin() + core.count);
  }
  return obs;
}

/// Independent evaluation of W_t: piecewise integration of the record
/// indicator step function over [0, t]. Cross-checks the closed form above.
inline double integrate_time_in_records(const PoissonPath& path,
                                        const RecordTrace& trace, double t) {
  detail::check_query_time(path, t);
  double total = 0.0;
  double piece_start = 0.0;
  for (std::size_t i = 0; i < path.arrivals.size() && piece_start < t; ++i) {
    const double piece_end = std::min(path.arrivals[i], t);
    if (trace.indicators[i] && piece_end > piece_start)
      total += piece_end - piece_start;
    piece_start = path.arrivals[i];
  }
  return total;
}

}  // namespace poisrec
