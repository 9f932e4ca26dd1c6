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
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "poisrec/random.hpp"
#include "poisrec/scaling.hpp"

namespace poisrec {

enum class BmScheme {
  exact_joint,  // (B, int B) stepped jointly from the exact bivariate law
  trapezoid,    // int B approximated by the trapezoid rule on the B grid
};

/// A Brownian path B and its running integral Y on a common grid,
/// simulated jointly. B_0 = Y_0 = 0.
struct GaussianPairPath {
  std::vector<double> grid;
  std::vector<double> bm;        // B
  std::vector<double> integral;  // Y = int_0^t B_s ds
  BmScheme scheme = BmScheme::exact_joint;
};

/// Joint simulation of (B, Y). Under exact_joint each step of length h draws
/// the increment pair from the bivariate Gaussian with covariance
///   [[h, h^2/2], [h^2/2, h^3/3]],
/// realized as dB = sqrt(h) z1, dI = h^{3/2} (z1/2 + z2/(2 sqrt 3)), so grid
/// values of Y carry no discretization bias. Under trapezoid, Y is exactly
/// the trapezoid integral of the sampled B values.
inline GaussianPairPath simulate_bm_pair(uniform_source auto& src,
                                         std::span<const double> grid,
                                         BmScheme scheme = BmScheme::exact_joint) {
  detail::check_unit_grid(grid);
  GaussianPairPath path;
  path.scheme = scheme;
  path.grid.assign(grid.begin(), grid.end());
  path.bm.resize(grid.size());
  path.integral.resize(grid.size());
  path.bm[0] = 0.0;
  path.integral[0] = 0.0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double h = grid[g] - grid[g - 1];
    const double root_h = std::sqrt(h);
    if (scheme == BmScheme::exact_joint) {
      const double z1 = sample_normal(src);
      const double z2 = sample_normal(src);
      const double db = root_h * z1;
      const double di =
          h * root_h * (0.5 * z1 + z2 / (2.0 * std::numbers::sqrt3));
      path.integral[g] = path.integral[g - 1] + path.bm[g - 1] * h + di;
      path.bm[g] = path.bm[g - 1] + db;
    } else {
      path.bm[g] = path.bm[g - 1] + root_h * sample_normal(src);
      path.integral[g] =
          path.integral[g - 1] + 0.5 * h * (path.bm[g - 1] + path.bm[g]);
    }
  }
  return path;
}

/// The limit pair of the rescaled record processes:
///   Z^C = -B   and   Z^W_t = Y_t - t B_t,
/// both exact grid identities of the input pair.
struct LimitPair {
  SampledPath count_limit;  // Z^C
  SampledPath time_limit;   // Z^W
};

inline LimitPair limit_pair(const GaussianPairPath& pair) {
  LimitPair out;
  out.count_limit.grid = pair.grid;
  out.time_limit.grid = pair.grid;
  out.count_limit.values.resize(pair.grid.size());
  out.time_limit.values.resize(pair.grid.size());
  for (std::size_t g = 0; g < pair.grid.size(); ++g) {
    out.count_limit.values[g] = -pair.bm[g];
    out.time_limit.values[g] = pair.integral[g] - pair.grid[g] * pair.bm[g];
  }
  return out;
}

/// Covariance of the time-limit process: cov(Z^W_s, Z^W_t) = min(s,t)^3 / 3.
inline double limit_cov(double s, double t) {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("limit_cov: arguments must lie in [0, 1]");
  const double m = std::min(s, t);
  return m * m * m / 3.0;
}

/// The clocked-Brownian representation of the same limit: samples of
/// B~(t^3) / sqrt(3) on the grid, stepped with independent Gaussian
/// increments over the transformed clock u = t^3.
inline SampledPath clocked_bm(uniform_source auto& src,
                              std::span<const double> grid) {
  detail::check_unit_grid(grid);
  SampledPath out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  out.values[0] = 0.0;
  double u_prev = 0.0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double u = grid[g] * grid[g] * grid[g];
    out.values[g] =
        out.values[g - 1] + std::sqrt((u - u_prev) / 3.0) * sample_normal(src);
    u_prev = u;
  }
  return out;
}

/// Trapezoid integral of grid samples; exposed because the trapezoid scheme
/// is defined as exactly this functional of the B values.
inline double trapezoid_integral(std::span<const double> grid,
                                 std::span<const double> values) {
  if (grid.size() != values.size() || grid.size() < 2)
    throw std::invalid_argument("trapezoid_integral: mismatched or short input");
  double acc = 0.0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    acc += 0.5 * (grid[g] - grid[g - 1]) * (values[g - 1] + values[g]);
  return acc;
}

}  // namespace poisrec
