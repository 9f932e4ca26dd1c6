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
#include <concepts>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace poisrec {

/// Generator version tag. Archived experiment outputs depend on the exact
/// stream algorithm and uniform mapping, so bump this if either changes.
inline constexpr const char* kGeneratorVersion = "philox4x32-10/v1";

namespace detail {

// One round of the Philox 4x32 mixing function (Salmon et al., SC 2011).
inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) noexcept {
  constexpr std::uint32_t kMulA = 0xD2511F53u;
  constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  const std::uint64_t a = static_cast<std::uint64_t>(kMulA) * c[0];
  const std::uint64_t b = static_cast<std::uint64_t>(kMulB) * c[2];
  const std::uint32_t r0 = static_cast<std::uint32_t>(b >> 32) ^ c[1] ^ k[0];
  const std::uint32_t r1 = static_cast<std::uint32_t>(b);
  const std::uint32_t r2 = static_cast<std::uint32_t>(a >> 32) ^ c[3] ^ k[1];
  const std::uint32_t r3 = static_cast<std::uint32_t>(a);
  c[0] = r0;
  c[1] = r1;
  c[2] = r2;
  c[3] = r3;
}

// Philox4x32-10 block function. The 128-bit counter is split into the
// 64-bit draw index and the 64-bit stream id, so streams with distinct
// ids occupy disjoint counter blocks and cannot overlap under any seed.
inline void philox_block(std::uint64_t draw_index, std::uint64_t stream_id,
                         std::uint64_t key, std::uint32_t out[4]) noexcept {
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  std::uint32_t c[4] = {
      static_cast<std::uint32_t>(draw_index),
      static_cast<std::uint32_t>(draw_index >> 32),
      static_cast<std::uint32_t>(stream_id),
      static_cast<std::uint32_t>(stream_id >> 32),
  };
  std::uint32_t k[2] = {
      static_cast<std::uint32_t>(key),
      static_cast<std::uint32_t>(key >> 32),
  };
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k[0] += kWeylA;
      k[1] += kWeylB;
    }
    philox_round(c, k);
  }
  out[0] = c[0];
  out[1] = c[1];
  out[2] = c[2];
  out[3] = c[3];
}

// SplitMix64 finalizer, used to derive auxiliary seeds.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream. Draw i of stream (seed, stream_id) is the
/// Philox4x32-10 block with counter (i, stream_id) and key seed; the low
/// two output words form the 64-bit sample. A stream is a plain value:
/// copying it replays the sequence from the copied position.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t position = 0;

  /// Next uniform draw, strictly inside (0, 1). Uses the top 53 bits of
  /// the sample, mapped as (bits + 0.5) * 2^-53 so 0 and 1 are excluded.
  double next_uniform() noexcept {
    std::uint32_t out[4];
    detail::philox_block(position++, stream_id, seed, out);
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
};

inline RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomStream{seed, stream_id, 0};
}

/// Anything that yields uniforms on (0, 1). Samplers are written against
/// this concept so tests can substitute a scripted list of uniforms.
template <class S>
concept uniform_source = requires(S s) {
  { s.next_uniform() } -> std::convertible_to<double>;
};

/// Fixed list of uniforms for deterministic tests. Throws when exhausted.
struct ScriptedUniforms {
  std::vector<double> values;
  std::size_t position = 0;

  double next_uniform() {
    if (position >= values.size())
      throw std::out_of_range("ScriptedUniforms: script exhausted");
    return values[position++];
  }
};

inline double sample_uniform(uniform_source auto& src) {
  return src.next_uniform();
}

/// Exponential variate with the given rate, via the inverse CDF -log(u)/rate.
/// The closed form keeps scripted-uniform tests exact.
inline double sample_exp(uniform_source auto& src, double rate) {
  if (!(rate > 0.0))
    throw std::invalid_argument("sample_exp: rate must be positive");
  return -std::log(src.next_uniform()) / rate;
}

/// Standard normal quantile. Acklam's rational approximation refined by one
/// Halley step against the erfc-based CDF; accurate to full double precision
/// for p in (0, 1). This is the fixed uniform-to-Gaussian transform used by
/// every Gaussian sampler in the project.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");

  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement: e = Phi(x) - p, u = e / phi(x). Skipped in the far
  // tails where 1/phi(x) overflows; there the rational approximation alone
  // is accurate to ~1e-9 relative, which the far tail cannot distinguish.
  if (0.5 * x * x < 700.0) {
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::numbers::sqrt2 * std::sqrt(std::numbers::pi) *
                     std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

inline double sample_normal(uniform_source auto& src) {
  return normal_quantile(src.next_uniform());
}

}  // namespace poisrec
