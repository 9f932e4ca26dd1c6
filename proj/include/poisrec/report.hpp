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
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "poisrec/random.hpp"
#include "poisrec/stats.hpp"

namespace poisrec {

enum class ReportFormat { csv, json };

/// Declarative experiment description. replicates = 0 and an empty scale
/// list mean "use the suite's defaults"; resolve_config fills them in.
struct ExperimentConfig {
  std::string suite;
  double rate = 1.0;
  std::vector<double> scales;
  std::int64_t replicates = 0;
  std::size_t grid_points = 513;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out_path;
  ReportFormat format = ReportFormat::csv;
};

/// Thrown on unwritable output paths; the CLI maps it to its own exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Per-suite seed domain, so `verify all` does not feed the same draw
// sequences to every suite.
inline std::uint64_t suite_seed(std::uint64_t seed, std::string_view suite) {
  return mix64(seed ^ fnv1a64(suite));
}

// Independent sub-domains within a suite (separate sampler inputs).
inline std::uint64_t section_seed(std::uint64_t suite_seed, std::uint64_t tag) {
  return mix64(suite_seed ^ mix64(tag));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Runs fn(replicate_index) for every index, spread over a worker pool.
/// Workers pull indices from a shared counter and write into caller-owned
/// per-replicate slots, so results do not depend on the worker count.
template <class Fn>
void parallel_replicates(std::int64_t replicates, unsigned workers, Fn&& fn) {
  if (replicates <= 0) return;
  const auto pool_size =
      static_cast<unsigned>(std::min<std::int64_t>(std::max(1u, workers), replicates));
  if (pool_size == 1) {
    for (std::int64_t i = 0; i < replicates; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= replicates) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (unsigned w = 0; w < pool_size; ++w) pool.emplace_back(body);
  for (auto& worker : pool) worker.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

// The provenance block deliberately omits workers and out_path: neither may
// influence report bytes.
inline void write_config_comment(const ExperimentConfig& cfg, std::ostream& os) {
  os << "# suite=" << cfg.suite << '\n';
  os << "# rate=" << format_double(cfg.rate) << '\n';
  os << "# scales=";
  for (std::size_t i = 0; i < cfg.scales.size(); ++i)
    os << (i ? "," : "") << format_double(cfg.scales[i]);
  os << '\n';
  os << "# replicates=" << cfg.replicates << '\n';
  os << "# grid_points=" << cfg.grid_points << '\n';
  os << "# seed=" << cfg.seed << '\n';
}

}  // namespace detail

inline void write_report_csv(const ExperimentConfig& cfg,
                             const std::vector<TestReport>& reports,
                             std::ostream& os) {
  detail::write_config_comment(cfg, os);
  os << "suite,statistic,value,threshold,pass,n_samples,seed\n";
  for (const auto& r : reports) {
    os << r.suite << ',' << r.statistic << ',' << detail::format_double(r.value)
       << ',' << detail::format_double(r.threshold) << ','
       << (r.pass ? "true" : "false") << ',' << r.n_samples << ',' << r.seed
       << '\n';
  }
}

inline void write_report_json(const ExperimentConfig& cfg,
                              const std::vector<TestReport>& reports,
                              std::ostream& os) {
  nlohmann::ordered_json doc;
  doc["config"] = {
      {"suite", cfg.suite},          {"rate", cfg.rate},
      {"scales", cfg.scales},        {"replicates", cfg.replicates},
      {"grid_points", cfg.grid_points}, {"seed", cfg.seed},
  };
  auto& results = doc["results"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    results.push_back({
        {"suite", r.suite},
        {"statistic", r.statistic},
        {"value", r.value},
        {"threshold", r.threshold},
        {"pass", r.pass},
        {"n_samples", r.n_samples},
        {"seed", r.seed},
    });
  }
  os << doc.dump(2) << '\n';
}

inline void write_report(const ExperimentConfig& cfg,
                         const std::vector<TestReport>& reports,
                         std::ostream& os) {
  if (cfg.format == ReportFormat::csv)
    write_report_csv(cfg, reports, os);
  else
    write_report_json(cfg, reports, os);
}

inline bool all_pass(const std::vector<TestReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

}  // namespace poisrec
