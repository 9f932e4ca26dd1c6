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

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "poisrec/report.hpp"
#include "poisrec/suites.hpp"

namespace {

// Exit codes: 0 all pass, 1 test failure, 2 usage/config error, 3 I/O error.
constexpr int kExitPass = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Optional JSON config file for verify; values act as defaults and any flag
// given on the command line wins.
poisrec::ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad config file " + path + ": " + e.what());
  }
  poisrec::ExperimentConfig cfg;
  cfg.rate = doc.value("rate", cfg.rate);
  cfg.scales = doc.value("scales", cfg.scales);
  cfg.replicates = doc.value("replicates", cfg.replicates);
  cfg.grid_points = doc.value("grid_points", cfg.grid_points);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.workers = doc.value("workers", cfg.workers);
  cfg.out_path = doc.value("out", cfg.out_path);
  const std::string format = doc.value("format", std::string("csv"));
  if (format != "csv" && format != "json")
    throw std::invalid_argument("bad config file " + path +
                                ": format must be csv or json");
  cfg.format = format == "json" ? poisrec::ReportFormat::json
                                : poisrec::ReportFormat::csv;
  return cfg;
}

int run_verify(poisrec::ExperimentConfig cfg) {
  const auto resolved = poisrec::resolve_config(cfg);
  const auto reports = poisrec::run_experiment(resolved);

  if (resolved.out_path.empty()) {
    poisrec::write_report(resolved, reports, std::cout);
  } else {
    std::size_t passed = 0;
    for (const auto& r : reports) {
      std::printf("%-12s %-34s value=%-13.6g threshold=%-13.6g %s\n",
                  r.suite.c_str(), r.statistic.c_str(), r.value, r.threshold,
                  r.pass ? "pass" : "FAIL");
      if (r.pass) ++passed;
    }
    std::printf("%zu/%zu checks passed\n", passed, reports.size());
    std::ofstream out(resolved.out_path, std::ios::binary);
    if (!out) throw poisrec::IoError("cannot open output file: " + resolved.out_path);
    poisrec::write_report(resolved, reports, out);
    out.flush();
    if (!out) throw poisrec::IoError("failed writing output file: " + resolved.out_path);
  }
  return poisrec::all_pass(reports) ? kExitPass : kExitTestFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "poisrec: simulation and statistical verification of the record "
      "structure of a Poisson process"};
  app.require_subcommand(1);

  poisrec::TraceConfig trace_cfg;
  auto* trace = app.add_subcommand(
      "trace", "Export one simulated path as CSV rows (s, N, I_next, C, W)");
  trace->add_option("--lambda", trace_cfg.rate, "event rate")
      ->check(CLI::PositiveNumber);
  trace->add_option("--horizon", trace_cfg.horizon, "time horizon")
      ->check(CLI::NonNegativeNumber);
  trace->add_option("--seed", trace_cfg.seed, "stream seed");
  trace->add_option("--grid", trace_cfg.grid_points, "grid rows across the horizon");
  trace->add_option("--out", trace_cfg.out_path, "output CSV path")->required();

  poisrec::ExperimentConfig verify_cfg;
  std::string suite;
  std::string format = "csv";
  std::string config_path;
  auto* verify = app.add_subcommand(
      "verify", "Run a verification suite and write a machine-readable report");
  verify->add_option("suite", suite, "suite name, or 'all'")->required();
  verify->add_option("--config", config_path,
                     "JSON config file; command-line flags take precedence");
  verify->add_option("--lambda", verify_cfg.rate, "event rate")
      ->check(CLI::PositiveNumber);
  verify->add_option("--reps", verify_cfg.replicates,
                     "replicate count (0 = suite default)");
  verify->add_option("--scales", verify_cfg.scales,
                     "suite-specific scale list, comma separated")
      ->delimiter(',');
  verify->add_option("--grid", verify_cfg.grid_points, "grid points on [0,1]");
  verify->add_option("--seed", verify_cfg.seed, "experiment seed");
  verify->add_option("--workers", verify_cfg.workers, "worker threads");
  verify->add_option("--out", verify_cfg.out_path,
                     "report path (omit to print the report to stdout)");
  verify->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  poisrec::RescaledConfig rescaled_cfg;
  auto* rescaled = app.add_subcommand(
      "rescaled",
      "Emit per-replicate grid values of the rescaled count and "
      "time-in-records processes as CSV");
  rescaled->add_option("--lambda", rescaled_cfg.rate, "event rate")
      ->check(CLI::PositiveNumber);
  rescaled->add_option("--scale", rescaled_cfg.scale,
                       "clock scale n (horizon is e^n - 1)")
      ->check(CLI::Range(1.0, 40.0));  // e^40 lifetimes is already absurd
  rescaled->add_option("--reps", rescaled_cfg.replicates, "replicate count")
      ->check(CLI::PositiveNumber);
  rescaled->add_option("--grid", rescaled_cfg.grid_points, "grid points on [0,1]");
  rescaled->add_option("--seed", rescaled_cfg.seed, "stream seed");
  rescaled->add_option("--workers", rescaled_cfg.workers, "worker threads");
  rescaled->add_option("--out", rescaled_cfg.out_path, "output CSV path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (trace->parsed()) {
      poisrec::export_trace(trace_cfg);
      return kExitPass;
    }
    if (rescaled->parsed()) {
      poisrec::export_rescaled(rescaled_cfg);
      return kExitPass;
    }
    if (!config_path.empty()) {
      poisrec::ExperimentConfig base = load_config_file(config_path);
      if (verify->count("--lambda")) base.rate = verify_cfg.rate;
      if (verify->count("--reps")) base.replicates = verify_cfg.replicates;
      if (verify->count("--scales")) base.scales = verify_cfg.scales;
      if (verify->count("--grid")) base.grid_points = verify_cfg.grid_points;
      if (verify->count("--seed")) base.seed = verify_cfg.seed;
      if (verify->count("--workers")) base.workers = verify_cfg.workers;
      if (verify->count("--out")) base.out_path = verify_cfg.out_path;
      if (verify->count("--format"))
        base.format = format == "json" ? poisrec::ReportFormat::json
                                       : poisrec::ReportFormat::csv;
      verify_cfg = base;
    } else {
      verify_cfg.format = format == "json" ? poisrec::ReportFormat::json
                                           : poisrec::ReportFormat::csv;
    }
    verify_cfg.suite = suite;
    return run_verify(verify_cfg);
  } catch (const poisrec::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTestFailure;
  }
}
