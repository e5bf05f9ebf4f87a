#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "abrsim/config.hpp"
#include "abrsim/harness.hpp"
#include "abrsim/tables.hpp"

namespace {

constexpr const char* kVersion = "abrsim 1.0.0";

enum Exit { kOk = 0, kFailed = 1, kBadConfig = 2 };

int run_command(const std::string& config_path, double duration_s, const std::string& trace_path,
                const std::string& metrics_path) {
  abrsim::ScenarioConfig config;
  try {
    config = abrsim::load_scenario(config_path);
    if (duration_s > 0) config.duration = abrsim::from_seconds(duration_s);
    abrsim::validate(config);
  } catch (const abrsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  }

  const abrsim::RunOutput out = abrsim::run_scenario(config);
  const abrsim::RunMetrics& m = out.metrics;
  if (!trace_path.empty()) abrsim::emit_trace_csv(trace_path, out.result);
  if (!metrics_path.empty()) {
    abrsim::emit_metrics_csv(metrics_path, std::span<const abrsim::RunMetrics>(&m, 1));
  } else {
    abrsim::write_metrics_header(std::cout);
    abrsim::write_metrics_row(std::cout, m);
  }

  int rc = kOk;
  if (!m.conservation_ok) {
    for (const std::string& v : m.conservation_violations) std::cerr << "conservation: " << v << "\n";
    rc = kFailed;
  }
  if (m.divergence == abrsim::Divergence::kUnknown) {
    std::cerr << "divergence UNKNOWN: trace shorter than 20 classification buckets\n";
    rc = kFailed;
  }
  return rc;
}

int table_command(int table_id, const std::string& out_dir, unsigned jobs) {
  std::vector<abrsim::SimulationResult> results;
  const abrsim::TableReport report = abrsim::reproduce_table(table_id, jobs, &results);
  abrsim::write_table_report(std::cout, report);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    abrsim::emit_metrics_csv((dir / "metrics.csv").string(), report.metrics);
    for (std::size_t i = 0; i < results.size(); ++i) {
      abrsim::emit_trace_csv((dir / (report.rows[i].label + "_trace.csv")).string(), results[i]);
    }
    std::ofstream txt(dir / "report.txt");
    abrsim::write_table_report(txt, report);
    if (!txt) throw std::runtime_error("write to '" + (dir / "report.txt").string() + "' failed");
  }
  return report.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-level ABR/ERICA network simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, trace_path, metrics_path;
  double duration_s = 0.0;
  CLI::App* run = app.add_subcommand("run", "Simulate one scenario file");
  run->add_option("--config", config_path, "Scenario file (key = value)")->required();
  run->add_option("--duration-s", duration_s, "Override the simulated duration")
      ->check(CLI::PositiveNumber);
  run->add_option("--trace", trace_path, "Write the time-series trace CSV here");
  run->add_option("--metrics", metrics_path, "Write the metrics CSV here (default: stdout)");

  int table_id = 0;
  std::string out_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* table = app.add_subcommand("table", "Reproduce one of the published tables");
  table->add_option("id", table_id, "Table number")->required()->check(CLI::Range(1, 4));
  table->add_option("--out", out_dir, "Directory for metrics.csv, report.txt and traces");
  table->add_option("--jobs", jobs, "Rows simulated in parallel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadConfig;
  }

  try {
    if (*run) return run_command(config_path, duration_s, trace_path, metrics_path);
    return table_command(table_id, out_dir, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
