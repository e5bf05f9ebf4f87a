#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abrsim/config.hpp"
#include "abrsim/simulation.hpp"

namespace abrsim {

enum class Divergence { kConvergent, kDivergent, kUnknown };
std::string_view to_string(Divergence d);

struct RunMetrics {
  std::string scenario_id;
  std::uint32_t n_sources = 0;
  std::optional<std::uint64_t> source_buffer_cells;
  double vbr_d = 0.0;     // 0 when VBR is off
  double vbr_p_ms = 0.0;  // 0 when VBR is off
  double feedback_delay_ms = 0.0;
  EricaScheme scheme = EricaScheme::kEricaPlus;

  std::vector<std::uint64_t> max_source_queue;  // per VC
  std::uint64_t max_source_queue_all = 0;
  std::uint64_t max_switch_queue = 0;
  double rtt_cells = 0.0;
  double max_switch_queue_rtt_frac = 0.0;
  double steady_state_switch_queue = 0.0;  // mean over the final third of the run
  double goodput_mbps = 0.0;
  std::uint64_t drops_source = 0;
  std::uint64_t drops_switch = 0;
  Divergence divergence = Divergence::kUnknown;
  bool conservation_ok = true;
  std::vector<std::string> conservation_violations;
};

struct RunOutput {
  RunMetrics metrics;
  SimulationResult result;
};

/// Classifies a switch-queue trace. The trace is split into buckets of
/// `bucket` length (the VBR period, or a twentieth of the run without VBR).
/// DIVERGENT iff the least-squares trend of the bucket maxima over the second
/// half rises by more than rtt_cells across that half and the last bucket
/// maximum exceeds 3 * rtt_cells. Fewer than 20 complete buckets gives UNKNOWN.
Divergence detect_divergence(std::span<const TraceRecord> trace, double rtt_cells, SimTime bucket);

/// Bucket length used to classify a run of this configuration.
SimTime divergence_bucket(const ScenarioConfig& config);

RunMetrics compute_metrics(const SimulationResult& result);
RunOutput run_scenario(const ScenarioConfig& config);

extern const char* const kMetricsCsvHeader;
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const RunMetrics& m);
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace, std::uint32_t n_vcs,
                     bool per_vc);

/// Writes to `path`; throws std::runtime_error naming the path on I/O failure.
void emit_metrics_csv(const std::string& path, std::span<const RunMetrics> rows);
void emit_trace_csv(const std::string& path, const SimulationResult& result);

}  // namespace abrsim
