#include "abrsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace abrsim {

std::string_view to_string(Divergence d) {
  switch (d) {
    case Divergence::kConvergent:
      return "CONVERGENT";
    case Divergence::kDivergent:
      return "DIVERGENT";
    case Divergence::kUnknown:
      break;
  }
  return "UNKNOWN";
}

SimTime divergence_bucket(const ScenarioConfig& config) {
  if (config.vbr.enabled) return config.vbr.period;
  return std::max<SimTime>(1, config.duration / 20);
}

Divergence detect_divergence(std::span<const TraceRecord> trace, double rtt_cells, SimTime bucket) {
  if (trace.empty() || bucket == 0) return Divergence::kUnknown;
  // Each record covers the window that ends at its timestamp.
  const SimTime spacing = trace.size() > 1 ? trace[1].t - trace[0].t : trace[0].t;
  const SimTime covered = trace.back().t;
  const std::size_t n_buckets = covered / bucket;
  if (n_buckets < 20) return Divergence::kUnknown;

  std::vector<double> maxima(n_buckets, 0.0);
  for (const TraceRecord& r : trace) {
    const SimTime window_start = r.t >= spacing ? r.t - spacing : 0;
    const std::size_t k = window_start / bucket;
    if (k >= n_buckets) continue;
    maxima[k] = std::max(maxima[k], static_cast<double>(r.switch_queue_max));
  }

  const std::size_t first = n_buckets / 2;
  const double n = static_cast<double>(n_buckets - first);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < n_buckets; ++k) {
    const double x = static_cast<double>(k - first);
    sx += x;
    sy += maxima[k];
    sxx += x * x;
    sxy += x * maxima[k];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom > 0 ? (n * sxy - sx * sy) / denom : 0.0;
  // The fitted trend has to climb by more than one RTT worth of cells across
  // the second half; a per-bucket threshold would scale with the VBR period.
  const bool growing = slope * n > rtt_cells;
  const bool large = maxima.back() > 3.0 * rtt_cells;
  return growing && large ? Divergence::kDivergent : Divergence::kConvergent;
}

RunMetrics compute_metrics(const SimulationResult& r) {
  const ScenarioConfig& c = r.config;
  RunMetrics m;
  m.scenario_id = c.scenario_id;
  m.n_sources = c.n_sources;
  m.source_buffer_cells = c.abr.source_buffer_cells;
  if (c.vbr.enabled) {
    m.vbr_d = c.vbr.duty_cycle;
    m.vbr_p_ms = to_millis(c.vbr.period);
  }
  m.feedback_delay_ms = to_millis(r.delays.feedback_delay);
  m.scheme = c.erica.scheme;

  for (const VcSummary& v : r.vcs) {
    m.max_source_queue.push_back(v.max_source_queue);
    m.max_source_queue_all = std::max(m.max_source_queue_all, v.max_source_queue);
    m.drops_source += v.source_drops;
  }
  m.max_switch_queue = r.max_switch_queue;
  m.drops_switch = r.switch_drops;
  m.rtt_cells = r.delays.rtt_cells;
  m.max_switch_queue_rtt_frac = static_cast<double>(m.max_switch_queue) / m.rtt_cells;
  m.goodput_mbps =
      static_cast<double>(r.total_delivered_bytes()) * 8.0 / to_seconds(c.duration) / 1e6;

  const SimTime tail_start = c.duration - c.duration / 3;
  double sum = 0.0;
  std::size_t count = 0;
  for (const TraceRecord& t : r.trace) {
    if (t.t <= tail_start) continue;
    sum += static_cast<double>(t.switch_queue);
    ++count;
  }
  m.steady_state_switch_queue = count > 0 ? sum / static_cast<double>(count) : 0.0;
  m.divergence = detect_divergence(r.trace, m.rtt_cells, divergence_bucket(c));
  m.conservation_ok = r.conservation.ok;
  m.conservation_violations = r.conservation.violations;
  return m;
}

RunOutput run_scenario(const ScenarioConfig& config) {
  RunOutput out;
  out.result = simulate(config);
  out.metrics = compute_metrics(out.result);
  return out;
}

const char* const kMetricsCsvHeader =
    "scenario_id,n_sources,source_buffer_cells,vbr_d,vbr_p_ms,feedback_delay_ms,scheme,"
    "max_source_queue_cells,max_switch_queue_cells,max_switch_queue_rtt_frac,goodput_mbps,"
    "drops_source,drops_switch,divergence";

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_metrics_header(std::ostream& out) { out << kMetricsCsvHeader << '\n'; }

void write_metrics_row(std::ostream& out, const RunMetrics& m) {
  out << m.scenario_id << ',' << m.n_sources << ','
      << (m.source_buffer_cells ? std::to_string(*m.source_buffer_cells) : std::string("inf"))
      << ',' << fixed(m.vbr_d, 3) << ',' << fixed(m.vbr_p_ms, 3) << ','
      << fixed(m.feedback_delay_ms, 3) << ',' << to_string(m.scheme) << ','
      << m.max_source_queue_all << ',' << m.max_switch_queue << ','
      << fixed(m.max_switch_queue_rtt_frac, 4) << ',' << fixed(m.goodput_mbps, 4) << ','
      << m.drops_source << ',' << m.drops_switch << ',' << to_string(m.divergence) << '\n';
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace, std::uint32_t n_vcs,
                     bool per_vc) {
  out << "t_us,switch_queue_cells,vbr_on";
  if (per_vc) {
    for (std::uint32_t i = 0; i < n_vcs; ++i) out << ",vc" << i << "_acr_cps,vc" << i << "_srcq_cells";
  }
  out << '\n';
  for (const TraceRecord& r : trace) {
    out << r.t / kNanosPerMicro << ',' << r.switch_queue_max << ',' << (r.vbr_on ? 1 : 0);
    if (per_vc) {
      for (std::size_t i = 0; i < r.acr.size(); ++i) {
        out << ',' << fixed(r.acr[i], 1) << ',' << r.source_queue[i];
      }
    }
    out << '\n';
  }
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void emit_metrics_csv(const std::string& path, std::span<const RunMetrics> rows) {
  std::ofstream out = open_for_write(path);
  write_metrics_header(out);
  for (const RunMetrics& m : rows) write_metrics_row(out, m);
  finish(out, path);
}

void emit_trace_csv(const std::string& path, const SimulationResult& result) {
  std::ofstream out = open_for_write(path);
  write_trace_csv(out, result.trace, result.config.n_sources, result.config.trace_per_vc);
  finish(out, path);
}

}  // namespace abrsim
