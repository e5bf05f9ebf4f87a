#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "abrsim/event_queue.hpp"

namespace abrsim {

// 53-byte ATM cell.
constexpr double kCellBits = 424.0;
// Cells per millisecond used when queue sizes are reported as RTT fractions.
constexpr double kReportCellsPerMs = 368.0;
// Propagation delay per km of fibre.
constexpr SimTime kPropagationPerKm = 5 * kNanosPerMicro;

enum class EricaScheme { kErica, kEricaPlus };
enum class OverloadAveraging { kNone, kScheme1, kScheme2 };

std::string_view to_string(EricaScheme scheme);
std::string_view to_string(OverloadAveraging mode);

struct EricaParams {
  EricaScheme scheme = EricaScheme::kEricaPlus;
  double target_utilization = 0.9;  // used by ERICA only; ERICA+ runs at 1.0
  SimTime interval_time = 1 * kNanosPerMilli;
  std::uint32_t interval_cells = 100;
  SimTime t0 = 500 * kNanosPerMicro;
  double a = 1.15;
  double b = 1.05;
  double qdlf = 0.5;
  bool na_averaging = false;
  double alpha_n = 0.9;
  OverloadAveraging z_averaging = OverloadAveraging::kNone;
  double alpha_z = 0.2;

  double utilization() const {
    return scheme == EricaScheme::kEricaPlus ? 1.0 : target_utilization;
  }
};

struct TcpParams {
  std::uint32_t mss_bytes = 512;
  std::uint32_t window_scale = 4;
  SimTime timer_granularity = 100 * kNanosPerMilli;
  SimTime initial_rto = 1 * kNanosPerSecond;

  std::uint64_t max_rcv_window() const { return std::uint64_t{65536} << window_scale; }
};

struct VbrParams {
  bool enabled = false;
  double duty_cycle = 0.8;
  SimTime period = 10 * kNanosPerMilli;
  double amplitude_mbps = 124.41;
  SimTime start_time = 2 * kNanosPerMilli;

  SimTime on_duration() const;
};

struct AbrParams {
  std::optional<std::uint64_t> source_buffer_cells;  // nullopt = infinite
  std::optional<double> icr_mbps;                    // nullopt = link rate / n_sources
  std::uint32_t nrm = 32;
  // Replace TCP with an always-backlogged cell source.
  bool infinite_demand = false;
};

struct ScenarioConfig {
  std::string scenario_id = "scenario";
  std::uint32_t n_sources = 15;
  double link_length_km = 1000.0;
  double link_rate_mbps = 155.52;
  std::optional<std::uint64_t> switch_buffer_cells;  // nullopt = infinite
  AbrParams abr;
  VbrParams vbr;
  EricaParams erica;
  TcpParams tcp;
  SimTime duration = 10 * kNanosPerSecond;
  SimTime trace_interval = 1 * kNanosPerMilli;
  bool trace_per_vc = false;

  double link_cell_rate() const { return link_rate_mbps * 1e6 / kCellBits; }
  SimTime cell_time() const;
  double icr_cells_per_s() const;
};

struct DerivedDelays {
  SimTime one_way_prop = 0;
  SimTime rtt_prop = 0;
  SimTime feedback_delay = 0;
  double rtt_cells = 0.0;  // RTT expressed at the reporting convention of 368 cells/ms
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

SimTime propagation_delay(double length_km);
SimTime feedback_delay(const ScenarioConfig& config);
DerivedDelays derive_delays(const ScenarioConfig& config);

/// Upper bound on aggregate TCP goodput in Mbps: link rate scaled by target
/// utilization, ATM payload, protocol headers and RM cell overhead.
double max_throughput_bound(const ScenarioConfig& config);

/// Parses the `key = value` scenario format. Absent keys keep their defaults.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

/// Checks cross-field invariants; throws ConfigError with line 0.
void validate(const ScenarioConfig& config);

}  // namespace abrsim
