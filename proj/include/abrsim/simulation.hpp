#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "abrsim/abr.hpp"
#include "abrsim/config.hpp"
#include "abrsim/delay_line.hpp"
#include "abrsim/event_queue.hpp"
#include "abrsim/switch_port.hpp"
#include "abrsim/tcp.hpp"

namespace abrsim {

struct TraceRecord {
  SimTime t = 0;
  std::uint64_t switch_queue = 0;      // instantaneous ABR queue at t
  std::uint64_t switch_queue_max = 0;  // largest ABR queue since the previous record
  bool vbr_on = false;
  std::vector<double> acr;             // per VC, cells/s (only with per-VC tracing)
  std::vector<std::uint64_t> source_queue;
};

struct VcSummary {
  std::uint64_t max_source_queue = 0;
  std::uint64_t source_drops = 0;
  std::uint64_t source_enqueued = 0;
  std::uint64_t source_departed = 0;
  std::uint64_t source_queue_at_end = 0;
  std::uint64_t frm_sent = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t snd_una = 0;
  std::uint64_t snd_max = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t retransmitted_segments = 0;
  std::uint64_t corrupt_frames = 0;
  std::uint64_t cwnd = 0;
  double final_acr = 0.0;
};

struct ConservationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

struct SimulationResult {
  ScenarioConfig config;
  DerivedDelays delays;
  std::vector<VcSummary> vcs;
  std::vector<TraceRecord> trace;
  std::uint64_t max_switch_queue = 0;
  std::uint64_t switch_drops = 0;
  std::uint64_t switch_abr_departures = 0;
  std::uint64_t switch_vbr_departures = 0;
  std::uint64_t events_processed = 0;
  std::uint64_t erica_intervals = 0;
  std::uint64_t link_idle_with_backlog = 0;
  ConservationReport conservation;

  std::uint64_t total_delivered_bytes() const;
  std::uint64_t total_source_drops() const;
};

/// The "N source + VBR" network: N ABR sources on access links into Switch1,
/// one shared bottleneck link to Switch2, then per-destination links. All links
/// have the same length. Switch1's output port is the only queueing point.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Advances to `end` (absolute). May be called repeatedly with increasing ends.
  void run_until(SimTime end);
  SimulationResult result() const;

  SimTime now() const { return events_.now(); }
  const SwitchPort& port() const { return *port_; }
  const AbrSource& source(std::uint32_t vc) const;
  const TcpSender* sender(std::uint32_t vc) const;
  const TcpReceiver* receiver(std::uint32_t vc) const;

 private:
  struct VcState;

  void start();
  void try_send(VcState& vc);
  void ensure_emission(VcState& vc);
  void emit(VcState& vc);
  void on_ack(Segment&& ack);
  void on_timeout(VcState& vc);
  void arm_rto(VcState& vc);
  void on_destination_cell(Cell&& cell);
  void on_brm_at_switch(Cell&& brm);
  void on_brm_at_source(Cell&& brm);
  void on_vbr_cell();
  void on_trace();
  ConservationReport check_conservation() const;

  ScenarioConfig config_;
  DerivedDelays delays_;
  EventQueue events_;
  SimTime cell_time_;
  std::unique_ptr<SwitchPort> port_;
  std::vector<std::unique_ptr<VcState>> vcs_;

  std::unique_ptr<DelayLine<Cell>> access_;        // sources -> Switch1
  std::unique_ptr<DelayLine<Cell>> to_destination_;  // Switch1 output -> destinations
  std::unique_ptr<DelayLine<Cell>> brm_to_switch_;   // destinations -> Switch1
  std::unique_ptr<DelayLine<Cell>> brm_to_source_;   // Switch1 -> sources
  std::unique_ptr<DelayLine<Segment>> ack_path_;     // destinations -> sources

  std::vector<Cell> cell_buffer_;
  std::vector<TraceRecord> trace_;
  std::uint64_t events_processed_ = 0;
  bool started_ = false;
};

/// Builds and runs one scenario to its configured duration.
SimulationResult simulate(const ScenarioConfig& config);

}  // namespace abrsim
