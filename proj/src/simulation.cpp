#include "abrsim/simulation.hpp"

#include <algorithm>
#include <sstream>

#include "abrsim/vbr.hpp"

namespace abrsim {

struct Simulation::VcState {
  VcState(std::uint32_t id, const AbrSourceParams& abr_params, const ScenarioConfig& config)
      : vc(id), abr(id, abr_params) {
    if (!config.abr.infinite_demand) {
      sender.emplace(id, config.tcp);
      receiver.emplace(id, config.tcp);
    }
  }

  std::uint32_t vc;
  AbrSource abr;
  std::optional<TcpSender> sender;
  std::optional<TcpReceiver> receiver;

  EventHandle emit_event;
  SimTime emit_at = 0;
  EventHandle rto_timer;

  // AAL5 reassembly at the destination.
  std::uint64_t frame_seq = 0;
  std::uint16_t frame_got = 0;
  bool frame_ok = false;
  bool frame_open = false;
  std::uint64_t corrupt_frames = 0;
};

std::uint64_t SimulationResult::total_delivered_bytes() const {
  std::uint64_t sum = 0;
  for (const auto& v : vcs) sum += v.delivered_bytes;
  return sum;
}

std::uint64_t SimulationResult::total_source_drops() const {
  std::uint64_t sum = 0;
  for (const auto& v : vcs) sum += v.source_drops;
  return sum;
}

Simulation::Simulation(const ScenarioConfig& config)
    : config_(config), delays_(derive_delays(config)), cell_time_(config.cell_time()) {
  validate(config_);
  const double link_rate = config_.link_cell_rate();
  const SimTime prop = propagation_delay(config_.link_length_km);
  const SimTime hop = prop + cell_time_;

  port_ = std::make_unique<SwitchPort>(
      events_, config_.erica, link_rate, cell_time_, config_.n_sources,
      config_.switch_buffer_cells,
      [this](const Cell& cell, SimTime) { to_destination_->push(cell); });

  const AbrSourceParams abr_params =
      make_source_params(link_rate, config_.icr_cells_per_s(), config_.abr.source_buffer_cells,
                         config_.abr.nrm, config_.abr.infinite_demand);
  for (std::uint32_t i = 0; i < config_.n_sources; ++i) {
    vcs_.push_back(std::make_unique<VcState>(i, abr_params, config_));
  }

  access_ = std::make_unique<DelayLine<Cell>>(events_, hop,
                                              [this](Cell&& c) { port_->on_cell(c); });
  // Bottleneck link propagation, then Switch2's per-destination link.
  to_destination_ = std::make_unique<DelayLine<Cell>>(
      events_, prop + hop, [this](Cell&& c) { on_destination_cell(std::move(c)); });
  brm_to_switch_ = std::make_unique<DelayLine<Cell>>(
      events_, 2 * hop, [this](Cell&& c) { on_brm_at_switch(std::move(c)); });
  brm_to_source_ = std::make_unique<DelayLine<Cell>>(
      events_, hop, [this](Cell&& c) { on_brm_at_source(std::move(c)); });
  // An ACK is two cells; it is complete one cell time after the first cell.
  ack_path_ = std::make_unique<DelayLine<Segment>>(
      events_, 3 * hop + cell_time_, [this](Segment&& s) { on_ack(std::move(s)); });
}

Simulation::~Simulation() = default;

const AbrSource& Simulation::source(std::uint32_t vc) const { return vcs_.at(vc)->abr; }

const TcpSender* Simulation::sender(std::uint32_t vc) const {
  const auto& s = vcs_.at(vc)->sender;
  return s ? &*s : nullptr;
}

const TcpReceiver* Simulation::receiver(std::uint32_t vc) const {
  const auto& r = vcs_.at(vc)->receiver;
  return r ? &*r : nullptr;
}

void Simulation::start() {
  started_ = true;
  port_->start();
  for (auto& vc : vcs_) {
    if (config_.abr.infinite_demand) {
      ensure_emission(*vc);
    } else {
      try_send(*vc);
    }
  }
  if (config_.vbr.enabled) {
    events_.schedule(next_vbr_cell_time(0, config_.vbr), [this] { on_vbr_cell(); });
  }
  events_.schedule(config_.trace_interval, [this] { on_trace(); });
}

void Simulation::run_until(SimTime end) {
  if (!started_) start();
  events_processed_ += events_.run_until(end);
}

void Simulation::try_send(VcState& vc) {
  const SimTime now = events_.now();
  std::vector<Segment> segments = vc.sender->on_send_opportunity(now);
  for (const Segment& seg : segments) {
    const auto n = static_cast<std::uint16_t>(segment_to_cells(seg.len));
    cell_buffer_.clear();
    for (std::uint16_t i = 0; i < n; ++i) {
      Cell c;
      c.kind = CellKind::kData;
      c.vc = vc.vc;
      c.segment_seq = seg.seq;
      c.segment_len = seg.len;
      c.index = i;
      c.frame_cells = n;
      cell_buffer_.push_back(c);
    }
    vc.abr.enqueue_from_tcp(cell_buffer_);
  }
  if (vc.sender->timer_running() && !events_.is_pending(vc.rto_timer)) arm_rto(vc);
  ensure_emission(vc);
}

void Simulation::arm_rto(VcState& vc) {
  events_.cancel(vc.rto_timer);
  VcState* p = &vc;
  vc.rto_timer = events_.schedule_in(vc.sender->rto(), [this, p] { on_timeout(*p); });
}

void Simulation::on_timeout(VcState& vc) {
  vc.sender->on_timeout(events_.now());
  if (vc.sender->timer_running()) arm_rto(vc);
  try_send(vc);
}

void Simulation::ensure_emission(VcState& vc) {
  if (!vc.abr.has_cell_ready()) return;
  const SimTime at = vc.abr.earliest_departure(events_.now());
  if (events_.is_pending(vc.emit_event)) {
    if (vc.emit_at == at) return;
    events_.cancel(vc.emit_event);
  }
  VcState* p = &vc;
  vc.emit_at = at;
  vc.emit_event = events_.schedule(at, [this, p] { emit(*p); });
}

void Simulation::emit(VcState& vc) {
  AbrSource::Departure d = vc.abr.next_cell_departure(events_.now());
  access_->push(d.cell);
  ensure_emission(vc);
}

void Simulation::on_destination_cell(Cell&& cell) {
  VcState& vc = *vcs_.at(cell.vc);
  if (cell.kind == CellKind::kForwardRm) {
    brm_to_switch_->push(turnaround(cell));
    return;
  }
  if (!vc.receiver) return;

  if (cell.index == 0) {
    // A new frame while the previous one never saw its EOM merges the two.
    vc.frame_ok = !vc.frame_open;
    vc.frame_seq = cell.segment_seq;
    vc.frame_got = 1;
  } else if (vc.frame_ok && vc.frame_seq == cell.segment_seq && vc.frame_got == cell.index) {
    ++vc.frame_got;
  } else {
    vc.frame_ok = false;
  }
  vc.frame_open = true;

  if (cell.is_eom()) {
    const bool complete = vc.frame_ok && vc.frame_seq == cell.segment_seq &&
                          vc.frame_got == cell.frame_cells;
    vc.frame_open = false;
    vc.frame_ok = false;
    if (!complete) {
      ++vc.corrupt_frames;
      return;
    }
    Segment seg;
    seg.vc = vc.vc;
    seg.seq = cell.segment_seq;
    seg.len = cell.segment_len;
    ack_path_->push(vc.receiver->on_segment_arrival(seg, events_.now()));
  }
}

void Simulation::on_ack(Segment&& ack) {
  VcState& vc = *vcs_.at(ack.vc);
  switch (vc.sender->on_ack(ack, events_.now())) {
    case TimerAction::kStop:
      events_.cancel(vc.rto_timer);
      break;
    case TimerAction::kRestart:
    case TimerAction::kStart:
      arm_rto(vc);
      break;
    case TimerAction::kNone:
      break;
  }
  try_send(vc);
}

void Simulation::on_brm_at_switch(Cell&& brm) {
  port_->stamp_brm(brm);
  brm_to_source_->push(brm);
}

void Simulation::on_brm_at_source(Cell&& brm) {
  VcState& vc = *vcs_.at(brm.vc);
  vc.abr.on_brm(brm.rm);
  ensure_emission(vc);
}

void Simulation::on_vbr_cell() {
  Cell c;
  c.kind = CellKind::kVbr;
  port_->on_cell(c);
  const SimTime next = next_vbr_cell_time(events_.now() + vbr_cell_gap(config_.vbr), config_.vbr);
  events_.schedule(next, [this] { on_vbr_cell(); });
}

void Simulation::on_trace() {
  TraceRecord r;
  r.t = events_.now();
  r.switch_queue = port_->abr_queue_length();
  r.switch_queue_max = port_->take_window_max();
  r.vbr_on = vbr_active(r.t, config_.vbr);
  if (config_.trace_per_vc) {
    for (const auto& vc : vcs_) {
      r.acr.push_back(vc->abr.acr());
      r.source_queue.push_back(vc->abr.queue_length());
    }
  }
  trace_.push_back(std::move(r));
  events_.schedule_in(config_.trace_interval, [this] { on_trace(); });
}

ConservationReport Simulation::check_conservation() const {
  ConservationReport rep;
  auto fail = [&rep](const std::string& what) {
    rep.ok = false;
    rep.violations.push_back(what);
  };
  std::uint64_t emitted = 0;
  for (const auto& vc : vcs_) {
    const AbrSource& a = vc->abr;
    emitted += a.data_departed() + a.frm_sent();
    if (!config_.abr.infinite_demand && a.enqueued() != a.data_departed() + a.queue_length()) {
      std::ostringstream os;
      os << "vc " << vc->vc << ": enqueued " << a.enqueued() << " != departed "
         << a.data_departed() << " + queued " << a.queue_length();
      fail(os.str());
    }
    if (a.params().capacity && a.queue_length() > *a.params().capacity) {
      fail("vc " + std::to_string(vc->vc) + ": source queue above capacity");
    }
    if (vc->receiver && vc->sender) {
      const std::uint64_t delivered = vc->receiver->delivered_bytes();
      if (delivered < vc->sender->snd_una() || delivered > vc->sender->snd_max()) {
        fail("vc " + std::to_string(vc->vc) + ": delivered bytes outside [snd_una, snd_max]");
      }
    }
  }
  if (emitted != port_->abr_arrivals() + access_->in_flight()) {
    std::ostringstream os;
    os << "access links: emitted " << emitted << " != arrived " << port_->abr_arrivals()
       << " + in flight " << access_->in_flight();
    fail(os.str());
  }
  const std::uint64_t in_service_abr = port_->serving_abr() ? 1 : 0;
  if (port_->abr_arrivals() !=
      port_->abr_departures() + port_->abr_queue_length() + in_service_abr + port_->abr_drops()) {
    fail("switch ABR cells not conserved");
  }
  const std::uint64_t in_service_vbr = (port_->busy() && !port_->serving_abr()) ? 1 : 0;
  if (port_->vbr_arrivals() != port_->vbr_departures() + port_->vbr_pending() + in_service_vbr) {
    fail("switch VBR cells not conserved");
  }
  if (port_->link_idle_with_backlog() != 0) fail("bottleneck link idled with cells queued");
  return rep;
}

SimulationResult Simulation::result() const {
  SimulationResult r;
  r.config = config_;
  r.delays = delays_;
  for (const auto& vc : vcs_) {
    VcSummary s;
    s.max_source_queue = vc->abr.max_queue_seen();
    s.source_drops = vc->abr.dropped();
    s.source_enqueued = vc->abr.enqueued();
    s.source_departed = vc->abr.data_departed();
    s.source_queue_at_end = vc->abr.queue_length();
    s.frm_sent = vc->abr.frm_sent();
    s.final_acr = vc->abr.acr();
    s.corrupt_frames = vc->corrupt_frames;
    if (vc->sender) {
      s.snd_una = vc->sender->snd_una();
      s.snd_max = vc->sender->snd_max();
      s.timeouts = vc->sender->timeouts();
      s.retransmitted_segments = vc->sender->retransmitted_segments();
      s.cwnd = vc->sender->cwnd();
    }
    if (vc->receiver) s.delivered_bytes = vc->receiver->delivered_bytes();
    r.vcs.push_back(s);
  }
  r.trace = trace_;
  r.max_switch_queue = port_->max_queue_seen();
  r.switch_drops = port_->abr_drops();
  r.switch_abr_departures = port_->abr_departures();
  r.switch_vbr_departures = port_->vbr_departures();
  r.events_processed = events_processed_;
  r.erica_intervals = port_->erica().intervals_completed();
  r.link_idle_with_backlog = port_->link_idle_with_backlog();
  r.conservation = check_conservation();
  return r;
}

SimulationResult simulate(const ScenarioConfig& config) {
  Simulation sim(config);
  sim.run_until(config.duration);
  return sim.result();
}

}  // namespace abrsim
