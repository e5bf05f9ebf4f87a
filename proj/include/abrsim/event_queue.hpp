#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abrsim {

/// Simulation clock value in nanoseconds since the start of the run.
using SimTime = std::uint64_t;

constexpr SimTime kNanosPerMicro = 1000;
constexpr SimTime kNanosPerMilli = 1000 * kNanosPerMicro;
constexpr SimTime kNanosPerSecond = 1000 * kNanosPerMilli;

// Physical quantities convert to the integer clock with round-half-up.
SimTime from_seconds(double seconds);
SimTime from_millis(double millis);
SimTime from_micros(double micros);
double to_seconds(SimTime t);
double to_millis(SimTime t);

/// Raised for programming errors inside the engine (e.g. scheduling into the past).
class SimulationError : public std::logic_error {
 public:
  explicit SimulationError(const std::string& what) : std::logic_error(what) {}
};

/// Identifies a scheduled event so it can be cancelled. A default-constructed
/// handle refers to nothing.
struct EventHandle {
  std::uint32_t slot = 0;
  std::uint64_t sequence = 0;

  bool valid() const { return sequence != 0; }
};

/// Deterministic discrete-event engine. Events fire in (time, insertion
/// sequence) order, so simultaneous events are delivered in the order they
/// were scheduled.
class EventQueue {
 public:
  using Handler = std::function<void()>;

  EventHandle schedule(SimTime fire_time, Handler handler);
  EventHandle schedule_in(SimTime delay, Handler handler) {
    return schedule(now_ + delay, std::move(handler));
  }

  // Cancelling a fired, cancelled or empty handle is a no-op.
  void cancel(EventHandle handle);
  bool is_pending(EventHandle handle) const;

  /// Processes every event with fire_time <= end and leaves the clock at end.
  std::uint64_t run_until(SimTime end);

  SimTime now() const { return now_; }
  std::size_t pending() const { return live_; }

 private:
  struct HeapEntry {
    SimTime time;
    std::uint64_t sequence;
    std::uint32_t slot;
  };
  struct Slot {
    std::uint64_t sequence = 0;
    Handler handler;
  };

  static bool later(const HeapEntry& a, const HeapEntry& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.sequence > b.sequence;
  }

  std::uint32_t acquire_slot();

  SimTime now_ = 0;
  std::uint64_t next_sequence_ = 1;
  std::size_t live_ = 0;
  std::vector<HeapEntry> heap_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
};

}  // namespace abrsim
