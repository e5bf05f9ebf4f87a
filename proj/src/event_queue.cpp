#include "abrsim/event_queue.hpp"

#include <algorithm>
#include <cmath>

namespace abrsim {

namespace {

SimTime round_half_up(double nanos) {
  if (!(nanos >= 0.0)) throw SimulationError("negative or NaN duration");
  return static_cast<SimTime>(std::floor(nanos + 0.5));
}

}  // namespace

SimTime from_seconds(double seconds) { return round_half_up(seconds * 1e9); }
SimTime from_millis(double millis) { return round_half_up(millis * 1e6); }
SimTime from_micros(double micros) { return round_half_up(micros * 1e3); }
double to_seconds(SimTime t) { return static_cast<double>(t) / 1e9; }
double to_millis(SimTime t) { return static_cast<double>(t) / 1e6; }

std::uint32_t EventQueue::acquire_slot() {
  if (!free_slots_.empty()) {
    std::uint32_t slot = free_slots_.back();
    free_slots_.pop_back();
    return slot;
  }
  slots_.emplace_back();
  return static_cast<std::uint32_t>(slots_.size() - 1);
}

EventHandle EventQueue::schedule(SimTime fire_time, Handler handler) {
  if (fire_time < now_) {
    throw SimulationError("event scheduled in the past: t=" + std::to_string(fire_time) +
                          " ns, clock=" + std::to_string(now_) + " ns");
  }
  std::uint32_t slot = acquire_slot();
  std::uint64_t seq = next_sequence_++;
  slots_[slot].sequence = seq;
  slots_[slot].handler = std::move(handler);
  heap_.push_back({fire_time, seq, slot});
  std::push_heap(heap_.begin(), heap_.end(), later);
  ++live_;
  return {slot, seq};
}

void EventQueue::cancel(EventHandle handle) {
  if (!is_pending(handle)) return;
  Slot& s = slots_[handle.slot];
  s.handler = nullptr;
  s.sequence = 0;
  --live_;
}

bool EventQueue::is_pending(EventHandle handle) const {
  return handle.valid() && handle.slot < slots_.size() &&
         slots_[handle.slot].sequence == handle.sequence;
}

std::uint64_t EventQueue::run_until(SimTime end) {
  std::uint64_t processed = 0;
  while (!heap_.empty() && heap_.front().time <= end) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    HeapEntry entry = heap_.back();
    heap_.pop_back();
    Slot& s = slots_[entry.slot];
    if (s.sequence != entry.sequence) {
      // Cancelled: the slot was cleared but still awaits its heap entry.
      if (s.sequence == 0) free_slots_.push_back(entry.slot);
      continue;
    }
    now_ = entry.time;
    Handler handler = std::move(s.handler);
    s.handler = nullptr;
    s.sequence = 0;
    free_slots_.push_back(entry.slot);
    --live_;
    ++processed;
    handler();
  }
  if (end > now_) now_ = end;
  return processed;
}

}  // namespace abrsim
