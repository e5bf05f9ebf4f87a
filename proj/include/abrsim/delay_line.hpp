#pragma once

#include <deque>
#include <functional>
#include <utility>

#include "abrsim/event_queue.hpp"

namespace abrsim {

/// Constant-delay FIFO pipe. Items leave in the order they entered, exactly
/// `delay` after they were pushed; only the head item has an event pending.
template <typename T>
class DelayLine {
 public:
  using Deliver = std::function<void(T&&)>;

  DelayLine(EventQueue& events, SimTime delay, Deliver deliver)
      : events_(events), delay_(delay), deliver_(std::move(deliver)) {}

  DelayLine(const DelayLine&) = delete;
  DelayLine& operator=(const DelayLine&) = delete;

  void push(T item) {
    items_.emplace_back(events_.now() + delay_, std::move(item));
    if (items_.size() == 1) events_.schedule(items_.front().first, [this] { pop(); });
  }

  std::size_t in_flight() const { return items_.size(); }
  SimTime delay() const { return delay_; }

 private:
  void pop() {
    T item = std::move(items_.front().second);
    items_.pop_front();
    if (!items_.empty()) events_.schedule(items_.front().first, [this] { pop(); });
    deliver_(std::move(item));
  }

  EventQueue& events_;
  SimTime delay_;
  Deliver deliver_;
  std::deque<std::pair<SimTime, T>> items_;
};

}  // namespace abrsim
