#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "rlfdc/network.hpp"

namespace rlfdc {

// One stored step of Algorithm-style training. The candidate action set of
// the successor state is frozen in at storage time so replay can evaluate
// the max over next actions later.
struct Transition {
  Sample input;            // normalized state and action
  double reward = 0.0;
  double next_state[kStateDim] = {0.0, 0.0};
  std::vector<std::array<double, kActionDim>> next_actions;
  bool terminal = false;
  std::uint64_t id = 0;  // insertion sequence number
};

// Bounded FIFO buffer.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::runtime_error("replay capacity must be >= 1");
  }

  // Returns the id of the evicted transition, or -1 if nothing was evicted.
  long long push(Transition t) {
    t.id = next_id_++;
    long long evicted = -1;
    if (buffer_.size() == capacity_) {
      evicted = static_cast<long long>(buffer_.front().id);
      buffer_.pop_front();
    }
    buffer_.push_back(std::move(t));
    return evicted;
  }

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return buffer_.size() == capacity_; }
  const Transition& operator[](std::size_t i) const { return buffer_[i]; }

 private:
  std::size_t capacity_;
  std::uint64_t next_id_ = 0;
  std::deque<Transition> buffer_;
};

}  // namespace rlfdc
