#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace leocp {

/// Single-threaded discrete-event queue. Events fire in (time, sequence)
/// order, so equal timestamps run in scheduling order.
class EventQueue {
 public:
  using Action = std::function<void()>;

  std::uint64_t schedule(double t, Action action) {
    const std::uint64_t seq = next_seq_++;
    heap_.push(Entry{t < now_ ? now_ : t, seq, std::move(action)});
    return seq;
  }

  std::uint64_t schedule_in(double dt, Action action) { return schedule(now_ + dt, std::move(action)); }

  bool step() {
    if (heap_.empty()) return false;
    Entry e = heap_.top();
    heap_.pop();
    now_ = e.t;
    current_seq_ = e.seq;
    e.action();
    return true;
  }

  void run() {
    while (step()) {
    }
  }

  template <class Pred>
  void run_until(Pred&& done) {
    while (!done() && step()) {
    }
  }

  double now() const { return now_; }
  std::uint64_t current_seq() const { return current_seq_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }

 private:
  struct Entry {
    double t;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const { return a.t != b.t ? a.t > b.t : a.seq > b.seq; }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t current_seq_ = 0;
};

}  // namespace leocp
