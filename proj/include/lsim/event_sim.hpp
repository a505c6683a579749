#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "lsim/rng.hpp"
#include "lsim/sim_time.hpp"

namespace lsim {

/// Host-side turnaround overhead: a base cost, an optional second mode, and
/// a rare geometric spike tail.
struct JitterModel {
  std::uint64_t base_overhead_ns = 0;
  double spike_prob = 0.0;
  std::uint64_t spike_scale_ns = 1;  // mean spike magnitude, >= 1
  std::uint64_t mode2_offset_ns = 0;
  double mode2_prob = 0.0;

  void validate() const;
  bool is_zero() const noexcept {
    return base_overhead_ns == 0 && spike_prob == 0.0 && mode2_prob == 0.0;
  }
  friend bool operator==(const JitterModel&, const JitterModel&) = default;
};

/// base + mode2_offset (if uniform < mode2_prob) + Geometric(mean spike_scale)
/// on {1, 2, ...} (if uniform < spike_prob). The mode and spike uniforms are
/// always drawn, in that order; the magnitude draw follows only on a spike.
std::uint64_t sample_turnaround_overhead(const JitterModel& model, Rng& rng);

enum class EventKind { InputArrival, KernelSubmission, ComputeCompletion, RendezvousDeadline };

const char* to_string(EventKind k) noexcept;

struct Event {
  SimTime time;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::InputArrival;
  std::optional<std::uint32_t> replica_id;
  std::optional<std::uint64_t> frame_id;
  std::uint64_t payload = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Single-threaded priority queue of events in (time, seq) order.
class EventQueue {
 public:
  using Handler = std::function<void(EventQueue&, const Event&)>;

  void set_handler(Handler h) { handler_ = std::move(h); }

  /// Throws SimulationError if `time` precedes the current time.
  Event schedule(SimTime time, EventKind kind, std::optional<std::uint32_t> replica_id = {},
                 std::optional<std::uint64_t> frame_id = {}, std::uint64_t payload = 0);

  /// Withdraws a pending event; it is skipped when reached. Returns false if
  /// the event was already processed or cancelled.
  bool cancel(std::uint64_t seq);

  /// Processes every event with time <= t, then sets the current time to t.
  /// Throws SimulationError if t precedes the current time.
  std::vector<Event> run_until(SimTime t);

  /// Processes events until the queue is empty; time stays at the last event.
  std::vector<Event> run_all();

  SimTime now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.size() == cancelled_.size(); }
  std::size_t pending() const noexcept { return heap_.size() - cancelled_.size(); }

 private:
  void process_one(std::vector<Event>& out);
  void drop_cancelled();

  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  std::vector<Event> heap_;  // min-heap under Later
  void pop_top();
  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::vector<std::uint64_t> cancelled_;  // sorted
  Handler handler_;
};

/// JSON Lines: {"time_ns", "seq", "kind", "replica_id"?, "frame_id"?} per event.
void write_event_log(std::span<const Event> events, std::ostream& out);

// ---------------------------------------------------------------------------
// Host -> compute-device submission

/// Feeder CPU: every submission costs one overhead sample.
struct Host {
  JitterModel jitter;
  Rng rng;
};

struct Device {
  std::uint32_t id = 0;
  ClockDomain clock;
  SimTime busy_until;
};

struct KernelTask {
  std::uint32_t replica_id = 0;
  std::uint64_t frame_id = 0;
  std::uint64_t cycles = 0;
  std::uint64_t extra_delay_ns = 0;
};

struct Submission {
  Event completion;
  SimTime start;
  std::uint64_t overhead_ns = 0;
  /// overhead + execution duration; excludes time spent queued behind
  /// earlier tasks.
  std::uint64_t service_ns = 0;
};

/// Submits `task` to `device_id` at the queue's current time. In-order
/// devices start a task only after every earlier task has completed;
/// out-of-order devices start it as soon as the host overhead elapses.
/// Throws ConfigError for an unknown device.
Submission submit_kernel(EventQueue& queue, Host& host, std::span<Device> devices,
                         std::uint32_t device_id, const KernelTask& task, bool in_order);

}  // namespace lsim
