#include "lsim/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "lsim/errors.hpp"

namespace lsim {

void JitterModel::validate() const {
  if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) throw ConfigError("spike_prob outside [0, 1]");
  if (!(mode2_prob >= 0.0 && mode2_prob <= 1.0)) throw ConfigError("mode2_prob outside [0, 1]");
  if (spike_scale_ns == 0) throw ConfigError("spike_scale_ns must be positive");
}

std::uint64_t sample_turnaround_overhead(const JitterModel& model, Rng& rng) {
  std::uint64_t overhead = model.base_overhead_ns;
  const double mode_draw = rng.uniform();
  const double spike_draw = rng.uniform();
  if (mode_draw < model.mode2_prob) overhead += model.mode2_offset_ns;
  if (spike_draw < model.spike_prob) {
    std::uint64_t k = 1;
    if (model.spike_scale_ns > 1) {
      const double p = 1.0 / static_cast<double>(model.spike_scale_ns);
      const double u = 1.0 - rng.uniform();  // (0, 1]
      k += static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }
    overhead += k;
  }
  return overhead;
}

const char* to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::InputArrival: return "input_arrival";
    case EventKind::KernelSubmission: return "kernel_submission";
    case EventKind::ComputeCompletion: return "compute_completion";
    case EventKind::RendezvousDeadline: return "rendezvous_deadline";
  }
  return "?";
}

Event EventQueue::schedule(SimTime time, EventKind kind, std::optional<std::uint32_t> replica_id,
                           std::optional<std::uint64_t> frame_id, std::uint64_t payload) {
  if (time < now_) {
    throw SimulationError(std::string("event '") + to_string(kind) + "' scheduled at " +
                          std::to_string(time.ns) + " ns, before current time " +
                          std::to_string(now_.ns) + " ns");
  }
  Event e{time, next_seq_++, kind, replica_id, frame_id, payload};
  heap_.push_back(e);
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return e;
}

bool EventQueue::cancel(std::uint64_t seq) {
  if (seq >= next_seq_) return false;
  auto it = std::lower_bound(cancelled_.begin(), cancelled_.end(), seq);
  if (it != cancelled_.end() && *it == seq) return false;
  // Only events still in the heap can be cancelled.
  bool pending = false;
  for (const auto& e : heap_) {
    if (e.seq == seq) {
      pending = true;
      break;
    }
  }
  if (!pending) return false;
  cancelled_.insert(it, seq);
  return true;
}

void EventQueue::pop_top() {
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  heap_.pop_back();
}

void EventQueue::drop_cancelled() {
  while (!heap_.empty()) {
    auto it = std::lower_bound(cancelled_.begin(), cancelled_.end(), heap_.front().seq);
    if (it == cancelled_.end() || *it != heap_.front().seq) return;
    cancelled_.erase(it);
    pop_top();
  }
}

void EventQueue::process_one(std::vector<Event>& out) {
  Event e = heap_.front();
  pop_top();
  now_ = e.time;
  out.push_back(e);
  if (handler_) handler_(*this, e);
}

std::vector<Event> EventQueue::run_until(SimTime t) {
  if (t < now_) {
    throw SimulationError("run_until(" + std::to_string(t.ns) + ") is before current time " +
                          std::to_string(now_.ns));
  }
  std::vector<Event> processed;
  drop_cancelled();
  while (!heap_.empty() && heap_.front().time <= t) {
    process_one(processed);
    drop_cancelled();
  }
  now_ = t;
  return processed;
}

std::vector<Event> EventQueue::run_all() {
  std::vector<Event> processed;
  drop_cancelled();
  while (!heap_.empty()) {
    process_one(processed);
    drop_cancelled();
  }
  return processed;
}

void write_event_log(std::span<const Event> events, std::ostream& out) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["time_ns"] = e.time.ns;
    j["seq"] = e.seq;
    j["kind"] = to_string(e.kind);
    if (e.replica_id) j["replica_id"] = *e.replica_id;
    if (e.frame_id) j["frame_id"] = *e.frame_id;
    out << j.dump() << '\n';
  }
}

Submission submit_kernel(EventQueue& queue, Host& host, std::span<Device> devices,
                         std::uint32_t device_id, const KernelTask& task, bool in_order) {
  auto it = std::find_if(devices.begin(), devices.end(),
                         [&](const Device& d) { return d.id == device_id; });
  if (it == devices.end()) throw ConfigError("unknown device " + std::to_string(device_id));
  Device& dev = *it;

  Submission s;
  s.overhead_ns = sample_turnaround_overhead(host.jitter, host.rng);
  s.start = queue.now() + s.overhead_ns;
  if (in_order) s.start = std::max(s.start, dev.busy_until);
  const std::uint64_t exec_ns = cycles_to_time(task.cycles, dev.clock) + task.extra_delay_ns;
  const SimTime done = s.start + exec_ns;
  dev.busy_until = std::max(dev.busy_until, done);
  s.service_ns = s.overhead_ns + exec_ns;
  s.completion = queue.schedule(done, EventKind::ComputeCompletion, task.replica_id, task.frame_id,
                                task.cycles);
  return s;
}

}  // namespace lsim
