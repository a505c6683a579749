#include "lsim/coupling.hpp"

#include <algorithm>
#include <limits>

namespace lsim {

InputBarrier distribute_input(std::uint64_t frame_id, SimTime release_time,
                              std::span<const Replica> replicas, const CouplingMode& mode,
                              const FeedJitter& feed, Rng& rng, EventQueue* queue) {
  InputBarrier barrier;
  barrier.frame_id = frame_id;
  barrier.release_time = release_time;
  const bool tight = std::holds_alternative<TightCoupling>(mode);
  for (const auto& r : replicas) {
    if (r.health != Health::Healthy) continue;
    const std::uint64_t skew =
        tight || feed.bound_ns == 0
            ? 0
            : static_cast<std::uint64_t>(rng.between(0, static_cast<std::int64_t>(feed.bound_ns)));
    barrier.replica_ids.push_back(r.id);
    barrier.delivery_skew_ns.push_back(skew);
    if (queue != nullptr) {
      queue->schedule(release_time + skew, EventKind::InputArrival, r.id, frame_id);
    }
  }
  if (barrier.replica_ids.empty()) {
    throw NoHealthyReplicas("frame " + std::to_string(frame_id) + ": no healthy replica");
  }
  return barrier;
}

RendezvousOutcome rendezvous(std::span<const std::uint32_t> expected_ids,
                             std::span<const Arrival> arrivals, std::uint64_t window_ns) {
  if (window_ns == 0) throw ConfigError("rendezvous window must be positive");
  std::vector<Arrival> sorted(arrivals.begin(), arrivals.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Arrival& a, const Arrival& b) { return a.time < b.time; });

  std::vector<std::uint32_t> seen;
  for (const auto& a : sorted) {
    if (std::find(expected_ids.begin(), expected_ids.end(), a.replica_id) == expected_ids.end()) {
      throw ProtocolError("unexpected output from replica " + std::to_string(a.replica_id));
    }
    if (std::find(seen.begin(), seen.end(), a.replica_id) != seen.end()) {
      throw ProtocolError("duplicate output from replica " + std::to_string(a.replica_id));
    }
    seen.push_back(a.replica_id);
  }

  std::vector<std::uint32_t> present;
  std::uint64_t skew = 0;
  if (!sorted.empty()) {
    const SimTime first = sorted.front().time;
    const SimTime close = first + window_ns;
    SimTime last = first;
    for (const auto& a : sorted) {
      if (a.time > close) break;
      present.push_back(a.replica_id);
      last = a.time;
    }
    skew = last.ns - first.ns;
  }
  std::vector<std::uint32_t> missing;
  for (auto id : expected_ids) {
    if (std::find(present.begin(), present.end(), id) == present.end()) missing.push_back(id);
  }
  std::sort(present.begin(), present.end());
  if (missing.empty()) return RendezvousComplete{std::move(present), skew};
  std::sort(missing.begin(), missing.end());
  return RendezvousTimeout{std::move(present), std::move(missing)};
}

SimTime rendezvous_decision_time(const RendezvousOutcome& outcome,
                                 std::span<const Arrival> arrivals, std::uint64_t window_ns) {
  if (arrivals.empty()) return SimTime{};
  SimTime first{std::numeric_limits<std::uint64_t>::max()};
  for (const auto& a : arrivals) first = std::min(first, a.time);
  if (const auto* c = std::get_if<RendezvousComplete>(&outcome)) return first + c->skew_ns;
  return first + window_ns;
}

const char* to_string(DivergenceReason r) noexcept {
  switch (r) {
    case DivergenceReason::KindMismatch: return "kind_mismatch";
    case DivergenceReason::DigestMismatch: return "digest_mismatch";
    case DivergenceReason::CycleSkew: return "cycle_skew";
    case DivergenceReason::LengthMismatch: return "length_mismatch";
  }
  return "?";
}

TraceComparison compare_bus_traces(const BusTrace& a, const BusTrace& b,
                                   std::uint64_t skew_tolerance_cycles) {
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto delta = static_cast<std::int64_t>(a[i].cycle) - static_cast<std::int64_t>(b[i].cycle);
    if (a[i].kind != b[i].kind) return TraceDivergence{i, DivergenceReason::KindMismatch, delta};
    if (a[i].payload_digest != b[i].payload_digest) {
      return TraceDivergence{i, DivergenceReason::DigestMismatch, delta};
    }
    const auto magnitude = static_cast<std::uint64_t>(delta < 0 ? -delta : delta);
    if (magnitude > skew_tolerance_cycles) {
      return TraceDivergence{i, DivergenceReason::CycleSkew, delta};
    }
  }
  if (a.size() != b.size()) return TraceDivergence{common, DivergenceReason::LengthMismatch, 0};
  return TraceMatch{};
}

PtpEstimate estimate_ptp_offset(const PtpExchange& x) {
  if (x.t4 < x.t1) throw InconsistentExchangeError("master receive precedes master send");
  if (x.t3 < x.t2) throw InconsistentExchangeError("slave send precedes slave receive");
  const auto forward = static_cast<std::int64_t>(x.t2.ns) - static_cast<std::int64_t>(x.t1.ns);
  const auto reverse = static_cast<std::int64_t>(x.t4.ns) - static_cast<std::int64_t>(x.t3.ns);
  PtpEstimate e;
  e.offset_ns = (forward - reverse) / 2;
  e.path_delay_ns = (forward + reverse) / 2;
  if (forward + reverse < 0) {
    throw InconsistentExchangeError("exchange implies negative path delay " +
                                    std::to_string(e.path_delay_ns) + " ns");
  }
  return e;
}

PtpExchange simulate_ptp_exchange(SimTime master_send, std::int64_t slave_offset_ns,
                                  std::uint64_t forward_delay_ns, std::uint64_t reverse_delay_ns,
                                  std::uint64_t residence_ns) {
  // True (master) time of each message edge, then read on the right clock.
  const auto arrive = static_cast<std::int64_t>(master_send.ns + forward_delay_ns);
  const std::int64_t slave_rx = arrive + slave_offset_ns;
  if (slave_rx < 0) throw SimulationError("slave clock reading before time zero");
  PtpExchange x;
  x.t1 = master_send;
  x.t2 = SimTime{static_cast<std::uint64_t>(slave_rx)};
  x.t3 = x.t2 + residence_ns;
  x.t4 = SimTime{static_cast<std::uint64_t>(arrive) + residence_ns + reverse_delay_ns};
  return x;
}

AlignedTimestamps align_timestamps(std::span<const SimTime> samples, std::int64_t offset_ns) {
  AlignedTimestamps out;
  out.times.reserve(samples.size());
  for (auto t : samples) {
    const auto shifted = static_cast<std::int64_t>(t.ns) - offset_ns;
    if (shifted < 0) {
      ++out.clamped;
      out.times.push_back(SimTime{0});
    } else {
      out.times.push_back(SimTime{static_cast<std::uint64_t>(shifted)});
    }
  }
  return out;
}

}  // namespace lsim
