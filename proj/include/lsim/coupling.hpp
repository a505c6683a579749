#pragma once

// Coupling layer between redundant replicas: input distribution, output
// rendezvous, bus-trace comparison for tight lockstep, and a two-step
// PTP-style offset estimate for loosely coupled modules on separate clocks.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lsim/errors.hpp"
#include "lsim/event_sim.hpp"
#include "lsim/replica.hpp"

namespace lsim {

/// Replicas share a clock and are compared cycle by cycle.
struct TightCoupling {
  std::uint64_t skew_tolerance_cycles = 2;
};
/// Replicas run asynchronously; outputs are compared within a window that
/// opens at the first arrival.
struct LooseCoupling {
  std::uint64_t rendezvous_window_ns = 1;
};
using CouplingMode = std::variant<TightCoupling, LooseCoupling>;

/// Input delivery delay per replica, uniform in [0, bound_ns].
struct FeedJitter {
  std::uint64_t bound_ns = 0;
};

struct InputBarrier {
  std::uint64_t frame_id = 0;
  SimTime release_time;
  std::vector<std::uint32_t> replica_ids;     // healthy replicas, in input order
  std::vector<std::uint64_t> delivery_skew_ns;  // parallel to replica_ids
};

/// Thrown when a frame has no healthy replica to deliver to; the caller
/// escalates to SafeOff.
class NoHealthyReplicas : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// Releases `frame_id` to every healthy replica. Tight: zero skew. Loose: an
/// independent FeedJitter draw per replica, in replica order. When `queue` is
/// given an InputArrival event is scheduled per delivery.
InputBarrier distribute_input(std::uint64_t frame_id, SimTime release_time,
                              std::span<const Replica> replicas, const CouplingMode& mode,
                              const FeedJitter& feed, Rng& rng, EventQueue* queue = nullptr);

struct Arrival {
  std::uint32_t replica_id = 0;
  SimTime time;
};

struct RendezvousComplete {
  std::vector<std::uint32_t> present_ids;
  std::uint64_t skew_ns = 0;  // latest - earliest arrival
};
struct RendezvousTimeout {
  std::vector<std::uint32_t> present_ids;
  std::vector<std::uint32_t> missing_ids;
};
using RendezvousOutcome = std::variant<RendezvousComplete, RendezvousTimeout>;

/// The window opens at the earliest arrival; every expected id arriving in
/// [first, first + window_ns] is present, every other expected id (late or
/// absent) is missing. Throws ProtocolError for duplicate or unexpected ids
/// and ConfigError for a zero window.
RendezvousOutcome rendezvous(std::span<const std::uint32_t> expected_ids,
                             std::span<const Arrival> arrivals, std::uint64_t window_ns);

/// Moment at which the checker can decide: the last in-window arrival when
/// every expected replica made it, else the window deadline.
SimTime rendezvous_decision_time(const RendezvousOutcome& outcome,
                                 std::span<const Arrival> arrivals, std::uint64_t window_ns);

enum class DivergenceReason { KindMismatch, DigestMismatch, CycleSkew, LengthMismatch };

const char* to_string(DivergenceReason r) noexcept;

struct TraceMatch {};
struct TraceDivergence {
  std::size_t event_index = 0;
  DivergenceReason reason = DivergenceReason::KindMismatch;
  std::int64_t cycle_delta = 0;  // cycle_a - cycle_b at the diverging event
};
using TraceComparison = std::variant<TraceMatch, TraceDivergence>;

/// Event-by-event comparison; the first divergence wins. A length
/// difference is reported at the first index missing from the shorter trace.
TraceComparison compare_bus_traces(const BusTrace& a, const BusTrace& b,
                                   std::uint64_t skew_tolerance_cycles);

/// Two-step exchange: master send, slave receive, slave send, master
/// receive. t1/t4 are master-clock readings, t2/t3 slave-clock readings.
struct PtpExchange {
  SimTime t1, t2, t3, t4;
};

struct PtpEstimate {
  std::int64_t offset_ns = 0;  // slave ahead of master => positive
  std::int64_t path_delay_ns = 0;
};

/// offset = ((t2-t1) - (t4-t3)) / 2, delay = ((t2-t1) + (t4-t3)) / 2, both
/// truncated toward zero. Throws InconsistentExchangeError when t4 < t1,
/// t3 < t2, or the delay comes out negative.
PtpEstimate estimate_ptp_offset(const PtpExchange& x);

/// Builds the exchange a slave whose clock runs `slave_offset_ns` ahead of
/// the master would record, for a master send at `master_send` and the given
/// one-way delays. Throws SimulationError if a slave reading would precede 0.
PtpExchange simulate_ptp_exchange(SimTime master_send, std::int64_t slave_offset_ns,
                                  std::uint64_t forward_delay_ns, std::uint64_t reverse_delay_ns,
                                  std::uint64_t residence_ns);

struct AlignedTimestamps {
  std::vector<SimTime> times;
  std::uint64_t clamped = 0;  // readings that would have gone below 0
};

/// Shifts slave-clock readings by -offset_ns onto the master timebase.
AlignedTimestamps align_timestamps(std::span<const SimTime> samples, std::int64_t offset_ns);

}  // namespace lsim
