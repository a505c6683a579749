#include <gtest/gtest.h>

#include "lsim/coupling.hpp"
#include "lsim/errors.hpp"

using namespace lsim;

namespace {

std::vector<Replica> replicas(std::size_t n) {
  std::vector<Replica> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i].id = static_cast<std::uint32_t>(i);
  return r;
}

BusTrace sample_trace() {
  return {{10, BusEventKind::Fetch, 1},
          {20, BusEventKind::Load, 2},
          {30, BusEventKind::Execute, 3},
          {40, BusEventKind::Store, 4},
          {50, BusEventKind::Fetch, 5}};
}

}  // namespace

TEST(DistributeInput, TightHasZeroSkew) {
  Rng rng(1);
  EventQueue q;
  const auto reps = replicas(3);
  const auto b = distribute_input(4, SimTime{100}, reps, TightCoupling{}, FeedJitter{5000}, rng, &q);
  EXPECT_EQ(b.frame_id, 4u);
  EXPECT_EQ(b.replica_ids, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(b.delivery_skew_ns, (std::vector<std::uint64_t>{0, 0, 0}));
  const auto ev = q.run_all();
  ASSERT_EQ(ev.size(), 3u);
  for (const auto& e : ev) {
    EXPECT_EQ(e.time, SimTime{100});
    EXPECT_EQ(e.kind, EventKind::InputArrival);
  }
}

TEST(DistributeInput, LooseWithoutJitterIsIdentical) {
  Rng rng(1);
  const auto reps = replicas(2);
  const auto b = distribute_input(0, SimTime{0}, reps, LooseCoupling{1000}, FeedJitter{0}, rng);
  EXPECT_EQ(b.delivery_skew_ns, (std::vector<std::uint64_t>{0, 0}));
}

TEST(DistributeInput, LooseSkewBoundedByJitter) {
  Rng rng(8);
  const auto reps = replicas(3);
  std::uint64_t max_skew = 0;
  for (std::uint64_t f = 0; f < 10000; ++f) {
    const auto b = distribute_input(f, SimTime{0}, reps, LooseCoupling{1000}, FeedJitter{250}, rng);
    const auto [lo, hi] = std::minmax_element(b.delivery_skew_ns.begin(), b.delivery_skew_ns.end());
    max_skew = std::max(max_skew, *hi - *lo);
  }
  EXPECT_LE(max_skew, 250u);
  EXPECT_GT(max_skew, 200u);  // the bound is actually approached
}

TEST(DistributeInput, SkipsUnhealthyAndFailsWithNone) {
  Rng rng(1);
  auto reps = replicas(3);
  reps[1].health = Health::Failed;
  const auto b = distribute_input(0, SimTime{0}, reps, TightCoupling{}, FeedJitter{}, rng);
  EXPECT_EQ(b.replica_ids, (std::vector<std::uint32_t>{0, 2}));
  for (auto& r : reps) r.health = Health::SwitchedOff;
  EXPECT_THROW(distribute_input(0, SimTime{0}, reps, TightCoupling{}, FeedJitter{}, rng),
               NoHealthyReplicas);
}

TEST(Rendezvous, BothInsideWindow) {
  const std::vector<std::uint32_t> ids{0, 1};
  const std::vector<Arrival> arr{{0, SimTime{100}}, {1, SimTime{105}}};
  const auto out = rendezvous(ids, arr, 10);
  const auto* c = std::get_if<RendezvousComplete>(&out);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->skew_ns, 5u);
  EXPECT_EQ(rendezvous_decision_time(out, arr, 10), SimTime{105});
}

TEST(Rendezvous, DroppedReplicaIsMissing) {
  const std::vector<std::uint32_t> ids{0, 1};
  const std::vector<Arrival> arr{{0, SimTime{100}}};
  const auto out = rendezvous(ids, arr, 10);
  const auto* t = std::get_if<RendezvousTimeout>(&out);
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->missing_ids, std::vector<std::uint32_t>{1});
  EXPECT_EQ(rendezvous_decision_time(out, arr, 10), SimTime{110});
}

TEST(Rendezvous, LateArrivalIsMissing) {
  const std::vector<std::uint32_t> ids{0, 1};
  const std::vector<Arrival> arr{{0, SimTime{100}}, {1, SimTime{115}}};
  const auto out = rendezvous(ids, arr, 10);
  const auto* t = std::get_if<RendezvousTimeout>(&out);
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->present_ids, std::vector<std::uint32_t>{0});
  EXPECT_EQ(t->missing_ids, std::vector<std::uint32_t>{1});
}

TEST(Rendezvous, WindowBoundaryInclusive) {
  const std::vector<std::uint32_t> ids{0, 1};
  const std::vector<Arrival> arr{{1, SimTime{100}}, {0, SimTime{110}}};
  EXPECT_TRUE(std::holds_alternative<RendezvousComplete>(rendezvous(ids, arr, 10)));
}

TEST(Rendezvous, ProtocolErrors) {
  const std::vector<std::uint32_t> ids{0, 1};
  const std::vector<Arrival> dup{{0, SimTime{1}}, {0, SimTime{2}}};
  EXPECT_THROW(rendezvous(ids, dup, 10), ProtocolError);
  const std::vector<Arrival> stranger{{7, SimTime{1}}};
  EXPECT_THROW(rendezvous(ids, stranger, 10), ProtocolError);
  EXPECT_THROW(rendezvous(ids, std::vector<Arrival>{}, 0), ConfigError);
}

TEST(Rendezvous, NoArrivalsAllMissing) {
  const std::vector<std::uint32_t> ids{0, 1, 2};
  const auto out = rendezvous(ids, std::vector<Arrival>{}, 10);
  EXPECT_EQ(std::get<RendezvousTimeout>(out).missing_ids, ids);
}

TEST(BusTrace, IdenticalMatch) {
  EXPECT_TRUE(std::holds_alternative<TraceMatch>(compare_bus_traces(sample_trace(), sample_trace(), 0)));
}

TEST(BusTrace, ShiftWithinTolerance) {
  auto b = sample_trace();
  for (auto& e : b) e.cycle += 2;
  EXPECT_TRUE(std::holds_alternative<TraceMatch>(compare_bus_traces(sample_trace(), b, 2)));
  const auto d = std::get<TraceDivergence>(compare_bus_traces(sample_trace(), b, 1));
  EXPECT_EQ(d.event_index, 0u);
  EXPECT_EQ(d.reason, DivergenceReason::CycleSkew);
  EXPECT_EQ(d.cycle_delta, -2);
}

TEST(BusTrace, DigestDivergence) {
  auto b = sample_trace();
  b[3].payload_digest ^= 1;
  const auto d = std::get<TraceDivergence>(compare_bus_traces(sample_trace(), b, 2));
  EXPECT_EQ(d.event_index, 3u);
  EXPECT_EQ(d.reason, DivergenceReason::DigestMismatch);
}

TEST(BusTrace, KindBeatsDigestAndFirstWins) {
  auto b = sample_trace();
  b[1].kind = BusEventKind::Store;
  b[1].payload_digest = 99;
  b[4].payload_digest = 99;
  const auto d = std::get<TraceDivergence>(compare_bus_traces(sample_trace(), b, 2));
  EXPECT_EQ(d.event_index, 1u);
  EXPECT_EQ(d.reason, DivergenceReason::KindMismatch);
}

TEST(BusTrace, LengthReportedAtFirstMissingIndex) {
  auto b = sample_trace();
  b.pop_back();
  const auto d = std::get<TraceDivergence>(compare_bus_traces(sample_trace(), b, 2));
  EXPECT_EQ(d.event_index, 4u);
  EXPECT_EQ(d.reason, DivergenceReason::LengthMismatch);
}

TEST(BusTrace, SymmetricUpToSkewSign) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    auto a = sample_trace();
    auto b = sample_trace();
    for (auto& e : b) e.cycle += rng.below(5);
    if (rng.below(4) == 0) b[rng.below(b.size())].payload_digest ^= 1;
    if (rng.below(4) == 0) b.resize(rng.below(b.size() + 1));
    const auto ab = compare_bus_traces(a, b, 2);
    const auto ba = compare_bus_traces(b, a, 2);
    ASSERT_EQ(ab.index(), ba.index());
    if (const auto* d = std::get_if<TraceDivergence>(&ab)) {
      const auto& e = std::get<TraceDivergence>(ba);
      EXPECT_EQ(d->event_index, e.event_index);
      EXPECT_EQ(d->reason, e.reason);
      EXPECT_EQ(d->cycle_delta, -e.cycle_delta);
    }
  }
}

TEST(Ptp, SymmetricExchange) {
  const auto e = estimate_ptp_offset({SimTime{0}, SimTime{10}, SimTime{20}, SimTime{30}});
  EXPECT_EQ(e.offset_ns, 0);
  EXPECT_EQ(e.path_delay_ns, 10);
}

TEST(Ptp, OffsetTwo) {
  const auto e = estimate_ptp_offset({SimTime{0}, SimTime{12}, SimTime{20}, SimTime{28}});
  EXPECT_EQ(e.offset_ns, 2);
  EXPECT_EQ(e.path_delay_ns, 10);
}

TEST(Ptp, TruncatesTowardZero) {
  // (t2-t1) - (t4-t3) = 9 - 12 = -3 -> -1
  const auto e = estimate_ptp_offset({SimTime{0}, SimTime{9}, SimTime{20}, SimTime{32}});
  EXPECT_EQ(e.offset_ns, -1);
}

TEST(Ptp, InconsistentExchanges) {
  EXPECT_THROW(estimate_ptp_offset({SimTime{10}, SimTime{12}, SimTime{20}, SimTime{5}}),
               InconsistentExchangeError);
  EXPECT_THROW(estimate_ptp_offset({SimTime{0}, SimTime{12}, SimTime{11}, SimTime{30}}),
               InconsistentExchangeError);
  // slave clock far behind the master: forward leg negative beyond the return leg
  EXPECT_THROW(estimate_ptp_offset({SimTime{100}, SimTime{0}, SimTime{1}, SimTime{100}}),
               InconsistentExchangeError);
}

TEST(Ptp, SimulatedOffsetRecoveredExactly) {
  const auto x = simulate_ptp_exchange(SimTime{10'000}, 500, 700, 700, 1000);
  const auto e = estimate_ptp_offset(x);
  EXPECT_EQ(e.offset_ns, 500);
  EXPECT_EQ(e.path_delay_ns, 700);
}

TEST(Ptp, AsymmetryErrorIsHalf) {
  for (std::int64_t asym : {0, 2, 10, 400, 1000}) {
    const auto x = simulate_ptp_exchange(SimTime{5000}, -300, 500 + asym, 500, 250);
    EXPECT_EQ(estimate_ptp_offset(x).offset_ns - (-300), asym / 2);
  }
}

TEST(Align, IdentityAndShift) {
  const std::vector<SimTime> t{SimTime{10}, SimTime{12}};
  EXPECT_EQ(align_timestamps(t, 0).times, t);
  EXPECT_EQ(align_timestamps(t, 2).times, (std::vector<SimTime>{SimTime{8}, SimTime{10}}));
  EXPECT_EQ(align_timestamps(t, -5).times, (std::vector<SimTime>{SimTime{15}, SimTime{17}}));
}

TEST(Align, ClampsBelowZero) {
  const std::vector<SimTime> t{SimTime{3}, SimTime{12}};
  const auto a = align_timestamps(t, 5);
  EXPECT_EQ(a.times, (std::vector<SimTime>{SimTime{0}, SimTime{7}}));
  EXPECT_EQ(a.clamped, 1u);
}

TEST(Align, RemovesInjectedOffsetFromSkew) {
  // Slave clock reads 500 ns ahead; both replicas finish within +-50 ns.
  Rng rng(31);
  const auto est = estimate_ptp_offset(simulate_ptp_exchange(SimTime{1000}, 500, 600, 600, 100));
  double before = 0, after = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t master = 100'000 + rng.below(100);
    const std::uint64_t slave_true = 100'000 + rng.below(100);
    const std::vector<SimTime> slave_reading{SimTime{slave_true + 500}};
    const auto aligned = align_timestamps(slave_reading, est.offset_ns);
    before += static_cast<double>(slave_reading[0].ns) - static_cast<double>(master);
    after += static_cast<double>(aligned.times[0].ns) - static_cast<double>(master);
  }
  EXPECT_NEAR(before / n, 500.0, 10.0);
  EXPECT_NEAR(after / n, 0.0, 10.0);
}
