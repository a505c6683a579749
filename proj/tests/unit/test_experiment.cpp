#include <sstream>

#include <gtest/gtest.h>

#include "lsim/experiment.hpp"

using namespace lsim;
using nlohmann::json;

namespace {

ExperimentConfig small(const std::string& preset, std::uint64_t frames, std::uint64_t reps,
                       std::uint64_t seed = 11) {
  return parse_config(json{{"seed", seed},
                           {"preset", preset},
                           {"workload", {{"frame_count", frames}, {"repetitions_per_frame", reps}}}});
}

std::vector<json> trace_records(const std::string& text, const std::string& kind) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    auto j = json::parse(line);
    if (j["kind"] == kind) out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

TEST(Experiment, TightBaselineAllPassZeroSkew) {
  const auto c = small("fpga-duplex-tight", 20, 5);
  const auto r = run_experiment(c);
  EXPECT_EQ(r.verdicts.pass, 100u);
  EXPECT_EQ(r.verdicts.total(), 100u);
  ASSERT_EQ(r.skews_ns.size(), 100u);
  for (auto s : r.skews_ns) EXPECT_EQ(s, 0u);
  EXPECT_EQ(r.bus_divergences, 0u);
  EXPECT_EQ(r.final_state, SafetyState::Operational);
  EXPECT_EQ(r.delivered, 100u);
  // Identical channels see identical turnarounds.
  EXPECT_EQ(r.replicas[0].samples_ns, r.replicas[1].samples_ns);
}

TEST(Experiment, OutputFlipOnFrameSevenTripsSafety) {
  auto c = small("gpu-duplex-loose", 10, 3);
  c.faults.push_back({1, FaultSpec{OutputBitFlip{0, 0}, OnFrame{7, 0}}});
  std::ostringstream trace;
  const auto r = run_experiment(c, &trace);
  EXPECT_EQ(r.verdicts.mismatch, 1u);
  EXPECT_EQ(r.verdicts.pass, 29u);
  EXPECT_EQ(r.delivered, 21u);
  EXPECT_EQ(r.suppressed, 9u);
  ASSERT_EQ(r.safety_timeline.size(), 1u);
  EXPECT_EQ(r.safety_timeline[0].frame_id, 7u);
  EXPECT_EQ(r.safety_timeline[0].repetition, 0u);
  EXPECT_EQ(r.safety_timeline[0].state, SafetyState::SafeOff);
  EXPECT_EQ(r.faults.injected, 1u);
  EXPECT_EQ(r.faults.detected, 1u);
  EXPECT_EQ(r.faults.value_faults_altering_output, 1u);

  const auto actions = trace_records(trace.str(), "safety_action");
  ASSERT_EQ(actions.size(), 30u);
  for (const auto& a : actions) {
    const auto frame = a["frame_id"].get<std::uint64_t>();
    if (frame < 7) {
      EXPECT_EQ(a["action"], "deliver_output");
    } else if (frame == 7 && a["repetition"] == 0) {
      EXPECT_EQ(a["action"], "enter_safe_off");
    } else {
      EXPECT_EQ(a["action"], "suppress_output");
      EXPECT_EQ(a["state"], "safe_off");
    }
  }
  EXPECT_EQ(trace_records(trace.str(), "fault").size(), 1u);
}

TEST(Experiment, Deterministic) {
  auto c = small("gpu-duplex-loose", 15, 4);
  c.faults.push_back({0, FaultSpec{ExtraDelay{2000}, WithProbability{0.2}}});
  std::ostringstream a, b;
  std::vector<Event> ea, eb;
  const auto ra = run_experiment(c, &a, &ea);
  const auto rb = run_experiment(c, &b, &eb);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(ea, eb);
  EXPECT_EQ(to_json(ra).dump(), to_json(rb).dump());
  EXPECT_FALSE(a.str().empty());
  c.seed += 1;
  std::ostringstream other;
  run_experiment(c, &other);
  EXPECT_NE(a.str(), other.str());
}

TEST(Experiment, TraceIsTimeOrdered) {
  std::ostringstream trace;
  run_experiment(small("gpu-duplex-loose", 20, 5), &trace);
  std::istringstream in(trace.str());
  std::uint64_t last = 0;
  std::uint64_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const auto t = json::parse(line)["t_ns"].get<std::uint64_t>();
    EXPECT_GE(t, last);
    last = t;
  }
  EXPECT_GT(lines, 100u);
}

TEST(Experiment, TightExtraDelayFlaggedOnFaultedFramesOnly) {
  auto c = small("fpga-duplex-tight", 12, 1);
  const auto three_cycles = cycles_to_time(3, c.topology.replicas[0].clock);
  for (std::uint64_t f : {2u, 5u, 9u}) c.faults.push_back({1, FaultSpec{ExtraDelay{three_cycles}, OnFrame{f, 0}}});
  std::ostringstream trace;
  const auto r = run_experiment(c, &trace);
  for (const auto& v : trace_records(trace.str(), "verdict")) {
    const auto f = v["frame_id"].get<std::uint64_t>();
    const bool faulted = f == 2 || f == 5 || f == 9;
    EXPECT_EQ(v["verdict"] != "pass", faulted) << f;
  }
  EXPECT_EQ(r.verdicts.pass, 9u);
}

TEST(Experiment, TwoOfThreeMasksSingleReplicaFault) {
  auto c = parse_config(json{{"seed", 5},
                             {"preset", "gpu-duplex-loose"},
                             {"topology", {{"replica_count", 3}, {"policy", "2oo3"}}},
                             {"workload", {{"frame_count", 30}, {"repetitions_per_frame", 2}}}});
  c.faults.push_back({2, FaultSpec{OutputBitFlip{3, 9}, Always{}}});
  const auto r = run_experiment(c);
  EXPECT_EQ(r.verdicts.pass, 60u);
  EXPECT_EQ(r.faults.masked, 60u);
  EXPECT_EQ(r.faults.undetected, 0u);
  EXPECT_EQ(r.final_state, SafetyState::Operational);
}

TEST(Experiment, DroppedOutputTimesOut) {
  auto c = small("gpu-duplex-loose", 5, 2);
  c.topology.debounce_threshold = 100;
  c.faults.push_back({0, FaultSpec{DropOutput{}, OnFrame{3, 1}}});
  std::ostringstream trace;
  const auto r = run_experiment(c, &trace);
  EXPECT_EQ(r.verdicts.timeout, 1u);
  EXPECT_EQ(r.verdicts.pass, 9u);
  EXPECT_EQ(r.replicas[0].samples_ns.size(), 9u);
  EXPECT_EQ(r.replicas[1].samples_ns.size(), 10u);
  const auto rv = trace_records(trace.str(), "rendezvous");
  ASSERT_EQ(rv.size(), 10u);
  EXPECT_EQ(rv[7]["outcome"], "timeout");
  EXPECT_EQ(rv[7]["missing_ids"], json::array({0}));
}

TEST(Experiment, FaultAccountingAddsUp) {
  auto c = small("gpu-duplex-loose", 40, 3);
  c.topology.debounce_threshold = 1000;
  c.faults.push_back({0, FaultSpec{WeightBitFlip{0, 5, 14}, WithProbability{0.3}}});
  c.faults.push_back({1, FaultSpec{StuckOutput{}, WithProbability{0.1}}});
  const auto r = run_experiment(c);
  EXPECT_GT(r.faults.injected, 0u);
  EXPECT_EQ(r.faults.detected + r.faults.masked + r.faults.undetected, r.faults.injected);
  // Exact duplex comparison never lets an altered output through.
  EXPECT_EQ(r.faults.undetected_altering, 0u);
}

TEST(Experiment, NoHealthyReplicaForcesSafeOff) {
  auto c = small("gpu-duplex-loose", 2, 1);
  for (auto& rc : c.topology.replicas) rc.health = Health::Failed;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.verdicts.degraded, 2u);
  EXPECT_EQ(r.final_state, SafetyState::SafeOff);
}

TEST(Experiment, PtpRecoversClockOffset) {
  auto c = small("gpu-duplex-loose", 50, 2);
  c.topology.replicas[1].clock_offset_ns = 500;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.ptp.size(), 1u);
  EXPECT_EQ(r.ptp[0].true_offset_ns, 500);
  EXPECT_EQ(r.ptp[0].estimate.offset_ns, 500);
  EXPECT_EQ(r.verdicts.pass, 100u);
}

TEST(Experiment, ReportRoundTripsSamples) {
  const auto r = run_experiment(small("gpu-duplex-loose", 6, 2));
  const auto back = report_from_json(json::parse(to_json(r).dump()));
  ASSERT_EQ(back.replicas.size(), 2u);
  EXPECT_EQ(back.replicas[1].samples_ns, r.replicas[1].samples_ns);
  EXPECT_EQ(back.frames, 6u);
}

TEST(Compare, SelfComparisonIsNotDistinguishable) {
  const auto r = run_experiment(small("gpu-duplex-loose", 20, 5));
  const auto cmp = compare_runs(r, r);
  ASSERT_EQ(cmp.replicas.size(), 2u);
  for (const auto& rc : cmp.replicas) {
    EXPECT_EQ(rc.ks.ks_statistic, 0.0);
    EXPECT_FALSE(rc.ks.distinguishable);
  }
  EXPECT_NE(cmp.table.find("replica"), std::string::npos);
}

TEST(Compare, ShippedBoardsAreDistinguishable) {
  const auto a = run_experiment(load_config(std::string(LSIM_SOURCE_DIR) + "/configs/board-a.json"));
  const auto b = run_experiment(load_config(std::string(LSIM_SOURCE_DIR) + "/configs/board-b.json"));
  const auto cmp = compare_runs(a, b, 0.01);
  for (const auto& rc : cmp.replicas) {
    EXPECT_TRUE(rc.ks.distinguishable) << rc.replica_id;
    EXPECT_GT(rc.ks.ks_statistic, rc.ks.critical_value);
  }
}

TEST(Compare, EmptyReportRefused) {
  const auto r = run_experiment(small("gpu-duplex-loose", 4, 2));
  ExperimentReport empty;
  EXPECT_THROW(compare_runs(r, empty), ComparisonRefused);
  EXPECT_THROW(compare_runs(empty, r), ComparisonRefused);
}
