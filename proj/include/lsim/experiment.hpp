#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsim/config.hpp"
#include "lsim/profiler.hpp"

namespace lsim {

struct ReplicaProfile {
  std::uint32_t replica_id = 0;
  std::vector<std::uint64_t> samples_ns;  // in (frame, repetition) order
  std::optional<ProfileStats> stats;
  std::optional<OutlierReport> outliers;  // needs >= 3 samples
  std::vector<HistogramBin> histogram;
};

struct VerdictCounts {
  std::uint64_t pass = 0;
  std::uint64_t mismatch = 0;
  std::uint64_t timeout = 0;
  std::uint64_t degraded = 0;

  std::uint64_t total() const noexcept { return pass + mismatch + timeout + degraded; }
};

struct SafetyTransition {
  std::uint64_t t_ns = 0;
  std::uint64_t frame_id = 0;
  std::uint64_t repetition = 0;
  SafetyState state = SafetyState::Operational;
};

struct FaultSummary {
  std::uint64_t injected = 0;  // triggered and applied
  std::map<std::string, std::uint64_t> by_kind;
  std::uint64_t value_faults_altering_output = 0;
  std::uint64_t detected = 0;    // inference not passed
  std::uint64_t masked = 0;      // passed without the faulted replica
  std::uint64_t undetected = 0;  // passed with the faulted replica agreeing
  std::uint64_t undetected_altering = 0;  // of those, output actually altered
};

struct PtpRecord {
  std::uint32_t replica_id = 0;
  std::int64_t true_offset_ns = 0;
  PtpEstimate estimate;
};

struct ExperimentReport {
  nlohmann::json config;
  std::uint64_t frames = 0;
  std::uint64_t repetitions = 0;
  std::vector<ReplicaProfile> replicas;
  VerdictCounts verdicts;
  std::uint64_t delivered = 0;
  std::uint64_t suppressed = 0;
  SafetyState final_state = SafetyState::Operational;
  std::vector<SafetyTransition> safety_timeline;
  FaultSummary faults;
  std::vector<std::uint64_t> skews_ns;  // one per Complete rendezvous
  std::optional<ProfileStats> skew_stats;
  std::uint64_t bus_divergences = 0;
  std::vector<PtpRecord> ptp;
  std::uint64_t final_time_ns = 0;
};

/// Runs the turnaround-measurement protocol: for every frame and
/// repetition, distribute the input, infer on each healthy replica with its
/// faults applied, rendezvous, compare bus traces (tight coupling), vote, and
/// step the safety switch. When `trace` is given, JSON Lines trace records
/// are written to it in (t_ns, seq) order; `events`, when given, receives
/// every processed simulator event. Deterministic in (config, seed).
ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* trace = nullptr,
                                std::vector<Event>* events = nullptr);

nlohmann::json to_json(const ExperimentReport& r);

/// Reads back the latency samples of a report.json; other fields are kept
/// as-is in `config`.
ExperimentReport report_from_json(const nlohmann::json& j);

class ComparisonRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReplicaComparison {
  std::uint32_t replica_id = 0;
  ComparisonReport ks;
  ProfileStats a;
  ProfileStats b;
  std::size_t outliers_a = 0;
  std::size_t outliers_b = 0;
};

struct RunComparison {
  std::vector<ReplicaComparison> replicas;
  std::string table;
};

/// KS comparison of each replica present in both runs, plus a side-by-side
/// table. Throws ComparisonRefused when a run has no replica in common or
/// fewer than 4 samples on either side.
RunComparison compare_runs(const ExperimentReport& a, const ExperimentReport& b, double alpha = 0.01,
                           double outlier_threshold = 3.5);

nlohmann::json to_json(const RunComparison& c);

}  // namespace lsim
