#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsim/coupling.hpp"
#include "lsim/event_sim.hpp"
#include "lsim/replica.hpp"
#include "lsim/voter.hpp"

namespace lsim {

inline constexpr const char* kSeedEnvVar = "LOCKSTEP_SEED";

struct ReplicaConfig {
  std::uint32_t id = 0;
  EngineConfig engine;
  ClockDomain clock;
  /// How far this replica's clock reads ahead of true time.
  std::int64_t clock_offset_ns = 0;
  JitterModel host_jitter;
  Health health = Health::Healthy;

  friend bool operator==(const ReplicaConfig&, const ReplicaConfig&) = default;
};

struct PtpConfig {
  bool enabled = false;
  std::uint64_t forward_delay_ns = 500;
  std::uint64_t reverse_delay_ns = 500;
  std::uint64_t residence_ns = 1000;

  friend bool operator==(const PtpConfig&, const PtpConfig&) = default;
};

struct TopologyConfig {
  std::string preset;  // "custom" when built without one
  std::vector<ReplicaConfig> replicas;
  CouplingMode coupling = LooseCoupling{};
  VotingPolicy policy;
  Comparator comparator = ExactComparator{};
  FeedJitter feed_jitter;
  bool bus_trace_compare = false;
  bool in_order = true;
  std::uint32_t debounce_threshold = 1;
  PtpConfig ptp;
};

struct WorkloadConfig {
  std::uint64_t frame_count = 500;
  std::uint64_t repetitions_per_frame = 100;
  std::vector<std::size_t> arch{16, 32, 10};
  std::uint64_t inter_frame_gap_ns = 0;

  friend bool operator==(const WorkloadConfig&, const WorkloadConfig&) = default;
};

struct FaultAssignment {
  std::uint32_t replica_id = 0;
  FaultSpec fault;
};

struct ProfilerConfig {
  std::size_t bin_count = 50;
  double outlier_threshold = 3.5;
  double alpha = 0.01;

  friend bool operator==(const ProfilerConfig&, const ProfilerConfig&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  TopologyConfig topology;
  WorkloadConfig workload;
  std::vector<FaultAssignment> faults;
  ProfilerConfig profiler;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Every problem found while validating a config, as "path: message".
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::vector<std::string> known_presets();

/// Full topology for a named preset. Throws ConfigError naming the known
/// presets for anything else.
TopologyConfig expand_preset(const std::string& name);

/// Validates and expands a config document. The seed comes from the
/// document, else from `env_seed`; validation collects every error before
/// throwing ConfigValidationError.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              std::optional<std::uint64_t> env_seed = std::nullopt);

/// Reads `path` and parses it, taking the fallback seed from LOCKSTEP_SEED.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seed from LOCKSTEP_SEED, if set and numeric.
std::optional<std::uint64_t> seed_from_env();

/// Fully expanded form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// Checks a programmatically built config; throws ConfigValidationError.
void validate(const ExperimentConfig& c);

}  // namespace lsim
