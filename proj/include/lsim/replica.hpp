#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lsim/fixed_point.hpp"
#include "lsim/rng.hpp"
#include "lsim/sim_time.hpp"

namespace lsim {

/// Widest layer the engine accepts; keeps the 64-bit accumulator bound
/// macs * 2^30 + 2^23 far from overflow.
inline constexpr std::size_t kMaxLayerWidth = 1024;

struct EngineConfig {
  std::uint64_t cycles_per_mac = 1;
  std::uint64_t cycles_per_load = 1;
  std::uint64_t cycles_per_store = 1;
  std::uint64_t pipeline_startup_cycles = 0;

  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

enum class BusEventKind { Fetch, Load, Execute, Store };

const char* to_string(BusEventKind k) noexcept;

struct BusEvent {
  std::uint64_t cycle = 0;
  BusEventKind kind = BusEventKind::Fetch;
  std::uint64_t payload_digest = 0;

  friend bool operator==(const BusEvent&, const BusEvent&) = default;
};

using BusTrace = std::vector<BusEvent>;

struct InferenceResult {
  FixedPointTensor output;
  std::uint64_t compute_cycles = 0;
  BusTrace trace;
};

/// Random fixed-point MLP. Layer i maps arch[i] -> arch[i+1]; hidden layers
/// use ReLU, the last none. Elements are uniform in [-2^12, 2^12] raw units,
/// drawn weights-then-bias per layer from a SplitMix64 stream seeded with
/// `seed`. Throws ConfigError for fewer than two widths or a width outside
/// [1, kMaxLayerWidth].
WeightSet gen_weights(std::uint64_t seed, std::span<const std::size_t> arch);

/// Runs the network on a 1-D input. Per layer the bus trace carries
///   Fetch   (weights+bias digest)  at the layer start,
///   Load    (input digest)         after the weight/bias loads,
///   Execute (pre-activation digest) after the input loads,
///   Store   (output digest)        after the MACs,
/// and the layer costs macs*cpm + (in + out*in + out)*cpl + out*cps cycles.
/// Throws DimensionError if the input does not match the first layer.
InferenceResult infer(const WeightSet& weights, const FixedPointTensor& input,
                      const EngineConfig& engine);

/// Lowest index holding the maximum element.
std::size_t argmax(const FixedPointTensor& t);

/// Synthetic input frame for `frame_id`, elements uniform in [-1.0, 1.0].
FixedPointTensor make_frame_input(std::uint64_t seed, std::uint64_t frame_id, std::size_t width);

struct ReplicaOutput {
  std::uint32_t replica_id = 0;
  std::uint64_t frame_id = 0;
  FixedPointTensor output;
  std::size_t classification = 0;
  std::uint64_t digest = 0;
  std::uint64_t compute_cycles = 0;
  SimTime completion_time;
  BusTrace trace;
};

/// Fills classification and digest from `output`.
ReplicaOutput make_replica_output(std::uint32_t replica_id, std::uint64_t frame_id,
                                  FixedPointTensor output, std::uint64_t compute_cycles,
                                  SimTime completion_time, BusTrace trace);

// ---------------------------------------------------------------------------
// Faults

struct WeightBitFlip {
  std::size_t layer = 0;
  std::size_t element_index = 0;
  unsigned bit = 0;
};
struct OutputBitFlip {
  std::size_t element_index = 0;
  unsigned bit = 0;
};
struct ExtraDelay {
  std::uint64_t ns = 0;
};
struct DropOutput {};
struct StuckOutput {};

using FaultKind = std::variant<WeightBitFlip, OutputBitFlip, ExtraDelay, DropOutput, StuckOutput>;

/// Fires on one repetition of one frame.
struct OnFrame {
  std::uint64_t frame_id = 0;
  std::uint64_t repetition = 0;
};
struct Always {};
/// Fires with probability p, drawing from the fault's own stream.
struct WithProbability {
  double p = 0.0;
};

using FaultTrigger = std::variant<OnFrame, Always, WithProbability>;

struct FaultSpec {
  FaultKind kind;
  FaultTrigger trigger;
};

std::string fault_kind_name(const FaultKind& k);

/// True for faults that corrupt values rather than timing.
bool is_value_fault(const FaultKind& k) noexcept;

/// Rejects out-of-range indices, bits outside [0,15], and probabilities
/// outside [0,1]. Called at configuration load, never during a run.
void validate_fault(const FaultSpec& fault, const WeightSet& weights);

enum class FaultPhase { PreInference, PostInference };

/// Mutable state a fault may act on. WeightBitFlip acts in the
/// PreInference phase; every other kind acts in PostInference.
struct FaultContext {
  FaultPhase phase = FaultPhase::PostInference;
  std::uint64_t frame_id = 0;
  std::uint64_t repetition = 0;
  WeightSet* weights = nullptr;
  std::optional<FixedPointTensor> output;
  const std::optional<FixedPointTensor>* previous_output = nullptr;
  SimTime completion_time;
  std::uint64_t extra_delay_ns = 0;
  bool dropped = false;
};

/// Evaluates the trigger (drawing from `rng` only for WithProbability, and
/// only in the fault's own phase) and applies the fault. Returns whether it
/// fired; StuckOutput with no previous output fires but changes nothing.
bool apply_fault(const FaultSpec& fault, FaultContext& ctx, Rng& rng);


enum class Health { Healthy, Failed, SwitchedOff };

const char* to_string(Health h) noexcept;

/// One redundant inference channel. Only Healthy replicas produce outputs.
struct Replica {
  std::uint32_t id = 0;
  EngineConfig engine;
  ClockDomain clock;
  WeightSet weights;
  std::vector<FaultSpec> faults;
  Health health = Health::Healthy;
};

}  // namespace lsim
