#include "lsim/replica.hpp"

#include <algorithm>

#include "lsim/errors.hpp"
#include "lsim/kernels.hpp"

namespace lsim {

void EngineConfig::validate() const {
  if (cycles_per_mac == 0 || cycles_per_load == 0 || cycles_per_store == 0) {
    throw ConfigError("engine cycles_per_mac/load/store must be positive");
  }
}

const char* to_string(BusEventKind k) noexcept {
  switch (k) {
    case BusEventKind::Fetch: return "fetch";
    case BusEventKind::Load: return "load";
    case BusEventKind::Execute: return "execute";
    case BusEventKind::Store: return "store";
  }
  return "?";
}

WeightSet gen_weights(std::uint64_t seed, std::span<const std::size_t> arch) {
  if (arch.size() < 2) throw ConfigError("arch needs at least two layer widths");
  for (auto w : arch) {
    if (w == 0 || w > kMaxLayerWidth) {
      throw ConfigError("layer width " + std::to_string(w) + " outside [1, " +
                        std::to_string(kMaxLayerWidth) + "]");
    }
  }
  constexpr std::int64_t kBound = 1 << 12;
  Rng rng(seed);
  WeightSet ws;
  for (std::size_t i = 0; i + 1 < arch.size(); ++i) {
    const std::size_t in = arch[i];
    const std::size_t out = arch[i + 1];
    std::vector<std::int16_t> w(out * in);
    for (auto& v : w) v = static_cast<std::int16_t>(rng.between(-kBound, kBound));
    std::vector<std::int16_t> b(out);
    for (auto& v : b) v = static_cast<std::int16_t>(rng.between(-kBound, kBound));
    ws.layers.push_back({FixedPointTensor({out, in}, std::move(w)),
                         FixedPointTensor({out}, std::move(b)),
                         i + 2 == arch.size() ? Activation::None : Activation::ReLU});
  }
  return ws;
}

InferenceResult infer(const WeightSet& weights, const FixedPointTensor& input,
                      const EngineConfig& engine) {
  if (weights.layers.empty()) throw ConfigError("weight set has no layers");
  if (input.shape().size() != 1 || input.shape()[0] != weights.input_width()) {
    throw DimensionError("input must be a vector of width " +
                         std::to_string(weights.input_width()));
  }
  InferenceResult r;
  r.trace.reserve(4 * weights.layers.size());
  std::uint64_t cycle = engine.pipeline_startup_cycles;
  FixedPointTensor x = input;
  for (const auto& layer : weights.layers) {
    const std::uint64_t in = layer.in_width();
    const std::uint64_t out = layer.out_width();
    if (x.size() != in) throw DimensionError("layer input width mismatch");

    Fnv1a fetch;
    fetch.update(layer.weights);
    fetch.update(layer.bias);
    r.trace.push_back({cycle, BusEventKind::Fetch, fetch.value()});
    cycle += (out * in + out) * engine.cycles_per_load;

    r.trace.push_back({cycle, BusEventKind::Load, digest(x)});
    cycle += in * engine.cycles_per_load;

    FixedPointTensor y({static_cast<std::size_t>(out)});
    kernels::dense(layer.weights.data(), layer.bias.data(), x.data(), y.data());
    r.trace.push_back({cycle, BusEventKind::Execute, digest(y)});
    cycle += out * in * engine.cycles_per_mac;

    if (layer.activation == Activation::ReLU) {
      for (auto& v : y.data()) v = std::max<std::int16_t>(v, 0);
    }
    r.trace.push_back({cycle, BusEventKind::Store, digest(y)});
    cycle += out * engine.cycles_per_store;
    x = std::move(y);
  }
  r.output = std::move(x);
  r.compute_cycles = cycle;
  return r;
}

std::size_t argmax(const FixedPointTensor& t) {
  const auto d = t.data();
  if (d.empty()) throw DimensionError("argmax of an empty tensor");
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

FixedPointTensor make_frame_input(std::uint64_t seed, std::uint64_t frame_id, std::size_t width) {
  Rng rng = Rng(seed).child("frame", frame_id);
  std::vector<std::int16_t> data(width);
  for (auto& v : data) v = static_cast<std::int16_t>(rng.between(-kOne, kOne));
  return FixedPointTensor::vector(std::move(data));
}

ReplicaOutput make_replica_output(std::uint32_t replica_id, std::uint64_t frame_id,
                                  FixedPointTensor output, std::uint64_t compute_cycles,
                                  SimTime completion_time, BusTrace trace) {
  ReplicaOutput o;
  o.replica_id = replica_id;
  o.frame_id = frame_id;
  o.classification = argmax(output);
  o.digest = digest(output);
  o.output = std::move(output);
  o.compute_cycles = compute_cycles;
  o.completion_time = completion_time;
  o.trace = std::move(trace);
  return o;
}

// ---------------------------------------------------------------------------

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_bit(unsigned bit) {
  if (bit > 15) throw ConfigError("bit index " + std::to_string(bit) + " outside [0, 15]");
}

void flip(std::int16_t& v, unsigned bit) {
  v = static_cast<std::int16_t>(static_cast<std::uint16_t>(v) ^ (1u << bit));
}

bool trigger_fires(const FaultTrigger& trigger, const FaultContext& ctx, Rng& rng) {
  return std::visit(overloaded{
                        [&](const OnFrame& t) {
                          return t.frame_id == ctx.frame_id && t.repetition == ctx.repetition;
                        },
                        [](const Always&) { return true; },
                        [&](const WithProbability& t) { return rng.uniform() < t.p; },
                    },
                    trigger);
}

FaultPhase phase_of(const FaultKind& k) {
  return std::holds_alternative<WeightBitFlip>(k) ? FaultPhase::PreInference
                                                  : FaultPhase::PostInference;
}

}  // namespace

std::string fault_kind_name(const FaultKind& k) {
  return std::visit(overloaded{
                        [](const WeightBitFlip&) { return std::string("weight_bit_flip"); },
                        [](const OutputBitFlip&) { return std::string("output_bit_flip"); },
                        [](const ExtraDelay&) { return std::string("extra_delay"); },
                        [](const DropOutput&) { return std::string("drop_output"); },
                        [](const StuckOutput&) { return std::string("stuck_output"); },
                    },
                    k);
}

bool is_value_fault(const FaultKind& k) noexcept {
  return std::holds_alternative<WeightBitFlip>(k) || std::holds_alternative<OutputBitFlip>(k) ||
         std::holds_alternative<StuckOutput>(k);
}

void validate_fault(const FaultSpec& fault, const WeightSet& weights) {
  std::visit(overloaded{
                 [&](const WeightBitFlip& f) {
                   check_bit(f.bit);
                   if (f.layer >= weights.layers.size()) {
                     throw ConfigError("weight fault layer " + std::to_string(f.layer) +
                                       " out of range");
                   }
                   if (f.element_index >= weights.layers[f.layer].weights.size()) {
                     throw ConfigError("weight fault element " + std::to_string(f.element_index) +
                                       " out of range");
                   }
                 },
                 [&](const OutputBitFlip& f) {
                   check_bit(f.bit);
                   if (f.element_index >= weights.output_width()) {
                     throw ConfigError("output fault element " + std::to_string(f.element_index) +
                                       " out of range");
                   }
                 },
                 [](const auto&) {},
             },
             fault.kind);
  if (const auto* p = std::get_if<WithProbability>(&fault.trigger)) {
    if (!(p->p >= 0.0 && p->p <= 1.0)) throw ConfigError("fault probability outside [0, 1]");
  }
}

bool apply_fault(const FaultSpec& fault, FaultContext& ctx, Rng& rng) {
  if (phase_of(fault.kind) != ctx.phase) return false;
  if (!trigger_fires(fault.trigger, ctx, rng)) return false;
  std::visit(overloaded{
                 [&](const WeightBitFlip& f) {
                   if (ctx.weights == nullptr) throw ConfigError("weight fault without weights");
                   flip(ctx.weights->layers.at(f.layer).weights[f.element_index], f.bit);
                 },
                 [&](const OutputBitFlip& f) {
                   if (ctx.output) flip((*ctx.output)[f.element_index], f.bit);
                 },
                 [&](const ExtraDelay& f) {
                   ctx.completion_time = ctx.completion_time + f.ns;
                   ctx.extra_delay_ns += f.ns;
                 },
                 [&](const DropOutput&) {
                   ctx.output.reset();
                   ctx.dropped = true;
                 },
                 [&](const StuckOutput&) {
                   if (ctx.output && ctx.previous_output != nullptr && *ctx.previous_output) {
                     ctx.output = **ctx.previous_output;
                   }
                 },
             },
             fault.kind);
  return true;
}


const char* to_string(Health h) noexcept {
  switch (h) {
    case Health::Healthy: return "healthy";
    case Health::Failed: return "failed";
    case Health::SwitchedOff: return "switched_off";
  }
  return "?";
}

}  // namespace lsim
