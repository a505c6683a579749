#include "lsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace lsim {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

// Collects errors instead of throwing so that one pass reports everything.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  bool object(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [k, _] : j.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
        fail(path.empty() ? k : path + "." + k, "unknown field");
      }
    }
  }

  void u64(const json& j, const char* key, const std::string& path, std::uint64_t& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else {
      fail(sub(path, key), "expected a non-negative integer");
    }
  }

  template <class T>
  void uint(const json& j, const char* key, const std::string& path, T& out) {
    std::uint64_t v = out;
    u64(j, key, path, v);
    if (v > std::numeric_limits<T>::max()) {
      fail(sub(path, key), "value too large");
      return;
    }
    out = static_cast<T>(v);
  }

  void i64(const json& j, const char* key, const std::string& path, std::int64_t& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
      out = v.get<std::int64_t>();
    } else {
      fail(sub(path, key), "expected an integer");
    }
  }

  void i32(const json& j, const char* key, const std::string& path, std::int32_t& out) {
    std::int64_t v = out;
    i64(j, key, path, v);
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
      fail(sub(path, key), "value out of range");
      return;
    }
    out = static_cast<std::int32_t>(v);
  }

  void real(const json& j, const char* key, const std::string& path, double& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      fail(sub(path, key), "expected a number");
    }
  }

  void boolean(const json& j, const char* key, const std::string& path, bool& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_boolean()) {
      out = v.get<bool>();
    } else {
      fail(sub(path, key), "expected true or false");
    }
  }

  bool string(const json& j, const char* key, const std::string& path, std::string& out) {
    if (!j.contains(key)) return false;
    const auto& v = j.at(key);
    if (!v.is_string()) {
      fail(sub(path, key), "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  static std::string sub(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string idx(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }
};

void read_engine(Reader& r, const json& j, const std::string& path, EngineConfig& e) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"cycles_per_mac", "cycles_per_load", "cycles_per_store", "pipeline_startup_cycles"});
  r.u64(j, "cycles_per_mac", path, e.cycles_per_mac);
  r.u64(j, "cycles_per_load", path, e.cycles_per_load);
  r.u64(j, "cycles_per_store", path, e.cycles_per_store);
  r.u64(j, "pipeline_startup_cycles", path, e.pipeline_startup_cycles);
}

void read_clock(Reader& r, const json& j, const std::string& path, ClockDomain& c) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"id", "freq_hz", "drift_ppm"});
  r.uint(j, "id", path, c.id);
  r.u64(j, "freq_hz", path, c.freq_hz);
  r.i32(j, "drift_ppm", path, c.drift_ppm);
}

void read_jitter(Reader& r, const json& j, const std::string& path, JitterModel& m) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"base_overhead_ns", "spike_prob", "spike_scale_ns", "mode2_offset_ns", "mode2_prob"});
  r.u64(j, "base_overhead_ns", path, m.base_overhead_ns);
  r.real(j, "spike_prob", path, m.spike_prob);
  r.u64(j, "spike_scale_ns", path, m.spike_scale_ns);
  r.u64(j, "mode2_offset_ns", path, m.mode2_offset_ns);
  r.real(j, "mode2_prob", path, m.mode2_prob);
}

Health parse_health(Reader& r, const std::string& s, const std::string& path) {
  if (s == "healthy") return Health::Healthy;
  if (s == "failed") return Health::Failed;
  if (s == "switched_off") return Health::SwitchedOff;
  r.fail(path, "unknown health '" + s + "' (healthy, failed, switched_off)");
  return Health::Healthy;
}

void read_replica(Reader& r, const json& j, const std::string& path, ReplicaConfig& rc) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"id", "engine", "clock", "clock_offset_ns", "host_jitter", "health"});
  r.uint(j, "id", path, rc.id);
  if (j.contains("engine")) read_engine(r, j.at("engine"), Reader::sub(path, "engine"), rc.engine);
  if (j.contains("clock")) read_clock(r, j.at("clock"), Reader::sub(path, "clock"), rc.clock);
  r.i64(j, "clock_offset_ns", path, rc.clock_offset_ns);
  if (j.contains("host_jitter")) {
    read_jitter(r, j.at("host_jitter"), Reader::sub(path, "host_jitter"), rc.host_jitter);
  }
  std::string health;
  if (r.string(j, "health", path, health)) {
    rc.health = parse_health(r, health, Reader::sub(path, "health"));
  }
}

void read_coupling(Reader& r, const json& j, const std::string& path, CouplingMode& mode) {
  if (!r.object(j, path)) return;
  std::string kind;
  if (!r.string(j, "mode", path, kind)) {
    r.fail(Reader::sub(path, "mode"), "required ('tight' or 'loose')");
    return;
  }
  if (kind == "tight") {
    r.keys(j, path, {"mode", "skew_tolerance_cycles"});
    TightCoupling t;
    if (const auto* prev = std::get_if<TightCoupling>(&mode)) t = *prev;
    r.u64(j, "skew_tolerance_cycles", path, t.skew_tolerance_cycles);
    mode = t;
  } else if (kind == "loose") {
    r.keys(j, path, {"mode", "rendezvous_window_ns"});
    LooseCoupling l;
    if (const auto* prev = std::get_if<LooseCoupling>(&mode)) l = *prev;
    r.u64(j, "rendezvous_window_ns", path, l.rendezvous_window_ns);
    mode = l;
  } else {
    r.fail(Reader::sub(path, "mode"), "unknown coupling '" + kind + "' ('tight' or 'loose')");
  }
}

void read_comparator(Reader& r, const json& j, const std::string& path, Comparator& cmp) {
  if (!r.object(j, path)) return;
  std::string kind;
  if (!r.string(j, "kind", path, kind)) {
    r.fail(Reader::sub(path, "kind"), "required ('exact' or 'tolerance')");
    return;
  }
  if (kind == "exact") {
    r.keys(j, path, {"kind"});
    cmp = ExactComparator{};
  } else if (kind == "tolerance") {
    r.keys(j, path, {"kind", "eps"});
    ToleranceComparator t;
    if (!j.contains("eps")) r.fail(Reader::sub(path, "eps"), "required for tolerance comparator");
    r.real(j, "eps", path, t.eps);
    cmp = t;
  } else {
    r.fail(Reader::sub(path, "kind"), "unknown comparator '" + kind + "' ('exact' or 'tolerance')");
  }
}

void read_ptp(Reader& r, const json& j, const std::string& path, PtpConfig& p) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"enabled", "forward_delay_ns", "reverse_delay_ns", "residence_ns"});
  r.boolean(j, "enabled", path, p.enabled);
  r.u64(j, "forward_delay_ns", path, p.forward_delay_ns);
  r.u64(j, "reverse_delay_ns", path, p.reverse_delay_ns);
  r.u64(j, "residence_ns", path, p.residence_ns);
}

void read_topology(Reader& r, const json& j, const std::string& path, TopologyConfig& t) {
  if (!r.object(j, path)) return;
  r.keys(j, path,
         {"replicas", "replica_count", "coupling", "policy", "comparator", "feed_jitter_ns",
          "bus_trace_compare", "in_order", "debounce_threshold", "host_jitter", "ptp"});
  if (j.contains("replicas")) {
    const auto& list = j.at("replicas");
    const auto lpath = Reader::sub(path, "replicas");
    if (!list.is_array() || list.empty()) {
      r.fail(lpath, "expected a non-empty array");
    } else {
      // Entries inherit the preset's first replica as a template.
      const ReplicaConfig base = t.replicas.empty() ? ReplicaConfig{} : t.replicas.front();
      t.replicas.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        ReplicaConfig rc = base;
        rc.id = static_cast<std::uint32_t>(i);
        read_replica(r, list[i], Reader::idx(lpath, i), rc);
        t.replicas.push_back(rc);
      }
    }
  }
  if (j.contains("replica_count")) {
    std::uint64_t count = t.replicas.size();
    r.u64(j, "replica_count", path, count);
    if (count < 1 || count > 8) {
      r.fail(Reader::sub(path, "replica_count"), "must be in [1, 8]");
    } else if (t.replicas.empty()) {
      r.fail(Reader::sub(path, "replica_count"), "needs a preset or replicas to copy from");
    } else {
      const ReplicaConfig proto = t.replicas.back();
      t.replicas.resize(count, proto);
      for (std::size_t i = 0; i < t.replicas.size(); ++i) t.replicas[i].id = static_cast<std::uint32_t>(i);
    }
  }
  if (j.contains("host_jitter")) {
    JitterModel m = t.replicas.empty() ? JitterModel{} : t.replicas.front().host_jitter;
    read_jitter(r, j.at("host_jitter"), Reader::sub(path, "host_jitter"), m);
    for (auto& rc : t.replicas) rc.host_jitter = m;
  }
  if (j.contains("coupling")) read_coupling(r, j.at("coupling"), Reader::sub(path, "coupling"), t.coupling);
  std::string policy;
  if (r.string(j, "policy", path, policy)) {
    try {
      t.policy = VotingPolicy::parse(policy);
    } catch (const ConfigError& e) {
      r.fail(Reader::sub(path, "policy"), e.what());
    }
  }
  if (j.contains("comparator")) {
    read_comparator(r, j.at("comparator"), Reader::sub(path, "comparator"), t.comparator);
  }
  r.u64(j, "feed_jitter_ns", path, t.feed_jitter.bound_ns);
  r.boolean(j, "bus_trace_compare", path, t.bus_trace_compare);
  r.boolean(j, "in_order", path, t.in_order);
  r.uint(j, "debounce_threshold", path, t.debounce_threshold);
  if (j.contains("ptp")) read_ptp(r, j.at("ptp"), Reader::sub(path, "ptp"), t.ptp);
}

void read_workload(Reader& r, const json& j, const std::string& path, WorkloadConfig& w) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"frame_count", "repetitions_per_frame", "arch", "input_shape", "inter_frame_gap_ns"});
  r.u64(j, "frame_count", path, w.frame_count);
  r.u64(j, "repetitions_per_frame", path, w.repetitions_per_frame);
  r.u64(j, "inter_frame_gap_ns", path, w.inter_frame_gap_ns);
  auto read_dims = [&](const char* key, std::vector<std::size_t>& out) {
    const auto p = Reader::sub(path, key);
    const auto& a = j.at(key);
    if (!a.is_array()) {
      r.fail(p, "expected an array of positive integers");
      return false;
    }
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number_integer() || a[i].get<std::int64_t>() <= 0) {
        r.fail(Reader::idx(p, i), "expected a positive integer");
        return false;
      }
      dims.push_back(a[i].get<std::size_t>());
    }
    out = std::move(dims);
    return true;
  };
  if (j.contains("arch")) read_dims("arch", w.arch);
  if (j.contains("input_shape")) {
    std::vector<std::size_t> shape;
    if (read_dims("input_shape", shape) &&
        (shape.size() != 1 || w.arch.empty() || shape[0] != w.arch.front())) {
      r.fail(Reader::sub(path, "input_shape"), "must be [arch[0]]");
    }
  }
}

void read_fault(Reader& r, const json& j, const std::string& path, FaultAssignment& fa) {
  if (!r.object(j, path)) return;
  r.uint(j, "replica_id", path, fa.replica_id);
  if (!j.contains("replica_id")) r.fail(Reader::sub(path, "replica_id"), "required");
  std::string kind;
  if (!r.string(j, "kind", path, kind)) {
    r.fail(Reader::sub(path, "kind"), "required");
    return;
  }
  if (kind == "weight_bit_flip") {
    r.keys(j, path, {"replica_id", "kind", "trigger", "layer", "element_index", "bit"});
    WeightBitFlip f;
    r.uint(j, "layer", path, f.layer);
    r.uint(j, "element_index", path, f.element_index);
    r.uint(j, "bit", path, f.bit);
    fa.fault.kind = f;
  } else if (kind == "output_bit_flip") {
    r.keys(j, path, {"replica_id", "kind", "trigger", "element_index", "bit"});
    OutputBitFlip f;
    r.uint(j, "element_index", path, f.element_index);
    r.uint(j, "bit", path, f.bit);
    fa.fault.kind = f;
  } else if (kind == "extra_delay") {
    r.keys(j, path, {"replica_id", "kind", "trigger", "ns"});
    ExtraDelay f;
    r.u64(j, "ns", path, f.ns);
    fa.fault.kind = f;
  } else if (kind == "drop_output") {
    r.keys(j, path, {"replica_id", "kind", "trigger"});
    fa.fault.kind = DropOutput{};
  } else if (kind == "stuck_output") {
    r.keys(j, path, {"replica_id", "kind", "trigger"});
    fa.fault.kind = StuckOutput{};
  } else {
    r.fail(Reader::sub(path, "kind"),
           "unknown fault kind '" + kind +
               "' (weight_bit_flip, output_bit_flip, extra_delay, drop_output, stuck_output)");
    return;
  }
  const auto tpath = Reader::sub(path, "trigger");
  if (!j.contains("trigger")) {
    r.fail(tpath, "required ('always', {on_frame, repetition?}, or {probability})");
    return;
  }
  const auto& t = j.at("trigger");
  if (t.is_string() && t.get<std::string>() == "always") {
    fa.fault.trigger = Always{};
  } else if (t.is_object() && t.contains("on_frame")) {
    r.keys(t, tpath, {"on_frame", "repetition"});
    OnFrame of;
    r.u64(t, "on_frame", tpath, of.frame_id);
    r.u64(t, "repetition", tpath, of.repetition);
    fa.fault.trigger = of;
  } else if (t.is_object() && t.contains("probability")) {
    r.keys(t, tpath, {"probability"});
    WithProbability wp;
    r.real(t, "probability", tpath, wp.p);
    fa.fault.trigger = wp;
  } else {
    r.fail(tpath, "expected 'always', {on_frame, repetition?}, or {probability}");
  }
}

void read_profiler(Reader& r, const json& j, const std::string& path, ProfilerConfig& p) {
  if (!r.object(j, path)) return;
  r.keys(j, path, {"bin_count", "outlier_threshold", "alpha"});
  r.uint(j, "bin_count", path, p.bin_count);
  r.real(j, "outlier_threshold", path, p.outlier_threshold);
  r.real(j, "alpha", path, p.alpha);
}

void check(std::vector<std::string>& errors, const std::string& path, auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    errors.push_back(path + ": " + e.what());
  }
}

std::vector<std::string> semantic_errors(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  const auto& t = c.topology;
  if (t.replicas.empty()) errors.push_back("topology.replicas: at least one replica required");
  std::set<std::uint32_t> ids;
  for (std::size_t i = 0; i < t.replicas.size(); ++i) {
    const auto& rc = t.replicas[i];
    const auto path = "topology.replicas[" + std::to_string(i) + "]";
    if (!ids.insert(rc.id).second) errors.push_back(path + ".id: duplicate replica id");
    check(errors, path + ".engine", [&] { rc.engine.validate(); });
    check(errors, path + ".clock", [&] { rc.clock.validate(); });
    check(errors, path + ".host_jitter", [&] { rc.host_jitter.validate(); });
  }
  check(errors, "topology.policy", [&] { t.policy.validate(); });
  if (t.policy.n != t.replicas.size()) {
    errors.push_back("topology.policy: " + t.policy.name() + " needs " + std::to_string(t.policy.n) +
                     " replicas, topology has " + std::to_string(t.replicas.size()));
  }
  if (const auto* tol = std::get_if<ToleranceComparator>(&t.comparator)) {
    if (!(tol->eps >= 0.0)) errors.push_back("topology.comparator.eps: must be non-negative");
  }
  if (const auto* loose = std::get_if<LooseCoupling>(&t.coupling)) {
    if (loose->rendezvous_window_ns == 0) {
      errors.push_back("topology.coupling.rendezvous_window_ns: must be positive");
    }
  } else {
    for (std::size_t i = 1; i < t.replicas.size(); ++i) {
      if (!(t.replicas[i].clock == t.replicas[0].clock)) {
        errors.push_back("topology.replicas[" + std::to_string(i) +
                         "].clock: tight coupling requires a shared clock");
      }
    }
    for (std::size_t i = 0; i < t.replicas.size(); ++i) {
      if (t.replicas[i].clock_offset_ns != 0) {
        errors.push_back("topology.replicas[" + std::to_string(i) +
                         "].clock_offset_ns: tight coupling requires a shared clock");
      }
    }
  }
  if (t.debounce_threshold < 1) errors.push_back("topology.debounce_threshold: must be >= 1");

  const auto& w = c.workload;
  if (w.frame_count < 1) errors.push_back("workload.frame_count: must be >= 1");
  if (w.repetitions_per_frame < 1) errors.push_back("workload.repetitions_per_frame: must be >= 1");
  std::optional<WeightSet> weights;
  check(errors, "workload.arch", [&] { weights = gen_weights(0, w.arch); });

  for (std::size_t i = 0; i < c.faults.size(); ++i) {
    const auto path = "faults[" + std::to_string(i) + "]";
    if (!ids.contains(c.faults[i].replica_id)) {
      errors.push_back(path + ".replica_id: no replica " + std::to_string(c.faults[i].replica_id) +
                       " in a " + std::to_string(t.replicas.size()) + "-replica topology");
    }
    if (weights) check(errors, path, [&] { validate_fault(c.faults[i].fault, *weights); });
  }

  const auto& p = c.profiler;
  if (p.bin_count < 1) errors.push_back("profiler.bin_count: must be >= 1");
  if (!(p.outlier_threshold > 0)) errors.push_back("profiler.outlier_threshold: must be positive");
  if (!(p.alpha > 0 && p.alpha < 1)) errors.push_back("profiler.alpha: must be in (0, 1)");
  return errors;
}

json jitter_json(const JitterModel& m) {
  return {{"base_overhead_ns", m.base_overhead_ns},
          {"spike_prob", m.spike_prob},
          {"spike_scale_ns", m.spike_scale_ns},
          {"mode2_offset_ns", m.mode2_offset_ns},
          {"mode2_prob", m.mode2_prob}};
}

json fault_json(const FaultAssignment& fa) {
  json j{{"replica_id", fa.replica_id}, {"kind", fault_kind_name(fa.fault.kind)}};
  std::visit(overloaded{
                 [&](const WeightBitFlip& f) {
                   j["layer"] = f.layer;
                   j["element_index"] = f.element_index;
                   j["bit"] = f.bit;
                 },
                 [&](const OutputBitFlip& f) {
                   j["element_index"] = f.element_index;
                   j["bit"] = f.bit;
                 },
                 [&](const ExtraDelay& f) { j["ns"] = f.ns; },
                 [](const auto&) {},
             },
             fa.fault.kind);
  std::visit(overloaded{
                 [&](const OnFrame& t) { j["trigger"] = {{"on_frame", t.frame_id}, {"repetition", t.repetition}}; },
                 [&](const Always&) { j["trigger"] = "always"; },
                 [&](const WithProbability& t) { j["trigger"] = {{"probability", t.p}}; },
             },
             fa.fault.trigger);
  return j;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> errors)
    : ConfigError("invalid configuration:\n  " + join(errors, "\n  ")), errors_(std::move(errors)) {}

std::vector<std::string> known_presets() { return {"fpga-duplex-tight", "gpu-duplex-loose"}; }

TopologyConfig expand_preset(const std::string& name) {
  TopologyConfig t;
  t.preset = name;
  t.policy = VotingPolicy::one_of_two();
  t.comparator = ExactComparator{};
  t.debounce_threshold = 1;
  t.in_order = true;
  if (name == "fpga-duplex-tight") {
    // Two isolated DPU blocks in one fabric: shared 210 MHz clock, fabric
    // input distribution, no CPU in the loop.
    const ClockDomain fabric{0, 210'000'000, 0};
    const EngineConfig dpu{1, 1, 1, 64};
    for (std::uint32_t id = 0; id < 2; ++id) t.replicas.push_back({id, dpu, fabric, 0, {}, Health::Healthy});
    t.coupling = TightCoupling{2};
    t.bus_trace_compare = true;
    return t;
  }
  if (name == "gpu-duplex-loose") {
    // Two GPU modules, each with its own clock and CPU feeder.
    const EngineConfig gpu{1, 2, 2, 200};
    const JitterModel feeder{40'000, 0.01, 60'000, 1'500, 0.3};
    t.replicas.push_back({0, gpu, ClockDomain{0, 998'000'000, 0}, 0, feeder, Health::Healthy});
    t.replicas.push_back({1, gpu, ClockDomain{1, 998'000'000, 15}, 0, feeder, Health::Healthy});
    t.coupling = LooseCoupling{10'000'000};
    t.feed_jitter = FeedJitter{2'000};
    t.bus_trace_compare = false;
    t.ptp.enabled = true;
    return t;
  }
  std::vector<std::string> names = known_presets();
  throw ConfigError("unknown preset '" + name + "' (known: " + join(names, ", ") + ")");
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv(kSeedEnvVar);
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const auto seed = std::strtoull(v, &end, 0);
  if (end == nullptr || *end != '\0') return std::nullopt;
  return seed;
}

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> env_seed) {
  Reader r;
  ExperimentConfig c;
  if (!doc.is_object()) throw ConfigValidationError({"(root): expected an object"});
  r.keys(doc, "", {"seed", "preset", "topology", "workload", "faults", "profiler", "metadata"});

  if (doc.contains("seed")) {
    r.u64(doc, "seed", "", c.seed);
  } else if (env_seed) {
    c.seed = *env_seed;
  } else {
    r.fail("seed", std::string("required (in the config, via --seed, or via ") + kSeedEnvVar + ")");
  }

  std::string preset;
  bool have_topology = false;
  if (r.string(doc, "preset", "", preset)) {
    try {
      c.topology = expand_preset(preset);
      have_topology = true;
    } catch (const ConfigError& e) {
      r.fail("preset", e.what());
    }
  } else {
    c.topology.preset = "custom";
    c.topology.policy = VotingPolicy::one_of_two();
  }
  if (doc.contains("topology")) {
    read_topology(r, doc.at("topology"), "topology", c.topology);
    have_topology = have_topology || doc.at("topology").contains("replicas");
  }
  if (!have_topology && !doc.contains("preset")) {
    r.fail("topology", "either 'preset' or 'topology.replicas' is required");
  }
  if (doc.contains("workload")) read_workload(r, doc.at("workload"), "workload", c.workload);
  if (doc.contains("faults")) {
    const auto& list = doc.at("faults");
    if (!list.is_array()) {
      r.fail("faults", "expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        FaultAssignment fa;
        read_fault(r, list[i], Reader::idx("faults", i), fa);
        c.faults.push_back(fa);
      }
    }
  }
  if (doc.contains("profiler")) read_profiler(r, doc.at("profiler"), "profiler", c.profiler);
  if (doc.contains("metadata")) {
    if (doc.at("metadata").is_object()) {
      c.metadata = doc.at("metadata");
    } else {
      r.fail("metadata", "expected an object");
    }
  }
  if (r.errors.empty() || have_topology) {
    for (auto& e : semantic_errors(c)) {
      if (std::find(r.errors.begin(), r.errors.end(), e) == r.errors.end()) r.errors.push_back(e);
    }
  }
  if (!r.errors.empty()) throw ConfigValidationError(std::move(r.errors));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigValidationError({path.string() + ": cannot open file"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigValidationError({path.string() + ": " + e.what()});
  }
  return parse_config(doc, seed_from_env());
}

json to_json(const ExperimentConfig& c) {
  const auto& t = c.topology;
  json replicas = json::array();
  for (const auto& rc : t.replicas) {
    replicas.push_back({{"id", rc.id},
                        {"engine",
                         {{"cycles_per_mac", rc.engine.cycles_per_mac},
                          {"cycles_per_load", rc.engine.cycles_per_load},
                          {"cycles_per_store", rc.engine.cycles_per_store},
                          {"pipeline_startup_cycles", rc.engine.pipeline_startup_cycles}}},
                        {"clock", {{"id", rc.clock.id}, {"freq_hz", rc.clock.freq_hz}, {"drift_ppm", rc.clock.drift_ppm}}},
                        {"clock_offset_ns", rc.clock_offset_ns},
                        {"host_jitter", jitter_json(rc.host_jitter)},
                        {"health", to_string(rc.health)}});
  }
  json coupling = std::visit(
      overloaded{
          [](const TightCoupling& x) -> json { return {{"mode", "tight"}, {"skew_tolerance_cycles", x.skew_tolerance_cycles}}; },
          [](const LooseCoupling& x) -> json { return {{"mode", "loose"}, {"rendezvous_window_ns", x.rendezvous_window_ns}}; },
      },
      t.coupling);
  json comparator = std::visit(overloaded{
                                   [](const ExactComparator&) -> json { return {{"kind", "exact"}}; },
                                   [](const ToleranceComparator& x) -> json { return {{"kind", "tolerance"}, {"eps", x.eps}}; },
                               },
                               t.comparator);
  json topology{{"replicas", std::move(replicas)},
                {"coupling", std::move(coupling)},
                {"policy", t.policy.name()},
                {"comparator", std::move(comparator)},
                {"feed_jitter_ns", t.feed_jitter.bound_ns},
                {"bus_trace_compare", t.bus_trace_compare},
                {"in_order", t.in_order},
                {"debounce_threshold", t.debounce_threshold},
                {"ptp",
                 {{"enabled", t.ptp.enabled},
                  {"forward_delay_ns", t.ptp.forward_delay_ns},
                  {"reverse_delay_ns", t.ptp.reverse_delay_ns},
                  {"residence_ns", t.ptp.residence_ns}}}};
  json faults = json::array();
  for (const auto& fa : c.faults) faults.push_back(fault_json(fa));
  json doc{{"seed", c.seed},
           {"topology", std::move(topology)},
           {"workload",
            {{"frame_count", c.workload.frame_count},
             {"repetitions_per_frame", c.workload.repetitions_per_frame},
             {"arch", c.workload.arch},
             {"inter_frame_gap_ns", c.workload.inter_frame_gap_ns}}},
           {"faults", std::move(faults)},
           {"profiler",
            {{"bin_count", c.profiler.bin_count},
             {"outlier_threshold", c.profiler.outlier_threshold},
             {"alpha", c.profiler.alpha}}},
           {"metadata", c.metadata}};
  if (t.preset != "custom") doc["preset"] = t.preset;
  return doc;
}

void validate(const ExperimentConfig& c) {
  auto errors = semantic_errors(c);
  if (!errors.empty()) throw ConfigValidationError(std::move(errors));
}

}  // namespace lsim
