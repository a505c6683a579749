#include "lsim/experiment.hpp"

#include <algorithm>
#include <array>
#include <type_traits>
#include <cstdio>
#include <map>
#include <sstream>

namespace lsim {

namespace {

using ojson = nlohmann::ordered_json;

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream* out) : out_(out) {}

  ojson& add(std::uint64_t t_ns, const char* kind) {
    pending_.push_back({t_ns, seq_, ojson{{"t_ns", t_ns}, {"seq", seq_}, {"kind", kind}}});
    ++seq_;
    return pending_.back().record;
  }

  bool enabled() const noexcept { return out_ != nullptr; }

  void flush() {
    if (out_ != nullptr) {
      std::stable_sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
        return a.t_ns != b.t_ns ? a.t_ns < b.t_ns : a.seq < b.seq;
      });
      for (const auto& p : pending_) *out_ << p.record.dump() << '\n';
    }
    pending_.clear();
  }

 private:
  struct Pending {
    std::uint64_t t_ns;
    std::uint64_t seq;
    ojson record;
  };
  std::ostream* out_;
  std::uint64_t seq_ = 0;
  std::vector<Pending> pending_;
};

struct Channel {
  ReplicaConfig cfg;
  Host host;
  std::vector<std::size_t> faults;  // indices into config.faults
  std::optional<FixedPointTensor> previous_output;
  std::int64_t offset_estimate_ns = 0;
  std::vector<std::uint64_t> samples;
};

struct FiredFault {
  std::uint32_t replica_id;
  std::size_t fault_index;
};

// Work in flight for one (frame, repetition).
struct InFlight {
  std::uint64_t frame_id = 0;
  std::uint64_t repetition = 0;
  SimTime release;
  std::uint64_t window_ns = 1;
  struct Slot {
    bool dropped = false;
    FixedPointTensor output;
    std::uint64_t clean_digest = 0;
    std::uint64_t cycles = 0;
    BusTrace trace;
  };
  std::map<std::uint32_t, Slot> slots;
  std::vector<Arrival> arrivals;
  std::vector<ReplicaOutput> produced;
  std::vector<FiredFault> fired;
  bool deadline_scheduled = false;
  std::uint64_t deadline_seq = 0;
  std::size_t expected = 0;
};

std::uint64_t rendezvous_window(const TopologyConfig& t) {
  if (const auto* loose = std::get_if<LooseCoupling>(&t.coupling)) return loose->rendezvous_window_ns;
  const auto tol = std::get<TightCoupling>(t.coupling).skew_tolerance_cycles;
  return std::max<std::uint64_t>(1, cycles_to_time(tol, t.replicas.front().clock));
}

std::string divergence_text(std::uint32_t a, std::uint32_t b, const TraceDivergence& d) {
  return "bus divergence between replica " + std::to_string(a) + " and " + std::to_string(b) +
         " at event " + std::to_string(d.event_index) + " (" + to_string(d.reason) + ")";
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* trace_out,
                                std::vector<Event>* events) {
  validate(config);
  const auto& topo = config.topology;
  const auto& work = config.workload;
  const Rng root(config.seed);
  const bool tight = std::holds_alternative<TightCoupling>(topo.coupling);
  const std::uint64_t window_ns = rendezvous_window(topo);
  const std::uint64_t tolerance =
      tight ? std::get<TightCoupling>(topo.coupling).skew_tolerance_cycles : 0;

  const WeightSet weights = gen_weights(root.child("weights").next(), work.arch);
  const std::uint64_t frame_seed = root.child("frames").next();

  std::vector<Replica> replicas;
  std::map<std::uint32_t, Channel> channels;
  std::vector<Device> devices;
  for (const auto& rc : topo.replicas) {
    Replica r{rc.id, rc.engine, rc.clock, weights, {}, rc.health};
    Channel ch{rc, Host{rc.host_jitter, tight ? root.child("host", 0) : root.child("host", rc.id)},
               {}, std::nullopt, 0, {}};
    for (std::size_t i = 0; i < config.faults.size(); ++i) {
      if (config.faults[i].replica_id == rc.id) {
        ch.faults.push_back(i);
        r.faults.push_back(config.faults[i].fault);
      }
    }
    replicas.push_back(std::move(r));
    channels.emplace(rc.id, std::move(ch));
    devices.push_back(Device{rc.id, rc.clock, SimTime{}});
  }
  std::vector<Rng> fault_rngs;
  for (std::size_t i = 0; i < config.faults.size(); ++i) fault_rngs.push_back(root.child("fault", i));
  Rng feed_rng = root.child("feed");

  ExperimentReport report;
  report.config = to_json(config);
  report.frames = work.frame_count;
  report.repetitions = work.repetitions_per_frame;
  TraceWriter trace(trace_out);

  // Loosely coupled modules learn each other's clock offsets before the run.
  std::uint64_t start_ns = 0;
  {
    std::uint64_t max_offset = 0;
    for (const auto& rc : topo.replicas) {
      max_offset = std::max<std::uint64_t>(
          max_offset, static_cast<std::uint64_t>(rc.clock_offset_ns < 0 ? -rc.clock_offset_ns
                                                                         : rc.clock_offset_ns));
    }
    start_ns = max_offset;
    if (!tight && topo.ptp.enabled) {
      const auto& master = topo.replicas.front();
      for (std::size_t i = 1; i < topo.replicas.size(); ++i) {
        const auto& rc = topo.replicas[i];
        const std::int64_t truth = rc.clock_offset_ns - master.clock_offset_ns;
        const auto x = simulate_ptp_exchange(SimTime{max_offset}, truth, topo.ptp.forward_delay_ns,
                                             topo.ptp.reverse_delay_ns, topo.ptp.residence_ns);
        const auto est = estimate_ptp_offset(x);
        channels.at(rc.id).offset_estimate_ns = est.offset_ns;
        report.ptp.push_back({rc.id, truth, est});
        start_ns = std::max(start_ns, x.t4.ns);
        auto& rec = trace.add(x.t4.ns, "ptp");
        rec["replica_id"] = rc.id;
        rec["master_id"] = master.id;
        rec["offset_ns"] = est.offset_ns;
        rec["path_delay_ns"] = est.path_delay_ns;
      }
    }
    // The master's own offset maps every timestamp onto its timebase.
    if (!topo.replicas.empty()) {
      const auto master_offset = topo.replicas.front().clock_offset_ns;
      for (auto& [id, ch] : channels) ch.offset_estimate_ns += master_offset;
    }
    trace.flush();
  }

  EventQueue queue;
  InFlight cur;
  std::map<std::uint32_t, InferenceResult> clean_results;
  FixedPointTensor frame_input;

  queue.set_handler([&](EventQueue& q, const Event& e) {
    if (e.kind == EventKind::InputArrival) {
      const auto id = *e.replica_id;
      Channel& ch = channels.at(id);
      auto clean_it = clean_results.find(id);
      if (clean_it == clean_results.end()) {
        clean_it = clean_results.emplace(id, infer(weights, frame_input, ch.cfg.engine)).first;
      }
      const InferenceResult& clean = clean_it->second;

      FaultContext ctx;
      ctx.frame_id = cur.frame_id;
      ctx.repetition = cur.repetition;
      std::optional<WeightSet> corrupted;
      ctx.phase = FaultPhase::PreInference;
      for (auto fi : ch.faults) {
        if (!std::holds_alternative<WeightBitFlip>(config.faults[fi].fault.kind)) continue;
        if (!corrupted) corrupted = weights;
        ctx.weights = &*corrupted;
        if (apply_fault(config.faults[fi].fault, ctx, fault_rngs[fi])) cur.fired.push_back({id, fi});
      }
      const bool weight_fault = std::any_of(cur.fired.begin(), cur.fired.end(), [&](const FiredFault& f) {
        return f.replica_id == id;
      });
      InferenceResult result = weight_fault ? infer(*corrupted, frame_input, ch.cfg.engine) : clean;

      ctx.phase = FaultPhase::PostInference;
      ctx.weights = nullptr;
      ctx.output = std::move(result.output);
      ctx.previous_output = &ch.previous_output;
      for (auto fi : ch.faults) {
        if (apply_fault(config.faults[fi].fault, ctx, fault_rngs[fi])) cur.fired.push_back({id, fi});
      }
      if (ctx.extra_delay_ns > 0 && !result.trace.empty()) {
        // The stall holds back the final store by whole clock edges.
        result.trace.back().cycle += time_to_cycles_ceil(ctx.extra_delay_ns, ch.cfg.clock);
      }
      for (const auto& f : cur.fired) {
        if (f.replica_id != id) continue;
        auto& rec = trace.add(q.now().ns, "fault");
        rec["frame_id"] = cur.frame_id;
        rec["repetition"] = cur.repetition;
        rec["replica_id"] = id;
        rec["fault"] = fault_kind_name(config.faults[f.fault_index].fault.kind);
      }

      InFlight::Slot slot;
      slot.dropped = ctx.dropped;
      if (ctx.output) slot.output = std::move(*ctx.output);
      slot.clean_digest = digest(clean.output);
      slot.cycles = result.compute_cycles;
      slot.trace = std::move(result.trace);
      cur.slots[id] = std::move(slot);
      submit_kernel(q, ch.host, devices, id,
                    KernelTask{id, cur.frame_id, cur.slots[id].cycles, ctx.extra_delay_ns},
                    topo.in_order);
    } else if (e.kind == EventKind::ComputeCompletion) {
      const auto id = *e.replica_id;
      Channel& ch = channels.at(id);
      auto& slot = cur.slots.at(id);
      auto& rec = trace.add(q.now().ns, "completion");
      rec["frame_id"] = cur.frame_id;
      rec["repetition"] = cur.repetition;
      rec["replica_id"] = id;
      if (slot.dropped) {
        rec["dropped"] = true;
        return;
      }
      const std::uint64_t turnaround = q.now().ns - cur.release.ns;
      ch.samples.push_back(turnaround);
      const auto local = static_cast<std::int64_t>(q.now().ns) + ch.cfg.clock_offset_ns;
      const auto aligned = align_timestamps(std::array{SimTime{static_cast<std::uint64_t>(local)}},
                                            ch.offset_estimate_ns);
      const SimTime arrival = aligned.times.front();
      cur.arrivals.push_back({id, arrival});
      cur.produced.push_back(make_replica_output(id, cur.frame_id, slot.output, slot.cycles,
                                                 SimTime{static_cast<std::uint64_t>(local)}, slot.trace));
      rec["turnaround_ns"] = turnaround;
      rec["compute_cycles"] = slot.cycles;
      rec["digest"] = cur.produced.back().digest;
      rec["classification"] = cur.produced.back().classification;
      if (!cur.deadline_scheduled) {
        cur.deadline_scheduled = true;
        cur.deadline_seq = q.schedule(std::max(q.now(), arrival + cur.window_ns),
                                      EventKind::RendezvousDeadline, id, cur.frame_id)
                               .seq;
      }
      if (cur.arrivals.size() == cur.expected) q.cancel(cur.deadline_seq);
    }
  });

  SafetySwitchState safety;
  safety.debounce_threshold = topo.debounce_threshold;
  SimTime now{start_ns};

  auto record_safety = [&](const SafetyStep& step, SimTime t) {
    auto& rec = trace.add(t.ns, "safety_action");
    rec["frame_id"] = cur.frame_id;
    rec["repetition"] = cur.repetition;
    rec["action"] = to_string(step.action);
    rec["state"] = to_string(step.state.state);
    rec["consecutive_fault_count"] = step.state.consecutive_fault_count;
    if (step.action == SafetyAction::DeliverOutput) {
      ++report.delivered;
    } else {
      ++report.suppressed;
    }
    if (step.state.state != safety.state) {
      report.safety_timeline.push_back({t.ns, cur.frame_id, cur.repetition, step.state.state});
    }
    safety = step.state;
  };

  for (std::uint64_t frame = 0; frame < work.frame_count; ++frame) {
    frame_input = make_frame_input(frame_seed, frame, weights.input_width());
    clean_results.clear();
    for (std::uint64_t rep = 0; rep < work.repetitions_per_frame; ++rep) {
      cur = InFlight{};
      cur.frame_id = frame;
      cur.repetition = rep;
      cur.release = now;
      cur.window_ns = window_ns;
      {
        auto& rec = trace.add(now.ns, "release");
        rec["frame_id"] = frame;
        rec["repetition"] = rep;
      }

      std::optional<InputBarrier> barrier;
      try {
        barrier = distribute_input(frame, now, replicas, topo.coupling, topo.feed_jitter, feed_rng, &queue);
      } catch (const NoHealthyReplicas& e) {
        ++report.verdicts.degraded;
        auto& rec = trace.add(now.ns, "verdict");
        rec["frame_id"] = frame;
        rec["repetition"] = rep;
        rec["verdict"] = "degraded";
        rec["reason"] = e.what();
        record_safety(force_safe_off(safety), now);
        trace.flush();
        now = now + std::max<std::uint64_t>(1, work.inter_frame_gap_ns);
        continue;
      }

      cur.expected = barrier->replica_ids.size();
      auto processed = queue.run_all();
      if (events != nullptr) events->insert(events->end(), processed.begin(), processed.end());

      const auto outcome = rendezvous(barrier->replica_ids, cur.arrivals, window_ns);
      const SimTime decided = cur.arrivals.empty()
                                  ? queue.now()
                                  : rendezvous_decision_time(outcome, cur.arrivals, window_ns);
      {
        auto& rec = trace.add(decided.ns, "rendezvous");
        rec["frame_id"] = frame;
        rec["repetition"] = rep;
        if (const auto* c = std::get_if<RendezvousComplete>(&outcome)) {
          rec["outcome"] = "complete";
          rec["skew_ns"] = c->skew_ns;
          report.skews_ns.push_back(c->skew_ns);
        } else {
          const auto& t = std::get<RendezvousTimeout>(outcome);
          rec["outcome"] = "timeout";
          rec["present_ids"] = t.present_ids;
          rec["missing_ids"] = t.missing_ids;
        }
      }

      std::sort(cur.produced.begin(), cur.produced.end(),
                [](const ReplicaOutput& a, const ReplicaOutput& b) { return a.replica_id < b.replica_id; });
      std::optional<std::string> divergence;
      if (tight && topo.bus_trace_compare && cur.produced.size() > 1) {
        const auto& ref = cur.produced.front();
        for (std::size_t i = 1; i < cur.produced.size(); ++i) {
          const auto cmp = compare_bus_traces(ref.trace, cur.produced[i].trace, tolerance);
          if (const auto* d = std::get_if<TraceDivergence>(&cmp)) {
            ++report.bus_divergences;
            auto& rec = trace.add(decided.ns, "bus_divergence");
            rec["frame_id"] = frame;
            rec["repetition"] = rep;
            rec["replica_a"] = ref.replica_id;
            rec["replica_b"] = cur.produced[i].replica_id;
            rec["event_index"] = d->event_index;
            rec["reason"] = to_string(d->reason);
            rec["cycle_delta"] = d->cycle_delta;
            if (!divergence) divergence = divergence_text(ref.replica_id, cur.produced[i].replica_id, *d);
          }
        }
      }

      std::vector<ReplicaOutput> present;
      const auto* complete = std::get_if<RendezvousComplete>(&outcome);
      const auto& present_ids = complete ? complete->present_ids : std::get<RendezvousTimeout>(outcome).present_ids;
      for (const auto& o : cur.produced) {
        if (std::find(present_ids.begin(), present_ids.end(), o.replica_id) != present_ids.end()) {
          present.push_back(o);
        }
      }
      Verdict verdict = vote(present, topo.policy, topo.comparator, outcome);
      if (divergence && std::holds_alternative<VerdictPass>(verdict)) verdict = VerdictDegraded{*divergence};

      {
        auto& rec = trace.add(decided.ns, "verdict");
        rec["frame_id"] = frame;
        rec["repetition"] = rep;
        rec["verdict"] = verdict_name(verdict);
        std::visit(
            [&](const auto& v) {
              using V = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<V, VerdictPass>) {
                rec["agreeing_ids"] = v.agreeing_ids;
                rec["digest"] = v.agreed_digest;
                ++report.verdicts.pass;
              } else if constexpr (std::is_same_v<V, VerdictMismatch>) {
                rec["groups"] = v.groups;
                ++report.verdicts.mismatch;
              } else if constexpr (std::is_same_v<V, VerdictTimeout>) {
                rec["missing_ids"] = v.missing_ids;
                ++report.verdicts.timeout;
              } else {
                rec["reason"] = v.reason;
                ++report.verdicts.degraded;
              }
            },
            verdict);
      }
      record_safety(step_safety(safety, verdict), decided);

      const auto* pass = std::get_if<VerdictPass>(&verdict);
      for (const auto& f : cur.fired) {
        const auto& kind = config.faults[f.fault_index].fault.kind;
        ++report.faults.injected;
        ++report.faults.by_kind[fault_kind_name(kind)];
        const auto& slot = cur.slots.at(f.replica_id);
        const bool altered = is_value_fault(kind) && !slot.dropped && digest(slot.output) != slot.clean_digest;
        if (altered) ++report.faults.value_faults_altering_output;
        if (pass == nullptr) {
          ++report.faults.detected;
        } else if (std::find(pass->agreeing_ids.begin(), pass->agreeing_ids.end(), f.replica_id) ==
                   pass->agreeing_ids.end()) {
          ++report.faults.masked;
        } else {
          ++report.faults.undetected;
          if (altered) ++report.faults.undetected_altering;
        }
      }
      for (auto& [id, slot] : cur.slots) {
        if (!slot.dropped) channels.at(id).previous_output = slot.output;
      }
      trace.flush();
      now = std::max(queue.now(), decided) + work.inter_frame_gap_ns;
      queue.run_until(now);
    }
  }

  report.final_state = safety.state;
  report.final_time_ns = now.ns;
  for (auto& [id, ch] : channels) {
    ReplicaProfile p;
    p.replica_id = id;
    p.samples_ns = std::move(ch.samples);
    if (!p.samples_ns.empty()) {
      p.stats = stats(p.samples_ns);
      p.histogram = histogram(p.samples_ns, config.profiler.bin_count);
    }
    if (p.samples_ns.size() >= 3) p.outliers = detect_outliers(p.samples_ns, config.profiler.outlier_threshold);
    report.replicas.push_back(std::move(p));
  }
  if (!report.skews_ns.empty()) report.skew_stats = stats(report.skews_ns);
  return report;
}

nlohmann::json to_json(const ExperimentReport& r) {
  using nlohmann::json;
  json replicas = json::array();
  for (const auto& p : r.replicas) {
    json hist = json::array();
    for (const auto& b : p.histogram) hist.push_back({{"lower_edge_ns", b.lower_edge}, {"count", b.count}});
    replicas.push_back({{"replica_id", p.replica_id},
                        {"stats", p.stats ? to_json(*p.stats) : json(nullptr)},
                        {"outliers", p.outliers ? to_json(*p.outliers) : json(nullptr)},
                        {"histogram", std::move(hist)},
                        {"samples_ns", p.samples_ns}});
  }
  json timeline = json::array();
  for (const auto& t : r.safety_timeline) {
    timeline.push_back({{"t_ns", t.t_ns},
                        {"frame_id", t.frame_id},
                        {"repetition", t.repetition},
                        {"state", to_string(t.state)}});
  }
  json ptp = json::array();
  for (const auto& p : r.ptp) {
    ptp.push_back({{"replica_id", p.replica_id},
                   {"true_offset_ns", p.true_offset_ns},
                   {"offset_ns", p.estimate.offset_ns},
                   {"path_delay_ns", p.estimate.path_delay_ns}});
  }
  std::uint64_t max_skew = 0;
  for (auto s : r.skews_ns) max_skew = std::max(max_skew, s);
  return {{"config", r.config},
          {"frames", r.frames},
          {"repetitions_per_frame", r.repetitions},
          {"final_time_ns", r.final_time_ns},
          {"verdict_counts",
           {{"pass", r.verdicts.pass},
            {"mismatch", r.verdicts.mismatch},
            {"timeout", r.verdicts.timeout},
            {"degraded", r.verdicts.degraded},
            {"total", r.verdicts.total()}}},
          {"safety",
           {{"final_state", to_string(r.final_state)},
            {"delivered", r.delivered},
            {"suppressed", r.suppressed},
            {"timeline", std::move(timeline)}}},
          {"faults",
           {{"injected", r.faults.injected},
            {"by_kind", r.faults.by_kind},
            {"value_faults_altering_output", r.faults.value_faults_altering_output},
            {"detected", r.faults.detected},
            {"masked", r.faults.masked},
            {"undetected", r.faults.undetected},
            {"undetected_altering", r.faults.undetected_altering}}},
          {"skew",
           {{"complete_rendezvous", r.skews_ns.size()},
            {"max_ns", max_skew},
            {"stats", r.skew_stats ? to_json(*r.skew_stats) : json(nullptr)}}},
          {"bus_divergences", r.bus_divergences},
          {"ptp", std::move(ptp)},
          {"replicas", std::move(replicas)}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  r.config = j.value("config", nlohmann::json::object());
  r.frames = j.value("frames", std::uint64_t{0});
  r.repetitions = j.value("repetitions_per_frame", std::uint64_t{0});
  if (j.contains("replicas")) {
    for (const auto& p : j.at("replicas")) {
      ReplicaProfile prof;
      prof.replica_id = p.at("replica_id").get<std::uint32_t>();
      prof.samples_ns = p.value("samples_ns", std::vector<std::uint64_t>{});
      if (!prof.samples_ns.empty()) prof.stats = stats(prof.samples_ns);
      r.replicas.push_back(std::move(prof));
    }
  }
  return r;
}

RunComparison compare_runs(const ExperimentReport& a, const ExperimentReport& b, double alpha,
                           double outlier_threshold) {
  RunComparison out;
  for (const auto& pa : a.replicas) {
    auto it = std::find_if(b.replicas.begin(), b.replicas.end(),
                           [&](const ReplicaProfile& pb) { return pb.replica_id == pa.replica_id; });
    if (it == b.replicas.end()) continue;
    if (pa.samples_ns.size() < 4 || it->samples_ns.size() < 4) {
      throw ComparisonRefused("replica " + std::to_string(pa.replica_id) + ": " +
                              std::to_string(pa.samples_ns.size()) + " vs " +
                              std::to_string(it->samples_ns.size()) +
                              " samples; comparison needs at least 4 on each side");
    }
    ReplicaComparison c;
    c.replica_id = pa.replica_id;
    c.ks = ks_statistic(pa.samples_ns, it->samples_ns, alpha);
    c.a = stats(pa.samples_ns);
    c.b = stats(it->samples_ns);
    c.outliers_a = detect_outliers(pa.samples_ns, outlier_threshold).indices.size();
    c.outliers_b = detect_outliers(it->samples_ns, outlier_threshold).indices.size();
    out.replicas.push_back(c);
  }
  if (out.replicas.empty()) {
    throw ComparisonRefused("the runs share no replica with latency samples");
  }

  std::ostringstream t;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-4s %12s %10s %10s %12s %9s %8s %8s %6s\n", "replica", "run",
                "mean_ns", "p50_ns", "p99_ns", "kurtosis", "outliers", "KS_D", "crit", "diff");
  t << line;
  for (const auto& c : out.replicas) {
    auto row = [&](const char* run, const ProfileStats& s, std::size_t outliers, bool first) {
      const std::string kurt = s.excess_kurtosis ? std::to_string(*s.excess_kurtosis) : "undef";
      if (first) {
        std::snprintf(line, sizeof line, "%-8u %-4s %12.1f %10llu %10llu %12s %9zu %8.4f %8.4f %6s\n",
                      c.replica_id, run, s.mean, static_cast<unsigned long long>(s.p50),
                      static_cast<unsigned long long>(s.p99), kurt.c_str(), outliers, c.ks.ks_statistic,
                      c.ks.critical_value, c.ks.distinguishable ? "yes" : "no");
      } else {
        std::snprintf(line, sizeof line, "%-8s %-4s %12.1f %10llu %10llu %12s %9zu\n", "", run, s.mean,
                      static_cast<unsigned long long>(s.p50), static_cast<unsigned long long>(s.p99),
                      kurt.c_str(), outliers);
      }
      t << line;
    };
    row("A", c.a, c.outliers_a, true);
    row("B", c.b, c.outliers_b, false);
  }
  out.table = t.str();
  return out;
}

nlohmann::json to_json(const RunComparison& c) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : c.replicas) {
    list.push_back({{"replica_id", r.replica_id},
                    {"ks", to_json(r.ks)},
                    {"a", to_json(r.a)},
                    {"b", to_json(r.b)},
                    {"outliers_a", r.outliers_a},
                    {"outliers_b", r.outliers_b}});
  }
  return {{"replicas", std::move(list)}};
}

}  // namespace lsim
