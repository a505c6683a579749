// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "lsim/cli.hpp"
#include "lsim/experiment.hpp"
#include "oracles/stats_oracle.hpp"
#include "oracles/voter_oracle.hpp"

using namespace lsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string config_path(const char* name) { return std::string(LSIM_SOURCE_DIR) + "/configs/" + name; }

std::vector<json> records(const std::string& trace, const char* kind) {
  std::vector<json> out;
  std::istringstream in(trace);
  for (std::string line; std::getline(in, line);) {
    auto j = json::parse(line);
    if (j["kind"] == kind) out.push_back(std::move(j));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------

Outcome voter_oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t cases = 0;
  auto outputs_of = [](const std::vector<int>& values) {
    std::vector<ReplicaOutput> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out.push_back(make_replica_output(static_cast<std::uint32_t>(i), 0,
                                        FixedPointTensor::vector({static_cast<std::int16_t>(values[i])}),
                                        0, SimTime{}, {}));
    }
    return out;
  };
  const std::vector<Comparator> comparators{ExactComparator{}, ToleranceComparator{0.0}};
  for (std::uint32_t n = 1; n <= 4; ++n) {
    std::size_t total = 1;
    for (std::uint32_t i = 0; i < n; ++i) total *= 4;
    for (std::uint32_t m = 1; m <= n; ++m) {
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<int> values(n);
        for (std::uint32_t i = 0, c = static_cast<std::uint32_t>(code); i < n; ++i, c /= 4) values[i] = static_cast<int>(c % 4);
        RendezvousComplete rc;
        for (std::uint32_t i = 0; i < n; ++i) rc.present_ids.push_back(i);
        const auto expect = oracle::brute_force_vote(values, m, n, std::equal_to<>{});
        for (const auto& cmp : comparators) {
          ++cases;
          const auto v = vote(outputs_of(values), VotingPolicy{m, n}, cmp, rc);
          const auto* pass = std::get_if<VerdictPass>(&v);
          bool same = (pass != nullptr) == expect.pass;
          if (same && pass) same = pass->agreeing_ids == expect.agreeing && pass->agreed_output[0] == expect.value;
          if (same && !pass) same = std::holds_alternative<VerdictMismatch>(v);
          o.require(same, fmt("%uoo%u disagrees with the oracle at case %zu", m, n, code));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, fmt("took %.3f s", secs));
  if (o.ok) o.detail = fmt("%zu cases agree with the subset oracle in %.3f s", cases, secs);
  return o;
}

// One random single-bit output flip per frame on one random replica.
std::vector<FaultAssignment> one_flip_per_frame(std::uint64_t frames, std::uint32_t replicas,
                                                std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FaultAssignment> faults;
  for (std::uint64_t f = 0; f < frames; ++f) {
    const auto replica = static_cast<std::uint32_t>(rng.below(replicas));
    const auto element = static_cast<std::size_t>(rng.below(width));
    const auto bit = static_cast<unsigned>(rng.below(16));
    faults.push_back({replica, FaultSpec{OutputBitFlip{element, bit}, OnFrame{f, 0}}});
  }
  return faults;
}

ExperimentConfig frames_only(const json& topology_override, std::uint64_t frames) {
  json doc{{"seed", 2718},
           {"preset", "gpu-duplex-loose"},
           {"workload", {{"frame_count", frames}, {"repetitions_per_frame", 1}}}};
  if (!topology_override.is_null()) doc["topology"] = topology_override;
  return parse_config(doc);
}

Outcome fault_detection_completeness() {
  Outcome o;
  const auto t0 = Clock::now();
  auto c = frames_only(json{{"debounce_threshold", 1'000'000}}, 1000);
  c.faults = one_flip_per_frame(1000, 2, c.workload.arch.back(), 31);
  const auto r = run_experiment(c);
  const double secs = seconds_since(t0);
  o.require(r.verdicts.mismatch == 1000, fmt("%llu/1000 Mismatch", (unsigned long long)r.verdicts.mismatch));
  o.require(r.verdicts.pass == 0, fmt("%llu Pass verdicts", (unsigned long long)r.verdicts.pass));
  o.require(r.faults.injected == 1000 && r.faults.value_faults_altering_output == 1000,
            "not every flip was applied");
  o.require(r.faults.undetected_altering == 0, "a corrupted output passed");
  o.require(secs < 5.0, fmt("took %.2f s", secs));
  if (o.ok) o.detail = fmt("1000/1000 Mismatch, 0 corrupted Pass, %.2f s", secs);
  return o;
}

Outcome fault_masking() {
  Outcome o;
  const json tmr{{"replica_count", 3}, {"policy", "2oo3"}};
  const auto clean_cfg = frames_only(tmr, 1000);
  auto faulty_cfg = clean_cfg;
  faulty_cfg.faults = one_flip_per_frame(1000, 3, clean_cfg.workload.arch.back(), 37);
  std::ostringstream clean_trace, faulty_trace;
  run_experiment(clean_cfg, &clean_trace);
  const auto r = run_experiment(faulty_cfg, &faulty_trace);
  const auto clean = records(clean_trace.str(), "verdict");
  const auto faulty = records(faulty_trace.str(), "verdict");
  o.require(r.verdicts.pass == 1000, fmt("%llu/1000 Pass", (unsigned long long)r.verdicts.pass));
  o.require(r.faults.masked == 1000, fmt("%llu/1000 masked", (unsigned long long)r.faults.masked));
  o.require(clean.size() == 1000 && faulty.size() == 1000, "missing verdict records");
  std::size_t same_value = 0;
  for (std::size_t i = 0; i < std::min(clean.size(), faulty.size()); ++i) {
    same_value += faulty[i]["verdict"] == "pass" && faulty[i]["digest"] == clean[i]["digest"];
  }
  o.require(same_value == 1000, fmt("%zu/1000 passes carry the unfaulted value", same_value));
  if (o.ok) o.detail = "1000/1000 Pass with the unfaulted value";
  return o;
}

Outcome tight_baseline() {
  Outcome o;
  const auto base = parse_config(json{{"seed", 1618},
                                      {"preset", "fpga-duplex-tight"},
                                      {"workload", {{"frame_count", 300}, {"repetitions_per_frame", 1}}}});
  const auto r = run_experiment(base);
  std::size_t nonzero = 0;
  for (auto s : r.skews_ns) nonzero += s != 0;
  o.require(r.skews_ns.size() == 300 && nonzero == 0, fmt("%zu frames with non-zero skew", nonzero));
  o.require(r.bus_divergences == 0, "bus traces diverged in the baseline");
  o.require(r.verdicts.pass == 300, "baseline frame failed to pass");

  auto faulted = base;
  faulted.topology.debounce_threshold = 1'000'000;
  const auto three_cycles = cycles_to_time(3, base.topology.replicas[0].clock);
  Rng pick(99);
  std::set<std::uint64_t> frames;
  while (frames.size() < 30) frames.insert(pick.below(300));
  for (auto f : frames) {
    faulted.faults.push_back({static_cast<std::uint32_t>(pick.below(2)), FaultSpec{ExtraDelay{three_cycles}, OnFrame{f, 0}}});
  }
  std::ostringstream trace;
  run_experiment(faulted, &trace);
  std::set<std::uint64_t> flagged;
  for (const auto& v : records(trace.str(), "verdict")) {
    if (v["verdict"] != "pass") flagged.insert(v["frame_id"].get<std::uint64_t>());
  }
  std::set<std::uint64_t> diverged;
  for (const auto& d : records(trace.str(), "bus_divergence")) diverged.insert(d["frame_id"].get<std::uint64_t>());
  o.require(flagged == frames, fmt("%zu frames flagged for %zu faulted", flagged.size(), frames.size()));
  o.require(diverged == frames, fmt("%zu bus divergences for %zu faulted frames", diverged.size(), frames.size()));
  if (o.ok) {
    o.detail = fmt("300 frames skew 0 and Match; 3-cycle stall flagged on exactly %zu/%zu faulted frames",
                   flagged.size(), frames.size());
  }
  return o;
}

// Frozen from the first run of configs/reference-protocol.json; bit-exact.
constexpr double kGoldenKurtosis0 = 0x1.f2d446604f74ep+8;  // 498.82919885578019
constexpr double kGoldenKurtosis1 = 0x1.af2ea606d9017p+8;  // 431.1822208671378
constexpr std::size_t kGoldenOutliers0 = 512;
constexpr std::size_t kGoldenOutliers1 = 507;

Outcome profile_phenomena() {
  Outcome o;
  const auto r = run_experiment(load_config(config_path("reference-protocol.json")));
  o.require(r.replicas.size() == 2, "expected two replicas");
  const double golden_k[2] = {kGoldenKurtosis0, kGoldenKurtosis1};
  const std::size_t golden_o[2] = {kGoldenOutliers0, kGoldenOutliers1};
  std::string summary;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, r.replicas.size()); ++i) {
    const auto& p = r.replicas[i];
    o.require(p.samples_ns.size() == 50'000, fmt("replica %zu has %zu samples", i, p.samples_ns.size()));
    const double k = p.stats && p.stats->excess_kurtosis ? *p.stats->excess_kurtosis : 0.0;
    const std::size_t out = p.outliers ? p.outliers->indices.size() : 0;
    std::printf("  replica %zu: excess kurtosis %a (%.17g), MAD outliers %zu\n", i, k, k, out);
    o.require(k > 3.0, fmt("replica %zu kurtosis %.3f <= 3", i, k));
    o.require(out >= 1, fmt("replica %zu has no outliers", i));
    o.require(k == golden_k[i], fmt("replica %zu kurtosis %.17g != golden %.17g", i, k, golden_k[i]));
    o.require(out == golden_o[i], fmt("replica %zu outliers %zu != golden %zu", i, out, golden_o[i]));
    summary += fmt("%sreplica %zu g2=%.2f outliers=%zu", i ? ", " : "", i, k, out);
  }
  const auto a = run_experiment(load_config(config_path("board-a.json")));
  const auto b = run_experiment(load_config(config_path("board-b.json")));
  const auto cmp = compare_runs(a, b, 0.01);
  for (const auto& rc : cmp.replicas) {
    o.require(rc.ks.distinguishable, fmt("boards not distinguishable on replica %u (D=%.4f crit=%.4f)",
                                         rc.replica_id, rc.ks.ks_statistic, rc.ks.critical_value));
    summary += fmt("; board KS replica %u D=%.3f > %.3f", rc.replica_id, rc.ks.ks_statistic, rc.ks.critical_value);
  }
  if (o.ok) o.detail = summary;
  return o;
}

Outcome statistics_oracle() {
  Outcome o;
  Rng rng(6);
  for (std::size_t set = 0; set < 100; ++set) {
    const auto x = oracle::random_sample_set(rng, set);
    const auto s = stats(x);
    const auto ref = oracle::moments(x);
    o.require(oracle::close(s.mean, ref.mean, 1e-9), fmt("set %zu mean", set));
    o.require(oracle::close(s.sample_std, ref.sample_std, 1e-9), fmt("set %zu std", set));
    for (unsigned p : {50u, 95u, 99u}) {
      const auto got = p == 50 ? s.p50 : p == 95 ? s.p95 : s.p99;
      o.require(got == oracle::percentile(x, p), fmt("set %zu p%u", set, p));
    }
    o.require(s.excess_kurtosis.has_value() == ref.shape_defined, fmt("set %zu definedness", set));
    if (ref.shape_defined) {
      o.require(oracle::close(*s.skewness, ref.g1, 1e-9, 1.0), fmt("set %zu g1", set));
      o.require(oracle::close(*s.excess_kurtosis, ref.g2, 1e-9, 1.0), fmt("set %zu g2", set));
      o.require(oracle::close(*s.bimodality, ref.b, 1e-9, 1.0), fmt("set %zu b", set));
    }
    const auto y = oracle::random_sample_set(rng, set + 1);
    const auto d = oracle::ks(x, y);
    o.require(oracle::close(ks_statistic(x, y).ks_statistic, oracle::Real(d), 1e-9, 1.0), fmt("set %zu D", set));
  }
  const std::vector<std::uint64_t> anchor{0, 0, 0, 0, 100};
  const auto g2 = stats(anchor).excess_kurtosis;
  o.require(g2 && std::abs(*g2 - 0.25) <= 1e-9 * 0.25, "g2([0,0,0,0,100]) != 0.25");
  const std::vector<std::uint64_t> ka{1, 2, 3, 4}, kb{1, 2, 3, 10};
  o.require(ks_statistic(ka, kb).ks_statistic == 0.25, "D([1,2,3,4],[1,2,3,10]) != 0.25");
  if (o.ok) o.detail = "100 sample sets within 1e-9 of the 50-digit reference; anchors g2=0.25, D=0.25";
  return o;
}

Outcome ptp_exactness() {
  Outcome o;
  std::uint64_t checked = 0;
  for (std::int64_t offset = -1'000'000; offset <= 1'000'000; ++offset) {
    const std::uint64_t delay = 100 + static_cast<std::uint64_t>(offset & 0x3FF);
    const auto x = simulate_ptp_exchange(SimTime{2'000'000}, offset, delay, delay, 1000);
    const auto e = estimate_ptp_offset(x);
    ++checked;
    if (e.offset_ns != offset || e.path_delay_ns != static_cast<std::int64_t>(delay)) {
      o.require(false, fmt("offset %lld estimated as %lld", (long long)offset, (long long)e.offset_ns));
      break;
    }
  }
  // Asymmetry a: estimate = trunc((2*offset + a) / 2), so the error is a/2
  // exactly for even a and a/2 truncated toward zero alongside the offset
  // otherwise.
  Rng rng(8);
  std::uint64_t asym_checked = 0;
  for (std::int64_t a = -2000; a <= 2000; ++a) {
    const auto offset = rng.between(-1'000'000, 1'000'000);
    const std::uint64_t reverse = 5000;
    const auto forward = static_cast<std::uint64_t>(static_cast<std::int64_t>(reverse) + a);
    const auto e = estimate_ptp_offset(simulate_ptp_exchange(SimTime{2'000'000}, offset, forward, reverse, 300));
    const std::int64_t analytic = (2 * offset + a) / 2;
    ++asym_checked;
    o.require(e.offset_ns == analytic, fmt("asymmetry %lld: estimate %lld, analytic %lld", (long long)a,
                                           (long long)e.offset_ns, (long long)analytic));
    if (a % 2 == 0) o.require(e.offset_ns - offset == a / 2, fmt("asymmetry %lld: error != a/2", (long long)a));
    if (!o.ok) break;
  }
  if (o.ok) {
    o.detail = fmt("%llu symmetric offsets recovered exactly; %llu asymmetries give error a/2",
                   (unsigned long long)checked, (unsigned long long)asym_checked);
  }
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  const auto base = fs::temp_directory_path() / "lsim_acceptance_determinism";
  fs::remove_all(base);
  double worst = 0;
  for (const char* run : {"r1", "r2"}) {
    const auto dir = (base / run).string();
    const auto cfg = config_path("reference-protocol.json");
    const char* argv[] = {"lockstep-sim", "run", "--config", cfg.c_str(), "--out", dir.c_str()};
    std::ostringstream out, err;
    const auto t0 = Clock::now();
    const int code = cli_main(6, argv, out, err);
    worst = std::max(worst, seconds_since(t0));
    o.require(code == 0, "run failed: " + err.str());
  }
  const auto t1 = slurp(base / "r1" / "trace.jsonl");
  const auto r1 = slurp(base / "r1" / "report.json");
  o.require(!t1.empty() && t1 == slurp(base / "r2" / "trace.jsonl"), "trace.jsonl differs between runs");
  o.require(!r1.empty() && r1 == slurp(base / "r2" / "report.json"), "report.json differs between runs");
  const auto report = json::parse(r1);
  o.require(report["verdict_counts"]["total"] == 50'000, "expected 50,000 inferences");
  for (const auto& rep : report["replicas"]) {
    o.require(rep["samples_ns"].size() == 50'000, "expected 50,000 samples per replica");
  }
  o.require(worst < 60.0, fmt("slowest run took %.1f s", worst));
  fs::remove_all(base);
  if (o.ok) o.detail = fmt("two runs byte-identical (trace %zu B, report %zu B); slowest %.2f s", t1.size(), r1.size(), worst);
  return o;
}

Outcome safety_state_machine() {
  Outcome o;
  {
    const auto s = step_safety({}, VerdictPass{});
    o.require(s.state.state == SafetyState::Operational && s.action == SafetyAction::DeliverOutput,
              "Pass did not deliver");
    const auto m = step_safety({}, VerdictMismatch{});
    o.require(m.state.state == SafetyState::SafeOff && m.action == SafetyAction::EnterSafeOff,
              "Mismatch at threshold 1 did not trip");
  }
  {
    SafetySwitchState st;
    st.debounce_threshold = 3;
    const std::vector<Verdict> seq{VerdictMismatch{}, VerdictPass{}, VerdictMismatch{}, VerdictMismatch{},
                                   VerdictMismatch{}};
    const SafetyAction expected[] = {SafetyAction::SuppressOutput, SafetyAction::DeliverOutput,
                                     SafetyAction::SuppressOutput, SafetyAction::SuppressOutput,
                                     SafetyAction::EnterSafeOff};
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto s = step_safety(st, seq[i]);
      o.require(s.action == expected[i], fmt("threshold-3 sequence diverges at step %zu", i));
      o.require((s.state.state == SafetyState::SafeOff) == (i == 4), fmt("SafeOff timing wrong at step %zu", i));
      st = s.state;
    }
  }
  Rng rng(2021);
  std::size_t trips = 0;
  for (int trial = 0; trial < 10'000 && o.ok; ++trial) {
    SafetySwitchState st;
    st.debounce_threshold = 1 + static_cast<std::uint32_t>(rng.below(5));
    bool off = false;
    const auto len = 1 + rng.below(60);
    for (std::uint64_t i = 0; i < len; ++i) {
      Verdict v;
      switch (rng.below(8)) {
        case 0: v = VerdictMismatch{}; break;
        case 1: v = VerdictTimeout{}; break;
        case 2: v = VerdictDegraded{"x"}; break;
        default: v = VerdictPass{}; break;
      }
      const auto s = step_safety(st, v);
      if (off) {
        o.require(s.state.state == SafetyState::SafeOff && s.action == SafetyAction::SuppressOutput,
                  fmt("left SafeOff in trial %d", trial));
      }
      if (s.state.state == SafetyState::SafeOff && !off) {
        off = true;
        ++trips;
      }
      st = s.state;
    }
  }
  if (o.ok) o.detail = fmt("debounce examples reproduced; SafeOff absorbing over 10000 random sequences (%zu trips)", trips);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"voter oracle equivalence", voter_oracle_equivalence},
      {"fault detection completeness", fault_detection_completeness},
      {"fault masking", fault_masking},
      {"tight-lockstep baseline", tight_baseline},
      {"profile phenomena", profile_phenomena},
      {"statistics oracle", statistics_oracle},
      {"PTP exactness", ptp_exactness},
      {"end-to-end determinism", end_to_end_determinism},
      {"safety state machine", safety_state_machine},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s [%zu] %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
