#include "lsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsim/config.hpp"
#include "lsim/experiment.hpp"

namespace lsim {

namespace fs = std::filesystem;

std::vector<std::string> agreement_patterns(std::uint32_t n) {
  std::vector<std::string> out;
  if (n == 0) return out;
  std::string cur(n, 'A');
  // Restricted growth: position i takes a label at most one past the
  // largest label used before it.
  auto rec = [&](auto&& self, std::uint32_t i, char max_used) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (char c = 'A'; c <= max_used + 1; ++c) {
      cur[i] = c;
      self(self, i + 1, std::max(max_used, c));
    }
  };
  cur[0] = 'A';
  rec(rec, 1, 'A');
  return out;
}

std::vector<ReplicaOutput> outputs_for_pattern(const std::string& pattern) {
  std::vector<ReplicaOutput> outs;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto value = static_cast<std::int16_t>((pattern[i] - 'A') * kOne);
    outs.push_back(make_replica_output(static_cast<std::uint32_t>(i), 0, FixedPointTensor::vector({value}),
                                       0, SimTime{}, {}));
  }
  return outs;
}

std::vector<VoteTableRow> vote_table(const VotingPolicy& policy) {
  policy.validate();
  std::vector<VoteTableRow> rows;
  std::vector<std::uint32_t> ids(policy.n);
  for (std::uint32_t i = 0; i < policy.n; ++i) ids[i] = i;
  for (const auto& p : agreement_patterns(policy.n)) {
    const auto outs = outputs_for_pattern(p);
    rows.push_back({p, vote(outs, policy, ExactComparator{}, RendezvousComplete{ids, 0})});
  }
  return rows;
}

namespace {

std::string ids_text(const std::vector<std::uint32_t>& ids) {
  std::string s = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s + "}";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

ExperimentReport read_report(const std::string& where) {
  fs::path p(where);
  if (fs::is_directory(p)) p /= "report.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open report " + p.string());
  return report_from_json(nlohmann::json::parse(in));
}

int run_cmd(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, bool fail_on_safeoff, bool event_log,
            std::ostream& out) {
  ExperimentConfig config = load_config(config_path);
  if (seed) config.seed = *seed;
  fs::create_directories(out_dir);

  std::ostringstream trace;
  std::vector<Event> events;
  const auto report = run_experiment(config, &trace, event_log ? &events : nullptr);
  write_file(fs::path(out_dir) / "trace.jsonl", trace.str());
  write_file(fs::path(out_dir) / "report.json", to_json(report).dump(2) + "\n");
  for (const auto& r : report.replicas) {
    std::ostringstream csv;
    write_histogram_csv(r.histogram, csv);
    write_file(fs::path(out_dir) / ("hist_replica" + std::to_string(r.replica_id) + ".csv"), csv.str());
  }
  if (event_log) {
    std::ostringstream log;
    write_event_log(events, log);
    write_file(fs::path(out_dir) / "events.jsonl", log.str());
  }

  const auto& v = report.verdicts;
  out << "seed " << config.seed << ": " << report.frames << " frames x " << report.repetitions
      << " repetitions\n"
      << "verdicts: pass " << v.pass << ", mismatch " << v.mismatch << ", timeout " << v.timeout
      << ", degraded " << v.degraded << "\n"
      << "safety: " << to_string(report.final_state) << ", delivered " << report.delivered
      << ", suppressed " << report.suppressed << "\n";
  for (const auto& r : report.replicas) {
    out << "replica " << r.replica_id << ": " << r.samples_ns.size() << " samples";
    if (r.stats) {
      out << ", mean " << r.stats->mean << " ns, p99 " << r.stats->p99 << " ns";
      if (r.stats->excess_kurtosis) out << ", excess kurtosis " << *r.stats->excess_kurtosis;
    }
    if (r.outliers) out << ", outliers " << r.outliers->indices.size();
    out << "\n";
  }
  if (fail_on_safeoff && report.final_state == SafetyState::SafeOff) return 2;
  return 0;
}

int stats_cmd(const std::string& trace_path, std::size_t bins, double threshold, std::ostream& out) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open trace " + trace_path);
  std::map<std::uint32_t, std::vector<std::uint64_t>> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    if (rec.value("kind", "") == "completion" && rec.contains("turnaround_ns")) {
      samples[rec.at("replica_id").get<std::uint32_t>()].push_back(rec.at("turnaround_ns").get<std::uint64_t>());
    }
  }
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& [id, s] : samples) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : histogram(s, bins)) hist.push_back({{"lower_edge_ns", b.lower_edge}, {"count", b.count}});
    doc.push_back({{"replica_id", id},
                   {"stats", to_json(stats(s))},
                   {"outliers", s.size() >= 3 ? nlohmann::json(detect_outliers(s, threshold).indices.size())
                                              : nlohmann::json(nullptr)},
                   {"histogram", std::move(hist)}});
  }
  out << doc.dump(2) << "\n";
  return 0;
}

int vote_table_cmd(const std::string& policy_text, bool as_json, std::ostream& out) {
  const auto policy = VotingPolicy::parse(policy_text);
  const auto rows = vote_table(policy);
  nlohmann::json doc = nlohmann::json::array();
  if (!as_json) out << "policy " << policy.name() << " (required agreement " << policy.required_agreement() << ")\n";
  for (const auto& row : rows) {
    std::string detail;
    nlohmann::json j{{"pattern", row.pattern}, {"verdict", verdict_name(row.verdict)}};
    if (const auto* p = std::get_if<VerdictPass>(&row.verdict)) {
      detail = "agreeing " + ids_text(p->agreeing_ids);
      j["agreeing_ids"] = p->agreeing_ids;
    } else if (const auto* m = std::get_if<VerdictMismatch>(&row.verdict)) {
      for (const auto& g : m->groups) detail += ids_text(g);
      j["groups"] = m->groups;
    } else if (const auto* d = std::get_if<VerdictDegraded>(&row.verdict)) {
      detail = d->reason;
    }
    if (as_json) {
      doc.push_back(std::move(j));
    } else {
      out << row.pattern << "  " << verdict_name(row.verdict) << "  " << detail << "\n";
    }
  }
  if (as_json) out << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic simulator for redundant (lockstep) neural-network inference", "lockstep-sim"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write trace, report and histograms");
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool fail_on_safeoff = false;
  bool event_log = false;
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "seed override (beats config and LOCKSTEP_SEED)");
  run->add_flag("--fail-on-safeoff", fail_on_safeoff, "exit 2 if the safety switch trips");
  run->add_flag("--event-log", event_log, "also write events.jsonl");

  auto* compare = app.add_subcommand("compare", "compare the latency profiles of two runs");
  std::string run_a;
  std::string run_b;
  double alpha = 0.01;
  bool compare_json = false;
  compare->add_option("RUN_A", run_a, "run directory or report.json")->required();
  compare->add_option("RUN_B", run_b, "run directory or report.json")->required();
  compare->add_option("--alpha", alpha, "KS significance level");
  compare->add_flag("--json", compare_json, "print JSON instead of a table");

  auto* table = app.add_subcommand("vote-table", "print the exhaustive verdict table of a policy");
  std::string policy;
  bool table_json = false;
  table->add_option("--policy", policy, "MooN, e.g. 2oo3")->required();
  table->add_flag("--json", table_json, "print JSON");

  auto* st = app.add_subcommand("stats", "latency statistics from a trace file");
  std::string trace_path;
  std::size_t bins = 50;
  double threshold = 3.5;
  st->add_option("--trace", trace_path, "trace.jsonl")->required();
  st->add_option("--bins", bins, "histogram bins");
  st->add_option("--outlier-threshold", threshold, "modified z-score threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) return run_cmd(config_path, out_dir, seed, fail_on_safeoff, event_log, out);
    if (*compare) {
      const auto result = compare_runs(read_report(run_a), read_report(run_b), alpha);
      if (compare_json) {
        out << to_json(result).dump(2) << "\n";
      } else {
        out << result.table;
      }
      return 0;
    }
    if (*table) return vote_table_cmd(policy, table_json, out);
    if (*st) return stats_cmd(trace_path, bins, threshold, out);
  } catch (const ConfigValidationError& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace lsim
