#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrsim/metrics.hpp"
#include "mrsim/scenario.hpp"
#include "mrsim/schedulers.hpp"
#include "mrsim/sim.hpp"
#include "mrsim/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrsim;

namespace {

const std::vector<std::string> kAllSchedulers = {"fifo", "fair", "capacity",
                                                 "prefetch"};
const std::vector<std::string> kSweepable = {
    "replication", "intra_rack_rate_mbps", "cross_rack_rate_mbps",
    "heartbeat_s", "failure_prob"};

std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw ConfigError("cannot write output file: " + path.string());
  }
  fs::rename(tmp, path);
}

struct RunOutput {
  RunSummary summary;
  EventLog log;
};

RunOutput do_run(const Scenario& s, const std::string& scheduler_name) {
  const ClusterTopology topo = s.topology();
  auto sched = make_scheduler(scheduler_name, s.sched);
  RunResult rr = run_simulation(topo, s.workload, *sched, s.params);
  RunOutput out;
  out.summary = summarize(scheduler_name, rr.log);
  out.log = std::move(rr.log);
  return out;
}

json summary_to_json(const RunSummary& s) {
  json jobs = json::array();
  for (const JobTimeline& t : s.response.jobs) {
    jobs.push_back({{"job", t.job},
                    {"user", t.user},
                    {"submit_s", t.submit_s},
                    {"complete_s", t.complete_s},
                    {"response_s", t.response_s}});
  }
  return json{
      {"scheduler", s.scheduler},
      {"locality",
       {{"node_local", s.locality.node_local},
        {"rack_local", s.locality.rack_local},
        {"remote", s.locality.remote},
        {"node_local_fraction", s.locality.node_local_fraction()}}},
      {"response",
       {{"jobs", jobs},
        {"mean_s", s.response.mean_s},
        {"max_s", s.response.max_s},
        {"makespan_s", s.response.makespan_s}}},
      {"prefetch",
       {{"issued", s.prefetch.issued},
        {"completed", s.prefetch.completed},
        {"hits", s.prefetch.hits},
        {"moved_mb", s.prefetch.moved_mb},
        {"wasted_mb", s.prefetch.wasted_mb}}}};
}

std::string summary_table(const Scenario& sc, const RunSummary& s) {
  std::ostringstream out;
  out << "scheduler: " << s.scheduler << "   scenario: " << sc.name
      << "   seed: " << sc.params.seed << "\n";
  const LocalityReport& l = s.locality;
  out << "map attempts: " << l.total() << "   node-local "
      << fmt1(l.node_local_fraction() * 100) << "% (" << l.node_local
      << ")   rack-local " << l.rack_local << "   remote " << l.remote
      << "\n";
  const PrefetchReport& p = s.prefetch;
  out << "prefetch: issued " << p.issued << "   completed " << p.completed
      << "   hits " << p.hits << "   moved_mb " << fmt1(p.moved_mb)
      << "   wasted_mb " << fmt1(p.wasted_mb) << "\n";
  out << "\n  job  user  submit_s  complete_s  response_s\n";
  for (const JobTimeline& t : s.response.jobs) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-4d %-5d %-9s %-11s %s\n", t.job,
                  t.user, fmt1(t.submit_s).c_str(),
                  fmt1(t.complete_s).c_str(), fmt1(t.response_s).c_str());
    out << buf;
  }
  out << "\nmean_response_s " << fmt1(s.response.mean_s) << "   max_s "
      << fmt1(s.response.max_s) << "   makespan_s "
      << fmt1(s.response.makespan_s) << "\n";
  return out.str();
}

std::string compare_table(const Scenario& sc,
                          const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "scenario: " << sc.name << "   seed: " << sc.params.seed
      << "   deltas vs: " << (rows.empty() ? "-" : rows.front().scheduler)
      << "\n";
  out << "  scheduler  node_local_pct  mean_response_s  delta_pp  "
         "delta_resp_pct\n";
  for (const CompareRow& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-10s %-15s %-16s %-9s %s\n",
                  r.scheduler.c_str(), fmt1(r.locality_pct).c_str(),
                  fmt1(r.mean_response_s).c_str(),
                  fmt2(r.locality_delta_pp).c_str(),
                  fmt2(r.response_delta_pct).c_str());
    out << buf;
  }
  return out.str();
}

json compare_to_json(const Scenario& sc,
                     const std::vector<RunSummary>& summaries,
                     const std::vector<CompareRow>& rows) {
  json runs = json::array();
  for (const RunSummary& s : summaries) runs.push_back(summary_to_json(s));
  json comparison = json::array();
  for (const CompareRow& r : rows) {
    comparison.push_back({{"scheduler", r.scheduler},
                          {"locality_pct", r.locality_pct},
                          {"mean_response_s", r.mean_response_s},
                          {"locality_delta_pp", r.locality_delta_pp},
                          {"response_delta_pct", r.response_delta_pct}});
  }
  return json{{"scenario", to_json(sc)},
              {"runs", runs},
              {"comparison", comparison}};
}

std::vector<std::string> resolve_schedulers(const std::string& list) {
  if (list == "all") return kAllSchedulers;
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bool known = false;
    for (const std::string& name : kAllSchedulers)
      if (name == item) known = true;
    if (!known)
      throw ConfigError(
          "unknown scheduler '" + item +
          "'; valid names: fifo, fair, capacity, prefetch, all");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty scheduler list");
  return out;
}

void emit(const std::string& content, const std::optional<fs::path>& out_dir,
          const std::string& filename) {
  if (!out_dir) {
    std::cout << content;
    return;
  }
  fs::create_directories(*out_dir);
  write_file_atomic(*out_dir / filename, content);
}

struct CommonOpts {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;
  std::string format = "table";
  bool log_events = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_events = true) {
  cmd->add_option("--scenario", o.scenario,
                  "scenario file path, or the built-in name 'table1'")
      ->required();
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_option("--out", o.out_dir,
                  "output directory (default: print to stdout)");
  cmd->add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"table", "structured"}));
  if (with_events)
    cmd->add_flag("--log-events", o.log_events,
                  "also write the event log (requires --out)");
}

void check_events_flag(const CommonOpts& o) {
  if (o.log_events && !o.out_dir)
    throw ConfigError("--log-events requires --out");
}

int run_command(const CommonOpts& o, const std::string& scheduler) {
  check_events_flag(o);
  const Scenario sc = load_scenario(o.scenario, o.seed);
  RunOutput run = do_run(sc, scheduler);
  if (o.format == "structured") {
    json j = summary_to_json(run.summary);
    j["scenario"] = to_json(sc);
    emit(j.dump(2) + "\n", o.out_dir, "report.json");
  } else {
    emit(summary_table(sc, run.summary), o.out_dir, "report.txt");
  }
  if (o.log_events)
    write_file_atomic(*o.out_dir / "events.log", serialize(run.log));
  return 0;
}

int compare_command(const CommonOpts& o, const std::string& scheds) {
  check_events_flag(o);
  const Scenario sc = load_scenario(o.scenario, o.seed);
  const std::vector<std::string> names = resolve_schedulers(scheds);
  std::vector<RunSummary> summaries;
  for (const std::string& name : names) {
    RunOutput run = do_run(sc, name);
    summaries.push_back(run.summary);
    if (o.log_events)
      write_file_atomic(*o.out_dir / ("events-" + name + ".log"),
                        serialize(run.log));
  }
  const std::vector<CompareRow> rows = compare_rows(summaries);
  if (o.format == "structured")
    emit(compare_to_json(sc, summaries, rows).dump(2) + "\n", o.out_dir,
         "compare.json");
  else
    emit(compare_table(sc, rows), o.out_dir, "compare.txt");
  return 0;
}

void apply_sweep_value(Scenario& sc, const std::string& param, double value) {
  if (param == "replication") {
    if (value != static_cast<int>(value))
      throw ConfigError("replication values must be integers");
    sc.params.replication = static_cast<int>(value);
  } else if (param == "intra_rack_rate_mbps") {
    sc.intra_rate_mbps = value;
  } else if (param == "cross_rack_rate_mbps") {
    sc.cross_rate_mbps = value;
  } else if (param == "heartbeat_s") {
    sc.params.heartbeat_s = value;
  } else if (param == "failure_prob") {
    sc.params.failure_prob = value;
  } else {
    std::string valid;
    for (const std::string& p : kSweepable) valid += " " + p;
    throw ConfigError("parameter '" + param +
                      "' is not sweepable; valid:" + valid);
  }
}

int sweep_command(const CommonOpts& o, const std::string& param,
                  const std::vector<double>& values,
                  const std::string& scheds) {
  check_events_flag(o);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const Scenario base = load_scenario(o.scenario, o.seed);
  const std::vector<std::string> names = resolve_schedulers(scheds);

  json index = json::array();
  for (double value : values) {
    Scenario sc = base;
    apply_sweep_value(sc, param, value);
    validate_scenario(sc);
    std::vector<RunSummary> summaries;
    for (const std::string& name : names)
      summaries.push_back(do_run(sc, name).summary);
    const std::vector<CompareRow> rows = compare_rows(summaries);

    std::string tag = param + "=" + fmt2(value);
    if (o.format == "structured") {
      json doc = compare_to_json(sc, summaries, rows);
      doc["sweep"] = {{"param", param}, {"value", value}};
      emit(doc.dump(2) + "\n", o.out_dir, "sweep-" + tag + ".json");
    } else {
      emit("== " + tag + " ==\n" + compare_table(sc, rows) + "\n", o.out_dir,
           "sweep-" + tag + ".txt");
    }
    json entry = {{"param", param}, {"value", value}};
    for (const CompareRow& r : rows)
      entry["runs"][r.scheduler] = {{"locality_pct", r.locality_pct},
                                    {"mean_response_s", r.mean_response_s}};
    index.push_back(entry);
  }
  if (o.out_dir)
    write_file_atomic(*o.out_dir / "sweep-index.json", index.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic MapReduce-cluster scheduling simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  std::string run_scheduler = "prefetch";
  CLI::App* run = app.add_subcommand("run", "simulate one scheduler");
  add_common(run, run_opts);
  run->add_option("--scheduler", run_scheduler,
                  "fifo | fair | capacity | prefetch");

  CommonOpts cmp_opts;
  std::string cmp_schedulers = "all";
  CLI::App* cmp =
      app.add_subcommand("compare", "run several schedulers side by side");
  add_common(cmp, cmp_opts);
  cmp->add_option("--schedulers", cmp_schedulers,
                  "comma-separated list or 'all'; first is the delta baseline");

  CommonOpts sweep_opts;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_schedulers = "all";
  CLI::App* sweep =
      app.add_subcommand("sweep", "compare schedulers across one parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "parameter to sweep")->required();
  sweep->add_option("--values", sweep_values, "values to sweep over")
      ->required()
      ->delimiter(',');
  sweep->add_option("--schedulers", sweep_schedulers,
                    "comma-separated list or 'all'");

  std::string validate_scenario_arg;
  CLI::App* val =
      app.add_subcommand("validate", "check a scenario file and exit");
  val->add_option("--scenario", validate_scenario_arg,
                  "scenario file path, or the built-in name 'table1'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return run_command(run_opts, run_scheduler);
    if (cmp->parsed()) return compare_command(cmp_opts, cmp_schedulers);
    if (sweep->parsed())
      return sweep_command(sweep_opts, sweep_param, sweep_values,
                           sweep_schedulers);
    if (val->parsed()) {
      const Scenario sc = load_scenario(validate_scenario_arg);
      std::cout << "ok: " << sc.name << " (" << sc.workload.jobs.size()
                << " jobs, " << sc.nodes.size() << " nodes)\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SimError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
