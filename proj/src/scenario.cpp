#include "mrsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mrsim/types.hpp"

namespace mrsim {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_req(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key))
    throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ".\"" + key + "\" has the wrong type");
  }
}

// Maps keyed by user id arrive as {"<id>": value} objects.
template <typename T>
std::map<UserId, T> user_map(const json& j, const std::string& where) {
  std::map<UserId, T> out;
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    std::size_t pos = 0;
    int user = 0;
    try {
      user = std::stoi(key, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (key.empty() || pos != key.size() || user < 0)
      throw ConfigError(where + ": key '" + key + "' is not a user id");
    try {
      out[user] = value.template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where + ".\"" + key + "\" has the wrong type");
    }
  }
  return out;
}

WorkloadSpec parse_workload(const json& j, std::uint64_t seed) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "table1") return table1_workload();
    throw ConfigError("unknown built-in workload '" + name + "'");
  }
  if (j.is_object()) {
    require_keys(j, "workload", {"synth"});
    const json& s = j.at("synth");
    require_keys(s, "workload.synth",
                 {"n_jobs", "min_size_mb", "max_size_mb", "min_maps",
                  "max_maps", "users", "reduces"});
    SynthParams p;
    p.n_jobs = get_or(s, "n_jobs", p.n_jobs);
    p.min_size_mb = get_or(s, "min_size_mb", p.min_size_mb);
    p.max_size_mb = get_or(s, "max_size_mb", p.max_size_mb);
    p.min_maps = get_or(s, "min_maps", p.min_maps);
    p.max_maps = get_or(s, "max_maps", p.max_maps);
    p.users = get_or(s, "users", p.users);
    p.reduces = get_or(s, "reduces", p.reduces);
    return synth_workload(p, seed);
  }
  if (!j.is_array()) throw ConfigError("workload: expected string, object or array");
  WorkloadSpec w;
  JobId id = 0;
  for (const json& job_j : j) {
    require_keys(job_j, "workload[" + std::to_string(id) + "]",
                 {"user", "submit_s", "size_mb", "maps", "reduces"});
    Job job;
    job.id = id++;
    job.user = get_or(job_j, "user", 0);
    job.submit_time_s = get_or(job_j, "submit_s", 0.0);
    job.input_size_mb =
        get_req<double>(job_j, "workload job", "size_mb");
    job.map_count = get_req<int>(job_j, "workload job", "maps");
    job.reduce_count = get_or(job_j, "reduces", 1);
    w.jobs.push_back(job);
    if (!w.users.count(job.user))
      w.users[job.user] = "user" + std::to_string(job.user);
  }
  return w;
}

}  // namespace

ClusterTopology Scenario::topology() const {
  return ClusterTopology(racks, nodes, intra_rate_mbps, cross_rate_mbps);
}

// One fast compute node beside two dense, slow storage nodes: the fast node
// holds a third of the blocks but most of the processing power, so it runs
// dry of local work early — the regime the prefetch scheduler exists for.
Scenario default_table1_scenario() {
  Scenario s;
  s.name = "table1";
  s.params.seed = 19;
  s.params.heartbeat_s = 1.5;
  s.params.replication = 1;
  s.params.failure_prob = 0.0;
  s.params.reduce_factor = 0.1;
  s.racks = {0, 1};
  for (int i = 0; i < 3; ++i) {
    NodeSpec n;
    n.id = i;
    n.rack = i < 2 ? 0 : 1;
    n.map_slots = i == 0 ? 3 : 10;
    n.reduce_slots = 1;
    n.proc_rate_mbps = i == 0 ? 16.0 : 0.5;
    s.nodes.push_back(n);
  }
  s.intra_rate_mbps = 16.0;
  s.cross_rate_mbps = 4.0;
  s.workload = table1_workload();
  return s;
}

Scenario parse_scenario(const json& j) {
  require_keys(j, "scenario",
               {"name", "seed", "heartbeat_s", "replication", "failure_prob",
                "reduce_factor", "cluster", "workload", "scheduler_params"});
  Scenario s;
  s.name = get_or<std::string>(j, "name", "unnamed");
  s.params.seed = get_or<std::uint64_t>(j, "seed", 1);
  s.params.heartbeat_s = get_or(j, "heartbeat_s", 3.0);
  s.params.replication = get_or(j, "replication", 1);
  s.params.failure_prob = get_or(j, "failure_prob", 0.0);
  s.params.reduce_factor = get_or(j, "reduce_factor", 0.1);

  if (!j.contains("cluster"))
    throw ConfigError("scenario: missing required key 'cluster'");
  const json& c = j.at("cluster");
  require_keys(c, "cluster",
               {"racks", "intra_rack_rate_mbps", "cross_rack_rate_mbps",
                "nodes"});
  s.racks = get_req<std::vector<RackId>>(c, "cluster", "racks");
  s.intra_rate_mbps =
      get_req<double>(c, "cluster", "intra_rack_rate_mbps");
  s.cross_rate_mbps =
      get_req<double>(c, "cluster", "cross_rack_rate_mbps");
  if (!c.contains("nodes") || !c.at("nodes").is_array())
    throw ConfigError("cluster: 'nodes' must be an array");
  for (const json& node_j : c.at("nodes")) {
    require_keys(node_j, "cluster node",
                 {"id", "rack", "map_slots", "reduce_slots",
                  "proc_rate_mbps"});
    NodeSpec n;
    n.id = get_req<int>(node_j, "cluster node", "id");
    n.rack = get_req<int>(node_j, "cluster node", "rack");
    n.map_slots = get_or(node_j, "map_slots", 2);
    n.reduce_slots = get_or(node_j, "reduce_slots", 1);
    n.proc_rate_mbps = get_or(node_j, "proc_rate_mbps", 1.0);
    s.nodes.push_back(n);
  }

  if (!j.contains("workload"))
    throw ConfigError("scenario: missing required key 'workload'");
  s.workload = parse_workload(j.at("workload"), s.params.seed);

  if (j.contains("scheduler_params")) {
    const json& p = j.at("scheduler_params");
    require_keys(p, "scheduler_params",
                 {"weights", "min_shares", "capacities",
                  "blacklist_threshold", "warmup_heartbeats"});
    if (p.contains("weights"))
      s.sched.weights = user_map<double>(p.at("weights"), "weights");
    if (p.contains("min_shares"))
      s.sched.min_shares = user_map<int>(p.at("min_shares"), "min_shares");
    if (p.contains("capacities"))
      s.sched.capacities = user_map<double>(p.at("capacities"), "capacities");
    s.sched.blacklist_threshold =
        get_or(p, "blacklist_threshold", s.sched.blacklist_threshold);
    s.sched.warmup_heartbeats =
        get_or(p, "warmup_heartbeats", s.sched.warmup_heartbeats);
  }
  return s;
}

void validate_scenario(const Scenario& s) {
  const ClusterTopology topo = s.topology();  // runs the cluster checks
  if (s.params.heartbeat_s <= 0)
    throw ConfigError("heartbeat_s must be positive");
  if (s.params.replication < 1 ||
      s.params.replication > static_cast<int>(topo.nodes().size()))
    throw ConfigError("replication must lie in [1, node count]; got " +
                      std::to_string(s.params.replication));
  if (s.params.failure_prob < 0 || s.params.failure_prob > 1)
    throw ConfigError("failure_prob must lie in [0,1]");
  if (s.params.reduce_factor < 0)
    throw ConfigError("reduce_factor must be nonnegative");
  if (s.sched.blacklist_threshold < 1)
    throw ConfigError("blacklist_threshold must be at least 1");
  if (s.sched.warmup_heartbeats < 0)
    throw ConfigError("warmup_heartbeats must be nonnegative");
  for (const auto& [user, w] : s.sched.weights)
    if (w <= 0) throw ConfigError("weights must be positive");
  for (const auto& [user, m] : s.sched.min_shares)
    if (m < 0) throw ConfigError("min_shares must be nonnegative");

  int total_reduce_slots = 0;
  for (const NodeSpec& n : topo.nodes()) total_reduce_slots += n.reduce_slots;

  bool any_reduce = false;
  JobId expect = 0;
  TaskId next_task = 0;
  BlockId next_block = 0;
  for (const Job& job : s.workload.jobs) {
    if (job.id != expect++)
      throw ConfigError("job ids must be dense and ascending from 0");
    if (job.submit_time_s < 0)
      throw ConfigError("job submit_s must be nonnegative");
    if (job.reduce_count < 0)
      throw ConfigError("job reduces must be nonnegative");
    if (job.reduce_count > 0) any_reduce = true;
    Job copy = job;  // exercises the size/maps split constraints
    std::vector<std::pair<BlockId, double>> decl;
    split_job(copy, decl, &next_task, &next_block);
  }
  if (any_reduce && total_reduce_slots == 0)
    throw ConfigError("workload has reduces but the cluster has no reduce slots");

  if (!s.sched.capacities.empty()) {
    double sum = 0;
    for (const auto& [user, cap] : s.sched.capacities) {
      if (cap <= 0) throw ConfigError("capacities must be positive");
      sum += cap;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConfigError("capacities must sum to 1");
    for (const Job& job : s.workload.jobs)
      if (!s.sched.capacities.count(job.user))
        throw ConfigError("no capacity configured for user " +
                          std::to_string(job.user));
  }
}

Scenario load_scenario(const std::string& path_or_name,
                       std::optional<std::uint64_t> seed_override) {
  Scenario s;
  if (path_or_name == "table1") {
    s = default_table1_scenario();
    if (seed_override) s.params.seed = *seed_override;
  } else {
    std::ifstream in(path_or_name);
    if (!in) throw ConfigError("cannot read scenario file: " + path_or_name);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("scenario parse error in " + path_or_name + ": " +
                        e.what());
    }
    if (seed_override) j["seed"] = *seed_override;
    s = parse_scenario(j);
  }
  validate_scenario(s);
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.params.seed;
  j["heartbeat_s"] = s.params.heartbeat_s;
  j["replication"] = s.params.replication;
  j["failure_prob"] = s.params.failure_prob;
  j["reduce_factor"] = s.params.reduce_factor;

  json nodes = json::array();
  for (const NodeSpec& n : s.nodes) {
    nodes.push_back({{"id", n.id},
                     {"rack", n.rack},
                     {"map_slots", n.map_slots},
                     {"reduce_slots", n.reduce_slots},
                     {"proc_rate_mbps", n.proc_rate_mbps}});
  }
  j["cluster"] = {{"racks", s.racks},
                  {"intra_rack_rate_mbps", s.intra_rate_mbps},
                  {"cross_rack_rate_mbps", s.cross_rate_mbps},
                  {"nodes", nodes}};

  json jobs = json::array();
  for (const Job& job : s.workload.jobs) {
    jobs.push_back({{"user", job.user},
                    {"submit_s", job.submit_time_s},
                    {"size_mb", job.input_size_mb},
                    {"maps", job.map_count},
                    {"reduces", job.reduce_count}});
  }
  j["workload"] = jobs;

  json p;
  if (!s.sched.weights.empty()) {
    json m;
    for (const auto& [u, w] : s.sched.weights) m[std::to_string(u)] = w;
    p["weights"] = m;
  }
  if (!s.sched.min_shares.empty()) {
    json m;
    for (const auto& [u, v] : s.sched.min_shares) m[std::to_string(u)] = v;
    p["min_shares"] = m;
  }
  if (!s.sched.capacities.empty()) {
    json m;
    for (const auto& [u, c] : s.sched.capacities) m[std::to_string(u)] = c;
    p["capacities"] = m;
  }
  p["blacklist_threshold"] = s.sched.blacklist_threshold;
  p["warmup_heartbeats"] = s.sched.warmup_heartbeats;
  j["scheduler_params"] = p;
  return j;
}

}  // namespace mrsim
