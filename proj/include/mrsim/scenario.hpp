#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrsim/cluster.hpp"
#include "mrsim/schedulers.hpp"
#include "mrsim/sim.hpp"
#include "mrsim/workload.hpp"

namespace mrsim {

// Everything a run needs, fully resolved: defaults applied, workload
// expanded to an explicit job list.
struct Scenario {
  std::string name = "unnamed";
  EngineParams params;
  std::vector<RackId> racks;
  std::vector<NodeSpec> nodes;
  double intra_rate_mbps = 0;
  double cross_rate_mbps = 0;
  WorkloadSpec workload;
  SchedulerParams sched;

  ClusterTopology topology() const;
};

// The committed reproduction setup: three workers on two racks (2+1),
// replication 1, equal queue capacities, the built-in eight-job workload,
// and a fixed seed.
Scenario default_table1_scenario();

// Strict parse: unknown keys anywhere are an error, as are missing cluster
// or workload sections. The workload is either the string "table1", an
// object {"synth": {...}}, or an explicit array of jobs.
Scenario parse_scenario(const nlohmann::json& j);

// Reads a scenario file; the literal name "table1" yields the built-in
// scenario without touching the filesystem. A seed override replaces the
// scenario's seed before the workload is resolved, so seeded synthetic
// workloads follow the override. Runs full validation.
Scenario load_scenario(const std::string& path_or_name,
                       std::optional<std::uint64_t> seed_override =
                           std::nullopt);

// Cross-field checks beyond per-module constructors: replication fits the
// cluster, reduce demand has slots to run on, queue capacities cover every
// user and sum to 1.
void validate_scenario(const Scenario& s);

// Full resolved echo, parseable by parse_scenario (jobs always explicit).
nlohmann::json to_json(const Scenario& s);

}  // namespace mrsim
