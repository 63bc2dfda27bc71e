#pragma once

#include <set>
#include <utility>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/sim.hpp"
#include "mrsim/workload.hpp"

namespace mrsim::testutil {

// Hand-assembled simulation state for scheduler-level tests: jobs, tasks and
// running attempts are added directly, bypassing the engine, so a test can
// pin an exact mid-run situation.
struct CoreFixture {
  ClusterTopology topo;
  SimCore core;

  CoreFixture(std::vector<RackId> racks, std::vector<NodeSpec> nodes,
              double intra_mbps, double cross_mbps, EngineParams params = {})
      : topo(std::move(racks), std::move(nodes), intra_mbps, cross_mbps) {
    core.topo = &topo;
    core.params = params;
    for (const NodeSpec& n : topo.nodes()) {
      core.free_map_slots[n.id] = n.map_slots;
      core.free_reduce_slots[n.id] = n.reduce_slots;
      core.running[n.id] = {};
    }
  }

  JobId add_job(UserId user, int reduce_count = 1) {
    Job j;
    j.id = static_cast<JobId>(core.jobs.size());
    j.user = user;
    j.reduce_count = reduce_count;
    core.jobs.push_back(j);
    JobState js;
    js.submitted = true;
    core.job_state.push_back(js);
    return j.id;
  }

  // Pending map task whose input block (same id as the task) lives on
  // `replicas`. Sizes the job's bookkeeping along the way.
  TaskId add_task(JobId job, double size_mb, std::set<NodeId> replicas) {
    const TaskId id = static_cast<TaskId>(core.tasks.size());
    core.blocks.declare(id, size_mb, std::move(replicas));
    MapTask t;
    t.id = id;
    t.job = job;
    t.input_block = id;
    core.tasks.push_back(t);
    core.jobs[job].map_count += 1;
    core.jobs[job].input_size_mb += size_mb;
    core.jobs[job].input_blocks.push_back(id);
    core.job_state[job].pending.push_back(id);
    return id;
  }

  // Launches `task` on `node` at `start_s` exactly as the engine would:
  // locality frozen, read phase priced off the nearest replica.
  AttemptId start_attempt(TaskId task, NodeId node, double start_s) {
    MapTask& t = core.tasks[task];
    TaskAttempt a;
    a.id = static_cast<AttemptId>(core.attempts.size());
    a.task = task;
    a.node = node;
    a.start_s = start_s;
    a.locality = classify_locality(node, t.input_block, core.blocks, topo);
    a.size_mb = core.blocks.info(t.input_block).size_mb;
    a.proc_s = a.size_mb / topo.node(node).proc_rate_mbps;
    if (a.locality != LocalityClass::NodeLocal) {
      a.read_source = nearest_replica(t.input_block, node, core.blocks, topo);
      a.read_s = a.size_mb / topo.link_rate(a.read_source, node);
    }
    t.state = TaskState::Running;
    JobState& js = core.job_state[t.job];
    auto p = std::find(js.pending.begin(), js.pending.end(), task);
    if (p != js.pending.end()) js.pending.erase(p);
    auto f = std::find(js.failed.begin(), js.failed.end(), task);
    if (f != js.failed.end()) js.failed.erase(f);
    ++js.running_maps;
    --core.free_map_slots[node];
    core.running[node].push_back(a.id);
    core.attempts.push_back(a);
    return a.id;
  }

  // Moves a pending task onto the retry list, as a failed attempt would.
  void fail_pending(TaskId task, NodeId where) {
    MapTask& t = core.tasks[task];
    JobState& js = core.job_state[t.job];
    auto p = std::find(js.pending.begin(), js.pending.end(), task);
    if (p != js.pending.end()) js.pending.erase(p);
    js.failed.push_back(task);
    t.state = TaskState::FailedPendingRetry;
    ++core.failure_counts[{t.job, where}];
  }

  SimView view() const { return SimView(core); }
};

inline NodeSpec node_spec(NodeId id, RackId rack, int map_slots,
                          int reduce_slots, double proc_mbps) {
  NodeSpec n;
  n.id = id;
  n.rack = rack;
  n.map_slots = map_slots;
  n.reduce_slots = reduce_slots;
  n.proc_rate_mbps = proc_mbps;
  return n;
}

}  // namespace mrsim::testutil
