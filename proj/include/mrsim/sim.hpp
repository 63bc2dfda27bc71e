#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/events.hpp"
#include "mrsim/workload.hpp"

namespace mrsim {

enum class AttemptStatus { Running, Succeeded, Failed };

// One execution of a map task on a node. Non-local attempts serialize a
// remote read of the input block before processing starts, so the nominal
// duration is read_s + proc_s and progress stays 0 through the read phase.
struct TaskAttempt {
  AttemptId id = kInvalidId;
  TaskId task = kInvalidId;
  NodeId node = kInvalidId;
  double start_s = 0;
  LocalityClass locality = LocalityClass::Remote;  // frozen at launch
  double size_mb = 0;
  double read_s = 0;  // 0 for node-local attempts
  double proc_s = 0;
  NodeId read_source = kInvalidId;  // replica serving the remote read
  AttemptStatus status = AttemptStatus::Running;
  bool will_fail = false;
  double fail_at_s = 0;
};

// Fraction of the input processed at `now`, in [0,1] and nondecreasing.
// Throws SimError if now precedes the attempt's start.
double attempt_progress(const TaskAttempt& attempt, double now);

enum class TransferPurpose { PrefetchCopy, RemoteRead };

struct Transfer {
  int id = kInvalidId;
  BlockId block = kInvalidId;
  NodeId source = kInvalidId;
  NodeId dest = kInvalidId;
  double size_mb = 0;
  double rate_mbps = 0;  // intra- or cross-rack link rate
  double start_s = 0;
  TransferPurpose purpose = TransferPurpose::RemoteRead;
  AttemptId attempt = kInvalidId;    // RemoteRead: the reading attempt
  TaskId target_task = kInvalidId;   // PrefetchCopy: the preselected task
  bool done = false;
};

struct SchedulerDecision {
  enum class Kind { AssignMap, AssignReduce, Prefetch, NoOp };
  Kind kind = Kind::NoOp;
  TaskId task = kInvalidId;    // AssignMap target task / Prefetch target task
  JobId job = kInvalidId;      // AssignReduce
  int reduce_index = -1;       // AssignReduce
  NodeId node = kInvalidId;    // execution node (assignments)
  BlockId block = kInvalidId;  // Prefetch
  NodeId source = kInvalidId;  // Prefetch
  NodeId dest = kInvalidId;    // Prefetch

  static SchedulerDecision assign_map(TaskId t, NodeId n);
  static SchedulerDecision assign_reduce(JobId j, int index, NodeId n);
  static SchedulerDecision prefetch(BlockId b, NodeId src, NodeId dst,
                                    TaskId target);
};

struct JobState {
  bool submitted = false;
  std::vector<TaskId> pending;  // never-run map tasks, ascending task id
  std::deque<TaskId> failed;    // retryable failed map tasks, failure order
  int running_maps = 0;
  int succeeded_maps = 0;
  int reduces_launched = 0;
  int reduces_done = 0;
  double complete_time_s = -1;
};

struct EngineParams {
  double heartbeat_s = 3.0;
  double reduce_factor = 0.1;  // reduce wave work as a fraction of input
  double failure_prob = 0.0;
  std::uint64_t seed = 1;
  int replication = 1;
};

// Canonical mutable simulation state. Owned by the engine; schedulers see it
// through the read-only SimView. Tests may build one directly for fixtures.
struct SimCore {
  double now = 0;
  const ClusterTopology* topo = nullptr;
  BlockMap blocks;
  EngineParams params;
  std::vector<Job> jobs;       // indexed by job id
  std::vector<MapTask> tasks;  // indexed by task id
  std::vector<TaskAttempt> attempts;
  std::vector<JobState> job_state;                  // indexed by job id
  std::map<NodeId, int> free_map_slots;
  std::map<NodeId, int> free_reduce_slots;
  std::map<NodeId, std::vector<AttemptId>> running; // running map attempts
  std::map<std::pair<JobId, NodeId>, int> failure_counts;
  std::vector<Transfer> transfers;
  int prefetches_in_flight = 0;
};

// Read-only facade handed to scheduler callbacks.
class SimView {
 public:
  explicit SimView(const SimCore& c) : c_(c) {}

  double now() const { return c_.now; }
  const ClusterTopology& topology() const { return *c_.topo; }
  const BlockMap& blocks() const { return c_.blocks; }
  const EngineParams& params() const { return c_.params; }
  const std::vector<Job>& jobs() const { return c_.jobs; }
  const Job& job(JobId j) const { return c_.jobs.at(j); }
  const MapTask& task(TaskId t) const { return c_.tasks.at(t); }
  const TaskAttempt& attempt(AttemptId a) const { return c_.attempts.at(a); }

  bool submitted(JobId j) const { return c_.job_state.at(j).submitted; }
  bool maps_done(JobId j) const {
    return c_.job_state.at(j).succeeded_maps == c_.jobs.at(j).map_count;
  }
  int reduces_remaining(JobId j) const {
    return c_.jobs.at(j).reduce_count - c_.job_state.at(j).reduces_launched;
  }
  const std::vector<TaskId>& pending_maps(JobId j) const {
    return c_.job_state.at(j).pending;
  }
  const std::deque<TaskId>& failed_maps(JobId j) const {
    return c_.job_state.at(j).failed;
  }
  int running_maps(JobId j) const { return c_.job_state.at(j).running_maps; }

  int free_map_slots(NodeId n) const { return c_.free_map_slots.at(n); }
  int free_reduce_slots(NodeId n) const { return c_.free_reduce_slots.at(n); }

  // Running map attempts on one node, ascending attempt id.
  const std::vector<AttemptId>& running_on(NodeId n) const {
    static const std::vector<AttemptId> kEmpty;
    auto it = c_.running.find(n);
    return it == c_.running.end() ? kEmpty : it->second;
  }

  int failure_count(JobId j, NodeId n) const {
    auto it = c_.failure_counts.find({j, n});
    return it == c_.failure_counts.end() ? 0 : it->second;
  }

  bool prefetch_in_flight() const { return c_.prefetches_in_flight > 0; }

  LocalityClass locality_now(TaskId t, NodeId n) const {
    return classify_locality(n, c_.tasks.at(t).input_block, c_.blocks,
                             *c_.topo);
  }

 private:
  const SimCore& c_;
};

// Callback contract between the event loop and a scheduling policy. All
// callbacks run on the single engine thread; implementations keep private
// state only and must be deterministic given the view plus that state.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string name() const = 0;
  virtual std::vector<SchedulerDecision> on_heartbeat(const SimView& view,
                                                      NodeId node) = 0;
  virtual void on_job_submit(const SimView&, JobId) {}
  virtual void on_attempt_complete(const SimView&, AttemptId) {}
  virtual void on_attempt_fail(const SimView&, AttemptId) {}
  virtual void on_transfer_complete(const SimView&, const Transfer&) {}
};

struct RunResult {
  EventLog log;
  SimCore core;  // final state; topo pointer references the caller's topology
};

// Drains the event queue: seeds block placement, submits jobs, drives
// heartbeats through the scheduler and times every attempt and transfer.
// Identical scenario + seed yields a byte-identical serialized log.
RunResult run_simulation(const ClusterTopology& topo,
                         const WorkloadSpec& workload, Scheduler& scheduler,
                         const EngineParams& params);

}  // namespace mrsim
