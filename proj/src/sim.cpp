#include "mrsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "mrsim/rng.hpp"
#include "mrsim/types.hpp"

namespace mrsim {

SchedulerDecision SchedulerDecision::assign_map(TaskId t, NodeId n) {
  SchedulerDecision d;
  d.kind = Kind::AssignMap;
  d.task = t;
  d.node = n;
  return d;
}

SchedulerDecision SchedulerDecision::assign_reduce(JobId j, int index,
                                                   NodeId n) {
  SchedulerDecision d;
  d.kind = Kind::AssignReduce;
  d.job = j;
  d.reduce_index = index;
  d.node = n;
  return d;
}

SchedulerDecision SchedulerDecision::prefetch(BlockId b, NodeId src,
                                              NodeId dst, TaskId target) {
  SchedulerDecision d;
  d.kind = Kind::Prefetch;
  d.block = b;
  d.source = src;
  d.dest = dst;
  d.task = target;
  return d;
}

double attempt_progress(const TaskAttempt& attempt, double now) {
  if (now < attempt.start_s)
    throw SimError("attempt_progress: query precedes attempt start");
  const double elapsed = now - attempt.start_s;
  if (elapsed <= attempt.read_s) return 0.0;
  if (attempt.proc_s <= 0) return 1.0;
  return std::min(1.0, (elapsed - attempt.read_s) / attempt.proc_s);
}

namespace {

enum class EvKind {
  JobSubmit,
  Heartbeat,
  AttemptComplete,
  AttemptFail,
  TransferComplete,
  ReduceComplete,
};

struct Ev {
  double t = 0;
  std::uint64_t seq = 0;
  EvKind kind = EvKind::Heartbeat;
  int a = kInvalidId;  // job / node / attempt / transfer id
  int b = kInvalidId;  // reduce index
};

struct EvLater {
  bool operator()(const Ev& x, const Ev& y) const {
    if (x.t != y.t) return x.t > y.t;
    return x.seq > y.seq;
  }
};

struct ReduceRun {
  JobId job = kInvalidId;
  int index = -1;
  NodeId node = kInvalidId;
};

class Engine {
 public:
  Engine(const ClusterTopology& topo, const WorkloadSpec& workload,
         Scheduler& scheduler, const EngineParams& params)
      : sched_(scheduler), failures_(params.seed, "failures") {
    core_.topo = &topo;
    core_.params = params;
    core_.jobs = workload.jobs;
    if (params.heartbeat_s <= 0)
      throw ConfigError("heartbeat interval must be positive");
    if (params.replication < 1)
      throw ConfigError("replication factor must be at least 1");
    if (params.failure_prob < 0 || params.failure_prob > 1)
      throw ConfigError("failure probability must lie in [0,1]");

    TaskId next_task = 0;
    BlockId next_block = 0;
    std::vector<std::pair<BlockId, double>> declarations;
    for (std::size_t i = 0; i < core_.jobs.size(); ++i) {
      Job& job = core_.jobs[i];
      if (job.id != static_cast<JobId>(i))
        throw ConfigError("job ids must be dense and ascending");
      std::vector<MapTask> tasks =
          split_job(job, declarations, &next_task, &next_block);
      job_tasks_.emplace_back();
      for (const MapTask& t : tasks) {
        job_tasks_.back().push_back(t.id);
        core_.tasks.push_back(t);
      }
      core_.job_state.emplace_back();
    }
    core_.blocks = place_blocks(declarations, params.replication, topo,
                                params.seed);

    for (const NodeSpec& n : topo.nodes()) {
      core_.free_map_slots[n.id] = n.map_slots;
      core_.free_reduce_slots[n.id] = n.reduce_slots;
      core_.running[n.id] = {};
    }
  }

  RunResult run() {
    for (const Job& job : core_.jobs)
      push(job.submit_time_s, EvKind::JobSubmit, job.id);
    if (!all_done()) schedule_heartbeat_round(0.0);
    if (core_.jobs.empty()) {
      record(RecordKind::RunEnd);
      return finish();
    }

    while (!queue_.empty()) {
      Ev ev = queue_.top();
      queue_.pop();
      if (ev.kind != EvKind::Heartbeat) --pending_non_heartbeat_;
      if (ev.t < core_.now)
        throw SimError("event clock regressed");
      core_.now = ev.t;
      switch (ev.kind) {
        case EvKind::JobSubmit: on_job_submit(ev.a); break;
        case EvKind::Heartbeat: on_heartbeat(ev.a); break;
        case EvKind::AttemptComplete: on_attempt_complete(ev.a); break;
        case EvKind::AttemptFail: on_attempt_fail(ev.a); break;
        case EvKind::TransferComplete: on_transfer_complete(ev.a); break;
        case EvKind::ReduceComplete: on_reduce_complete(ev.a); break;
      }
      if (all_done()) {
        record(RecordKind::RunEnd);
        break;
      }
    }
    if (!all_done()) raise_deadlock();
    return finish();
  }

 private:
  void push(double t, EvKind kind, int a, int b = kInvalidId) {
    queue_.push(Ev{t, next_seq_++, kind, a, b});
    if (kind != EvKind::Heartbeat) ++pending_non_heartbeat_;
  }

  LogRecord& record(RecordKind kind) {
    LogRecord r;
    r.time = core_.now;
    r.seq = next_record_++;
    r.kind = kind;
    log_.push_back(r);
    return log_.back();
  }

  bool all_done() const {
    for (const Job& job : core_.jobs) {
      const JobState& js = core_.job_state[job.id];
      if (js.succeeded_maps != job.map_count) return false;
      if (js.reduces_done != job.reduce_count) return false;
    }
    return true;
  }

  void schedule_heartbeat_round(double t) {
    for (const NodeSpec& n : core_.topo->nodes())
      push(t, EvKind::Heartbeat, n.id);
    round_applied_ = 0;
    round_remaining_ = static_cast<int>(core_.topo->nodes().size());
  }

  void on_job_submit(JobId j) {
    JobState& js = core_.job_state[j];
    js.submitted = true;
    js.pending = job_tasks_[j];
    LogRecord& r = record(RecordKind::JobSubmit);
    r.job = j;
    r.user = core_.jobs[j].user;
    r.maps = core_.jobs[j].map_count;
    r.reduces = core_.jobs[j].reduce_count;
    r.size_mb = core_.jobs[j].input_size_mb;
    sched_.on_job_submit(SimView(core_), j);
  }

  void on_heartbeat(NodeId n) {
    LogRecord& r = record(RecordKind::Heartbeat);
    r.node = n;
    std::vector<SchedulerDecision> decisions =
        sched_.on_heartbeat(SimView(core_), n);
    for (const SchedulerDecision& d : decisions)
      if (apply(d)) ++round_applied_;

    if (--round_remaining_ == 0) {
      const bool idle = round_applied_ == 0 && cluster_quiet();
      idle_rounds_ = idle ? idle_rounds_ + 1 : 0;
      if (idle && idle_rounds_ >= 2 && !all_done()) raise_deadlock();
      schedule_heartbeat_round(core_.now + core_.params.heartbeat_s);
    }
  }

  // True when nothing can change state without a new scheduling decision.
  bool cluster_quiet() const {
    return pending_non_heartbeat_ == 0;
  }

  [[noreturn]] void raise_deadlock() {
    std::ostringstream msg;
    msg << "no runnable work is progressing; stuck tasks:";
    for (const Job& job : core_.jobs) {
      const JobState& js = core_.job_state[job.id];
      for (TaskId t : js.pending) msg << " map" << t;
      for (TaskId t : js.failed) msg << " map" << t;
      if (js.submitted && js.succeeded_maps == job.map_count &&
          js.reduces_launched < job.reduce_count)
        msg << " job" << job.id << ".reduces";
    }
    throw SimError(msg.str());
  }

  // Returns true when the decision changed simulation state.
  bool apply(const SchedulerDecision& d) {
    switch (d.kind) {
      case SchedulerDecision::Kind::AssignMap: return apply_map(d);
      case SchedulerDecision::Kind::AssignReduce: return apply_reduce(d);
      case SchedulerDecision::Kind::Prefetch: return apply_prefetch(d);
      case SchedulerDecision::Kind::NoOp: return false;
    }
    return false;
  }

  bool reject(const SchedulerDecision& d, const std::string& reason) {
    LogRecord& r = record(RecordKind::AssignRejected);
    r.node = d.node != kInvalidId ? d.node : d.dest;
    r.task = d.task;
    r.reason = reason;
    return false;
  }

  bool apply_map(const SchedulerDecision& d) {
    if (!core_.topo->has_node(d.node) || d.task < 0 ||
        d.task >= static_cast<TaskId>(core_.tasks.size()))
      return reject(d, "unknown_target");
    MapTask& task = core_.tasks[d.task];
    JobState& js = core_.job_state[task.job];
    if (!js.submitted || (task.state != TaskState::NotRunning &&
                          task.state != TaskState::FailedPendingRetry))
      return reject(d, "not_pending");
    if (core_.free_map_slots[d.node] <= 0) return reject(d, "no_free_slot");

    TaskAttempt a;
    a.id = static_cast<AttemptId>(core_.attempts.size());
    a.task = d.task;
    a.node = d.node;
    a.start_s = core_.now;
    a.locality =
        classify_locality(d.node, task.input_block, core_.blocks, *core_.topo);
    a.size_mb = core_.blocks.info(task.input_block).size_mb;
    a.proc_s = a.size_mb / core_.topo->node(d.node).proc_rate_mbps;
    if (a.locality != LocalityClass::NodeLocal) {
      a.read_source = nearest_replica(task.input_block, d.node, core_.blocks,
                                      *core_.topo);
      a.read_s =
          a.size_mb / core_.topo->link_rate(a.read_source, d.node);
    }
    // Injection draws happen once per task, on its first launch, so the
    // stream position depends only on the order of first launches.
    if (task.state == TaskState::NotRunning &&
        core_.params.failure_prob > 0) {
      const double u = failures_.next_unit();
      const double f = failures_.next_unit();
      a.will_fail = u < core_.params.failure_prob;
      a.fail_at_s = core_.now + f * (a.read_s + a.proc_s);
    }

    task.state = TaskState::Running;
    erase_from_lists(js, d.task);
    ++js.running_maps;
    --core_.free_map_slots[d.node];
    core_.running[d.node].push_back(a.id);

    LogRecord& r = record(RecordKind::AttemptStart);
    r.attempt = a.id;
    r.task = d.task;
    r.job = task.job;
    r.node = d.node;
    r.block = task.input_block;
    r.size_mb = a.size_mb;
    r.locality = a.locality;
    r.has_locality = true;
    r.replicas.assign(core_.blocks.info(task.input_block).replicas.begin(),
                      core_.blocks.info(task.input_block).replicas.end());
    r.has_replicas = true;

    if (a.will_fail) {
      push(a.fail_at_s, EvKind::AttemptFail, a.id);
    } else {
      push(core_.now + a.read_s + a.proc_s, EvKind::AttemptComplete, a.id);
    }
    if (a.read_s > 0 && (!a.will_fail || a.fail_at_s > core_.now + a.read_s)) {
      Transfer tr;
      tr.id = static_cast<int>(core_.transfers.size());
      tr.block = task.input_block;
      tr.source = a.read_source;
      tr.dest = d.node;
      tr.size_mb = a.size_mb;
      tr.rate_mbps = core_.topo->link_rate(a.read_source, d.node);
      tr.start_s = core_.now;
      tr.purpose = TransferPurpose::RemoteRead;
      tr.attempt = a.id;
      core_.transfers.push_back(tr);
      push(core_.now + a.read_s, EvKind::TransferComplete, tr.id);
    }
    core_.attempts.push_back(a);
    return true;
  }

  bool apply_reduce(const SchedulerDecision& d) {
    if (!core_.topo->has_node(d.node) || d.job < 0 ||
        d.job >= static_cast<JobId>(core_.jobs.size()))
      return reject(d, "unknown_target");
    const Job& job = core_.jobs[d.job];
    JobState& js = core_.job_state[d.job];
    if (!js.submitted || js.succeeded_maps != job.map_count ||
        d.reduce_index != js.reduces_launched ||
        js.reduces_launched >= job.reduce_count)
      return reject(d, "reduce_not_ready");
    if (core_.free_reduce_slots[d.node] <= 0)
      return reject(d, "no_free_slot");
    const double share =
        job.input_size_mb * core_.params.reduce_factor / job.reduce_count;
    const double dur = share / core_.topo->node(d.node).proc_rate_mbps;
    ++js.reduces_launched;
    --core_.free_reduce_slots[d.node];
    reduces_.push_back(ReduceRun{d.job, d.reduce_index, d.node});

    LogRecord& r = record(RecordKind::ReduceStart);
    r.job = d.job;
    r.reduce_index = d.reduce_index;
    r.node = d.node;
    r.size_mb = share;
    push(core_.now + dur, EvKind::ReduceComplete,
         static_cast<int>(reduces_.size()) - 1);
    return true;
  }

  bool apply_prefetch(const SchedulerDecision& d) {
    if (!core_.topo->has_node(d.source) || !core_.topo->has_node(d.dest) ||
        !core_.blocks.has(d.block))
      return reject(d, "unknown_target");
    const BlockInfo& info = core_.blocks.info(d.block);
    if (core_.prefetches_in_flight > 0)
      return reject(d, "prefetch_in_flight");
    if (info.replicas.count(d.dest) || !info.replicas.count(d.source))
      return reject(d, "bad_replica");
    Transfer tr;
    tr.id = static_cast<int>(core_.transfers.size());
    tr.block = d.block;
    tr.source = d.source;
    tr.dest = d.dest;
    tr.size_mb = info.size_mb;
    tr.rate_mbps = core_.topo->link_rate(d.source, d.dest);
    tr.start_s = core_.now;
    tr.purpose = TransferPurpose::PrefetchCopy;
    tr.target_task = d.task;
    core_.transfers.push_back(tr);
    ++core_.prefetches_in_flight;

    LogRecord& r = record(RecordKind::PrefetchIssued);
    r.block = d.block;
    r.source = d.source;
    r.dest = d.dest;
    r.task = d.task;
    r.size_mb = info.size_mb;
    push(core_.now + tr.size_mb / tr.rate_mbps, EvKind::TransferComplete,
         tr.id);
    return true;
  }

  static void erase_from_lists(JobState& js, TaskId t) {
    auto p = std::find(js.pending.begin(), js.pending.end(), t);
    if (p != js.pending.end()) js.pending.erase(p);
    auto f = std::find(js.failed.begin(), js.failed.end(), t);
    if (f != js.failed.end()) js.failed.erase(f);
  }

  void release_map_slot(const TaskAttempt& a) {
    ++core_.free_map_slots[a.node];
    std::vector<AttemptId>& run = core_.running[a.node];
    run.erase(std::find(run.begin(), run.end(), a.id));
  }

  void on_attempt_complete(AttemptId id) {
    TaskAttempt& a = core_.attempts[id];
    a.status = AttemptStatus::Succeeded;
    MapTask& task = core_.tasks[a.task];
    task.state = TaskState::Succeeded;
    JobState& js = core_.job_state[task.job];
    --js.running_maps;
    ++js.succeeded_maps;
    release_map_slot(a);

    LogRecord& r = record(RecordKind::AttemptComplete);
    r.attempt = id;
    r.task = a.task;
    r.job = task.job;
    r.node = a.node;
    sched_.on_attempt_complete(SimView(core_), id);
    maybe_complete_job(task.job);
  }

  void on_attempt_fail(AttemptId id) {
    TaskAttempt& a = core_.attempts[id];
    a.status = AttemptStatus::Failed;
    MapTask& task = core_.tasks[a.task];
    task.state = TaskState::FailedPendingRetry;
    JobState& js = core_.job_state[task.job];
    --js.running_maps;
    js.failed.push_back(a.task);
    ++core_.failure_counts[{task.job, a.node}];
    release_map_slot(a);

    LogRecord& r = record(RecordKind::AttemptFail);
    r.attempt = id;
    r.task = a.task;
    r.job = task.job;
    r.node = a.node;
    sched_.on_attempt_fail(SimView(core_), id);
  }

  void on_transfer_complete(int id) {
    Transfer& tr = core_.transfers[id];
    tr.done = true;
    LogRecord& r = record(RecordKind::TransferComplete);
    r.block = tr.block;
    r.source = tr.source;
    r.dest = tr.dest;
    r.size_mb = tr.size_mb;
    r.purpose =
        tr.purpose == TransferPurpose::PrefetchCopy ? "prefetch" : "read";
    if (tr.purpose == TransferPurpose::RemoteRead) r.attempt = tr.attempt;
    if (tr.purpose == TransferPurpose::PrefetchCopy) {
      core_.blocks.add_replica(tr.block, tr.dest);
      --core_.prefetches_in_flight;
    }
    sched_.on_transfer_complete(SimView(core_), tr);
  }

  void on_reduce_complete(int idx) {
    const ReduceRun& rr = reduces_[idx];
    JobState& js = core_.job_state[rr.job];
    ++js.reduces_done;
    ++core_.free_reduce_slots[rr.node];

    LogRecord& r = record(RecordKind::ReduceComplete);
    r.job = rr.job;
    r.reduce_index = rr.index;
    r.node = rr.node;
    maybe_complete_job(rr.job);
  }

  void maybe_complete_job(JobId j) {
    const Job& job = core_.jobs[j];
    JobState& js = core_.job_state[j];
    if (js.complete_time_s >= 0) return;
    if (js.succeeded_maps != job.map_count ||
        js.reduces_done != job.reduce_count)
      return;
    js.complete_time_s = core_.now;
    LogRecord& r = record(RecordKind::JobComplete);
    r.job = j;
  }

  RunResult finish() {
    RunResult res;
    res.log = std::move(log_);
    res.core = std::move(core_);
    return res;
  }

  SimCore core_;
  std::vector<std::vector<TaskId>> job_tasks_;  // indexed by job id
  Scheduler& sched_;
  SeedStream failures_;
  std::priority_queue<Ev, std::vector<Ev>, EvLater> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_record_ = 0;
  EventLog log_;
  std::vector<ReduceRun> reduces_;
  int pending_non_heartbeat_ = 0;
  int round_applied_ = 0;
  int round_remaining_ = 0;
  int idle_rounds_ = 0;
};

}  // namespace

RunResult run_simulation(const ClusterTopology& topo,
                         const WorkloadSpec& workload, Scheduler& scheduler,
                         const EngineParams& params) {
  Engine engine(topo, workload, scheduler, params);
  return engine.run();
}

}  // namespace mrsim
