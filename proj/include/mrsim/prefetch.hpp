#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrsim/schedulers.hpp"
#include "mrsim/sim.hpp"

namespace mrsim {

// Remaining runtime of a running attempt, projected from its observed rate:
// with progress p after elapsed e, remaining = (1 - p) / (p / e). Returns
// nothing until the attempt has run warmup_s and reported progress > 0.
std::optional<double> estimate_remaining_s(const TaskAttempt& attempt,
                                           double now, double warmup_s);

// Time to copy one block over a link, seconds.
double estimate_transfer_s(double size_mb, double rate_mbps);

struct NodeEstimate {
  NodeId node = kInvalidId;
  AttemptId attempt = kInvalidId;  // soonest-finishing estimable attempt
  double remaining_s = 0;
  double transfer_s = 0;  // its block over the cross-rack link
  double margin_s = 0;    // remaining_s - transfer_s
};

// Nodes where a block copied now would land before the next slot frees:
// margin must be positive, sized against the cross-rack rate so the filter
// never promises more than the slowest link can deliver. One entry per node
// (its soonest-finishing estimable attempt; ties to the lower attempt id),
// skipping nodes blacklisted for that attempt's job. Sorted by ascending
// margin — the tightest fit first — with ties to the smaller node id.
std::vector<NodeEstimate> build_candidate_set(const SimView& view,
                                              const SchedulerParams& params);

// Front of the candidate set, if any.
std::optional<NodeId> preselect_node(const SimView& view,
                                     const SchedulerParams& params);

struct TaskChoice {
  bool assign_now = false;  // task already local to the target: run it instead
  TaskId task = kInvalidId;
};

// Picks the map task whose input should move to `target`. Walks jobs in
// queue order (queues by user id, jobs by submission within a queue),
// retry lists first: only when no job holds a retryable task does the walk
// read the never-run lists. Within the walk, a task already local to
// `target` short-circuits to assign_now — but only when the target can run
// it now (`target_has_slot`); otherwise the walk keeps going until some job
// offers a non-local task, whose closest member (ties to the lower id)
// becomes the prefetch candidate. Jobs blacklisted on `target` are skipped.
std::optional<TaskChoice> preselect_task(const SimView& view, NodeId target,
                                         bool target_has_slot,
                                         const CandidateBook& book,
                                         const SchedulerParams& params);

// Prefetch decision for `task`'s block onto `target`, from the nearest
// replica. Nothing if the block already has a replica there.
std::optional<SchedulerDecision> issue_prefetch(const SimView& view,
                                                NodeId target, TaskId task);

// Capacity assignment plus at most one block prefetch per heartbeat,
// cluster-wide single transfer in flight. A prefetched task stays reserved
// for the copy's destination: withheld from everyone's assignment while the
// copy flies and afterwards, then dispatched to the destination on its next
// beat with a free map slot — the copy was paid for so that this task runs
// local there.
class PrefetchScheduler : public Scheduler {
 public:
  explicit PrefetchScheduler(SchedulerParams params);

  std::string name() const override { return "prefetch"; }
  std::vector<SchedulerDecision> on_heartbeat(const SimView& view,
                                              NodeId node) override;
  void on_transfer_complete(const SimView& view, const Transfer& t) override;

 private:
  struct Reservation {
    JobId job = kInvalidId;
    TaskId task = kInvalidId;
    NodeId dest = kInvalidId;
  };

  SchedulerParams p_;
  std::optional<Reservation> flying_;   // the one copy in flight
  std::vector<Reservation> landed_;     // copies delivered, task not yet run
};

}  // namespace mrsim
