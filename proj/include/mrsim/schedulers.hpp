#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrsim/sim.hpp"

namespace mrsim {

struct SchedulerParams {
  std::map<UserId, double> weights;     // fair sharing; absent user -> 1.0
  std::map<UserId, int> min_shares;     // fair sharing; absent user -> 0
  std::map<UserId, double> capacities;  // queue fractions; empty -> equal
  int blacklist_threshold = 4;          // per (job, node) failure cap
  int warmup_heartbeats = 1;            // beats before remaining-time estimates
};

// Assignable map tasks per job, rebuilt from the view at each heartbeat and
// consumed as assignments are made so one beat never double-books a task.
struct JobCandidates {
  std::vector<TaskId> failed;   // retry queue, failure order
  std::vector<TaskId> pending;  // never run, ascending task id
  bool empty() const { return failed.empty() && pending.empty(); }
};

class CandidateBook {
 public:
  explicit CandidateBook(const SimView& view);

  const JobCandidates& of(JobId j) const { return jobs_.at(j); }
  bool empty(JobId j) const { return jobs_.at(j).empty(); }
  void take(JobId j, TaskId t);

  // Drops a task from the candidate lists without counting it as running —
  // for work that must stay queued this beat (its input copy is still in
  // flight). No-op if the task is not held.
  void withhold(JobId j, TaskId t);

  // Running map attempts per job, including assignments taken this beat.
  int running(JobId j) const { return running_.at(j); }

 private:
  std::map<JobId, JobCandidates> jobs_;
  std::map<JobId, int> running_;
};

// Best assignable task of one job for `node`: lowest locality class first
// (node-local, then rack-local, then remote), ties to the smaller task id.
std::optional<std::pair<TaskId, LocalityClass>> pick_best_task(
    const SimView& view, NodeId node, const JobCandidates& cands);

// Launches reduce waves in job-submission order once a job's maps are done.
// Shared by every policy so response-time differences come from map
// placement alone.
void fill_reduce_slots(const SimView& view, NodeId node,
                       std::vector<SchedulerDecision>& out);

// Capacity-style map assignment: repeatedly give the next free slot on
// `node` to the queue with the lowest running/capacity ratio (ties to the
// smaller user id), first submitted job within the queue. An empty
// `capacities` means equal shares; listed queues must cover every user.
void capacity_fill(const SimView& view, NodeId node,
                   const std::map<UserId, double>& capacities,
                   CandidateBook& book, std::vector<SchedulerDecision>& out);

// names: "fifo", "fair", "capacity", "prefetch"
std::unique_ptr<Scheduler> make_scheduler(const std::string& name,
                                          const SchedulerParams& params);

}  // namespace mrsim
