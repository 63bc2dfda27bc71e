#include "mrsim/prefetch.hpp"

#include <algorithm>
#include <tuple>

#include "mrsim/types.hpp"

namespace mrsim {

std::optional<double> estimate_remaining_s(const TaskAttempt& attempt,
                                           double now, double warmup_s) {
  const double elapsed = now - attempt.start_s;
  if (elapsed < warmup_s) return std::nullopt;
  const double p = attempt_progress(attempt, now);
  if (p <= 0) return std::nullopt;
  if (p >= 1) return 0.0;
  return (1.0 - p) * elapsed / p;
}

double estimate_transfer_s(double size_mb, double rate_mbps) {
  if (rate_mbps <= 0) throw SimError("transfer rate must be positive");
  return size_mb / rate_mbps;
}

std::vector<NodeEstimate> build_candidate_set(const SimView& view,
                                              const SchedulerParams& params) {
  const double warmup_s =
      params.warmup_heartbeats * view.params().heartbeat_s;
  std::vector<NodeEstimate> out;
  for (const NodeSpec& node : view.topology().nodes()) {
    std::optional<NodeEstimate> best;
    for (AttemptId id : view.running_on(node.id)) {
      const auto rem = estimate_remaining_s(view.attempt(id), view.now(),
                                            warmup_s);
      if (!rem) continue;
      if (!best || *rem < best->remaining_s) {
        NodeEstimate e;
        e.node = node.id;
        e.attempt = id;
        e.remaining_s = *rem;
        best = e;
      }
    }
    if (!best) continue;
    const TaskAttempt& a = view.attempt(best->attempt);
    const JobId job = view.task(a.task).job;
    if (view.failure_count(job, node.id) >= params.blacklist_threshold)
      continue;
    best->transfer_s =
        estimate_transfer_s(a.size_mb, view.topology().cross_rack_rate());
    best->margin_s = best->remaining_s - best->transfer_s;
    if (best->margin_s > 0) out.push_back(*best);
  }
  std::sort(out.begin(), out.end(),
            [](const NodeEstimate& x, const NodeEstimate& y) {
              if (x.margin_s != y.margin_s) return x.margin_s < y.margin_s;
              return x.node < y.node;
            });
  return out;
}

std::optional<NodeId> preselect_node(const SimView& view,
                                     const SchedulerParams& params) {
  const std::vector<NodeEstimate> set = build_candidate_set(view, params);
  if (set.empty()) return std::nullopt;
  return set.front().node;
}

namespace {

// Jobs in walk order: queues by user id, jobs by submission within a queue.
std::vector<const Job*> walk_order(const SimView& view) {
  std::vector<const Job*> jobs;
  for (const Job& job : view.jobs())
    if (view.submitted(job.id)) jobs.push_back(&job);
  std::stable_sort(jobs.begin(), jobs.end(),
                   [](const Job* a, const Job* b) {
                     if (a->user != b->user) return a->user < b->user;
                     return a->id < b->id;
                   });
  return jobs;
}

// One job's list: a task local to `target` runs there at once when the
// target can take it; otherwise the job's closest non-local task (ties to
// the lower id) becomes the prefetch candidate. A job whose candidates are
// all local but undispatchable decides nothing.
std::optional<TaskChoice> decide(const SimView& view, NodeId target,
                                 bool target_has_slot,
                                 const std::vector<TaskId>& list) {
  std::optional<std::pair<int, TaskId>> best;
  for (TaskId t : list) {
    const LocalityClass c = view.locality_now(t, target);
    if (c == LocalityClass::NodeLocal) {
      if (target_has_slot) return TaskChoice{true, t};
      continue;  // local work, but nowhere to run it yet: no copy needed
    }
    std::pair<int, TaskId> key{static_cast<int>(c), t};
    if (!best || key < *best) best = key;
  }
  if (!best) return std::nullopt;
  return TaskChoice{false, best->second};
}

}  // namespace

std::optional<TaskChoice> preselect_task(const SimView& view, NodeId target,
                                         bool target_has_slot,
                                         const CandidateBook& book,
                                         const SchedulerParams& params) {
  const std::vector<const Job*> jobs = walk_order(view);

  // A retryable failure anywhere commits this heartbeat to the retry lists:
  // never-run tasks wait until no failed task is pending.
  bool any_failed = false;
  for (const Job* job : jobs)
    if (!book.of(job->id).failed.empty()) any_failed = true;

  for (const Job* job : jobs) {
    if (view.failure_count(job->id, target) >= params.blacklist_threshold)
      continue;
    const JobCandidates& c = book.of(job->id);
    const std::vector<TaskId>& list = any_failed ? c.failed : c.pending;
    if (list.empty()) continue;
    if (auto choice = decide(view, target, target_has_slot, list))
      return choice;
  }
  return std::nullopt;
}

std::optional<SchedulerDecision> issue_prefetch(const SimView& view,
                                                NodeId target, TaskId task) {
  const BlockId block = view.task(task).input_block;
  const BlockInfo& info = view.blocks().info(block);
  if (info.replicas.count(target)) return std::nullopt;
  const NodeId source =
      nearest_replica(block, target, view.blocks(), view.topology());
  return SchedulerDecision::prefetch(block, source, target, task);
}

PrefetchScheduler::PrefetchScheduler(SchedulerParams params)
    : p_(std::move(params)) {}

std::vector<SchedulerDecision> PrefetchScheduler::on_heartbeat(
    const SimView& view, NodeId node) {
  // Reservations for tasks that ran anyway, or whose job can no longer
  // target the destination, revert to ordinary scheduling. A failed task
  // stays reserved: it is still assignable and will retry on the copy.
  auto stale = [&](const Reservation& r) {
    const TaskState st = view.task(r.task).state;
    return st == TaskState::Running || st == TaskState::Succeeded ||
           view.failure_count(r.job, r.dest) >= p_.blacklist_threshold;
  };
  if (flying_ && stale(*flying_)) flying_.reset();
  landed_.erase(std::remove_if(landed_.begin(), landed_.end(), stale),
                landed_.end());

  std::vector<SchedulerDecision> out;
  CandidateBook book(view);
  if (flying_) book.withhold(flying_->job, flying_->task);
  for (const Reservation& r : landed_) book.withhold(r.job, r.task);

  // Delivered copies run on their destination: dispatch ahead of the
  // ordinary fill while the node has room.
  int spare = view.free_map_slots(node);
  for (auto it = landed_.begin(); it != landed_.end() && spare > 0;) {
    if (it->dest == node) {
      out.push_back(SchedulerDecision::assign_map(it->task, node));
      --spare;
      it = landed_.erase(it);
    } else {
      ++it;
    }
  }

  capacity_fill(view, node, p_.capacities, book, out);
  fill_reduce_slots(view, node, out);
  if (view.prefetch_in_flight()) return out;

  const auto target = preselect_node(view, p_);
  if (!target) return out;
  int taken = 0;
  for (const SchedulerDecision& d : out)
    if (d.kind == SchedulerDecision::Kind::AssignMap && d.node == *target)
      ++taken;
  const bool has_slot = view.free_map_slots(*target) - taken > 0;
  const auto choice = preselect_task(view, *target, has_slot, book, p_);
  if (!choice) return out;
  if (choice->assign_now) {
    out.push_back(SchedulerDecision::assign_map(choice->task, *target));
    return out;
  }
  if (auto d = issue_prefetch(view, *target, choice->task)) {
    flying_ = Reservation{view.task(choice->task).job, choice->task, *target};
    out.push_back(*d);
  }
  return out;
}

void PrefetchScheduler::on_transfer_complete(const SimView&,
                                             const Transfer& t) {
  if (t.purpose != TransferPurpose::PrefetchCopy) return;
  if (flying_) landed_.push_back(*flying_);
  flying_.reset();
}

}  // namespace mrsim
