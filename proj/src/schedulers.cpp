#include "mrsim/schedulers.hpp"

#include <algorithm>
#include <limits>

#include "mrsim/prefetch.hpp"
#include "mrsim/types.hpp"

namespace mrsim {

CandidateBook::CandidateBook(const SimView& view) {
  for (const Job& job : view.jobs()) {
    JobCandidates c;
    if (view.submitted(job.id)) {
      c.failed.assign(view.failed_maps(job.id).begin(),
                      view.failed_maps(job.id).end());
      c.pending = view.pending_maps(job.id);
    }
    running_[job.id] = view.running_maps(job.id);
    jobs_.emplace(job.id, std::move(c));
  }
}

void CandidateBook::take(JobId j, TaskId t) {
  JobCandidates& c = jobs_.at(j);
  auto f = std::find(c.failed.begin(), c.failed.end(), t);
  if (f != c.failed.end()) {
    c.failed.erase(f);
  } else {
    auto p = std::find(c.pending.begin(), c.pending.end(), t);
    if (p == c.pending.end())
      throw SimError("scheduler took a task it did not hold");
    c.pending.erase(p);
  }
  ++running_[j];
}

void CandidateBook::withhold(JobId j, TaskId t) {
  auto it = jobs_.find(j);
  if (it == jobs_.end()) return;
  JobCandidates& c = it->second;
  auto f = std::find(c.failed.begin(), c.failed.end(), t);
  if (f != c.failed.end()) {
    c.failed.erase(f);
    return;
  }
  auto p = std::find(c.pending.begin(), c.pending.end(), t);
  if (p != c.pending.end()) c.pending.erase(p);
}

std::optional<std::pair<TaskId, LocalityClass>> pick_best_task(
    const SimView& view, NodeId node, const JobCandidates& cands) {
  std::vector<TaskId> all;
  all.reserve(cands.failed.size() + cands.pending.size());
  all.insert(all.end(), cands.failed.begin(), cands.failed.end());
  all.insert(all.end(), cands.pending.begin(), cands.pending.end());
  std::sort(all.begin(), all.end());

  std::optional<std::pair<TaskId, LocalityClass>> best;
  for (TaskId t : all) {
    const LocalityClass c = view.locality_now(t, node);
    if (!best || static_cast<int>(c) < static_cast<int>(best->second)) {
      best = {t, c};
      if (c == LocalityClass::NodeLocal) break;
    }
  }
  return best;
}

void fill_reduce_slots(const SimView& view, NodeId node,
                       std::vector<SchedulerDecision>& out) {
  int free = view.free_reduce_slots(node);
  for (const Job& job : view.jobs()) {
    if (free <= 0) break;
    if (!view.submitted(job.id) || !view.maps_done(job.id)) continue;
    int remaining = view.reduces_remaining(job.id);
    int idx = job.reduce_count - remaining;
    while (remaining > 0 && free > 0) {
      out.push_back(SchedulerDecision::assign_reduce(job.id, idx, node));
      ++idx;
      --remaining;
      --free;
    }
  }
}

namespace {

// First submitted job of `user` (submission order) still holding candidates.
JobId first_runnable_job(const SimView& view, const CandidateBook& book,
                         std::optional<UserId> user) {
  for (const Job& job : view.jobs()) {
    if (user && job.user != *user) continue;
    if (view.submitted(job.id) && !book.empty(job.id)) return job.id;
  }
  return kInvalidId;
}

}  // namespace

void capacity_fill(const SimView& view, NodeId node,
                   const std::map<UserId, double>& capacities,
                   CandidateBook& book, std::vector<SchedulerDecision>& out) {
  std::map<UserId, int> running;
  for (const Job& job : view.jobs()) running[job.user] += book.running(job.id);

  const double equal_share =
      running.empty() ? 1.0 : 1.0 / static_cast<double>(running.size());
  auto capacity_of = [&](UserId u) {
    if (capacities.empty()) return equal_share;
    auto it = capacities.find(u);
    if (it == capacities.end())
      throw ConfigError("no capacity configured for queue " +
                        std::to_string(u));
    if (it->second <= 0)
      throw ConfigError("queue capacity must be positive");
    return it->second;
  };

  int free = view.free_map_slots(node);
  for (const SchedulerDecision& d : out)
    if (d.kind == SchedulerDecision::Kind::AssignMap && d.node == node) --free;
  while (free > 0) {
    UserId best_user = kInvalidId;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (const auto& [user, run] : running) {
      if (first_runnable_job(view, book, user) == kInvalidId) continue;
      const double ratio = run / capacity_of(user);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_user = user;
      }
    }
    if (best_user == kInvalidId) break;

    const JobId job = first_runnable_job(view, book, best_user);
    const auto pick = pick_best_task(view, node, book.of(job));
    out.push_back(SchedulerDecision::assign_map(pick->first, node));
    book.take(job, pick->first);
    ++running[best_user];
    --free;
  }
}

namespace {

class FifoScheduler : public Scheduler {
 public:
  std::string name() const override { return "fifo"; }

  std::vector<SchedulerDecision> on_heartbeat(const SimView& view,
                                              NodeId node) override {
    std::vector<SchedulerDecision> out;
    CandidateBook book(view);
    int free = view.free_map_slots(node);
    while (free > 0) {
      const JobId job = first_runnable_job(view, book, std::nullopt);
      if (job == kInvalidId) break;
      const auto pick = pick_best_task(view, node, book.of(job));
      out.push_back(SchedulerDecision::assign_map(pick->first, node));
      book.take(job, pick->first);
      --free;
    }
    fill_reduce_slots(view, node, out);
    return out;
  }
};

class FairScheduler : public Scheduler {
 public:
  explicit FairScheduler(SchedulerParams params) : p_(std::move(params)) {
    for (const auto& [user, w] : p_.weights)
      if (w <= 0)
        throw ConfigError("fair-share weight must be positive for user " +
                          std::to_string(user));
  }

  std::string name() const override { return "fair"; }

  std::vector<SchedulerDecision> on_heartbeat(const SimView& view,
                                              NodeId node) override {
    std::vector<SchedulerDecision> out;
    CandidateBook book(view);
    std::map<UserId, int> running;
    for (const Job& job : view.jobs())
      running[job.user] += book.running(job.id);

    int free = view.free_map_slots(node);
    while (free > 0) {
      const UserId pool = choose_pool(view, book, running);
      if (pool == kInvalidId) break;
      const JobId job = first_runnable_job(view, book, pool);
      const auto pick = pick_best_task(view, node, book.of(job));
      out.push_back(SchedulerDecision::assign_map(pick->first, node));
      book.take(job, pick->first);
      ++running[pool];
      --free;
    }
    fill_reduce_slots(view, node, out);
    return out;
  }

 private:
  double weight(UserId u) const {
    auto it = p_.weights.find(u);
    return it == p_.weights.end() ? 1.0 : it->second;
  }
  int min_share(UserId u) const {
    auto it = p_.min_shares.find(u);
    return it == p_.min_shares.end() ? 0 : it->second;
  }

  // Pools under their minimum share first (most deficient wins), then the
  // lowest running/weight ratio; every tie goes to the smaller user id.
  UserId choose_pool(const SimView& view, const CandidateBook& book,
                     const std::map<UserId, int>& running) const {
    UserId best_deficit_user = kInvalidId;
    int best_deficit = 0;
    UserId best_ratio_user = kInvalidId;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (const auto& [user, run] : running) {
      if (first_runnable_job(view, book, user) == kInvalidId) continue;
      const int deficit = min_share(user) - run;
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best_deficit_user = user;
      }
      const double ratio = run / weight(user);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_ratio_user = user;
      }
    }
    return best_deficit_user != kInvalidId ? best_deficit_user
                                           : best_ratio_user;
  }

  SchedulerParams p_;
};

class CapacityScheduler : public Scheduler {
 public:
  explicit CapacityScheduler(SchedulerParams params) : p_(std::move(params)) {}

  std::string name() const override { return "capacity"; }

  std::vector<SchedulerDecision> on_heartbeat(const SimView& view,
                                              NodeId node) override {
    std::vector<SchedulerDecision> out;
    CandidateBook book(view);
    capacity_fill(view, node, p_.capacities, book, out);
    fill_reduce_slots(view, node, out);
    return out;
  }

 private:
  SchedulerParams p_;
};

}  // namespace

std::unique_ptr<Scheduler> make_scheduler(const std::string& name,
                                          const SchedulerParams& params) {
  if (name == "fifo") return std::make_unique<FifoScheduler>();
  if (name == "fair") return std::make_unique<FairScheduler>(params);
  if (name == "capacity") return std::make_unique<CapacityScheduler>(params);
  if (name == "prefetch") return std::make_unique<PrefetchScheduler>(params);
  throw ConfigError("unknown scheduler: " + name);
}

}  // namespace mrsim
