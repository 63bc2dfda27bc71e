#include "mrsim/metrics.hpp"

#include <algorithm>
#include <map>

namespace mrsim {

LocalityReport locality_report(const EventLog& log) {
  LocalityReport rep;
  for (const LogRecord& r : log) {
    if (r.kind != RecordKind::AttemptStart) continue;
    switch (r.locality) {
      case LocalityClass::NodeLocal: ++rep.node_local; break;
      case LocalityClass::RackLocal: ++rep.rack_local; break;
      case LocalityClass::Remote: ++rep.remote; break;
    }
  }
  return rep;
}

ResponseReport response_times(const EventLog& log) {
  std::map<JobId, JobTimeline> jobs;
  ResponseReport rep;
  for (const LogRecord& r : log) {
    rep.makespan_s = r.time;
    if (r.kind == RecordKind::JobSubmit) {
      JobTimeline t;
      t.job = r.job;
      t.user = r.user;
      t.submit_s = r.time;
      t.complete_s = -1;
      jobs[r.job] = t;
    } else if (r.kind == RecordKind::JobComplete) {
      auto it = jobs.find(r.job);
      if (it == jobs.end())
        throw SimError("job completed without a submission record");
      it->second.complete_s = r.time;
      it->second.response_s = r.time - it->second.submit_s;
    }
  }
  for (auto& [id, t] : jobs) {
    if (t.complete_s < 0)
      throw SimError("log ends before job " + std::to_string(id) +
                     " completes");
    rep.jobs.push_back(t);
    rep.mean_s += t.response_s;
    rep.max_s = std::max(rep.max_s, t.response_s);
  }
  if (!rep.jobs.empty()) rep.mean_s /= static_cast<double>(rep.jobs.size());
  return rep;
}

PrefetchReport prefetch_report(const EventLog& log) {
  PrefetchReport rep;
  struct Copy {
    double size_mb = 0;
    bool hit = false;
  };
  std::map<std::pair<BlockId, NodeId>, Copy> landed;
  for (const LogRecord& r : log) {
    if (r.kind == RecordKind::PrefetchIssued) {
      ++rep.issued;
    } else if (r.kind == RecordKind::TransferComplete &&
               r.purpose == "prefetch") {
      ++rep.completed;
      rep.moved_mb += r.size_mb;
      landed[{r.block, r.dest}] = Copy{r.size_mb, false};
    } else if (r.kind == RecordKind::AttemptStart &&
               r.locality == LocalityClass::NodeLocal) {
      auto it = landed.find({r.block, r.node});
      if (it != landed.end()) it->second.hit = true;
    }
  }
  for (const auto& [key, copy] : landed) {
    if (copy.hit)
      ++rep.hits;
    else
      rep.wasted_mb += copy.size_mb;
  }
  return rep;
}

RunSummary summarize(const std::string& scheduler, const EventLog& log) {
  RunSummary s;
  s.scheduler = scheduler;
  s.locality = locality_report(log);
  s.response = response_times(log);
  s.prefetch = prefetch_report(log);
  return s;
}

std::vector<CompareRow> compare_rows(const std::vector<RunSummary>& runs) {
  std::vector<CompareRow> rows;
  for (const RunSummary& run : runs) {
    CompareRow row;
    row.scheduler = run.scheduler;
    row.locality_pct = run.locality.node_local_fraction() * 100.0;
    row.mean_response_s = run.response.mean_s;
    if (!rows.empty()) {
      row.locality_delta_pp = row.locality_pct - rows.front().locality_pct;
      if (rows.front().mean_response_s > 0)
        row.response_delta_pct = (row.mean_response_s -
                                  rows.front().mean_response_s) /
                                 rows.front().mean_response_s * 100.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mrsim
