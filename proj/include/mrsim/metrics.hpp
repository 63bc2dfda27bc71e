#pragma once

#include <string>
#include <vector>

#include "mrsim/events.hpp"
#include "mrsim/types.hpp"

namespace mrsim {

// All reports are derived from the event log alone, so a log parsed back
// from disk yields the same numbers as the in-memory run that produced it.

struct LocalityReport {
  int node_local = 0;
  int rack_local = 0;
  int remote = 0;

  int total() const { return node_local + rack_local + remote; }
  // Fraction of map attempts launched on a node holding their input block.
  double node_local_fraction() const {
    return total() == 0 ? 0.0 : static_cast<double>(node_local) / total();
  }
};

LocalityReport locality_report(const EventLog& log);

struct JobTimeline {
  JobId job = kInvalidId;
  UserId user = kInvalidId;
  double submit_s = 0;
  double complete_s = 0;
  double response_s = 0;
};

struct ResponseReport {
  std::vector<JobTimeline> jobs;  // ascending job id
  double mean_s = 0;
  double max_s = 0;
  double makespan_s = 0;  // time of the final record
};

ResponseReport response_times(const EventLog& log);

struct PrefetchReport {
  int issued = 0;
  int completed = 0;
  int hits = 0;  // prefetched block later read node-locally at its dest
  double moved_mb = 0;
  double wasted_mb = 0;  // completed copies that never served an attempt
};

PrefetchReport prefetch_report(const EventLog& log);

struct RunSummary {
  std::string scheduler;
  LocalityReport locality;
  ResponseReport response;
  PrefetchReport prefetch;
};

RunSummary summarize(const std::string& scheduler, const EventLog& log);

struct CompareRow {
  std::string scheduler;
  double locality_pct = 0;
  double mean_response_s = 0;
  double locality_delta_pp = 0;     // vs the first row
  double response_delta_pct = 0;    // vs the first row
};

// First summary is the baseline the deltas are measured against.
std::vector<CompareRow> compare_rows(const std::vector<RunSummary>& runs);

}  // namespace mrsim
