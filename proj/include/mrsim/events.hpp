#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/types.hpp"

namespace mrsim {

// One record per simulation event, in processing order. The text form is
// one line per record: "t=<time> seq=<n> <Kind> key=value ..." with a fixed
// key order per kind, so logs from identical runs compare byte-for-byte and
// external tools can replay slot accounting.
enum class RecordKind {
  JobSubmit,
  Heartbeat,
  AttemptStart,
  AttemptComplete,
  AttemptFail,
  ReduceStart,
  ReduceComplete,
  PrefetchIssued,
  TransferComplete,
  AssignRejected,
  JobComplete,
  RunEnd,
};

const char* to_string(RecordKind k);

struct LogRecord {
  double time = 0;
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::RunEnd;

  JobId job = kInvalidId;
  TaskId task = kInvalidId;
  AttemptId attempt = kInvalidId;
  NodeId node = kInvalidId;  // exec node or heartbeat node
  NodeId source = kInvalidId;
  NodeId dest = kInvalidId;
  BlockId block = kInvalidId;
  UserId user = kInvalidId;
  int maps = -1;
  int reduces = -1;
  int reduce_index = -1;
  double size_mb = -1;
  LocalityClass locality = LocalityClass::Remote;
  bool has_locality = false;
  std::vector<NodeId> replicas;  // block replica set at attempt launch
  bool has_replicas = false;
  std::string purpose;  // transfer purpose: "prefetch" | "read"
  std::string reason;   // rejection reason
};

std::string to_line(const LogRecord& rec);
LogRecord parse_line(const std::string& line);

using EventLog = std::vector<LogRecord>;

std::string serialize(const EventLog& log);
EventLog parse_log(std::istream& in);
EventLog parse_log_string(const std::string& text);

}  // namespace mrsim
