#include "mrsim/events.hpp"

#include <charconv>
#include <cstdlib>
#include <istream>
#include <sstream>

namespace mrsim {

const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::JobSubmit: return "JobSubmit";
    case RecordKind::Heartbeat: return "Heartbeat";
    case RecordKind::AttemptStart: return "AttemptStart";
    case RecordKind::AttemptComplete: return "AttemptComplete";
    case RecordKind::AttemptFail: return "AttemptFail";
    case RecordKind::ReduceStart: return "ReduceStart";
    case RecordKind::ReduceComplete: return "ReduceComplete";
    case RecordKind::PrefetchIssued: return "PrefetchIssued";
    case RecordKind::TransferComplete: return "TransferComplete";
    case RecordKind::AssignRejected: return "AssignRejected";
    case RecordKind::JobComplete: return "JobComplete";
    case RecordKind::RunEnd: return "RunEnd";
  }
  return "?";
}

namespace {

RecordKind kind_from(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(RecordKind::RunEnd); ++k) {
    const auto kind = static_cast<RecordKind>(k);
    if (s == to_string(kind)) return kind;
  }
  throw SimError("event log: unknown record kind '" + s + "'");
}

LocalityClass locality_from(const std::string& s) {
  if (s == "node") return LocalityClass::NodeLocal;
  if (s == "rack") return LocalityClass::RackLocal;
  if (s == "remote") return LocalityClass::Remote;
  throw SimError("event log: unknown locality '" + s + "'");
}

// Shortest round-trip decimal form, identical for identical doubles.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void put(std::string& out, const char* key, int v) {
  out += ' ';
  out += key;
  out += '=';
  out += std::to_string(v);
}

void put(std::string& out, const char* key, double v) {
  out += ' ';
  out += key;
  out += '=';
  out += fmt(v);
}

void put(std::string& out, const char* key, const std::string& v) {
  out += ' ';
  out += key;
  out += '=';
  out += v;
}

}  // namespace

std::string to_line(const LogRecord& r) {
  std::string out = "t=" + fmt(r.time) + " seq=" + std::to_string(r.seq) +
                    " " + to_string(r.kind);
  switch (r.kind) {
    case RecordKind::JobSubmit:
      put(out, "job", r.job);
      put(out, "user", r.user);
      put(out, "maps", r.maps);
      put(out, "reduces", r.reduces);
      put(out, "input_mb", r.size_mb);
      break;
    case RecordKind::Heartbeat:
      put(out, "node", r.node);
      break;
    case RecordKind::AttemptStart: {
      put(out, "attempt", r.attempt);
      put(out, "task", r.task);
      put(out, "job", r.job);
      put(out, "node", r.node);
      put(out, "block", r.block);
      put(out, "size_mb", r.size_mb);
      put(out, "locality", std::string(to_string(r.locality)));
      std::string reps;
      for (NodeId n : r.replicas) {
        if (!reps.empty()) reps += ',';
        reps += std::to_string(n);
      }
      put(out, "replicas", reps);
      break;
    }
    case RecordKind::AttemptComplete:
    case RecordKind::AttemptFail:
      put(out, "attempt", r.attempt);
      put(out, "task", r.task);
      put(out, "job", r.job);
      put(out, "node", r.node);
      break;
    case RecordKind::ReduceStart:
      put(out, "job", r.job);
      put(out, "ridx", r.reduce_index);
      put(out, "node", r.node);
      put(out, "size_mb", r.size_mb);
      break;
    case RecordKind::ReduceComplete:
      put(out, "job", r.job);
      put(out, "ridx", r.reduce_index);
      put(out, "node", r.node);
      break;
    case RecordKind::PrefetchIssued:
      put(out, "block", r.block);
      put(out, "source", r.source);
      put(out, "dest", r.dest);
      put(out, "task", r.task);
      put(out, "size_mb", r.size_mb);
      break;
    case RecordKind::TransferComplete:
      put(out, "purpose", r.purpose);
      put(out, "block", r.block);
      put(out, "source", r.source);
      put(out, "dest", r.dest);
      put(out, "size_mb", r.size_mb);
      if (r.purpose == "read") put(out, "attempt", r.attempt);
      break;
    case RecordKind::AssignRejected:
      put(out, "node", r.node);
      put(out, "task", r.task);
      put(out, "reason", r.reason);
      break;
    case RecordKind::JobComplete:
      put(out, "job", r.job);
      break;
    case RecordKind::RunEnd:
      break;
  }
  return out;
}

LogRecord parse_line(const std::string& line) {
  std::istringstream in(line);
  std::string tok;
  LogRecord r;
  int idx = 0;
  auto as_ll = [](const std::string& v) { return std::stoll(v); };
  while (in >> tok) {
    ++idx;
    if (idx == 3) {  // bare kind token
      r.kind = kind_from(tok);
      continue;
    }
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw SimError("event log: malformed token '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "t") r.time = std::strtod(val.c_str(), nullptr);
    else if (key == "seq") r.seq = std::stoull(val);
    else if (key == "job") r.job = static_cast<JobId>(as_ll(val));
    else if (key == "task") r.task = static_cast<TaskId>(as_ll(val));
    else if (key == "attempt") r.attempt = static_cast<AttemptId>(as_ll(val));
    else if (key == "node") r.node = static_cast<NodeId>(as_ll(val));
    else if (key == "source") r.source = static_cast<NodeId>(as_ll(val));
    else if (key == "dest") r.dest = static_cast<NodeId>(as_ll(val));
    else if (key == "block") r.block = static_cast<BlockId>(as_ll(val));
    else if (key == "user") r.user = static_cast<UserId>(as_ll(val));
    else if (key == "maps") r.maps = static_cast<int>(as_ll(val));
    else if (key == "reduces") r.reduces = static_cast<int>(as_ll(val));
    else if (key == "ridx") r.reduce_index = static_cast<int>(as_ll(val));
    else if (key == "size_mb" || key == "input_mb")
      r.size_mb = std::strtod(val.c_str(), nullptr);
    else if (key == "locality") {
      r.locality = locality_from(val);
      r.has_locality = true;
    } else if (key == "replicas") {
      r.has_replicas = true;
      std::string item;
      std::istringstream reps(val);
      while (std::getline(reps, item, ','))
        r.replicas.push_back(static_cast<NodeId>(as_ll(item)));
    } else if (key == "purpose") r.purpose = val;
    else if (key == "reason") r.reason = val;
    else throw SimError("event log: unknown key '" + key + "'");
  }
  if (idx < 3) throw SimError("event log: truncated line '" + line + "'");
  return r;
}

std::string serialize(const EventLog& log) {
  std::string out;
  for (const LogRecord& r : log) {
    out += to_line(r);
    out += '\n';
  }
  return out;
}

EventLog parse_log(std::istream& in) {
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(parse_line(line));
  }
  return log;
}

EventLog parse_log_string(const std::string& text) {
  std::istringstream in(text);
  return parse_log(in);
}

}  // namespace mrsim
