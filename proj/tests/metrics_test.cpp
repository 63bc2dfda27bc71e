#include <doctest.h>

#include <string>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/events.hpp"
#include "mrsim/metrics.hpp"
#include "mrsim/scenario.hpp"
#include "mrsim/schedulers.hpp"
#include "mrsim/sim.hpp"
#include "mrsim/types.hpp"

using namespace mrsim;

namespace {

LogRecord rec(double t, RecordKind kind) {
  static std::uint64_t seq = 0;
  LogRecord r;
  r.time = t;
  r.seq = seq++;
  r.kind = kind;
  return r;
}

LogRecord submit(double t, JobId j, UserId u) {
  LogRecord r = rec(t, RecordKind::JobSubmit);
  r.job = j;
  r.user = u;
  r.maps = 1;
  r.reduces = 1;
  r.size_mb = 64;
  return r;
}

LogRecord complete(double t, JobId j) {
  LogRecord r = rec(t, RecordKind::JobComplete);
  r.job = j;
  return r;
}

LogRecord start(double t, BlockId b, NodeId n, LocalityClass c) {
  LogRecord r = rec(t, RecordKind::AttemptStart);
  r.attempt = 0;
  r.task = b;
  r.job = 0;
  r.node = n;
  r.block = b;
  r.size_mb = 64;
  r.locality = c;
  r.has_locality = true;
  r.replicas = {n};
  r.has_replicas = true;
  return r;
}

LogRecord prefetch_issued(double t, BlockId b, NodeId src, NodeId dst) {
  LogRecord r = rec(t, RecordKind::PrefetchIssued);
  r.block = b;
  r.source = src;
  r.dest = dst;
  r.task = b;
  r.size_mb = 64;
  return r;
}

LogRecord prefetch_landed(double t, BlockId b, NodeId src, NodeId dst,
                          double size) {
  LogRecord r = rec(t, RecordKind::TransferComplete);
  r.purpose = "prefetch";
  r.block = b;
  r.source = src;
  r.dest = dst;
  r.size_mb = size;
  return r;
}

}  // namespace

TEST_CASE("locality report counts map attempt launches by class") {
  EventLog log;
  log.push_back(submit(0, 0, 0));
  log.push_back(start(1, 0, 0, LocalityClass::NodeLocal));
  log.push_back(start(1, 1, 0, LocalityClass::RackLocal));
  log.push_back(start(2, 2, 1, LocalityClass::Remote));
  log.push_back(start(2, 3, 1, LocalityClass::NodeLocal));
  log.push_back(complete(9, 0));
  log.push_back(rec(9, RecordKind::RunEnd));

  const LocalityReport rep = locality_report(log);
  CHECK(rep.node_local == 2);
  CHECK(rep.rack_local == 1);
  CHECK(rep.remote == 1);
  CHECK(rep.total() == 4);
  CHECK(rep.node_local_fraction() == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(locality_report(EventLog{}).total() == 0);
  CHECK(locality_report(EventLog{}).node_local_fraction() == 0.0);
}

TEST_CASE("response report measures submit-to-complete per job") {
  EventLog log;
  log.push_back(submit(0, 0, 0));
  log.push_back(submit(5, 1, 1));
  log.push_back(complete(30, 1));
  log.push_back(complete(100, 0));
  log.push_back(rec(120, RecordKind::RunEnd));

  const ResponseReport rep = response_times(log);
  REQUIRE(rep.jobs.size() == 2);
  CHECK(rep.jobs[0].job == 0);
  CHECK(rep.jobs[0].submit_s == 0);
  CHECK(rep.jobs[0].complete_s == 100);
  CHECK(rep.jobs[0].response_s == 100);
  CHECK(rep.jobs[1].job == 1);
  CHECK(rep.jobs[1].response_s == 25);
  CHECK(rep.mean_s == doctest::Approx(62.5).epsilon(1e-12));
  CHECK(rep.max_s == 100);
  CHECK(rep.makespan_s == 120);  // the final record, not the last completion

  SUBCASE("a completion without a submission is an error") {
    EventLog bad;
    bad.push_back(complete(10, 7));
    CHECK_THROWS_AS(response_times(bad), SimError);
  }

  SUBCASE("a log that ends mid-job is an error") {
    EventLog bad;
    bad.push_back(submit(0, 0, 0));
    bad.push_back(rec(10, RecordKind::RunEnd));
    CHECK_THROWS_AS(response_times(bad), SimError);
  }
}

TEST_CASE("prefetch report: a copy counts only when read after landing") {
  EventLog log;
  // block 3 is read node-locally BEFORE its copy lands: not a hit
  log.push_back(start(2, 3, 0, LocalityClass::NodeLocal));
  log.push_back(prefetch_issued(3, 1, 0, 2));
  log.push_back(prefetch_landed(5, 1, 0, 2, 64));
  log.push_back(start(7, 1, 2, LocalityClass::NodeLocal));  // hit
  log.push_back(prefetch_issued(8, 2, 0, 1));
  log.push_back(prefetch_landed(9, 2, 0, 1, 32));  // lands, never read
  log.push_back(prefetch_issued(9.5, 3, 1, 0));
  log.push_back(prefetch_landed(10, 3, 1, 0, 16));
  // block 2 read node-locally at a DIFFERENT node than its copy's dest
  log.push_back(start(11, 2, 2, LocalityClass::NodeLocal));
  log.push_back(rec(12, RecordKind::RunEnd));

  const PrefetchReport rep = prefetch_report(log);
  CHECK(rep.issued == 3);
  CHECK(rep.completed == 3);
  CHECK(rep.moved_mb == doctest::Approx(112.0).epsilon(1e-12));
  CHECK(rep.hits == 1);
  CHECK(rep.wasted_mb == doctest::Approx(48.0).epsilon(1e-12));
}

TEST_CASE("comparison rows report deltas against the first run") {
  RunSummary base;
  base.scheduler = "fifo";
  base.locality.node_local = 4;
  base.locality.rack_local = 3;
  base.locality.remote = 3;
  base.response.mean_s = 200;

  RunSummary better;
  better.scheduler = "prefetch";
  better.locality.node_local = 11;
  better.locality.rack_local = 4;
  better.locality.remote = 5;
  better.response.mean_s = 180;

  const auto rows = compare_rows({base, better});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scheduler == "fifo");
  CHECK(rows[0].locality_pct == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(rows[0].locality_delta_pp == 0.0);
  CHECK(rows[0].response_delta_pct == 0.0);
  CHECK(rows[1].locality_pct == doctest::Approx(55.0).epsilon(1e-12));
  CHECK(rows[1].locality_delta_pp == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(rows[1].response_delta_pct ==
        doctest::Approx(-10.0).epsilon(1e-12));

  CHECK(compare_rows({}).empty());
}

TEST_CASE("reports survive the round trip through the text log form") {
  const Scenario scen = default_table1_scenario();
  const ClusterTopology topo = scen.topology();
  auto sched = make_scheduler("prefetch", scen.sched);
  const RunResult res = run_simulation(topo, scen.workload, *sched,
                                       scen.params);

  const RunSummary direct = summarize("prefetch", res.log);
  const RunSummary reparsed =
      summarize("prefetch", parse_log_string(serialize(res.log)));

  CHECK(direct.locality.node_local == reparsed.locality.node_local);
  CHECK(direct.locality.rack_local == reparsed.locality.rack_local);
  CHECK(direct.locality.remote == reparsed.locality.remote);
  CHECK(direct.response.mean_s == reparsed.response.mean_s);
  CHECK(direct.response.max_s == reparsed.response.max_s);
  CHECK(direct.response.makespan_s == reparsed.response.makespan_s);
  REQUIRE(direct.response.jobs.size() == reparsed.response.jobs.size());
  for (std::size_t i = 0; i < direct.response.jobs.size(); ++i) {
    CHECK(direct.response.jobs[i].submit_s ==
          reparsed.response.jobs[i].submit_s);
    CHECK(direct.response.jobs[i].response_s ==
          reparsed.response.jobs[i].response_s);
  }
  CHECK(direct.prefetch.issued == reparsed.prefetch.issued);
  CHECK(direct.prefetch.completed == reparsed.prefetch.completed);
  CHECK(direct.prefetch.hits == reparsed.prefetch.hits);
  CHECK(direct.prefetch.moved_mb == reparsed.prefetch.moved_mb);
  CHECK(direct.prefetch.wasted_mb == reparsed.prefetch.wasted_mb);
}
