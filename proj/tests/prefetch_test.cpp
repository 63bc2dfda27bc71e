#include <doctest.h>

#include <optional>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/events.hpp"
#include "mrsim/prefetch.hpp"
#include "mrsim/scenario.hpp"
#include "mrsim/schedulers.hpp"
#include "mrsim/sim.hpp"
#include "mrsim/types.hpp"
#include "helpers.hpp"

using namespace mrsim;
using mrsim::testutil::CoreFixture;
using mrsim::testutil::node_spec;

namespace {

TaskAttempt running_attempt(double start_s, double read_s, double proc_s) {
  TaskAttempt a;
  a.id = 0;
  a.task = 0;
  a.node = 0;
  a.start_s = start_s;
  a.read_s = read_s;
  a.proc_s = proc_s;
  return a;
}

}  // namespace

TEST_CASE("remaining time projects the observed processing rate forward") {
  struct Case {
    double read_s, proc_s, start_s, now, warmup_s, expect;
  };
  // remaining = (1 - p) * elapsed / p with p the progress fraction at `now`
  const Case cases[] = {
      {0, 20, 0, 10, 0, 10},          // halfway after 10s -> 10s left
      {0, 40, 0, 10, 0, 30},          //
      {0, 10, 0, 2.5, 0, 7.5},        //
      {0, 100, 0, 1, 0, 99},          //
      {0, 8, 0, 6, 0, 2},             //
      {4, 16, 0, 12, 0, 12},          // read phase drags the observed rate
      {2, 6, 0, 4, 0, 8},             //
      {0, 10, 0, 10, 0, 0},           // finished: nothing left
      {0, 10, 0, 25, 0, 0},           // long finished: still nothing left
      {0, 4, 0, 2, 2, 2},             // warmup boundary is inclusive
      {0, 7, 0, 3, 0, 4},             //
      {0, 1000000, 0, 1, 0, 999999},  // barely started
      {0, 20, 100, 110, 0, 10},       // offsets cancel
      {0, 3, 1, 2.5, 1, 1.5},         //
  };
  for (const Case& c : cases) {
    CAPTURE(c.proc_s);
    CAPTURE(c.now);
    const TaskAttempt a = running_attempt(c.start_s, c.read_s, c.proc_s);
    const auto rem = estimate_remaining_s(a, c.now, c.warmup_s);
    REQUIRE(rem.has_value());
    CHECK(*rem == doctest::Approx(c.expect).epsilon(1e-12));
  }

  SUBCASE("no estimate before the warmup window has passed") {
    const TaskAttempt a = running_attempt(0, 0, 20);
    CHECK(!estimate_remaining_s(a, 10, 15).has_value());
    CHECK(estimate_remaining_s(a, 10, 10).has_value());
  }

  SUBCASE("no estimate while progress is still zero") {
    const TaskAttempt mid_read = running_attempt(0, 5, 10);
    CHECK(!estimate_remaining_s(mid_read, 3, 0).has_value());
    CHECK(!estimate_remaining_s(mid_read, 5, 0).has_value());  // read just done
    const TaskAttempt just_started = running_attempt(0, 0, 20);
    CHECK(!estimate_remaining_s(just_started, 0, 0).has_value());
  }
}

TEST_CASE("transfer time is size over link rate") {
  CHECK(estimate_transfer_s(64, 8) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(estimate_transfer_s(64, 4) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(estimate_transfer_s(37, 16) ==
        doctest::Approx(2.3125).epsilon(1e-12));
  CHECK(estimate_transfer_s(1024, 0.5) ==
        doctest::Approx(2048.0).epsilon(1e-12));
  CHECK(estimate_transfer_s(0, 8) == 0.0);
  CHECK_THROWS_AS(estimate_transfer_s(64, 0), SimError);
  CHECK_THROWS_AS(estimate_transfer_s(64, -2), SimError);
}

namespace {

// Four nodes with distinct processing rates, every running block local to
// its node, so each attempt's remaining time is exactly proc_s - elapsed.
// Margins at now=30 against the 8 MB/s cross-rack link:
//   node 0: 32MB@t0 (rem 2, move 4 -> -2) and 8MB@t26 (rem 4, move 1 -> 3)
//   node 1: 16MB@t26 (rem 4, move 2 -> +2)
//   node 2: 8MB@c1_start (rem 30-c1_start.., move 1)
//   node 3: 16MB@t27 (rem 1, move 2 -> -1) and 4MB@t29.5 (inside warmup)
struct EstimateRig {
  CoreFixture fx;
  JobId job;
  AttemptId b1 = kInvalidId;

  explicit EstimateRig(double c1_start)
      : fx({0, 1},
           {node_spec(0, 0, 4, 1, 1.0), node_spec(1, 0, 4, 1, 2.0),
            node_spec(2, 1, 4, 1, 1.0), node_spec(3, 1, 4, 1, 4.0)},
           16.0, 8.0,
           [] {
             EngineParams p;
             p.heartbeat_s = 1.0;
             return p;
           }()) {
    job = fx.add_job(0);
    const TaskId a1 = fx.add_task(job, 32, {0});
    const TaskId a2 = fx.add_task(job, 8, {0});
    const TaskId b = fx.add_task(job, 16, {1});
    const TaskId c = fx.add_task(job, 8, {2});
    const TaskId d1 = fx.add_task(job, 16, {3});
    const TaskId d2 = fx.add_task(job, 4, {3});
    fx.start_attempt(a1, 0, 0);
    fx.start_attempt(a2, 0, 26);
    b1 = fx.start_attempt(b, 1, 26);
    fx.start_attempt(c, 2, c1_start);
    fx.start_attempt(d1, 3, 27);
    fx.start_attempt(d2, 3, 29.5);
    fx.core.now = 30;
  }
};

}  // namespace

TEST_CASE("candidate nodes: positive margin on the soonest-finishing attempt") {
  SchedulerParams sp;  // warmup 1 heartbeat = 1s here

  SUBCASE("equal margins order by node id; each node is judged by its"
          " soonest attempt") {
    EstimateRig rig(25);  // node 2: rem 3, margin 2 -- ties node 1
    const auto set = build_candidate_set(rig.fx.view(), sp);
    REQUIRE(set.size() == 2);
    CHECK(set[0].node == 1);
    CHECK(set[1].node == 2);
    CHECK(set[0].attempt == rig.b1);
    CHECK(set[0].remaining_s == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(set[0].transfer_s == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(set[0].margin_s == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(set[1].margin_s == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(preselect_node(rig.fx.view(), sp) == 1);
  }

  SUBCASE("the tightest positive margin comes first") {
    EstimateRig rig(24);  // node 2: rem 2, margin 1 -- tighter than node 1
    const auto set = build_candidate_set(rig.fx.view(), sp);
    REQUIRE(set.size() == 2);
    CHECK(set[0].node == 2);
    CHECK(set[0].margin_s == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(set[1].node == 1);
    CHECK(preselect_node(rig.fx.view(), sp) == 2);
  }

  SUBCASE("equal remaining times on one node resolve to the older attempt") {
    EstimateRig rig(25);
    // 24MB started at 22 on node 1: rem = 12 - 8 = 4, same as the 16MB one
    const TaskId b2 = rig.fx.add_task(rig.job, 24, {1});
    rig.fx.start_attempt(b2, 1, 22);
    const auto set = build_candidate_set(rig.fx.view(), sp);
    REQUIRE(!set.empty());
    CHECK(set[0].node == 1);
    CHECK(set[0].attempt == rig.b1);
    CHECK(set[0].transfer_s == doctest::Approx(2.0).epsilon(1e-9));
  }

  SUBCASE("a node whose best attempt's job is blacklisted there drops out") {
    EstimateRig rig(25);
    rig.fx.core.failure_counts[{rig.job, 1}] = sp.blacklist_threshold;
    const auto set = build_candidate_set(rig.fx.view(), sp);
    REQUIRE(set.size() == 1);
    CHECK(set[0].node == 2);
  }

  SUBCASE("nothing qualifies while every attempt is inside warmup") {
    EstimateRig rig(25);
    SchedulerParams cold;
    cold.warmup_heartbeats = 100;
    CHECK(build_candidate_set(rig.fx.view(), cold).empty());
    CHECK(!preselect_node(rig.fx.view(), cold).has_value());
  }

  SUBCASE("an idle cluster offers no candidates") {
    CoreFixture fx({0}, {node_spec(0, 0, 2, 1, 4.0)}, 16.0, 16.0);
    fx.add_job(0);
    CHECK(build_candidate_set(fx.view(), sp).empty());
  }
}

namespace {

CoreFixture flat_fixture() {
  return CoreFixture({0, 1},
                     {node_spec(0, 0, 4, 1, 16.0),
                      node_spec(1, 0, 4, 1, 16.0),
                      node_spec(2, 1, 4, 1, 16.0)},
                     16.0, 4.0);
}

}  // namespace

TEST_CASE("task preselection walks queues by user, jobs by submission") {
  SchedulerParams sp;

  SUBCASE("local work runs on the target at once when a slot is free") {
    CoreFixture fx = flat_fixture();
    const JobId late_user = fx.add_job(1);
    const JobId early_user = fx.add_job(0);  // user 0 walks first
    fx.add_task(late_user, 64, {0});
    const TaskId rackT = fx.add_task(early_user, 64, {1});
    const TaskId localT = fx.add_task(early_user, 64, {0});

    CandidateBook book(fx.view());
    const auto choice = preselect_task(fx.view(), 0, true, book, sp);
    REQUIRE(choice.has_value());
    CHECK(choice->assign_now);
    CHECK(choice->task == localT);

    // without a slot the same walk proposes the closest non-local task
    const auto no_slot = preselect_task(fx.view(), 0, false, book, sp);
    REQUIRE(no_slot.has_value());
    CHECK(!no_slot->assign_now);
    CHECK(no_slot->task == rackT);
  }

  SUBCASE("rack-local beats remote, ties to the lower task id") {
    CoreFixture fx = flat_fixture();
    const JobId j = fx.add_job(0);
    fx.add_task(j, 64, {2});                       // remote from node 0
    const TaskId rack1 = fx.add_task(j, 64, {1});
    fx.add_task(j, 64, {1});                       // same class, higher id

    CandidateBook book(fx.view());
    const auto choice = preselect_task(fx.view(), 0, false, book, sp);
    REQUIRE(choice.has_value());
    CHECK(choice->task == rack1);
  }

  SUBCASE("an all-local job without a slot defers to the next job") {
    CoreFixture fx = flat_fixture();
    const JobId first = fx.add_job(0);
    const JobId second = fx.add_job(1);
    const TaskId localT = fx.add_task(first, 64, {0});
    const TaskId rackT = fx.add_task(second, 64, {1});

    CandidateBook book(fx.view());
    const auto no_slot = preselect_task(fx.view(), 0, false, book, sp);
    REQUIRE(no_slot.has_value());
    CHECK(!no_slot->assign_now);
    CHECK(no_slot->task == rackT);

    const auto with_slot = preselect_task(fx.view(), 0, true, book, sp);
    REQUIRE(with_slot.has_value());
    CHECK(with_slot->assign_now);
    CHECK(with_slot->task == localT);
  }

  SUBCASE("a retryable failure anywhere restricts the walk to retry lists") {
    CoreFixture fx = flat_fixture();
    const JobId j0 = fx.add_job(0);
    const JobId j1 = fx.add_job(1);
    fx.add_task(j0, 64, {1});                      // fresh work, user 0
    const TaskId failedT = fx.add_task(j1, 64, {1});
    fx.fail_pending(failedT, 2);

    CandidateBook book(fx.view());
    const auto choice = preselect_task(fx.view(), 0, false, book, sp);
    REQUIRE(choice.has_value());
    CHECK(choice->task == failedT);

    // a failed task local to the target short-circuits like any other
    CoreFixture fx2 = flat_fixture();
    const JobId k = fx2.add_job(0);
    const TaskId failedLocal = fx2.add_task(k, 64, {0});
    fx2.fail_pending(failedLocal, 1);
    CandidateBook book2(fx2.view());
    const auto retry = preselect_task(fx2.view(), 0, true, book2, sp);
    REQUIRE(retry.has_value());
    CHECK(retry->assign_now);
    CHECK(retry->task == failedLocal);
  }

  SUBCASE("jobs blacklisted on the target are passed over") {
    CoreFixture fx = flat_fixture();
    const JobId j0 = fx.add_job(0);
    const JobId j1 = fx.add_job(1);
    fx.add_task(j0, 64, {1});
    const TaskId fallback = fx.add_task(j1, 64, {1});
    fx.core.failure_counts[{j0, 0}] = sp.blacklist_threshold;

    CandidateBook book(fx.view());
    const auto choice = preselect_task(fx.view(), 0, false, book, sp);
    REQUIRE(choice.has_value());
    CHECK(choice->task == fallback);
  }

  SUBCASE("no candidates, no choice") {
    CoreFixture fx = flat_fixture();
    fx.add_job(0);
    CandidateBook book(fx.view());
    CHECK(!preselect_task(fx.view(), 0, true, book, sp).has_value());
  }
}

TEST_CASE("a prefetch copies from the replica closest to the target") {
  CoreFixture fx = flat_fixture();
  const JobId j = fx.add_job(0);
  const TaskId both = fx.add_task(j, 64, {1, 2});  // rack-mate and remote
  const TaskId there = fx.add_task(j, 64, {0, 2});

  const auto d = issue_prefetch(fx.view(), 0, both);
  REQUIRE(d.has_value());
  CHECK(d->kind == SchedulerDecision::Kind::Prefetch);
  CHECK(d->block == fx.core.tasks[both].input_block);
  CHECK(d->source == 1);  // rack-local replica preferred over cross-rack
  CHECK(d->dest == 0);
  CHECK(d->task == both);

  // a block already resident on the target needs no copy
  CHECK(!issue_prefetch(fx.view(), 0, there).has_value());
}

TEST_CASE("on the committed scenario every issued copy lands and gets used") {
  const Scenario scen = default_table1_scenario();
  const ClusterTopology topo = scen.topology();

  auto run = [&](const char* name) {
    auto sched = make_scheduler(name, scen.sched);
    return run_simulation(topo, scen.workload, *sched, scen.params);
  };
  const RunResult pre = run("prefetch");
  const RunResult cap = run("capacity");

  // replay: never more than one copy in flight, and all of them land
  int in_flight = 0;
  int issued = 0;
  int landed = 0;
  for (const LogRecord& r : pre.log) {
    if (r.kind == RecordKind::PrefetchIssued) {
      ++issued;
      ++in_flight;
      CHECK(in_flight <= 1);
    } else if (r.kind == RecordKind::TransferComplete &&
               r.purpose == "prefetch") {
      ++landed;
      --in_flight;
      CHECK(in_flight >= 0);
    }
  }
  CHECK(issued > 0);
  CHECK(in_flight == 0);
  CHECK(landed == issued);

  // every delivered copy is eventually read node-locally where it landed
  int hits = 0;
  for (std::size_t i = 0; i < pre.log.size(); ++i) {
    const LogRecord& r = pre.log[i];
    if (r.kind != RecordKind::TransferComplete || r.purpose != "prefetch")
      continue;
    for (std::size_t k = i + 1; k < pre.log.size(); ++k) {
      const LogRecord& s = pre.log[k];
      if (s.kind == RecordKind::AttemptStart && s.block == r.block &&
          s.node == r.dest && s.locality == LocalityClass::NodeLocal) {
        ++hits;
        break;
      }
    }
  }
  CHECK(hits == issued);

  // the copies buy strictly more node-local map starts than capacity gets
  auto local_fraction = [](const EventLog& log) {
    int local = 0, total = 0;
    for (const LogRecord& r : log)
      if (r.kind == RecordKind::AttemptStart) {
        ++total;
        if (r.locality == LocalityClass::NodeLocal) ++local;
      }
    return static_cast<double>(local) / total;
  };
  CHECK(local_fraction(pre.log) > local_fraction(cap.log));

  CHECK(pre.log.back().kind == RecordKind::RunEnd);
  int complete = 0;
  for (const LogRecord& r : pre.log)
    if (r.kind == RecordKind::JobComplete) ++complete;
  CHECK(complete == static_cast<int>(scen.workload.jobs.size()));
}
