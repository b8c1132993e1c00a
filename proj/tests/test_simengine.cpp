#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>
#include "fixtures.hpp"
#include "wattops/curves.hpp"
#include "wattops/errors.hpp"
#include "wattops/scenario.hpp"
#include "wattops/simengine.hpp"

using namespace wattops;
using simfix::feeder_sim;
using simfix::quiet;

TEST_CASE("default trip curves carry the published points") {
  const TripCurve rpp = TripCurve::rpp_default();
  REQUIRE(rpp.points.size() == 2);
  CHECK(rpp.points[0].overdraw == 1.1);
  CHECK(rpp.points[0].max_duration_s == 1020.0);
  CHECK(rpp.points[1].overdraw == 1.4);
  CHECK(rpp.points[1].max_duration_s == 60.0);

  const TripCurve msb = TripCurve::msb_default();
  REQUIRE(msb.points.size() == 3);
  CHECK(msb.points[0].overdraw == 1.15);
  CHECK(msb.points[0].max_duration_s == 60.0);
  CHECK(msb.points[1].overdraw == 1.2);
  CHECK(msb.points[1].max_duration_s == 45.0);
  CHECK(msb.points[2].overdraw == 2.0);
  CHECK(msb.points[2].max_duration_s == 30.0);
}

TEST_CASE("allowed duration interpolates log-log and clamps at the ends") {
  const TripCurve rpp = TripCurve::rpp_default();
  CHECK(std::isinf(allowed_duration(rpp, 1.05)));
  CHECK(std::isinf(allowed_duration(rpp, 1.0999)));
  CHECK(allowed_duration(rpp, 1.1) == doctest::Approx(1020.0));
  CHECK(allowed_duration(rpp, 1.2) == doctest::Approx(366.9895141982822));
  CHECK(allowed_duration(rpp, 1.4) == doctest::Approx(60.0));
  CHECK(allowed_duration(rpp, 1.5) == doctest::Approx(60.0));

  const TripCurve msb = TripCurve::msb_default();
  CHECK(allowed_duration(msb, 1.15) == doctest::Approx(60.0));
  CHECK(allowed_duration(msb, 1.17) == doctest::Approx(53.39934213256761));
  CHECK(allowed_duration(msb, 1.2) == doctest::Approx(45.0));
  CHECK(allowed_duration(msb, 2.0) == doctest::Approx(30.0));
  CHECK(allowed_duration(msb, 2.5) == doctest::Approx(30.0));

  // Allowed time never increases with overdraw.
  double prev = allowed_duration(rpp, 1.1);
  for (double r = 1.1; r <= 1.45; r += 0.01) {
    const double a = allowed_duration(rpp, r);
    CHECK(a <= prev + 1e-12);
    prev = a;
  }
}

TEST_CASE("malformed trip curves are rejected") {
  TripCurve c;
  CHECK_THROWS_AS(allowed_duration(c, 1.2), ConfigError);
  c.points = {{1.0, 100.0}};
  CHECK_THROWS_AS(allowed_duration(c, 1.2), ConfigError);
  c.points = {{1.1, 0.0}};
  CHECK_THROWS_AS(allowed_duration(c, 1.2), ConfigError);
  c.points = {{1.2, 100.0}, {1.1, 50.0}};
  CHECK_THROWS_AS(allowed_duration(c, 1.25), ConfigError);
  c.points = {{1.1, 50.0}, {1.2, 100.0}};
  CHECK_THROWS_AS(allowed_duration(c, 1.25), ConfigError);
}

TEST_CASE("breaker integrates overdraw time and trips on schedule") {
  // At the knee the accumulator gains 1/1020 per second.
  TripCurve c = TripCurve::rpp_default();
  int updates = 0;
  while (!c.tripped && updates < 2000) {
    breaker_update(c, 1.1, 1.0);
    ++updates;
  }
  CHECK(c.tripped);
  CHECK(updates >= 1019);
  CHECK(updates <= 1021);

  c = TripCurve::rpp_default();
  updates = 0;
  while (!c.tripped && updates < 200) {
    breaker_update(c, 1.4, 1.0);
    ++updates;
  }
  CHECK(c.tripped);
  CHECK(updates >= 59);
  CHECK(updates <= 61);
}

TEST_CASE("breaker never trips at or below rated load") {
  TripCurve c = TripCurve::rpp_default();
  for (int s = 0; s < 86400; ++s) breaker_update(c, 1.0, 1.0);
  CHECK_FALSE(c.tripped);
  CHECK(c.accumulator == 0.0);
}

TEST_CASE("breaker memory decays below the curve and latches once tripped") {
  TripCurve c = TripCurve::rpp_default();
  for (int s = 0; s < 100; ++s) breaker_update(c, 1.2, 1.0);
  CHECK_FALSE(c.tripped);
  const double built = c.accumulator;
  CHECK(built > 0.2);

  // Decay runs at 1/1020 per second, so ~278 s clears 100/367.
  for (int s = 0; s < 250; ++s) breaker_update(c, 1.05, 1.0);
  CHECK(c.accumulator > 0.0);
  CHECK(c.accumulator < built);
  for (int s = 0; s < 50; ++s) breaker_update(c, 1.05, 1.0);
  CHECK(c.accumulator == 0.0);

  TripCurve t = TripCurve::rpp_default();
  while (!t.tripped) breaker_update(t, 1.5, 1.0);
  const double acc = t.accumulator;
  breaker_update(t, 0.5, 1.0);
  CHECK(t.tripped);
  CHECK(t.accumulator == acc);
}

TEST_CASE("straggler factor follows the slowest limit") {
  const CurveSet c = CurveSet::gb200_defaults();
  CHECK(straggler_factor(c, 900.0, 1200.0) == doctest::Approx(0.88));
  CHECK(straggler_factor(c, 960.0, 1020.0) == doctest::Approx(0.935 / 0.955));
  CHECK(straggler_factor(c, 1020.0, 1020.0) == doctest::Approx(1.0));

  double prev = 0.0;
  for (double p = 900.0; p <= 1200.0; p += 10.0) {
    const double f = straggler_factor(c, p, 1200.0);
    CHECK(f >= prev);
    prev = f;
  }

  CurveSet dead = c;
  dead.f_anchors = {{900.0, 0.0}, {1200.0, 1.0}};
  CHECK_THROWS_AS(straggler_factor(dead, 1000.0, 900.0), ConfigError);
}

TEST_CASE("smoother floors active draw and validates the floor") {
  SmootherConfig cfg;
  const std::vector<double> in = {1000.0, 336.6, 900.0};
  const auto out = apply_smoother(in, cfg, 1020.0);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == 1000.0);
  CHECK(out[1] == 800.0);
  CHECK(out[2] == 900.0);

  SmootherConfig off = cfg;
  off.enabled = false;
  CHECK(apply_smoother(in, off, 1020.0) == in);

  SmootherConfig high = cfg;
  high.floor_w = 1100.0;
  CHECK_THROWS_AS(apply_smoother(in, high, 1020.0), ConfigError);
  CHECK_NOTHROW(apply_smoother(in, off, 500.0));
}

TEST_CASE("rack trace generator is deterministic and holds values per second") {
  RackTraceParams p;
  const GroundTruthTrace a = gen_rack_trace(p, 1020.0);
  const GroundTruthTrace b = gen_rack_trace(p, 1020.0);
  CHECK(a.dt_s == 0.01);
  REQUIRE(a.samples.size() == 120000);
  CHECK(a.samples == b.samples);

  RackTraceParams other = p;
  other.seed = 12;
  CHECK(gen_rack_trace(other, 1020.0).samples != a.samples);

  for (int k = 1; k < 100; ++k) CHECK(a.samples[k] == a.samples[0]);
  CHECK(a.samples[100] != a.samples[0]);
}

TEST_CASE("rack trace levels match the duty cycle with the floor applied") {
  RackTraceParams p;
  const GroundTruthTrace a = gen_rack_trace(p, 1020.0);
  // Compute seconds: 18 hosts x (2 x 0.965 x 1020 + 666.7) ~ 47.4 kW.
  CHECK(a.samples[0] > 46000.0);
  CHECK(a.samples[0] < 49000.0);
  // Comm seconds are floored at 800 W per GPU: ~ 18 x 2266.7 = 40.8 kW.
  const std::size_t comm_tick = 48 * 100;
  CHECK(a.samples[comm_tick] > 39000.0);
  CHECK(a.samples[comm_tick] < 42500.0);

  RackTraceParams raw = p;
  raw.smoother_floor_w = 0.0;
  const GroundTruthTrace u = gen_rack_trace(raw, 1020.0);
  // Unfloored comm: 18 x (2 x 0.33 x 1020 + 666.7) ~ 24.1 kW.
  CHECK(u.samples[comm_tick] > 23000.0);
  CHECK(u.samples[comm_tick] < 25300.0);
  CHECK(u.samples[0] == a.samples[0]);
}

TEST_CASE("rack trace parameters are validated") {
  RackTraceParams p;
  p.hosts = 0;
  CHECK_THROWS_AS(gen_rack_trace(p, 1020.0), ConfigError);
  p = RackTraceParams{};
  p.dt_s = 0.0;
  CHECK_THROWS_AS(gen_rack_trace(p, 1020.0), ConfigError);
  p = RackTraceParams{};
  p.duration_s = 0.0;
  CHECK_THROWS_AS(gen_rack_trace(p, 1020.0), ConfigError);
  p = RackTraceParams{};
  p.compute_s = 0.0;
  p.comm_s = 0.0;
  CHECK_THROWS_AS(gen_rack_trace(p, 1020.0), ConfigError);
}

TEST_CASE("zero-horizon run yields empty timelines and zeroed job summaries") {
  SimScenario s = case_study_scenario().sim;
  s.horizon_s = 0.0;
  const SimReport r = run_simulation(s);
  CHECK(r.throughput_timeline.empty());
  CHECK(r.total_power_timeline.empty());
  CHECK(r.stranded_power_timeline.empty());
  CHECK(r.capping_events.empty());
  CHECK(r.trips.empty());
  CHECK(r.mean_throughput_factor == 0.0);
  CHECK(r.peak_power_w == 0.0);
  REQUIRE(r.per_job.size() == 3);
  for (const auto& j : r.per_job) {
    CHECK(j.mean_host_power_w == 0.0);
    CHECK(j.capped_seconds == 0.0);
  }
}

TEST_CASE("identical seeds reproduce the report exactly") {
  const SimScenario s = feeder_sim(2);
  const SimReport a = run_simulation(s);
  const SimReport b = run_simulation(s);
  CHECK(a.seed == 9);
  CHECK(a.throughput_timeline == b.throughput_timeline);
  CHECK(a.total_power_timeline == b.total_power_timeline);
  CHECK(a.stranded_power_timeline == b.stranded_power_timeline);
  CHECK(a.capping_events.size() == b.capping_events.size());
  CHECK(a.peak_power_w == b.peak_power_w);

  SimScenario other = s;
  other.seed = 10;
  const SimReport c = run_simulation(other);
  CHECK(a.total_power_timeline != c.total_power_timeline);
}

TEST_CASE("smoothed duty cycle: floored comm power, bounded swing, fixed tax") {
  SimScenario s = feeder_sim(1);
  quiet(s);
  const SimReport r = run_simulation(s);
  REQUIRE(r.total_power_timeline.size() == 120);

  // Compute tick: 18 x (2 x 0.965 x 1020 + 666.7); comm tick floored at
  // 800 W per GPU: 18 x (2 x 800 + 666.7).
  CHECK(r.total_power_timeline[10] == doctest::Approx(47435.4));
  CHECK(r.total_power_timeline[50] == doctest::Approx(40800.6));
  CHECK(r.peak_power_w == doctest::Approx(47435.4));

  const double swing = (r.peak_power_w - 40800.6) / r.peak_power_w;
  CHECK(swing < 0.30);
  CHECK(swing == doctest::Approx(0.13987).epsilon(1e-3));

  // Without the floor the comm tick would sit at 18 x (2 x 336.6 + 666.7).
  SimScenario raw = s;
  raw.smoother.enabled = false;
  const SimReport ur = run_simulation(raw);
  CHECK(ur.total_power_timeline[50] == doctest::Approx(24118.2));
  const double raw_swing =
      (ur.peak_power_w - ur.total_power_timeline[50]) / ur.peak_power_w;
  CHECK(raw_swing > 0.45);

  // The smoother taxes throughput by its fixed overhead and nothing else.
  CHECK(r.mean_throughput_factor == doctest::Approx(0.975));
  CHECK(ur.mean_throughput_factor == doctest::Approx(1.0));
  for (double v : r.throughput_timeline)
    CHECK(v == doctest::Approx(0.975));

  // Stranded headroom complements IT load against the feeder budget.
  for (std::size_t t = 0; t < r.total_power_timeline.size(); ++t)
    CHECK(r.total_power_timeline[t] + r.stranded_power_timeline[t] ==
          doctest::Approx(2.7e6));
}

TEST_CASE("tight limit pins every host at the floor tdp") {
  SimScenario s = feeder_sim(2);
  quiet(s);
  s.limit_events = {{"m/s/p", 0.0, 0.3}};
  const SimReport r = run_simulation(s);

  REQUIRE(!r.capping_events.empty());
  bool saw_min = false;
  for (const auto& ev : r.capping_events) {
    CHECK(ev.tdp >= 900.0);
    CHECK(ev.tdp <= 1020.0);
    CHECK(ev.device_id == "m/s/p");
    saw_min = saw_min || ev.tdp == 900.0;
  }
  CHECK(saw_min);

  // Pre-cap ticks run at the smoothed base factor; once the floor caps
  // land, pace follows f(900)/f(1020) x 0.975.
  CHECK(r.throughput_timeline[5] == doctest::Approx(0.975));
  CHECK(r.throughput_timeline[50] ==
        doctest::Approx(0.88 / 0.955 * 0.975).epsilon(1e-6));
  CHECK(r.throughput_timeline[119] ==
        doctest::Approx(0.88 / 0.955 * 0.975).epsilon(1e-6));

  for (const auto& j : r.per_job) {
    CHECK(j.capped_seconds > 0.0);
    CHECK(j.mean_host_power_capped_w < j.mean_host_power_uncapped_w);
  }
  CHECK(r.trips.empty());
}

TEST_CASE("boost raises the limit only when the heaviest phase fits") {
  SimScenario s = feeder_sim(1);
  quiet(s);
  s.boost.enabled = true;
  const SimReport r = run_simulation(s);
  // One rack estimates 18 x (2 x 1100 x 0.965 + 666.7) ~ 50.2 kW against a
  // 187.7 kW margin, so the panel grants 1100 W.
  CHECK(r.mean_throughput_factor ==
        doctest::Approx(0.975 / 0.955 * 0.975).epsilon(1e-6));
  CHECK(r.peak_power_w == doctest::Approx(18 * (2 * 1100 * 0.965 + 666.7)));

  SimScenario full = feeder_sim(4);
  quiet(full);
  full.boost.enabled = true;
  const SimReport fr = run_simulation(full);
  // Four racks would estimate ~200.9 kW, over the margin: no grant.
  CHECK(fr.mean_throughput_factor == doctest::Approx(0.975));
  CHECK(fr.peak_power_w == doctest::Approx(4 * 47435.4));
}

TEST_CASE("heartbeat loss self-caps hosts at the fail-safe tdp") {
  SimScenario s = feeder_sim(1);
  quiet(s);
  s.heartbeat_loss_at_s = 30.0;
  const SimReport r = run_simulation(s);
  // Silence starts at 30 s; the timeout expires strictly after 60 s.
  CHECK(r.throughput_timeline[50] == doctest::Approx(0.975));
  CHECK(r.throughput_timeline[60] == doctest::Approx(0.975));
  CHECK(r.throughput_timeline[61] ==
        doctest::Approx(0.935 / 0.955 * 0.975).epsilon(1e-6));
  CHECK(r.throughput_timeline[100] ==
        doctest::Approx(0.935 / 0.955 * 0.975).epsilon(1e-6));
}

TEST_CASE("shared-feeder case study caps, recovers, and never trips") {
  const Scenario sc = case_study_scenario();
  const SimReport r = run_simulation(sc.sim);

  CHECK(r.trips.empty());
  REQUIRE(!r.capping_events.empty());

  bool saw_min = false;
  double last_cap_time = 0.0;
  double last_cap_tdp = 0.0;
  for (const auto& ev : r.capping_events) {
    saw_min = saw_min || ev.tdp == 900.0;
    if (ev.time_s >= last_cap_time) {
      last_cap_time = ev.time_s;
      last_cap_tdp = ev.tdp;
    }
  }
  CHECK(saw_min);
  // The squeeze lifts at 480 s; the final commands restore the base tdp.
  CHECK(last_cap_time > 480.0);
  CHECK(last_cap_time < 700.0);
  CHECK(last_cap_tdp == doctest::Approx(1020.0));

  // After restoration the fleet runs at the smoothed base factor again.
  const std::size_t n = r.throughput_timeline.size();
  REQUIRE(n == 900);
  double tail = 0.0;
  for (std::size_t t = n - 100; t < n; ++t) tail += r.throughput_timeline[t];
  tail /= 100.0;
  CHECK(tail == doctest::Approx(0.975).epsilon(1e-9));

  const PhaseSummary* small = nullptr;
  const PhaseSummary* burst = nullptr;
  for (const auto& j : r.per_job) {
    if (j.job_id == "train_small") small = &j;
    if (j.job_id == "eval_burst") burst = &j;
  }
  REQUIRE(small != nullptr);
  REQUIRE(burst != nullptr);
  CHECK(small->capped_seconds > 0.0);
  const double drop =
      1.0 - small->mean_host_power_capped_w / small->mean_host_power_uncapped_w;
  CHECK(drop > 0.04);
  CHECK(drop < 0.10);
  CHECK(burst->capped_seconds > 0.0);
}

TEST_CASE("unprotected overcommit trips the panel breaker") {
  const Scenario sc = overcommit_scenario();
  CHECK_FALSE(sc.sim.dimmer_enabled);
  const SimReport r = run_simulation(sc.sim);

  REQUIRE(!r.trips.empty());
  const TripEvent& trip = r.trips.front();
  CHECK(trip.device_id == "msb0/sb0/rpp0");
  CHECK(trip.overdraw > 1.1);
  CHECK(trip.time_s > 300.0);
  CHECK(trip.time_s < 600.0);

  // Hosts under the tripped panel go dark.
  CHECK(r.throughput_timeline.back() == 0.0);
  CHECK(r.total_power_timeline.back() < 1.0);
  CHECK(r.capping_events.empty());
}

TEST_CASE("simulation scenario wiring is validated") {
  SimScenario s = feeder_sim(1);

  SimScenario bad_rpp = s;
  for (auto& h : bad_rpp.jobs[0].hosts) h.rpp_id = "m/s";
  CHECK_THROWS_AS(run_simulation(bad_rpp), ConfigError);

  SimScenario dup = feeder_sim(1);
  dup.jobs.push_back(dup.jobs[0]);
  dup.jobs[1].job_id = "clone";
  CHECK_THROWS_AS(run_simulation(dup), ConfigError);

  SimScenario ghost = feeder_sim(1);
  ghost.limit_events = {{"nope", 0.0, 0.5}};
  CHECK_THROWS_AS(run_simulation(ghost), ConfigError);

  SimScenario negative = feeder_sim(1);
  negative.horizon_s = -1.0;
  CHECK_THROWS_AS(run_simulation(negative), ConfigError);

  SimScenario broken = feeder_sim(1);
  broken.tree.nodes[2].children = {"m/s/p/x"};
  CHECK_THROWS_AS(run_simulation(broken), ConfigError);

  SimScenario empty_profile = feeder_sim(1);
  empty_profile.jobs[0].phase_profile.clear();
  CHECK_THROWS_AS(run_simulation(empty_profile), ConfigError);
}
