#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wattops/curves.hpp"
#include "wattops/dimmer.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/telemetry.hpp"

namespace wattops {

struct PhaseSegment {
  std::string phase;             // "compute" or "exposed_comm"
  double duration_s = 0.0;
  double per_gpu_fraction = 0.0;  // of the GPU limit
};

struct JobHost {
  std::string server_id;
  std::string rpp_id;
};

struct JobSpec {
  std::string job_id;
  std::vector<JobHost> hosts;
  int gpus_per_host = 2;
  std::vector<PhaseSegment> phase_profile;  // repeats while the job is active
  int priority = 0;   // larger jobs get larger values, capped last
  long size = 0;      // GPUs, informational
  double phase_offset_s = 0.0;
  double start_s = 0.0;
  double end_s = -1.0;  // < 0: runs to the horizon
};

struct SmootherConfig {
  bool enabled = true;  // always-on in production
  double floor_w = 800.0;       // per GPU, active phases
  double overhead = 0.025;      // throughput multiplier is (1 - overhead)
};

struct TripPoint {
  double overdraw = 0.0;      // load / capacity, > 1
  double max_duration_s = 0;  // sustained time to trip at that overdraw
};

// Inverse-time trip model: allowed duration interpolates log-log between
// points; an accumulator integrates dt/allowed(r) while r > 1 and trips at
// 1; below the curve it decays at 1/longest-duration per second.
struct TripCurve {
  std::vector<TripPoint> points;
  double accumulator = 0.0;
  bool tripped = false;

  static TripCurve rpp_default();
  static TripCurve msb_default();
};

double allowed_duration(const TripCurve& curve, double overdraw);
void breaker_update(TripCurve& curve, double overdraw, double dt_s);

struct TelemetryLatencyModel {
  double median_s = 0.8;   // log-normal
  double sigma = 0.55;
  double max_s = 4.5;
  std::uint64_t seed = 7;
};

struct BoostConfig {
  bool enabled = false;
  double boost_tdp = 1100.0;  // opportunistic limit where headroom allows
  double margin = 0.98;       // boosted draw must stay inside this share of
                              // the device's dimmer limit
};

// Scheduled change to one device's dimmer limit (a shared-feeder
// reallocation); factor multiplies the device's base limit.
struct LimitEvent {
  std::string device_id;
  double at_s = 0.0;
  double factor = 1.0;
};

struct SimScenario {
  PowerTree tree;
  CurveSet curves;
  std::vector<JobSpec> jobs;
  SmootherConfig smoother;
  DimmerConfig dimmer;
  bool dimmer_enabled = true;
  BoostConfig boost;
  TelemetryLatencyModel latency;
  double horizon_s = 1800.0;
  double base_tdp = 1020.0;
  double host_overhead_w = 666.7;      // per host, non-GPU
  double compute_jitter_sd = 0.01;     // common-mode, per job per tick
  double host_jitter_sd = 0.02;        // per host per tick
  double heartbeat_loss_at_s = -1.0;   // < 0: heartbeats stay healthy
  std::uint64_t seed = 1;
  double msb_it_budget_w = 2.7e6;
  double dimmer_limit_fraction = 0.97;
  std::vector<LimitEvent> limit_events;
};

struct CapEvent {
  double time_s = 0.0;
  std::string device_id;
  std::string server_id;
  double tdp = 0.0;
};

struct TripEvent {
  double time_s = 0.0;
  std::string device_id;
  double overdraw = 0.0;
};

struct PhaseSummary {
  std::string job_id;
  double mean_host_power_w = 0.0;
  double mean_throughput_factor = 0.0;  // f(effective) / f(base), smoothed
  double capped_seconds = 0.0;
  // Means split by cap state, for before/after comparisons; zero when the
  // job never spent time in that state.
  double mean_host_power_capped_w = 0.0;
  double mean_host_power_uncapped_w = 0.0;
};

struct SimReport {
  std::vector<double> throughput_timeline;       // fleet factor per tick
  std::vector<double> total_power_timeline;      // watts
  std::vector<double> stranded_power_timeline;   // sum MSB headroom, watts
  std::vector<CapEvent> capping_events;
  std::vector<TripEvent> trips;
  std::vector<PhaseSummary> per_job;
  double mean_throughput_factor = 0.0;
  double peak_power_w = 0.0;
  std::uint64_t seed = 0;
};

struct RackTraceParams {
  int hosts = 18;
  int gpus_per_host = 2;
  double host_overhead_w = 666.7;
  double compute_fraction = 0.965;
  double comm_fraction = 0.33;
  double compute_s = 48.0;
  double comm_s = 12.0;
  double common_jitter_sd = 0.004;  // per second, shared by all hosts
  double host_jitter_sd = 0.015;    // per host per second
  double smoother_floor_w = 800.0;  // per gpu; <= 0 disables
  double dt_s = 0.01;
  double duration_s = 1200.0;
  std::uint64_t seed = 11;
};

// Ground truth for one rack under the standard workload shape at limit tdp,
// for the metering pipeline. Deterministic in (params.seed, tdp).
GroundTruthTrace gen_rack_trace(const RackTraceParams& params, double tdp);

// 1 s discrete loop. Tick order: host powers -> smoother -> aggregate up the
// tree plus mechanical load -> telemetry latency -> controller decisions at
// the decision cadence -> cap delivery -> straggler recompute -> breaker
// update -> metrics. Identical seeds give identical reports.
SimReport run_simulation(const SimScenario& scenario);

// Straggler coupling: a job's effective rate follows its slowest host,
// factor = f(min limit)/f(reference); uncapped hosts' compute draw scales
// down by the same factor.
double straggler_factor(const CurveSet& curves, double min_tdp,
                        double reference_tdp);

// Square-wave smoothing: active-phase per-GPU power is floored, throughput
// pays the overhead. Throws ConfigError when the floor exceeds the limit.
std::vector<double> apply_smoother(const std::vector<double>& per_gpu_power,
                                   const SmootherConfig& config, double tdp);

}  // namespace wattops
