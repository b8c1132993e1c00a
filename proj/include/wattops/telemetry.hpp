#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace wattops {

// Modeled ground truth at fixed resolution (default 10 ms). Finer modeling
// buys little: the metering chain averages over 100 ms windows first.
struct GroundTruthTrace {
  double dt_s = 0.01;
  std::vector<double> samples;  // watts
};

// Rack PSU metering chain: the metering IC integrates 100 ms windows, a DSP
// keeps a running average over the last second, and the chassis logs that
// average every 3 s. PSUs over-report: a multiplicative bias >= 1 plus
// additive noise. The IC's RMS metering is modeled as an ideal window mean.
struct PsuMeterModel {
  double window_s = 0.1;
  double running_avg_s = 1.0;
  double log_interval_s = 3.0;
  double bias = 1.04;         // >= 1
  double noise_sd = 0.003;    // relative, gaussian
  std::uint64_t seed = 1;
};

struct PsuStream {
  std::vector<double> samples;  // one per log interval
  bool truncated = false;       // trace shorter than one log interval
};

PsuStream psu_stream(const GroundTruthTrace& truth, const PsuMeterModel& meter);

// Facility-side meter: 1 s samples within +/-accuracy, rolled up as a
// per-minute maximum.
struct DcimMeterModel {
  double sample_interval_s = 1.0;
  double accuracy = 0.01;  // in [0, 0.05]
  std::uint64_t seed = 2;
};

std::vector<double> dcim_minute_max(const GroundTruthTrace& truth,
                                    const DcimMeterModel& meter);

struct MinuteStats {
  int minute = 0;
  double max = 0, p90 = 0, p80 = 0, p70 = 0, p60 = 0, p50 = 0, mean = 0;
};

// Nearest-rank percentile over a sample set (p in (0,100]).
double nearest_rank_percentile(std::vector<double> values, double pct);

struct MinuteAggregation {
  std::vector<MinuteStats> minutes;
  int excluded_minutes = 0;  // minutes with missing rack samples
};

// Sums the racks' PSU streams tick-by-tick and aggregates each full minute.
// A minute where any rack lacks a sample is excluded and counted.
MinuteAggregation aggregate_minutes(
    const std::vector<PsuStream>& racks, double log_interval_s = 3.0);

struct AggregatorChoice {
  std::string best;                         // e.g. "p70"
  std::map<std::string, double> mean_ratio;  // stat -> mean(stat / dcim_max)
  int qualifying_minutes = 0;
};

// Picks the per-minute statistic of the summed PSU streams whose mean ratio
// against the facility meter's minute max is nearest 1.0. Only loaded
// minutes qualify: those whose facility reading is above that series' own
// 90th percentile... dips and idle periods would otherwise dominate.
AggregatorChoice select_aggregator(const MinuteAggregation& agg,
                                   const std::vector<double>& dcim_max,
                                   double load_percentile = 90.0);

// Largest grid-aligned limit whose per-minute P70 of the metered rack power
// stays within the rack budget. `rack_trace` maps a candidate limit to the
// rack's ground-truth trace under the reference workload.
struct UpliftResult {
  double tdp = 0.0;
  double p70_at_tdp = 0.0;  // watts, worst minute
};

UpliftResult validate_tdp_uplift(
    const std::function<GroundTruthTrace(double)>& rack_trace,
    const PsuMeterModel& meter, double rack_budget_w, double p_lo,
    double p_hi, double grid_w = 10.0);

}  // namespace wattops
