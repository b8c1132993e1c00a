#include "wattops/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "wattops/errors.hpp"
#include "util.hpp"

namespace wattops {

namespace {

std::size_t ticks_per(double interval_s, double unit_s, const char* what) {
  const double r = interval_s / unit_s;
  const auto n = std::llround(r);
  if (n < 1 || std::abs(r - double(n)) > 1e-6)
    throw ConfigError(std::string(what) + " must be a whole multiple of the base interval");
  return std::size_t(n);
}

}  // namespace

PsuStream psu_stream(const GroundTruthTrace& truth, const PsuMeterModel& meter) {
  if (!(truth.dt_s > 0.0)) throw ConfigError("psu meter: nonpositive trace step");
  if (!(meter.bias >= 1.0))
    throw ConfigError("psu meter: bias must be at least 1 (PSUs over-report)");
  if (meter.noise_sd < 0.0) throw ConfigError("psu meter: negative noise");

  const std::size_t spw = ticks_per(meter.window_s, truth.dt_s, "psu window");
  const std::size_t run_w =
      ticks_per(meter.running_avg_s, meter.window_s, "psu running average");
  const std::size_t log_w =
      ticks_per(meter.log_interval_s, meter.window_s, "psu log interval");

  auto rng = detail::seeded_engine(meter.seed, "psu_noise");
  std::normal_distribution<double> noise(0.0, meter.noise_sd);

  PsuStream out;
  std::deque<double> recent;  // last run_w window means
  double recent_sum = 0.0;
  const std::size_t windows = truth.samples.size() / spw;
  for (std::size_t w = 0; w < windows; ++w) {
    double mean = 0.0;
    for (std::size_t i = w * spw; i < (w + 1) * spw; ++i)
      mean += truth.samples[i];
    mean /= double(spw);
    recent.push_back(mean);
    recent_sum += mean;
    if (recent.size() > run_w) {
      recent_sum -= recent.front();
      recent.pop_front();
    }
    if ((w + 1) % log_w == 0) {
      const double avg = recent_sum / double(recent.size());
      out.samples.push_back(avg * meter.bias * (1.0 + noise(rng)));
    }
  }
  out.truncated = out.samples.empty();
  return out;
}

std::vector<double> dcim_minute_max(const GroundTruthTrace& truth,
                                    const DcimMeterModel& meter) {
  if (!(truth.dt_s > 0.0)) throw ConfigError("dcim meter: nonpositive trace step");
  if (!(meter.accuracy >= 0.0 && meter.accuracy <= 0.05))
    throw ConfigError("dcim meter: accuracy outside [0, 0.05]");
  const std::size_t sps =
      ticks_per(meter.sample_interval_s, truth.dt_s, "dcim sample interval");
  const std::size_t per_minute = ticks_per(60.0, meter.sample_interval_s, "minute");

  auto rng = detail::seeded_engine(meter.seed, "dcim_noise");
  std::uniform_real_distribution<double> err(-meter.accuracy, meter.accuracy);

  std::vector<double> readings;
  const std::size_t seconds = truth.samples.size() / sps;
  readings.reserve(seconds);
  for (std::size_t s = 0; s < seconds; ++s) {
    double mean = 0.0;
    for (std::size_t i = s * sps; i < (s + 1) * sps; ++i)
      mean += truth.samples[i];
    mean /= double(sps);
    readings.push_back(mean * (1.0 + err(rng)));
  }

  std::vector<double> out;
  for (std::size_t m = 0; (m + 1) * per_minute <= readings.size(); ++m) {
    double peak = readings[m * per_minute];
    for (std::size_t i = m * per_minute; i < (m + 1) * per_minute; ++i)
      peak = std::max(peak, readings[i]);
    out.push_back(peak);
  }
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty())
    throw ConfigError("percentile: empty sample set");
  if (!(pct > 0.0 && pct <= 100.0))
    throw ConfigError("percentile: rank must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank =
      std::size_t(std::ceil(pct / 100.0 * double(values.size()) - 1e-9));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

MinuteAggregation aggregate_minutes(const std::vector<PsuStream>& racks,
                                    double log_interval_s) {
  if (racks.empty()) throw ConfigError("aggregate: no racks");
  const std::size_t per_minute = ticks_per(60.0, log_interval_s, "minute");

  std::size_t max_len = 0;
  for (const auto& r : racks) max_len = std::max(max_len, r.samples.size());

  MinuteAggregation out;
  for (std::size_t m = 0; (m + 1) * per_minute <= max_len; ++m) {
    bool complete = true;
    for (const auto& r : racks)
      if (r.samples.size() < (m + 1) * per_minute) { complete = false; break; }
    if (!complete) {
      ++out.excluded_minutes;
      continue;
    }
    std::vector<double> sums(per_minute, 0.0);
    for (const auto& r : racks)
      for (std::size_t i = 0; i < per_minute; ++i)
        sums[i] += r.samples[m * per_minute + i];
    MinuteStats stats;
    stats.minute = int(m);
    stats.max = *std::max_element(sums.begin(), sums.end());
    stats.p90 = nearest_rank_percentile(sums, 90.0);
    stats.p80 = nearest_rank_percentile(sums, 80.0);
    stats.p70 = nearest_rank_percentile(sums, 70.0);
    stats.p60 = nearest_rank_percentile(sums, 60.0);
    stats.p50 = nearest_rank_percentile(sums, 50.0);
    stats.mean = std::accumulate(sums.begin(), sums.end(), 0.0) / double(per_minute);
    out.minutes.push_back(stats);
  }
  return out;
}

AggregatorChoice select_aggregator(const MinuteAggregation& agg,
                                   const std::vector<double>& dcim_max,
                                   double load_percentile) {
  std::vector<const MinuteStats*> aligned;
  std::vector<double> dcim;
  for (const auto& m : agg.minutes)
    if (m.minute >= 0 && std::size_t(m.minute) < dcim_max.size()) {
      aligned.push_back(&m);
      dcim.push_back(dcim_max[std::size_t(m.minute)]);
    }
  if (aligned.empty())
    throw ConfigError("aggregator selection: no aligned minutes");

  // Only loaded minutes are meaningful for a planning limit; idle dips
  // would drag every ratio toward zero.
  const double threshold = nearest_rank_percentile(dcim, load_percentile);

  AggregatorChoice out;
  const std::vector<std::pair<std::string, double MinuteStats::*>> stats = {
      {"max", &MinuteStats::max},   {"p90", &MinuteStats::p90},
      {"p80", &MinuteStats::p80},   {"p70", &MinuteStats::p70},
      {"p60", &MinuteStats::p60},   {"p50", &MinuteStats::p50},
      {"mean", &MinuteStats::mean},
  };
  std::map<std::string, double> sums;
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    if (dcim[i] < threshold) continue;
    if (!(dcim[i] > 0.0))
      throw ConfigError("aggregator selection: nonpositive facility reading");
    ++out.qualifying_minutes;
    for (const auto& [name, member] : stats)
      sums[name] += (aligned[i]->*member) / dcim[i];
  }

  double best_gap = 0.0;
  for (const auto& [name, member] : stats) {
    const double ratio = sums[name] / double(out.qualifying_minutes);
    out.mean_ratio[name] = ratio;
    const double gap = std::abs(ratio - 1.0);
    if (out.best.empty() || gap < best_gap) {
      out.best = name;
      best_gap = gap;
    }
  }
  return out;
}

UpliftResult validate_tdp_uplift(
    const std::function<GroundTruthTrace(double)>& rack_trace,
    const PsuMeterModel& meter, double rack_budget_w, double p_lo, double p_hi,
    double grid_w) {
  if (!(grid_w > 0.0)) throw ConfigError("tdp uplift: grid step must be positive");
  if (!(p_lo <= p_hi)) throw ConfigError("tdp uplift: p_lo must not exceed p_hi");

  for (double p = p_hi; p >= p_lo - 1e-9; p -= grid_w) {
    const GroundTruthTrace trace = rack_trace(p);
    const PsuStream stream = psu_stream(trace, meter);
    const MinuteAggregation agg =
        aggregate_minutes({stream}, meter.log_interval_s);
    if (agg.minutes.empty())
      throw ConfigError("tdp uplift: trace shorter than one minute");
    double worst = 0.0;
    for (const auto& m : agg.minutes) worst = std::max(worst, m.p70);
    if (worst <= rack_budget_w) return {p, worst};
  }
  throw InfeasibleError("tdp uplift: no limit in range fits the rack budget");
}

}  // namespace wattops
