#include "wattops/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <set>

#include "wattops/errors.hpp"
#include "util.hpp"

namespace wattops {

TripCurve TripCurve::rpp_default() {
  TripCurve c;
  c.points = {{1.1, 1020.0}, {1.4, 60.0}};
  return c;
}

TripCurve TripCurve::msb_default() {
  TripCurve c;
  c.points = {{1.15, 60.0}, {1.2, 45.0}, {2.0, 30.0}};
  return c;
}

double allowed_duration(const TripCurve& curve, double overdraw) {
  const auto& pts = curve.points;
  if (pts.empty()) throw ConfigError("trip curve: no points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].overdraw > 1.0) || !(pts[i].max_duration_s > 0.0))
      throw ConfigError("trip curve: points need overdraw > 1 and positive duration");
    if (i > 0 && (pts[i].overdraw <= pts[i - 1].overdraw ||
                  pts[i].max_duration_s >= pts[i - 1].max_duration_s))
      throw ConfigError("trip curve: points must rise in overdraw and fall in duration");
  }
  if (overdraw < pts.front().overdraw)
    return std::numeric_limits<double>::infinity();
  if (overdraw >= pts.back().overdraw) return pts.back().max_duration_s;
  std::size_t i = 1;
  while (pts[i].overdraw <= overdraw) ++i;
  // Straight line in log-log space between neighbours.
  const double t = (std::log(overdraw) - std::log(pts[i - 1].overdraw)) /
                   (std::log(pts[i].overdraw) - std::log(pts[i - 1].overdraw));
  return std::exp(std::log(pts[i - 1].max_duration_s) +
                  t * (std::log(pts[i].max_duration_s) -
                       std::log(pts[i - 1].max_duration_s)));
}

void breaker_update(TripCurve& curve, double overdraw, double dt_s) {
  if (curve.tripped) return;
  const double allowed = allowed_duration(curve, overdraw);
  if (std::isfinite(allowed)) {
    curve.accumulator += dt_s / allowed;
    if (curve.accumulator >= 1.0) curve.tripped = true;
  } else {
    // Thermal memory bleeds off roughly as slowly as it builds at the knee.
    curve.accumulator = std::max(
        0.0, curve.accumulator - dt_s / curve.points.front().max_duration_s);
  }
}

double straggler_factor(const CurveSet& curves, double min_tdp,
                        double reference_tdp) {
  const double ref = f_eval(curves, reference_tdp);
  if (!(ref > 0.0)) throw ConfigError("straggler: reference throughput is zero");
  return f_eval(curves, min_tdp) / ref;
}

std::vector<double> apply_smoother(const std::vector<double>& per_gpu_power,
                                   const SmootherConfig& config, double tdp) {
  if (config.enabled && config.floor_w > tdp)
    throw ConfigError("smoother: floor above the power limit");
  std::vector<double> out = per_gpu_power;
  if (!config.enabled) return out;
  for (double& v : out) v = std::max(v, config.floor_w);
  return out;
}

GroundTruthTrace gen_rack_trace(const RackTraceParams& params, double tdp) {
  if (params.hosts <= 0 || params.gpus_per_host <= 0)
    throw ConfigError("rack trace: need hosts and gpus");
  if (!(params.dt_s > 0.0) || !(params.duration_s > 0.0))
    throw ConfigError("rack trace: nonpositive timing");
  const double period = params.compute_s + params.comm_s;
  if (!(period > 0.0)) throw ConfigError("rack trace: empty duty cycle");

  auto common_rng = detail::seeded_engine(params.seed, "rack_trace_common");
  auto host_rng = detail::seeded_engine(params.seed, "rack_trace_host");
  std::normal_distribution<double> common(0.0, params.common_jitter_sd);
  std::normal_distribution<double> host(0.0, params.host_jitter_sd);

  const auto ticks_per_s = std::size_t(std::llround(1.0 / params.dt_s));
  const auto seconds = std::size_t(std::llround(params.duration_s));

  GroundTruthTrace trace;
  trace.dt_s = params.dt_s;
  trace.samples.reserve(seconds * ticks_per_s);
  for (std::size_t s = 0; s < seconds; ++s) {
    const double pos = std::fmod(double(s), period);
    const double fraction =
        pos < params.compute_s ? params.compute_fraction : params.comm_fraction;
    double per_gpu = fraction * tdp;
    if (params.smoother_floor_w > 0.0)
      per_gpu = std::max(per_gpu, params.smoother_floor_w);
    const double jc = common(common_rng);
    double rack = 0.0;
    for (int h = 0; h < params.hosts; ++h) {
      const double jh = host(host_rng);
      const double power = params.gpus_per_host * per_gpu * (1.0 + jc) * (1.0 + jh) +
                           params.host_overhead_w;
      rack += std::max(power, 0.0);
    }
    trace.samples.insert(trace.samples.end(), ticks_per_s, rack);
  }
  return trace;
}

namespace {

constexpr const char* kFailSafe = "__failsafe";

struct HostRt {
  std::string id;
  std::size_t job = 0;
  std::string rpp;
  int gpus = 2;
  double base = 0.0;  // base_tdp, or boost_tdp where granted
  std::map<std::string, double> caps;  // issuing device -> tdp
  bool alive = true;
  std::deque<double> window;
  double window_sum = 0.0;
  double power = 0.0;

  double effective() const {
    double c = base;
    for (const auto& [dev, tdp] : caps) c = std::min(c, tdp);
    return c;
  }
};

struct DeviceRt {
  std::string id;
  bool is_msb = false;
  double capacity = 0.0;
  double base_limit = 0.0;
  double limit = 0.0;
  DimmerState state;
  TripCurve breaker;
  std::vector<std::size_t> hosts;
  double fixed_load = 0.0;  // non-gpu racks (rpps only)
  double load = 0.0;
  std::mt19937_64 latency_rng;
  double last_delivery = -1.0;
  std::deque<std::pair<double, double>> in_flight;  // (deliver_at, reading)
};

struct PendingCap {
  double deliver_at = 0.0;
  std::size_t device = 0;
  std::string server;
  double tdp = 0.0;
};

const PhaseSegment* segment_at(const JobSpec& job, double t) {
  double period = 0.0;
  for (const auto& s : job.phase_profile) period += s.duration_s;
  if (!(period > 0.0)) throw ConfigError("job " + job.job_id + ": empty phase profile");
  double pos = std::fmod(t - job.start_s + job.phase_offset_s, period);
  if (pos < 0.0) pos += period;
  for (const auto& s : job.phase_profile) {
    if (pos < s.duration_s) return &s;
    pos -= s.duration_s;
  }
  return &job.phase_profile.back();
}

bool job_active(const JobSpec& job, double t) {
  if (t < job.start_s) return false;
  if (job.end_s >= 0.0 && t >= job.end_s) return false;
  return true;
}

}  // namespace

SimReport run_simulation(const SimScenario& scenario) {
  for (const auto& issue : validate_tree(scenario.tree))
    if (issue.structural)
      throw ConfigError("power tree: " + issue.subject + ": " + issue.message);
  if (!(scenario.horizon_s >= 0.0))
    throw ConfigError("simulation: negative horizon");

  // Topology maps.
  std::map<std::string, const PowerNode*> nodes;
  std::map<std::string, std::string> parent;
  for (const auto& n : scenario.tree.nodes) nodes.emplace(n.id, &n);
  for (const auto& n : scenario.tree.nodes)
    for (const auto& cid : n.children) parent[cid] = n.id;

  auto msb_of = [&](const std::string& rpp) -> const std::string& {
    const std::string* cur = &rpp;
    while (true) {
      auto it = parent.find(*cur);
      if (it == parent.end()) return *cur;
      cur = &it->second;
    }
  };

  // Devices: every RPP and MSB runs its own controller and breaker.
  std::vector<DeviceRt> devices;
  std::map<std::string, std::size_t> device_index;
  for (const auto& n : scenario.tree.nodes) {
    if (n.level == Level::SB) continue;
    DeviceRt d;
    d.id = n.id;
    d.is_msb = n.level == Level::MSB;
    d.capacity = n.capacity_w;
    d.base_limit = scenario.dimmer_limit_fraction * n.capacity_w;
    d.limit = d.base_limit;
    d.breaker = d.is_msb ? TripCurve::msb_default() : TripCurve::rpp_default();
    d.latency_rng = detail::seeded_engine(scenario.seed, "latency:" + n.id);
    device_index.emplace(n.id, devices.size());
    devices.push_back(std::move(d));
  }
  for (const auto& r : scenario.tree.racks)
    if (r.type != RackType::gpu_compute) {
      auto it = device_index.find(r.rpp_id);
      if (it != device_index.end())
        devices[it->second].fixed_load += r.provisioned_power_w;
    }

  // SB breakers ride along for trip detection only.
  struct SbRt {
    std::string id;
    double capacity;
    TripCurve breaker;
    std::vector<std::string> children;
    double load = 0.0;
  };
  std::vector<SbRt> sbs;
  for (const auto& n : scenario.tree.nodes)
    if (n.level == Level::SB)
      sbs.push_back({n.id, n.capacity_w, TripCurve::msb_default(), n.children, 0.0});

  // Hosts.
  std::vector<HostRt> hosts;
  std::map<std::string, std::size_t> host_index;
  std::vector<std::mt19937_64> job_rng;
  for (std::size_t j = 0; j < scenario.jobs.size(); ++j) {
    const auto& job = scenario.jobs[j];
    job_rng.push_back(detail::seeded_engine(scenario.seed, "job:" + job.job_id));
    for (const auto& jh : job.hosts) {
      if (!nodes.count(jh.rpp_id) || nodes.at(jh.rpp_id)->level != Level::RPP)
        throw ConfigError("job " + job.job_id + ": host " + jh.server_id +
                          " names no feeder panel " + jh.rpp_id);
      if (host_index.count(jh.server_id))
        throw ConfigError("duplicate server id " + jh.server_id);
      HostRt h;
      h.id = jh.server_id;
      h.job = j;
      h.rpp = jh.rpp_id;
      h.gpus = job.gpus_per_host;
      h.base = scenario.base_tdp;
      host_index.emplace(h.id, hosts.size());
      devices[device_index.at(jh.rpp_id)].hosts.push_back(hosts.size());
      hosts.push_back(std::move(h));
    }
  }
  std::vector<std::mt19937_64> host_rng;
  host_rng.reserve(hosts.size());
  for (const auto& h : hosts)
    host_rng.push_back(detail::seeded_engine(scenario.seed, "host:" + h.id));

  // Opportunistic boost: grant the higher limit panel by panel when even
  // the heaviest phase fits inside the margin.
  if (scenario.boost.enabled) {
    for (auto& d : devices) {
      if (d.is_msb || d.hosts.empty()) continue;
      double est = d.fixed_load;
      for (std::size_t hi : d.hosts) {
        const auto& job = scenario.jobs[hosts[hi].job];
        double peak_fraction = 0.0;
        for (const auto& s : job.phase_profile)
          peak_fraction = std::max(peak_fraction, s.per_gpu_fraction);
        est += hosts[hi].gpus * scenario.boost.boost_tdp * peak_fraction +
               scenario.host_overhead_w;
      }
      if (est <= scenario.boost.margin * d.limit)
        for (std::size_t hi : d.hosts) hosts[hi].base = scenario.boost.boost_tdp;
    }
  }

  const double f_base = f_eval(scenario.curves, scenario.base_tdp);
  const double smoother_mult =
      scenario.smoother.enabled ? 1.0 - scenario.smoother.overhead : 1.0;

  std::lognormal_distribution<double> delay_dist(
      std::log(scenario.latency.median_s), scenario.latency.sigma);

  DimmerConfig dimmer_cfg = scenario.dimmer;
  dimmer_cfg.base_tdp = scenario.base_tdp;

  const auto ticks = std::size_t(std::llround(scenario.horizon_s));
  SimReport report;
  report.seed = scenario.seed;
  report.throughput_timeline.reserve(ticks);
  report.total_power_timeline.reserve(ticks);
  report.stranded_power_timeline.reserve(ticks);

  struct JobAcc {
    double power = 0.0, factor = 0.0, capped_power = 0.0, uncapped_power = 0.0;
    long host_ticks = 0, factor_ticks = 0, capped_host_ticks = 0,
         uncapped_host_ticks = 0;
    double capped_seconds = 0.0;
  };
  std::vector<JobAcc> acc(scenario.jobs.size());

  std::vector<PendingCap> pending;
  bool failsafe_applied = false;

  for (std::size_t t = 0; t < ticks; ++t) {
    const double now = double(t);

    // Scheduled limit changes (shared-feeder reallocations).
    for (const auto& ev : scenario.limit_events)
      if (ev.at_s <= now) {
        auto it = device_index.find(ev.device_id);
        if (it == device_index.end())
          throw ConfigError("limit event names unknown device " + ev.device_id);
        devices[it->second].limit = devices[it->second].base_limit * ev.factor;
      }

    // Cap delivery, one tick after issue.
    {
      std::vector<PendingCap> keep;
      for (auto& pc : pending) {
        if (pc.deliver_at > now) {
          keep.push_back(pc);
          continue;
        }
        auto it = host_index.find(pc.server);
        if (it == host_index.end()) continue;
        HostRt& h = hosts[it->second];
        const std::string& dev = devices[pc.device].id;
        if (pc.tdp >= dimmer_cfg.base_tdp)
          h.caps.erase(dev);
        else
          h.caps[dev] = pc.tdp;
      }
      pending = std::move(keep);
    }

    // Controller heartbeat loss: hosts self-cap once the timeout passes.
    const bool controller_silent =
        scenario.heartbeat_loss_at_s >= 0.0 && now >= scenario.heartbeat_loss_at_s;
    if (controller_silent && !failsafe_applied &&
        heartbeat_expired(dimmer_cfg, scenario.heartbeat_loss_at_s, now)) {
      for (auto& h : hosts) h.caps[kFailSafe] = dimmer_cfg.safe_tdp;
      failsafe_applied = true;
    }

    // Job pace follows the slowest host.
    std::vector<double> job_eff(scenario.jobs.size(), 0.0);
    std::vector<bool> active(scenario.jobs.size(), false);
    for (std::size_t j = 0; j < scenario.jobs.size(); ++j) {
      const auto& job = scenario.jobs[j];
      if (!job_active(job, now)) continue;
      active[j] = true;
      double eff = std::numeric_limits<double>::infinity();
      bool alive = true;
      for (const auto& jh : job.hosts) {
        const HostRt& h = hosts[host_index.at(jh.server_id)];
        alive = alive && h.alive;
        eff = std::min(eff, h.effective());
      }
      job_eff[j] = alive ? eff : 0.0;
    }

    // Host powers.
    std::vector<double> jc(scenario.jobs.size(), 0.0);
    for (std::size_t j = 0; j < scenario.jobs.size(); ++j)
      if (active[j]) {
        std::normal_distribution<double> d(0.0, scenario.compute_jitter_sd);
        jc[j] = d(job_rng[j]);
      }
    for (std::size_t hi = 0; hi < hosts.size(); ++hi) {
      HostRt& h = hosts[hi];
      const auto& job = scenario.jobs[h.job];
      double power = 0.0;
      if (!h.alive) {
        power = 0.0;
      } else if (!active[h.job] || job_eff[h.job] <= 0.0) {
        power = scenario.host_overhead_w;
      } else {
        const PhaseSegment* seg = segment_at(job, now);
        const double cap = h.effective();
        double per_gpu = seg->per_gpu_fraction * cap;
        if (seg->phase == "compute") {
          // Stalled hosts idle at the barrier; draw tracks the job's pace.
          per_gpu *= f_eval(scenario.curves, job_eff[h.job]) /
                     f_eval(scenario.curves, cap);
        }
        std::normal_distribution<double> d(0.0, scenario.host_jitter_sd);
        per_gpu *= (1.0 + jc[h.job]) * (1.0 + d(host_rng[hi]));
        if (scenario.smoother.enabled)
          per_gpu = std::max(per_gpu, scenario.smoother.floor_w);
        power = std::max(h.gpus * per_gpu + scenario.host_overhead_w, 0.0);
      }
      h.power = power;
      h.window.push_back(power);
      h.window_sum += power;
      if (int(h.window.size()) > dimmer_cfg.avg_window) {
        h.window_sum -= h.window.front();
        h.window.pop_front();
      }
    }

    // Aggregate up the tree.
    std::map<std::string, double> node_load;
    for (auto& d : devices) {
      if (d.is_msb) continue;
      d.load = d.fixed_load;
      for (std::size_t hi : d.hosts) d.load += hosts[hi].power;
      node_load[d.id] = d.load;
    }
    for (auto& sb : sbs) {
      sb.load = 0.0;
      for (const auto& cid : sb.children) sb.load += node_load[cid];
      node_load[sb.id] = sb.load;
    }
    double total_power = 0.0, stranded = 0.0;
    for (auto& d : devices) {
      if (!d.is_msb) continue;
      double it_load = 0.0;
      for (const auto& cid : nodes.at(d.id)->children) it_load += node_load[cid];
      const auto& profile = nodes.at(d.id)->mechanical_profile;
      double mech = 0.0;
      if (!profile.empty())
        mech = profile[(t / 3600) % profile.size()];
      d.load = it_load + mech;
      total_power += d.load;
      stranded += std::max(0.0, scenario.msb_it_budget_w - it_load);
    }

    // Telemetry: log-normal latency, in-order delivery per meter.
    for (auto& d : devices) {
      double delay = delay_dist(d.latency_rng);
      delay = std::min(std::max(delay, 0.0), scenario.latency.max_s);
      const double deliver_at = std::max(now + delay, d.last_delivery + 1e-3);
      d.last_delivery = deliver_at;
      d.in_flight.emplace_back(deliver_at, d.load);
      while (!d.in_flight.empty() && d.in_flight.front().first <= now) {
        moving_average_update(d.state, d.in_flight.front().second,
                              dimmer_cfg.avg_window);
        d.in_flight.pop_front();
      }
    }

    // Controller decisions on the cadence.
    if (scenario.dimmer_enabled && !controller_silent && t > 0 &&
        t % std::size_t(dimmer_cfg.decision_interval_s) == 0) {
      for (std::size_t di = 0; di < devices.size(); ++di) {
        DeviceRt& d = devices[di];
        if (d.hosts.empty() && !d.is_msb) continue;
        std::map<int, PriorityGroup> groups;
        auto add_host = [&](std::size_t hi) {
          const HostRt& h = hosts[hi];
          if (!h.alive || !active[h.job]) return;
          const int prio = scenario.jobs[h.job].priority;
          auto& g = groups[prio];
          g.priority = prio;
          g.servers.push_back(
              {h.id, h.gpus, h.window_sum / double(h.window.size())});
        };
        if (d.is_msb) {
          for (const auto& other : devices)
            if (!other.is_msb && msb_of(other.id) == d.id)
              for (std::size_t hi : other.hosts) add_host(hi);
        } else {
          for (std::size_t hi : d.hosts) add_host(hi);
        }
        if (groups.empty()) continue;
        DimmerConfig cfg = dimmer_cfg;
        cfg.limit_w = d.limit;
        std::vector<PriorityGroup> gv;
        for (auto& [prio, g] : groups) gv.push_back(std::move(g));
        for (const auto& cmd : dimmer_step(cfg, d.state, gv, now)) {
          pending.push_back({now + 1.0, di, cmd.server_id, cmd.tdp});
          report.capping_events.push_back({now, d.id, cmd.server_id, cmd.tdp});
        }
      }
    }

    // Breakers.
    auto update_breaker = [&](TripCurve& curve, const std::string& id,
                              double load, double capacity) {
      if (curve.tripped) return;
      const double r = load / capacity;
      breaker_update(curve, r, 1.0);
      if (curve.tripped) {
        report.trips.push_back({now, id, r});
        for (auto& h : hosts) {
          const std::string* cur = &h.rpp;
          while (true) {
            if (*cur == id) { h.alive = false; break; }
            auto it = parent.find(*cur);
            if (it == parent.end()) break;
            cur = &it->second;
          }
        }
      }
    };
    for (auto& d : devices)
      if (!d.is_msb) update_breaker(d.breaker, d.id, d.load, d.capacity);
    for (auto& sb : sbs) update_breaker(sb.breaker, sb.id, sb.load, sb.capacity);
    for (auto& d : devices)
      if (d.is_msb) update_breaker(d.breaker, d.id, d.load, d.capacity);

    // Metrics.
    double num = 0.0;
    long den = 0;
    for (std::size_t j = 0; j < scenario.jobs.size(); ++j) {
      if (!active[j]) continue;
      const auto& job = scenario.jobs[j];
      const long gpus = long(job.hosts.size()) * job.gpus_per_host;
      den += gpus;
      if (job_eff[j] <= 0.0) continue;
      const double factor =
          f_eval(scenario.curves, job_eff[j]) / f_base * smoother_mult;
      num += double(gpus) * factor;
      acc[j].factor += factor;
      acc[j].factor_ticks += 1;
      bool capped = false;
      double job_power = 0.0;
      for (const auto& jh : job.hosts) {
        const HostRt& h = hosts[host_index.at(jh.server_id)];
        job_power += h.power;
        capped = capped || h.effective() < h.base;
      }
      acc[j].power += job_power;
      acc[j].host_ticks += long(job.hosts.size());
      if (capped) {
        acc[j].capped_seconds += 1.0;
        acc[j].capped_power += job_power;
        acc[j].capped_host_ticks += long(job.hosts.size());
      } else {
        acc[j].uncapped_power += job_power;
        acc[j].uncapped_host_ticks += long(job.hosts.size());
      }
    }
    report.throughput_timeline.push_back(den > 0 ? num / double(den) : 0.0);
    report.total_power_timeline.push_back(total_power);
    report.stranded_power_timeline.push_back(stranded);
  }

  for (std::size_t j = 0; j < scenario.jobs.size(); ++j) {
    PhaseSummary s;
    s.job_id = scenario.jobs[j].job_id;
    if (acc[j].host_ticks > 0)
      s.mean_host_power_w = acc[j].power / double(acc[j].host_ticks);
    if (acc[j].factor_ticks > 0)
      s.mean_throughput_factor = acc[j].factor / double(acc[j].factor_ticks);
    s.capped_seconds = acc[j].capped_seconds;
    if (acc[j].capped_host_ticks > 0)
      s.mean_host_power_capped_w =
          acc[j].capped_power / double(acc[j].capped_host_ticks);
    if (acc[j].uncapped_host_ticks > 0)
      s.mean_host_power_uncapped_w =
          acc[j].uncapped_power / double(acc[j].uncapped_host_ticks);
    report.per_job.push_back(std::move(s));
  }

  double sum = 0.0;
  for (double v : report.throughput_timeline) sum += v;
  report.mean_throughput_factor =
      report.throughput_timeline.empty()
          ? 0.0
          : sum / double(report.throughput_timeline.size());
  report.peak_power_w = 0.0;
  for (double v : report.total_power_timeline)
    report.peak_power_w = std::max(report.peak_power_w, v);
  return report;
}

}  // namespace wattops
