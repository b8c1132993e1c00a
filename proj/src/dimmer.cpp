#include "wattops/dimmer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wattops/errors.hpp"

namespace wattops {

void validate(const DimmerConfig& config) {
  if (!(config.limit_w > 0.0)) throw ConfigError("dimmer: limit must be positive");
  if (!(config.min_tdp <= config.safe_tdp && config.safe_tdp <= config.base_tdp))
    throw ConfigError("dimmer: need min_tdp <= safe_tdp <= base_tdp");
  if (config.cap_expiration_s <= config.decision_interval_s)
    throw ConfigError("dimmer: cap expiration must exceed the decision interval");
  if (config.decision_interval_s < 1 || config.avg_window < 1)
    throw ConfigError("dimmer: intervals must be at least 1 s");
  if (!(config.quantum_w > 0.0))
    throw ConfigError("dimmer: quantum must be positive");
  if (config.server_min_pwr_capped < 0.0)
    throw ConfigError("dimmer: negative floor power estimate");
  if (config.heartbeat_timeout_s <= 0)
    throw ConfigError("dimmer: heartbeat timeout must be positive");
}

double moving_average_update(DimmerState& state, double reading,
                             int avg_window) {
  if (avg_window < 1) throw ConfigError("dimmer: window must be at least 1");
  state.window.push_back(reading);
  while (int(state.window.size()) > avg_window) state.window.pop_front();
  double sum = 0.0;
  for (double v : state.window) sum += v;
  return sum / double(state.window.size());
}

namespace {

double quantize_down(double value, double quantum) {
  return std::floor(value / quantum + 1e-9) * quantum;
}

double window_mean(const DimmerState& state, int avg_window) {
  double sum = 0.0;
  int n = 0;
  for (auto it = state.window.rbegin();
       it != state.window.rend() && n < avg_window; ++it, ++n)
    sum += *it;
  return n > 0 ? sum / double(n) : 0.0;
}

}  // namespace

std::vector<CapCommand> dimmer_step(const DimmerConfig& config,
                                    DimmerState& state,
                                    std::vector<PriorityGroup> groups,
                                    double now) {
  validate(config);
  std::vector<CapCommand> cmds;
  if (state.window.empty()) return cmds;  // no telemetry, no decision
  const double avg = window_mean(state, config.avg_window);

  if (avg <= config.limit_w) {
    if (!state.active_caps.empty() &&
        now > state.cap_time + config.cap_expiration_s) {
      for (const auto& [server, tdp] : state.active_caps) {
        (void)tdp;
        cmds.push_back({server, config.base_tdp, now});
      }
      state.active_caps.clear();
      state.cap_time = std::numeric_limits<double>::infinity();
      state.insufficient_reclaim = false;
    }
    return cmds;
  }

  // Over the limit: reclaim the excess from the lowest priority up.
  state.cap_time = now;
  double reclaim = avg - config.limit_w;
  // Caps live on the quantum grid anchored at min_tdp, so the top of the
  // clamp range is the highest grid point not above base.
  const double top_tdp =
      config.min_tdp +
      quantize_down(config.base_tdp - config.min_tdp, config.quantum_w);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const PriorityGroup& a, const PriorityGroup& b) {
                     return a.priority < b.priority;
                   });

  auto issue = [&](const ServerLoad& s, double tdp) {
    cmds.push_back({s.server_id, tdp, now});
    state.active_caps[s.server_id] = tdp;
  };

  for (const auto& group : groups) {
    if (reclaim <= 0.0) break;
    if (group.servers.empty()) continue;
    double group_power = 0.0;
    for (const auto& s : group.servers) group_power += s.avg_power;
    const double per_server =
        std::max((group_power - reclaim) / double(group.servers.size()), 0.0);

    if (config.literal_form) {
      // Replay of the deployed controller's arithmetic: the per-server
      // target is divided across accelerators without removing the host
      // floor, and the reclaim credit is taken once per group.
      double last_tdp = config.min_tdp;
      long group_gpus = 0;
      for (const auto& s : group.servers) {
        if (s.accelerator_count <= 0)
          throw ConfigError("dimmer: accelerator count must be positive");
        const double ratio = per_server / double(s.accelerator_count);
        double tdp = quantize_down(ratio, config.quantum_w) + config.min_tdp;
        tdp = std::clamp(tdp, config.min_tdp, top_tdp);
        issue(s, tdp);
        last_tdp = tdp;
        group_gpus += s.accelerator_count;
      }
      const double reduction = double(group_gpus) * (last_tdp - config.min_tdp);
      const double estimate =
          double(group.servers.size()) * config.server_min_pwr_capped + reduction;
      reclaim -= std::max(0.0, group_power - estimate);
    } else {
      for (const auto& s : group.servers) {
        if (s.accelerator_count <= 0)
          throw ConfigError("dimmer: accelerator count must be positive");
        const double above_floor =
            std::max(per_server - config.server_min_pwr_capped, 0.0) /
            double(s.accelerator_count);
        double tdp =
            config.min_tdp + quantize_down(above_floor, config.quantum_w);
        tdp = std::clamp(tdp, config.min_tdp, top_tdp);
        issue(s, tdp);
        const double estimate = config.server_min_pwr_capped +
                                double(s.accelerator_count) *
                                    (tdp - config.min_tdp);
        reclaim -= std::max(0.0, s.avg_power - estimate);
      }
    }
  }

  if (reclaim > 0.0) {
    // Even the floor cannot cover the excess; pin everything and flag it.
    state.insufficient_reclaim = true;
    for (const auto& group : groups)
      for (const auto& s : group.servers) issue(s, config.min_tdp);
  }
  return cmds;
}

bool heartbeat_expired(const DimmerConfig& config, double last_heartbeat,
                       double now) {
  return now - last_heartbeat > double(config.heartbeat_timeout_s);
}

}  // namespace wattops
