#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace wattops {

struct DimmerConfig {
  double limit_w = 0.0;            // device limit after the safety fraction
  int decision_interval_s = 7;
  int avg_window = 7;              // readings in the moving average
  int cap_expiration_s = 420;
  double min_tdp = 900.0;
  double base_tdp = 1020.0;
  double safe_tdp = 960.0;         // fail-safe limit on heartbeat loss
  double server_min_pwr_capped = 2260.0;  // est. host power at min_tdp
  int heartbeat_timeout_s = 30;
  double quantum_w = 10.0;
  bool literal_form = false;  // pre-correction arithmetic, kept for replay
};

// Throws ConfigError unless min_tdp <= safe_tdp <= base_tdp and
// cap_expiration > decision_interval.
void validate(const DimmerConfig& config);

struct ServerLoad {
  std::string server_id;
  int accelerator_count = 2;
  double avg_power = 0.0;  // watts, host average over the window
};

// Lower priority is capped first; larger jobs get larger priority values.
struct PriorityGroup {
  int priority = 0;
  std::vector<ServerLoad> servers;
};

struct CapCommand {
  std::string server_id;
  double tdp = 0.0;
  double issued_at = 0.0;
};

struct DimmerState {
  std::deque<double> window;  // most recent 1 s readings, newest last
  std::map<std::string, double> active_caps;  // server -> tdp
  double cap_time = std::numeric_limits<double>::infinity();
  bool insufficient_reclaim = false;  // latched until the next uncap
};

// Pushes a 1 s reading and returns the mean of up to the last avg_window
// readings (partial windows allowed).
double moving_average_update(DimmerState& state, double reading,
                             int avg_window = 7);

// One decision-interval evaluation at `now`, using the current moving
// average. Over the limit: walks groups from lowest priority, assigns each
// group an even per-server power target, converts it to a quantized TDP cap
// and stops once the estimated reclaim covers the excess; when even the
// floor cannot cover it, every remaining server is capped at min_tdp and
// insufficient_reclaim latches. Under the limit: active caps past the
// expiration are lifted back to base_tdp.
std::vector<CapCommand> dimmer_step(const DimmerConfig& config,
                                    DimmerState& state,
                                    std::vector<PriorityGroup> groups,
                                    double now);

// Host-side fail-safe: true when the controller has been silent past the
// timeout, in which case the host self-caps to safe_tdp.
bool heartbeat_expired(const DimmerConfig& config, double last_heartbeat,
                       double now);

}  // namespace wattops
