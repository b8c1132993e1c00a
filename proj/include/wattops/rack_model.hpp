#pragma once

#include <string>
#include <vector>

namespace wattops {

enum class Scope { server_level, rack_level };

struct ComponentSpec {
  std::string name;
  double unit_power = 0.0;  // watts per unit
  int count = 0;            // units per rack
  double derate = 1.0;      // expected simultaneous utilization, (0, 1]
  Scope scope = Scope::server_level;
  bool air_cooled = false;  // liquid-cooled otherwise
};

// Overhead rows that are fractions of named component subsets rather than
// metered loads. The published per-rack breakdown's VR-loss and fan rows do
// not reconcile additively with its own derated totals under any single
// rule, so both are kept configurable: they are always reported, they are
// added to the un-derated worst-case (max AC) sum, and they are treated as
// embedded in the component ratings for the derated chain, which reproduces
// the published DC total exactly.
struct LossRule {
  double fraction = 0.0;
  std::vector<std::string> base_components;  // names the fraction applies to
};

struct LossChain {
  LossRule vr_loss;   // default: 15% of non-CPU/GPU server components
  LossRule fan_loss;  // default: 7% of air-cooled server components (+ VR)
  bool fan_base_includes_vr = true;
  double psu_loss = 0.04;    // rack PSU conversion, applied as dc/(1-loss)
  double ac_dc_loss = 0.02;  // upstream AC distribution/conversion
};

struct RackModel {
  std::vector<ComponentSpec> components;
  LossChain losses;
  int gpu_count_per_rack = 36;
  std::string gpu_component = "gpu_hbm";  // its unit_power tracks the limit p
  double global_derate = 0.90;            // simultaneous-peak derating factor
  double aalc_fraction = 0.03;            // sidecar cooling, share of DC power

  static RackModel gb200_nvl72();
};

// Validates ranges (derates in (0,1], losses in [0,0.5), gpu component
// present with count = gpu_count_per_rack). Throws ConfigError.
void validate(const RackModel& model);

// Derated DC load at GPU limit p: sum of unit_power*count*derate with the
// GPU component charged p per unit. Affine in p.
double rack_dc_power(const RackModel& model, double p);

// AC input including PSU and upstream conversion losses.
double rack_ac_power(const RackModel& model, double p);

// Planning budget: global derate applied at the rack AC input (PSU loss
// included, upstream conversion excluded).
double provisioned_rack_power(const RackModel& model, double p);

// Worst case: all derates at 1, GPU at p_max, VR and fan overhead added,
// full conversion chain.
double max_ac_power(const RackModel& model, double p_max);

// Sidecar cooling load paired with this rack.
double aalc_power(const RackModel& model, double p);

// Share of DC power drawn by the GPU component at limit p (diagnostic).
double gpu_power_fraction(const RackModel& model, double p);

struct BreakdownRow {
  std::string name;
  double power = 0.0;
};

struct RackBreakdown {
  std::vector<BreakdownRow> rows;  // component rows at the derated level
  double vr_loss = 0.0;
  double fan_loss = 0.0;
  double dc_total = 0.0;
  double psu_loss = 0.0;
  double ac_total = 0.0;
  double provisioned = 0.0;
  double max_ac = 0.0;
  double aalc = 0.0;
};
RackBreakdown rack_breakdown(const RackModel& model, double p);

struct SwitchTier {
  std::string label;
  double rack_power = 0.0;           // watts per switch rack
  double count_per_two_racks = 0.0;  // fabric units amortized per rack pair
};

struct NetworkPowerModel {
  std::vector<SwitchTier> switch_tiers;

  static NetworkPowerModel backend_defaults();
};

double network_power_per_two_racks(const NetworkPowerModel& net);  // watts
double network_power_per_gpu(const NetworkPowerModel& net, int gpus_per_rack);

// Per-GPU provisioning cost: (p + fixed/gpus + network) / delta, the affine
// cost that the efficiency ratio divides into.
struct PerGpuCost {
  double delta = 0.90;
  double fixed_per_gpu = 0.0;
  double network_per_gpu = 0.0;

  double operator()(double p) const;
};

// Builds the per-GPU cost from a rack model (fixed = non-GPU derated DC
// power per GPU) and a network model. Throws ConfigError if delta <= 0.
PerGpuCost g_of_p(const RackModel& model, const NetworkPowerModel& net);

}  // namespace wattops
