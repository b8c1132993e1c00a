#include "wattops/rack_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wattops/errors.hpp"

namespace wattops {

namespace {

double component_power(const ComponentSpec& c, double p, bool is_gpu,
                       bool derated) {
  const double unit = is_gpu ? p : c.unit_power;
  return unit * c.count * (derated ? c.derate : 1.0);
}

double sum_components(const RackModel& model, double p, bool derated) {
  double total = 0.0;
  for (const auto& c : model.components)
    total += component_power(c, p, c.name == model.gpu_component, derated);
  return total;
}

double rule_base(const RackModel& model, const LossRule& rule, double p,
                 bool derated) {
  double total = 0.0;
  for (const auto& name : rule.base_components) {
    auto it = std::find_if(model.components.begin(), model.components.end(),
                           [&](const ComponentSpec& c) { return c.name == name; });
    if (it == model.components.end())
      throw ConfigError("loss rule references unknown component: " + name);
    total += component_power(*it, p, it->name == model.gpu_component, derated);
  }
  return total;
}

// VR and fan overheads evaluated in the caller's derating mode.
double overhead_power(const RackModel& model, double p, bool derated) {
  const double vr = model.losses.vr_loss.fraction *
                    rule_base(model, model.losses.vr_loss, p, derated);
  double fan_base = rule_base(model, model.losses.fan_loss, p, derated);
  if (model.losses.fan_base_includes_vr) fan_base += vr;
  return vr + model.losses.fan_loss.fraction * fan_base;
}

double conversion_divisor(const LossChain& losses, bool include_upstream) {
  double d = 1.0 - losses.psu_loss;
  if (include_upstream) d *= 1.0 - losses.ac_dc_loss;
  return d;
}

}  // namespace

RackModel RackModel::gb200_nvl72() {
  RackModel m;
  m.components = {
      {"gpu_hbm", 960.0, 36, 1.00, Scope::server_level, false},
      {"cpu_dimm", 100.0, 36, 1.00, Scope::server_level, false},
      {"backend_nic", 66.0, 36, 0.90, Scope::server_level, false},
      {"frontend_nic", 18.0, 36, 0.80, Scope::server_level, true},
      {"ssd", 15.0, 36, 0.60, Scope::server_level, true},
      {"misc", 50.0, 18, 0.50, Scope::server_level, true},
      {"nvswitch", 580.0, 18, 0.90, Scope::server_level, false},
      {"osfp", 4.0, 162, 0.90, Scope::server_level, false},
      {"fabric_mgmt", 100.0, 9, 0.50, Scope::server_level, true},
      {"fe_switch_optics", 350.0, 2, 1.00, Scope::rack_level, true},
      {"mgmt_logic", 100.0, 1, 1.00, Scope::rack_level, true},
  };
  m.losses.vr_loss = {0.15,
                      {"backend_nic", "frontend_nic", "ssd", "misc", "nvswitch",
                       "osfp", "fabric_mgmt"}};
  m.losses.fan_loss = {0.07, {"frontend_nic", "ssd", "misc", "fabric_mgmt"}};
  m.losses.fan_base_includes_vr = true;
  m.losses.psu_loss = 0.04;
  m.losses.ac_dc_loss = 0.02;
  m.gpu_count_per_rack = 36;
  m.gpu_component = "gpu_hbm";
  m.global_derate = 0.90;
  m.aalc_fraction = 0.03;
  return m;
}

void validate(const RackModel& model) {
  if (model.components.empty()) throw ConfigError("rack model: no components");
  std::set<std::string> names;
  for (const auto& c : model.components) {
    if (c.name.empty()) throw ConfigError("rack model: unnamed component");
    if (!names.insert(c.name).second)
      throw ConfigError("rack model: duplicate component " + c.name);
    if (c.count <= 0)
      throw ConfigError("rack model: nonpositive count for " + c.name);
    if (c.unit_power < 0.0)
      throw ConfigError("rack model: negative unit power for " + c.name);
    if (!(c.derate > 0.0 && c.derate <= 1.0))
      throw ConfigError("rack model: derate outside (0, 1] for " + c.name);
  }
  auto gpu = names.find(model.gpu_component);
  if (gpu == names.end())
    throw ConfigError("rack model: gpu component " + model.gpu_component +
                      " not present");
  for (const auto& c : model.components)
    if (c.name == model.gpu_component && c.count != model.gpu_count_per_rack)
      throw ConfigError("rack model: gpu component count must equal gpus per rack");
  for (const LossRule* rule : {&model.losses.vr_loss, &model.losses.fan_loss}) {
    if (!(rule->fraction >= 0.0 && rule->fraction < 0.5))
      throw ConfigError("rack model: loss fraction outside [0, 0.5)");
    for (const auto& n : rule->base_components)
      if (!names.count(n))
        throw ConfigError("rack model: loss rule references unknown component " + n);
  }
  if (!(model.losses.psu_loss >= 0.0 && model.losses.psu_loss < 0.5) ||
      !(model.losses.ac_dc_loss >= 0.0 && model.losses.ac_dc_loss < 0.5))
    throw ConfigError("rack model: conversion loss outside [0, 0.5)");
  if (!(model.global_derate > 0.0 && model.global_derate <= 1.0))
    throw ConfigError("rack model: global derate outside (0, 1]");
  if (model.aalc_fraction < 0.0)
    throw ConfigError("rack model: negative sidecar cooling fraction");
}

double rack_dc_power(const RackModel& model, double p) {
  return sum_components(model, p, true);
}

double rack_ac_power(const RackModel& model, double p) {
  return rack_dc_power(model, p) / conversion_divisor(model.losses, true);
}

double provisioned_rack_power(const RackModel& model, double p) {
  return model.global_derate * rack_dc_power(model, p) /
         conversion_divisor(model.losses, false);
}

double max_ac_power(const RackModel& model, double p_max) {
  const double dc = sum_components(model, p_max, false) +
                    overhead_power(model, p_max, false);
  return dc / conversion_divisor(model.losses, true);
}

double aalc_power(const RackModel& model, double p) {
  return model.aalc_fraction * rack_dc_power(model, p);
}

double gpu_power_fraction(const RackModel& model, double p) {
  const double dc = rack_dc_power(model, p);
  if (!(dc > 0.0)) throw ConfigError("rack model: zero DC power");
  return p * model.gpu_count_per_rack / dc;
}

RackBreakdown rack_breakdown(const RackModel& model, double p) {
  validate(model);
  RackBreakdown out;
  for (const auto& c : model.components)
    out.rows.push_back(
        {c.name, component_power(c, p, c.name == model.gpu_component, true)});
  const double vr = model.losses.vr_loss.fraction *
                    rule_base(model, model.losses.vr_loss, p, true);
  double fan_base = rule_base(model, model.losses.fan_loss, p, true);
  if (model.losses.fan_base_includes_vr) fan_base += vr;
  out.vr_loss = vr;
  out.fan_loss = model.losses.fan_loss.fraction * fan_base;
  out.dc_total = rack_dc_power(model, p);
  out.psu_loss = out.dc_total / (1.0 - model.losses.psu_loss) - out.dc_total;
  out.ac_total = rack_ac_power(model, p);
  out.provisioned = provisioned_rack_power(model, p);
  out.max_ac = max_ac_power(model, p);
  out.aalc = aalc_power(model, p);
  return out;
}

NetworkPowerModel NetworkPowerModel::backend_defaults() {
  NetworkPowerModel net;
  net.switch_tiers = {
      {"rail", 1880.0, 3.0},
      {"fabric", 1880.0, 0.5},
      {"spine", 1990.0, 2.25},
  };
  return net;
}

double network_power_per_two_racks(const NetworkPowerModel& net) {
  double total = 0.0;
  for (const auto& t : net.switch_tiers) {
    if (t.rack_power < 0.0 || t.count_per_two_racks < 0.0)
      throw ConfigError("network model: negative tier value for " + t.label);
    total += t.rack_power * t.count_per_two_racks;
  }
  return total;
}

double network_power_per_gpu(const NetworkPowerModel& net, int gpus_per_rack) {
  if (gpus_per_rack <= 0)
    throw ConfigError("network model: gpus per rack must be positive");
  return network_power_per_two_racks(net) / (2.0 * gpus_per_rack);
}

double PerGpuCost::operator()(double p) const {
  return (p + fixed_per_gpu + network_per_gpu) / delta;
}

PerGpuCost g_of_p(const RackModel& model, const NetworkPowerModel& net) {
  validate(model);
  if (!(model.global_derate > 0.0))
    throw ConfigError("per-gpu cost: derate must be positive");
  PerGpuCost cost;
  cost.delta = model.global_derate;
  // The gpu row is affine in p, so charging it zero isolates the fixed load.
  cost.fixed_per_gpu = rack_dc_power(model, 0.0) / model.gpu_count_per_rack;
  cost.network_per_gpu = network_power_per_gpu(net, model.gpu_count_per_rack);
  return cost;
}

}  // namespace wattops
