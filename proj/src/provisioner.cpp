#include "wattops/provisioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "wattops/errors.hpp"

namespace wattops {

namespace {

void check_inputs(const ProvisionInputs& inputs) {
  if (!(inputs.p_total_w > 0.0))
    throw ConfigError("provision: site budget must be positive");
  if (inputs.n_max <= 0) throw ConfigError("provision: n_max must be positive");
  if (!(inputs.p_min < inputs.p_max))
    throw ConfigError("provision: p_min must be below p_max");
  for (double f : {inputs.network_fraction, inputs.support_fraction,
                   inputs.aalc_fraction})
    if (!(f >= 0.0 && f < 1.0))
      throw ConfigError("provision: overhead fraction outside [0, 1)");
  if (inputs.oversubscription < 0.0)
    throw ConfigError("provision: negative oversubscription");
  if (inputs.turnup_reserve_w < 0.0)
    throw ConfigError("provision: negative turn-up reserve");
  if (inputs.gpus_per_rack <= 0)
    throw ConfigError("provision: gpus per rack must be positive");
}

}  // namespace

double rack_power_pool(const ProvisionInputs& inputs,
                       std::vector<LedgerRow>* ledger) {
  check_inputs(inputs);
  double remaining = inputs.p_total_w;
  auto push = [&](const char* item, double amount) {
    remaining += amount;
    if (ledger) ledger->push_back({item, amount, remaining});
  };
  push("oversubscription", inputs.oversubscription * inputs.p_total_w);
  push("turnup_reserve", -inputs.turnup_reserve_w);
  push("network", -inputs.network_fraction * remaining);
  // Support and sidecar cooling are both shares of the post-network pool.
  const double base = remaining;
  push("support", -inputs.support_fraction * base);
  push("aalc", -inputs.aalc_fraction * base);
  return remaining;
}

long n_of_p(const ProvisionInputs& inputs, double per_gpu_w) {
  if (!(per_gpu_w > 0.0))
    throw ConfigError("provision: per-gpu slot cost must be positive");
  const double pool = rack_power_pool(inputs);
  if (pool <= 0.0)
    throw InfeasibleError("provision: overheads consume the whole site budget");
  long n = long(pool / per_gpu_w);
  const long rack_cap = inputs.n_max / inputs.gpus_per_rack;
  long racks = std::min(n / inputs.gpus_per_rack, rack_cap);
  if (racks <= 0)
    throw InfeasibleError("provision: budget below one rack at this limit");
  return racks * inputs.gpus_per_rack;
}

double throughput_rel(const ProvisionInputs& inputs, const RackModel& model,
                      const CurveSet& curves, double p) {
  auto slot = [&](double q) {
    return provisioned_rack_power(model, q) / inputs.gpus_per_rack;
  };
  const double t_p = double(n_of_p(inputs, slot(p))) * f_eval(curves, p);
  const double t_max =
      double(n_of_p(inputs, slot(inputs.p_max))) * f_eval(curves, inputs.p_max);
  return t_p / t_max;
}

ProvisionResult solve_relaxed(const ProvisionInputs& inputs,
                              const RackModel& model,
                              const NetworkPowerModel& net,
                              const CurveSet& curves) {
  check_inputs(inputs);
  validate(model);

  CurveSet span = curves;
  span.p_min = inputs.p_min;
  span.p_max = inputs.p_max;
  const PerGpuCost cost = g_of_p(model, net);

  std::vector<double> grid;
  for (double p = inputs.p_min; p < inputs.p_max - 1e-9; p += 10.0)
    grid.push_back(p);
  grid.push_back(inputs.p_max);

  ProvisionResult result;
  double best_t = -1.0, best_eta = -1.0;
  bool any = false;
  for (double p : grid) {
    long n;
    try {
      n = n_of_p(inputs, provisioned_rack_power(model, p) / inputs.gpus_per_rack);
    } catch (const InfeasibleError&) {
      continue;
    }
    const double t = double(n) * f_eval(curves, p);
    const double eta = eta_eval(curves, cost, p);
    const bool better =
        t > best_t * (1.0 + 1e-12) ||
        (t >= best_t * (1.0 - 1e-12) && eta > best_eta + 1e-15);
    if (!any || better) {
      any = true;
      best_t = t;
      best_eta = eta;
      result.p_star = p;
      result.n_gpus = n;
    }
  }
  if (!any)
    throw InfeasibleError("provision: no feasible power limit on the grid");

  long n_pmax;
  try {
    n_pmax = n_of_p(inputs, provisioned_rack_power(model, inputs.p_max) /
                                inputs.gpus_per_rack);
  } catch (const InfeasibleError&) {
    throw InfeasibleError("provision: p_max itself is infeasible, no baseline");
  }
  const double t_pmax = double(n_pmax) * f_eval(curves, inputs.p_max);

  result.rack_count = result.n_gpus / inputs.gpus_per_rack;
  result.throughput_rel_pmax = best_t / t_pmax;
  result.per_gpu_perf = inputs.reference_perf_scale * f_eval(curves, result.p_star);
  result.aggregate_perf = double(result.n_gpus) * result.per_gpu_perf;
  rack_power_pool(inputs, &result.ledger);
  result.eta = maximize_eta(span, cost);
  result.n_max_binding =
      result.n_gpus ==
      (inputs.n_max / inputs.gpus_per_rack) * inputs.gpus_per_rack;
  return result;
}

namespace {

struct HierIndex {
  std::map<std::string, const PowerNode*> nodes;
  std::map<std::string, std::vector<std::string>> rack_ids_under;  // subtree
  std::map<std::string, double> fixed_load;  // non-gpu racks, per subtree
  std::map<std::string, double> cap;
  std::map<std::string, int> depth;  // MSB 0, SB 1, RPP 2
  std::vector<std::string> node_order;  // declaration order
  std::map<std::string, const RackAssignment*> gpu_racks;
};

void collect_subtree(const PowerTree& tree, const HierIndex& ix,
                     const PowerNode& node, std::vector<std::string>& rpps) {
  if (node.level == Level::RPP) {
    rpps.push_back(node.id);
    return;
  }
  for (const auto& cid : node.children)
    collect_subtree(tree, ix, *ix.nodes.at(cid), rpps);
}

HierIndex build_index(const PowerTree& tree, const HierInputs& hier) {
  for (const auto& issue : validate_tree(tree))
    if (issue.structural)
      throw ConfigError("power tree: " + issue.subject + ": " + issue.message);

  HierIndex ix;
  for (const auto& n : tree.nodes) {
    ix.nodes.emplace(n.id, &n);
    ix.node_order.push_back(n.id);
    ix.depth[n.id] = n.level == Level::MSB ? 0 : n.level == Level::SB ? 1 : 2;
  }

  std::map<std::string, std::vector<const RackAssignment*>> by_rpp;
  for (const auto& r : tree.racks) {
    by_rpp[r.rpp_id].push_back(&r);
    if (r.type == RackType::gpu_compute) ix.gpu_racks.emplace(r.rack_id, &r);
  }

  for (const auto& n : tree.nodes) {
    std::vector<std::string> rpps;
    collect_subtree(tree, ix, n, rpps);
    double fixed = 0.0;
    for (const auto& rpp : rpps) {
      auto it = by_rpp.find(rpp);
      if (it == by_rpp.end()) continue;
      for (const auto* r : it->second) {
        if (r->type == RackType::gpu_compute)
          ix.rack_ids_under[n.id].push_back(r->rack_id);
        else
          fixed += r->provisioned_power_w;
      }
    }
    ix.fixed_load[n.id] = fixed;
    double cap = n.capacity_w;
    if (n.level == Level::MSB) {
      double mech_peak = 0.0;
      for (double m : n.mechanical_profile) mech_peak = std::max(mech_peak, m);
      cap = std::min(hier.msb_it_budget_w, n.capacity_w - mech_peak);
    }
    ix.cap[n.id] = cap;
  }
  return ix;
}

}  // namespace

HierAssignment solve_hierarchical(const PowerTree& tree, const RackModel& model,
                                  const CurveSet& curves,
                                  const HierInputs& hier) {
  validate(model);
  if (!(hier.p_min < hier.p_max))
    throw ConfigError("hierarchical solve: p_min must be below p_max");
  if (!(hier.grid_w > 0.0))
    throw ConfigError("hierarchical solve: grid step must be positive");
  f_eval(curves, hier.p_min);  // both ends must sit inside the curve span
  f_eval(curves, hier.p_max);

  // Uniform reduction assumes diminishing returns: the perf curve's anchor
  // slopes must be non-increasing across the solve range.
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < curves.f_anchors.size(); ++i) {
    const auto& lo = curves.f_anchors[i - 1];
    const auto& hi = curves.f_anchors[i];
    if (hi.p <= hier.p_min || lo.p >= hier.p_max) continue;
    const double s = (hi.value - lo.value) / (hi.p - lo.p);
    if (s > prev_slope + 1e-12)
      throw ConfigError(
          "hierarchical solve: perf curve must be concave over the range");
    prev_slope = s;
  }

  HierIndex ix = build_index(tree, hier);
  const double fixed_dc = rack_dc_power(model, 0.0);
  const double psu = model.losses.psu_loss;

  std::map<std::string, double> p;       // gpu rack -> limit
  std::map<std::string, double> slope;   // dq/dp, watts per watt
  std::map<std::string, double> fixed_q; // per-rack provisioned fixed share
  for (const auto& [id, rack] : ix.gpu_racks) {
    p[id] = hier.p_max;
    slope[id] = model.global_derate * rack->gpu_count / (1.0 - psu);
    fixed_q[id] = model.global_derate * fixed_dc *
                  (double(rack->gpu_count) / model.gpu_count_per_rack) /
                  (1.0 - psu);
  }

  auto node_load = [&](const std::string& id) {
    double load = ix.fixed_load.at(id);
    auto it = ix.rack_ids_under.find(id);
    if (it != ix.rack_ids_under.end())
      for (const auto& rid : it->second)
        load += fixed_q.at(rid) + slope.at(rid) * p.at(rid);
    return load;
  };

  constexpr double kEps = 1e-6;
  auto violated_nodes = [&]() {
    std::vector<std::string> out;
    for (const auto& id : ix.node_order)
      if (node_load(id) > ix.cap.at(id) + kEps) out.push_back(id);
    return out;
  };
  auto deepest_first = [&](std::vector<std::string>& ids) {
    std::stable_sort(ids.begin(), ids.end(),
                     [&](const std::string& a, const std::string& b) {
                       return ix.depth.at(a) > ix.depth.at(b);
                     });
  };

  HierAssignment out;
  std::vector<std::string> reduced_nodes;  // dedup, in first-touch order
  while (out.iterations < hier.max_iterations) {
    auto violated = violated_nodes();
    if (violated.empty()) break;
    deepest_first(violated);
    const std::string& v = violated.front();

    std::vector<std::string> reducible;
    double slope_sum = 0.0;
    for (const auto& rid : ix.rack_ids_under[v])
      if (p[rid] > hier.p_min + kEps) {
        reducible.push_back(rid);
        slope_sum += slope[rid];
      }
    if (reducible.empty()) break;  // nothing left to shed under this node

    const double dp = (node_load(v) - ix.cap.at(v)) / slope_sum;
    for (const auto& rid : reducible)
      p[rid] = std::max(hier.p_min, p[rid] - dp);
    if (std::find(reduced_nodes.begin(), reduced_nodes.end(), v) ==
        reduced_nodes.end())
      reduced_nodes.push_back(v);
    ++out.iterations;
  }

  out.infeasible_nodes = violated_nodes();
  out.feasible = out.infeasible_nodes.empty();

  // Snap down to the grid (anchored at p_min), keeping the feasible side.
  for (auto& [id, limit] : p) {
    const double steps = std::floor((limit - hier.p_min) / hier.grid_w + 1e-9);
    limit = std::min(hier.p_min + steps * hier.grid_w, hier.p_max);
  }

  if (out.feasible) {
    // Recover quantization slack class by class: racks that the continuous
    // pass treated identically move together, so equal racks stay equal.
    std::map<std::pair<long, int>, std::vector<std::string>> classes;
    for (const auto& [id, limit] : p) {
      const long key = std::lround(limit * 1e6);
      classes[{key, ix.gpu_racks.at(id)->gpu_count}].push_back(id);
    }
    bool lifted = true;
    while (lifted) {
      lifted = false;
      for (auto& [key, ids] : classes) {
        bool can = true;
        for (const auto& id : ids)
          if (p[id] > hier.p_max - hier.grid_w + kEps) { can = false; break; }
        if (!can) continue;
        for (const auto& id : ids) p[id] += hier.grid_w;
        if (violated_nodes().empty()) {
          lifted = true;
        } else {
          for (const auto& id : ids) p[id] -= hier.grid_w;
        }
      }
    }
  }

  for (const auto& id : ix.node_order) {
    const auto& under = ix.rack_ids_under[id];
    if (under.empty()) continue;
    double min_slope = std::numeric_limits<double>::infinity();
    for (const auto& rid : under) min_slope = std::min(min_slope, slope[rid]);
    if (ix.cap.at(id) - node_load(id) < hier.grid_w * min_slope - 1e-9)
      out.binding_constraints.push_back(id);
  }

  double objective = 0.0;
  for (const auto& [id, limit] : p)
    objective += ix.gpu_racks.at(id)->gpu_count * f_eval(curves, limit);
  out.objective = objective;
  out.per_rack_limit = std::move(p);
  return out;
}

}  // namespace wattops
