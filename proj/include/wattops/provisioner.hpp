#pragma once

#include <map>
#include <string>
#include <vector>

#include "wattops/curves.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/rack_model.hpp"

namespace wattops {

struct ProvisionInputs {
  double p_total_w = 150e6;  // site DC power budget
  long n_max = 1000000;      // deployable GPU ceiling (fabric radix etc.)
  double p_min = 900.0;
  double p_max = 1200.0;
  double oversubscription = 0.08;   // planned over-commit of the DC budget
  double turnup_reserve_w = 10e6;   // withheld during region turn-up
  double network_fraction = 0.10;   // of the remainder, fabric switch racks
  double support_fraction = 0.10;   // of the remainder, support services
  double aalc_fraction = 0.03;      // of the remainder, sidecar cooling
  int gpus_per_rack = 36;
  double reference_perf_scale = 2.5;  // per-GPU perf at p_max vs prior gen
  std::string scenario_label = "gb200_960";
};

struct LedgerRow {
  std::string item;
  double amount_w = 0.0;     // signed: additions positive, reserves negative
  double remaining_w = 0.0;  // running pool after the row
};

// Power available to GPU racks after the overhead ledger. Rows in order:
// oversubscription, turn-up reserve, network, support, AALC.
double rack_power_pool(const ProvisionInputs& inputs,
                       std::vector<LedgerRow>* ledger = nullptr);

// GPU count at per-GPU provisioned slot cost `per_gpu_w`, floored to whole
// racks and capped at n_max. Throws InfeasibleError when the overheads
// consume the whole budget.
long n_of_p(const ProvisionInputs& inputs, double per_gpu_w);

// T(p)/T(p_max) with N from the ledger and the rack model's provisioned
// power, f from the curves.
double throughput_rel(const ProvisionInputs& inputs, const RackModel& model,
                      const CurveSet& curves, double p);

struct ProvisionResult {
  double p_star = 0.0;
  long n_gpus = 0;
  long rack_count = 0;
  double throughput_rel_pmax = 0.0;  // T(p*)/T(p_max)
  double per_gpu_perf = 0.0;         // reference_perf_scale * f(p*)
  double aggregate_perf = 0.0;       // n_gpus * per_gpu_perf
  std::vector<LedgerRow> ledger;
  EtaOptimum eta;
  bool n_max_binding = false;
};

// Relaxed (single power domain) plan: scans the 10 W grid for the highest
// T(p) = N(p) f(p), with perf-per-watt as tie-break; reports the eta
// optimum alongside. Throws InfeasibleError when no grid point is feasible.
ProvisionResult solve_relaxed(const ProvisionInputs& inputs,
                              const RackModel& model,
                              const NetworkPowerModel& net,
                              const CurveSet& curves);

struct HierInputs {
  double p_min = 900.0;
  double p_max = 1200.0;
  double grid_w = 10.0;
  double msb_it_budget_w = 2.7e6;
  int max_iterations = 1000;
};

struct HierAssignment {
  std::map<std::string, double> per_rack_limit;  // gpu racks only
  double objective = 0.0;                        // sum n_k f(p_k)
  std::vector<std::string> binding_constraints;  // node ids at capacity
  std::vector<std::string> infeasible_nodes;     // nonempty => infeasible
  int iterations = 0;
  bool feasible = true;
};

// Per-rack limits under the capacity hierarchy: start all racks at p_max,
// repeatedly pick the deepest violated node and reduce its subtree's rack
// limits uniformly (clamped at p_min) until feasible or the iteration cap,
// then snap limits down to the grid and lift whole equal-rack groups back
// up greedily while feasible. Non-GPU racks contribute their fixed
// provisioned power.
HierAssignment solve_hierarchical(const PowerTree& tree, const RackModel& model,
                                  const CurveSet& curves,
                                  const HierInputs& hier);

}  // namespace wattops
