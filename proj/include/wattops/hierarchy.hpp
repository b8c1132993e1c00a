#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wattops {

enum class Level { MSB, SB, RPP };

std::string to_string(Level level);

struct PowerNode {
  std::string id;
  Level level = Level::RPP;
  double capacity_w = 0.0;
  std::vector<std::string> children;  // node ids; empty for RPPs
  // Hourly mechanical load profile, MSB only (watts, cycled over its length).
  std::vector<double> mechanical_profile;
};

enum class RackType { gpu_compute, aalc, network, support, storage };

std::string to_string(RackType type);

struct RackAssignment {
  std::string rack_id;
  RackType type = RackType::gpu_compute;
  double provisioned_power_w = 0.0;
  int gpu_count = 0;  // > 0 iff gpu_compute
  int priority = 0;   // larger jobs get higher values and are capped last
  std::string rpp_id;
};

struct PowerTree {
  std::vector<PowerNode> nodes;
  std::vector<RackAssignment> racks;
};

struct ValidationIssue {
  std::string subject;  // node or rack id
  std::string message;
  bool structural = false;  // cycles, level order, orphans; else advisory
};

// Reports oversubscription as advisory issues (never rejects a plan for it)
// and structural defects (cycle, child level out of order, orphan rack,
// duplicate id) as structural ones. Operations below throw ConfigError when
// structural issues exist.
std::vector<ValidationIssue> validate_tree(const PowerTree& tree);

struct NodeHeadroom {
  std::string id;
  Level level = Level::RPP;
  double budget_w = 0.0;
  double planned_w = 0.0;
  double headroom_w = 0.0;
  int gpus = 0;
  std::optional<double> per_gpu_w;  // absent when no GPUs sit below the node
};

struct HeadroomReport {
  std::vector<NodeHeadroom> per_node;
  double stranded_fraction = 0.0;  // sum max(headroom,0) / sum budget, MSBs
};

// Planned (provisioned) load per node versus its budget. SB/RPP budgets are
// their capacities; the MSB budget is the IT allocation, which excludes the
// mechanical share of the MSB rating.
HeadroomReport planned_headroom(const PowerTree& tree,
                                double it_budget_per_msb = 2.7e6);

// Empirical CDF of headroom across nodes of one level, as (headroom_w,
// cumulative_fraction) steps sorted ascending. Throws ConfigError when the
// level has no nodes.
std::vector<std::pair<double, double>> headroom_cdf(const HeadroomReport& report,
                                                    Level level);

// Deterministic 23-MSB reference fleet used by the default scenarios: rack
// mixes calibrated so MSB headroom averages ~160 kW with 3 of 23 MSBs under
// 50 kW, and RPP headroom averages in the mid-20 kW range.
PowerTree reference_fleet(double gpu_rack_power_w = 49518.75,
                          int gpus_per_rack = 36);

}  // namespace wattops
