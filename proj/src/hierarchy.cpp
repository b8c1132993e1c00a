#include "wattops/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "wattops/errors.hpp"

namespace wattops {

std::string to_string(Level level) {
  switch (level) {
    case Level::MSB: return "msb";
    case Level::SB: return "sb";
    case Level::RPP: return "rpp";
  }
  return "unknown";
}

std::string to_string(RackType type) {
  switch (type) {
    case RackType::gpu_compute: return "gpu_compute";
    case RackType::aalc: return "aalc";
    case RackType::network: return "network";
    case RackType::support: return "support";
    case RackType::storage: return "storage";
  }
  return "unknown";
}

namespace {

struct TreeIndex {
  std::map<std::string, const PowerNode*> nodes;
  std::map<std::string, std::vector<const RackAssignment*>> racks_by_rpp;
  std::vector<const PowerNode*> order;  // declaration order
};

TreeIndex index_tree(const PowerTree& tree) {
  TreeIndex ix;
  for (const auto& n : tree.nodes) {
    if (!ix.nodes.emplace(n.id, &n).second)
      throw ConfigError("power tree: duplicate node id " + n.id);
    ix.order.push_back(&n);
  }
  for (const auto& r : tree.racks) ix.racks_by_rpp[r.rpp_id].push_back(&r);
  return ix;
}

struct SubtreeTotals {
  double planned = 0.0;
  int gpus = 0;
};

SubtreeTotals subtree_totals(const TreeIndex& ix, const PowerNode& node,
                             std::map<std::string, SubtreeTotals>& memo) {
  auto hit = memo.find(node.id);
  if (hit != memo.end()) return hit->second;
  SubtreeTotals t;
  if (node.level == Level::RPP) {
    auto it = ix.racks_by_rpp.find(node.id);
    if (it != ix.racks_by_rpp.end())
      for (const auto* r : it->second) {
        t.planned += r->provisioned_power_w;
        t.gpus += r->gpu_count;
      }
  } else {
    for (const auto& cid : node.children) {
      auto child = ix.nodes.find(cid);
      if (child == ix.nodes.end())
        throw ConfigError("power tree: unknown child " + cid + " of " + node.id);
      const auto ct = subtree_totals(ix, *child->second, memo);
      t.planned += ct.planned;
      t.gpus += ct.gpus;
    }
  }
  memo[node.id] = t;
  return t;
}

}  // namespace

std::vector<ValidationIssue> validate_tree(const PowerTree& tree) {
  std::vector<ValidationIssue> issues;
  std::set<std::string> node_ids;
  for (const auto& n : tree.nodes)
    if (!node_ids.insert(n.id).second)
      issues.push_back({n.id, "duplicate node id", true});

  std::map<std::string, const PowerNode*> by_id;
  for (const auto& n : tree.nodes) by_id.emplace(n.id, &n);

  std::map<std::string, std::string> parent_of;
  for (const auto& n : tree.nodes) {
    if (!(n.capacity_w > 0.0))
      issues.push_back({n.id, "nonpositive capacity", true});
    if (n.level == Level::RPP && !n.children.empty())
      issues.push_back({n.id, "feeder panel cannot have children", true});
    for (const auto& cid : n.children) {
      auto child = by_id.find(cid);
      if (child == by_id.end()) {
        issues.push_back({n.id, "unknown child " + cid, true});
        continue;
      }
      const Level want = n.level == Level::MSB ? Level::SB : Level::RPP;
      if (n.level == Level::RPP || child->second->level != want)
        issues.push_back({cid, "child level out of order under " + n.id, true});
      auto prev = parent_of.emplace(cid, n.id);
      if (!prev.second)
        issues.push_back(
            {cid, "multiple parents: " + prev.first->second + " and " + n.id, true});
    }
  }

  std::set<std::string> rack_ids;
  for (const auto& r : tree.racks) {
    if (!rack_ids.insert(r.rack_id).second)
      issues.push_back({r.rack_id, "duplicate rack id", true});
    auto host = by_id.find(r.rpp_id);
    if (host == by_id.end() || host->second->level != Level::RPP)
      issues.push_back({r.rack_id, "orphan rack: no feeder panel " + r.rpp_id, true});
    if ((r.type == RackType::gpu_compute) != (r.gpu_count > 0))
      issues.push_back({r.rack_id, "gpu count inconsistent with rack type", true});
    if (r.provisioned_power_w < 0.0)
      issues.push_back({r.rack_id, "negative provisioned power", true});
  }

  bool structural = false;
  for (const auto& i : issues) structural |= i.structural;
  if (!structural) {
    // Oversubscription is a planning choice, reported but never rejected.
    TreeIndex ix = index_tree(tree);
    std::map<std::string, SubtreeTotals> memo;
    for (const auto* n : ix.order) {
      const auto t = subtree_totals(ix, *n, memo);
      if (t.planned > n->capacity_w)
        issues.push_back({n->id, "planned load exceeds capacity by " +
                                     std::to_string(t.planned - n->capacity_w) +
                                     " W",
                          false});
    }
  }
  return issues;
}

HeadroomReport planned_headroom(const PowerTree& tree,
                                double it_budget_per_msb) {
  for (const auto& issue : validate_tree(tree))
    if (issue.structural)
      throw ConfigError("power tree: " + issue.subject + ": " + issue.message);

  TreeIndex ix = index_tree(tree);
  std::map<std::string, SubtreeTotals> memo;
  HeadroomReport report;
  double msb_stranded = 0.0, msb_budget = 0.0;
  for (const auto* n : ix.order) {
    const auto t = subtree_totals(ix, *n, memo);
    NodeHeadroom h;
    h.id = n->id;
    h.level = n->level;
    h.budget_w = n->level == Level::MSB ? it_budget_per_msb : n->capacity_w;
    h.planned_w = t.planned;
    h.headroom_w = h.budget_w - t.planned;
    h.gpus = t.gpus;
    if (t.gpus > 0) h.per_gpu_w = h.headroom_w / t.gpus;
    if (n->level == Level::MSB) {
      msb_stranded += std::max(h.headroom_w, 0.0);
      msb_budget += h.budget_w;
    }
    report.per_node.push_back(std::move(h));
  }
  report.stranded_fraction = msb_budget > 0.0 ? msb_stranded / msb_budget : 0.0;
  return report;
}

std::vector<std::pair<double, double>> headroom_cdf(const HeadroomReport& report,
                                                    Level level) {
  std::vector<double> values;
  for (const auto& h : report.per_node)
    if (h.level == level) values.push_back(h.headroom_w);
  if (values.empty())
    throw ConfigError("headroom cdf: no nodes at level " + to_string(level));
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> steps;
  steps.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    steps.emplace_back(values[i], double(i + 1) / double(values.size()));
  return steps;
}

PowerTree reference_fleet(double gpu_rack_power_w, int gpus_per_rack) {
  // 23 feeders with four rack-count classes; the mix pins fleet headroom
  // statistics (mean ~160 kW, a thin sub-50 kW tail) without randomness.
  const std::vector<int> gpu_racks_per_msb = {
      41, 41, 41, 41, 41, 41,
      42, 42, 42, 42, 42, 42, 42, 42, 42,
      43, 43, 43, 43, 43,
      45, 45, 45,
  };
  // Hourly mechanical load, watts. Summer afternoons run past the 300 kW
  // planning figure.
  const std::vector<double> mech = {
      260e3, 252e3, 248e3, 245e3, 243e3, 242e3, 246e3, 254e3,
      265e3, 277e3, 288e3, 297e3, 304e3, 310e3, 315e3, 313e3,
      306e3, 296e3, 288e3, 281e3, 275e3, 270e3, 266e3, 263e3,
  };

  PowerTree tree;
  for (std::size_t m = 0; m < gpu_racks_per_msb.size(); ++m) {
    const int racks = gpu_racks_per_msb[m];
    const std::string msb_id = "msb" + std::to_string(m);
    PowerNode msb{msb_id, Level::MSB, 3.0e6, {}, mech};

    // 12 gpu panels per feeder at 3 racks baseline; the overflow becomes
    // four-rack panels, filled front to back.
    const int quads = racks - 36;
    int panel_racks[12];
    for (int i = 0; i < 12; ++i) panel_racks[i] = 3 + (i < quads ? 1 : 0);

    for (int s = 0; s < 3; ++s) {
      const std::string sb_id = msb_id + "/sb" + std::to_string(s);
      PowerNode sb{sb_id, Level::SB, 1.0e6, {}, {}};
      for (int r = 0; r < 4; ++r) {
        const int panel = s * 4 + r;
        const std::string rpp_id = sb_id + "/rpp" + std::to_string(r);
        sb.children.push_back(rpp_id);
        tree.nodes.push_back({rpp_id, Level::RPP, 197.5e3, {}, {}});
        for (int k = 0; k < panel_racks[panel]; ++k) {
          RackAssignment rack;
          rack.rack_id = rpp_id + "/r" + std::to_string(k);
          rack.type = RackType::gpu_compute;
          rack.provisioned_power_w = gpu_rack_power_w;
          rack.gpu_count = gpus_per_rack;
          rack.rpp_id = rpp_id;
          tree.racks.push_back(std::move(rack));
        }
      }
      // Auxiliary panel: support, storage, and this feeder's share of the
      // fabric switch racks.
      const std::string aux_id = sb_id + "/aux";
      sb.children.push_back(aux_id);
      tree.nodes.push_back({aux_id, Level::RPP, 197.5e3, {}, {}});
      for (int k = 0; k < 4; ++k) {
        RackAssignment rack;
        rack.rack_id = aux_id + "/sup" + std::to_string(k);
        rack.type = RackType::support;
        rack.provisioned_power_w = 13.0e3;
        rack.rpp_id = aux_id;
        tree.racks.push_back(std::move(rack));
      }
      RackAssignment storage;
      storage.rack_id = aux_id + "/sto0";
      storage.type = RackType::storage;
      storage.provisioned_power_w = 17.0e3;
      storage.rpp_id = aux_id;
      tree.racks.push_back(std::move(storage));
      RackAssignment network;
      network.rack_id = aux_id + "/net0";
      network.type = RackType::network;
      network.provisioned_power_w = racks * 1855.0;
      network.rpp_id = aux_id;
      tree.racks.push_back(std::move(network));

      msb.children.push_back(sb_id);
      tree.nodes.push_back(std::move(sb));
    }
    tree.nodes.push_back(std::move(msb));
  }
  return tree;
}

}  // namespace wattops
