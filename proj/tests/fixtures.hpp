#pragma once

// Small single-feeder scenarios shared by the simulation tests and the
// acceptance gate.

#include <string>

#include "wattops/curves.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/simengine.hpp"

namespace simfix {

inline wattops::PowerTree feeder_tree(int racks, double rack_q_w) {
  using namespace wattops;
  PowerTree tree;
  tree.nodes = {
      {"m", Level::MSB, 3.0e6, {"m/s"}, {}},
      {"m/s", Level::SB, 1.0e6, {"m/s/p"}, {}},
      {"m/s/p", Level::RPP, 197.5e3, {}, {}},
  };
  for (int k = 0; k < racks; ++k) {
    RackAssignment r;
    r.rack_id = "m/s/p/r" + std::to_string(k);
    r.type = RackType::gpu_compute;
    r.provisioned_power_w = rack_q_w;
    r.gpu_count = 36;
    r.priority = k;
    r.rpp_id = "m/s/p";
    tree.racks.push_back(std::move(r));
  }
  return tree;
}

inline wattops::JobSpec rack_job(const std::string& id,
                                 const std::string& rack_id, int priority) {
  wattops::JobSpec job;
  job.job_id = id;
  job.gpus_per_host = 2;
  job.phase_profile = {{"compute", 48.0, 0.965}, {"exposed_comm", 12.0, 0.33}};
  job.priority = priority;
  for (int h = 0; h < 18; ++h)
    job.hosts.push_back({rack_id + "/h" + std::to_string(h), "m/s/p"});
  job.size = 36;
  return job;
}

inline wattops::SimScenario feeder_sim(int racks) {
  wattops::SimScenario s;
  s.tree = feeder_tree(racks, 49518.75);
  s.curves = wattops::CurveSet::gb200_defaults();
  for (int k = 0; k < racks; ++k)
    s.jobs.push_back(
        rack_job("job" + std::to_string(k), "m/s/p/r" + std::to_string(k), k));
  s.horizon_s = 120.0;
  s.base_tdp = 1020.0;
  s.seed = 9;
  return s;
}

// Shrinks jitter to the point where tick values are analytic.
inline void quiet(wattops::SimScenario& s) {
  s.compute_jitter_sd = 1e-12;
  s.host_jitter_sd = 1e-12;
}

}  // namespace simfix
