#include "wattops/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "util.hpp"
#include "wattops/errors.hpp"
#include "wattops/version.hpp"

namespace wattops {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ParseError((path.empty() ? "/" : path) + ": " + message);
}

// Tracks which keys were consumed so anything left over is rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& at(const std::string& key) {
    const json* p = find(key);
    if (!p) fail(path_, "missing key '" + key + "'");
    return *p;
  }
  std::string child(const std::string& key) const { return path_ + "/" + key; }
  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path_ + "/" + it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double num_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    fail(path, "expected an integer");
  return j.get<long>();
}

std::uint64_t u64_at(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const long v = j.get<long>();
    if (v < 0) fail(path, "expected a nonnegative integer");
    return std::uint64_t(v);
  }
  fail(path, "expected an integer");
}

bool bool_at(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string str_at(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const json& arr_at(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::string idx(const std::string& path, std::size_t i) {
  return path + "/" + std::to_string(i);
}

Level level_from(const std::string& s, const std::string& path) {
  if (s == "msb") return Level::MSB;
  if (s == "sb") return Level::SB;
  if (s == "rpp") return Level::RPP;
  fail(path, "unknown level '" + s + "'");
}

RackType rack_type_from(const std::string& s, const std::string& path) {
  if (s == "gpu_compute") return RackType::gpu_compute;
  if (s == "aalc") return RackType::aalc;
  if (s == "network") return RackType::network;
  if (s == "support") return RackType::support;
  if (s == "storage") return RackType::storage;
  fail(path, "unknown rack type '" + s + "'");
}

Scope scope_from(const std::string& s, const std::string& path) {
  if (s == "server") return Scope::server_level;
  if (s == "rack") return Scope::rack_level;
  fail(path, "unknown scope '" + s + "'");
}

std::string scope_str(Scope scope) {
  return scope == Scope::server_level ? "server" : "rack";
}

// ---------------------------------------------------------------------------
// Section parsers.

ProvisionInputs parse_provision(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ProvisionInputs p;
  p.p_total_w = num_at(r.at("p_total_w"), r.child("p_total_w"));
  p.n_max = int_at(r.at("n_max"), r.child("n_max"));
  p.p_min = num_at(r.at("p_min"), r.child("p_min"));
  p.p_max = num_at(r.at("p_max"), r.child("p_max"));
  p.oversubscription =
      num_at(r.at("oversubscription"), r.child("oversubscription"));
  p.turnup_reserve_w =
      num_at(r.at("turnup_reserve_w"), r.child("turnup_reserve_w"));
  p.network_fraction =
      num_at(r.at("network_fraction"), r.child("network_fraction"));
  p.support_fraction =
      num_at(r.at("support_fraction"), r.child("support_fraction"));
  p.aalc_fraction = num_at(r.at("aalc_fraction"), r.child("aalc_fraction"));
  p.gpus_per_rack = int(int_at(r.at("gpus_per_rack"), r.child("gpus_per_rack")));
  p.reference_perf_scale =
      num_at(r.at("reference_perf_scale"), r.child("reference_perf_scale"));
  p.scenario_label = str_at(r.at("scenario_label"), r.child("scenario_label"));
  r.finish();
  return p;
}

LossRule parse_loss_rule(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LossRule rule;
  rule.fraction = num_at(r.at("fraction"), r.child("fraction"));
  const json& base = arr_at(r.at("base_components"), r.child("base_components"));
  for (std::size_t i = 0; i < base.size(); ++i)
    rule.base_components.push_back(
        str_at(base[i], idx(r.child("base_components"), i)));
  r.finish();
  return rule;
}

RackModel parse_rack_model(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  RackModel m;
  m.components.clear();
  const json& comps = arr_at(r.at("components"), r.child("components"));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cpath = idx(r.child("components"), i);
    ObjectReader cr(comps[i], cpath);
    ComponentSpec c;
    c.name = str_at(cr.at("name"), cr.child("name"));
    c.unit_power = num_at(cr.at("unit_power"), cr.child("unit_power"));
    c.count = int(int_at(cr.at("count"), cr.child("count")));
    c.derate = num_at(cr.at("derate"), cr.child("derate"));
    c.scope = scope_from(str_at(cr.at("scope"), cr.child("scope")),
                         cr.child("scope"));
    c.air_cooled = bool_at(cr.at("air_cooled"), cr.child("air_cooled"));
    cr.finish();
    m.components.push_back(std::move(c));
  }
  {
    const std::string lpath = r.child("losses");
    ObjectReader lr(r.at("losses"), lpath);
    m.losses.vr_loss = parse_loss_rule(lr.at("vr_loss"), lr.child("vr_loss"));
    m.losses.fan_loss = parse_loss_rule(lr.at("fan_loss"), lr.child("fan_loss"));
    m.losses.fan_base_includes_vr = bool_at(lr.at("fan_base_includes_vr"),
                                            lr.child("fan_base_includes_vr"));
    m.losses.psu_loss = num_at(lr.at("psu_loss"), lr.child("psu_loss"));
    m.losses.ac_dc_loss = num_at(lr.at("ac_dc_loss"), lr.child("ac_dc_loss"));
    lr.finish();
  }
  m.gpu_count_per_rack =
      int(int_at(r.at("gpu_count_per_rack"), r.child("gpu_count_per_rack")));
  m.gpu_component = str_at(r.at("gpu_component"), r.child("gpu_component"));
  m.global_derate = num_at(r.at("global_derate"), r.child("global_derate"));
  m.aalc_fraction = num_at(r.at("aalc_fraction"), r.child("aalc_fraction"));
  r.finish();
  return m;
}

NetworkPowerModel parse_network(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  NetworkPowerModel net;
  net.switch_tiers.clear();
  const json& tiers = arr_at(r.at("switch_tiers"), r.child("switch_tiers"));
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const std::string tpath = idx(r.child("switch_tiers"), i);
    ObjectReader tr(tiers[i], tpath);
    SwitchTier t;
    t.label = str_at(tr.at("label"), tr.child("label"));
    t.rack_power = num_at(tr.at("rack_power"), tr.child("rack_power"));
    t.count_per_two_racks = num_at(tr.at("count_per_two_racks"),
                                   tr.child("count_per_two_racks"));
    tr.finish();
    net.switch_tiers.push_back(std::move(t));
  }
  r.finish();
  return net;
}

std::vector<CurvePoint> parse_anchors(const json& j, const std::string& path) {
  std::vector<CurvePoint> out;
  const json& a = arr_at(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string apath = idx(path, i);
    const json& pair = arr_at(a[i], apath);
    if (pair.size() != 2) fail(apath, "expected [p, value]");
    out.push_back({num_at(pair[0], idx(apath, 0)), num_at(pair[1], idx(apath, 1))});
  }
  return out;
}

CurveSet parse_curves(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CurveSet c;
  c.f_anchors = parse_anchors(r.at("f_anchors"), r.child("f_anchors"));
  c.hbm_anchors = parse_anchors(r.at("hbm_anchors"), r.child("hbm_anchors"));
  c.gemm_anchors.clear();
  const json& gemm = arr_at(r.at("gemm_anchors"), r.child("gemm_anchors"));
  for (std::size_t i = 0; i < gemm.size(); ++i) {
    const std::string gpath = idx(r.child("gemm_anchors"), i);
    const json& triple = arr_at(gemm[i], gpath);
    if (triple.size() != 3) fail(gpath, "expected [intensity, p, rel_flops]");
    c.gemm_anchors.push_back({num_at(triple[0], idx(gpath, 0)),
                              num_at(triple[1], idx(gpath, 1)),
                              num_at(triple[2], idx(gpath, 2))});
  }
  c.p_min = num_at(r.at("p_min"), r.child("p_min"));
  c.p_max = num_at(r.at("p_max"), r.child("p_max"));
  r.finish();
  return c;
}

RackTraceParams parse_trace_params(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  RackTraceParams t;
  t.hosts = int(int_at(r.at("hosts"), r.child("hosts")));
  t.gpus_per_host = int(int_at(r.at("gpus_per_host"), r.child("gpus_per_host")));
  t.host_overhead_w =
      num_at(r.at("host_overhead_w"), r.child("host_overhead_w"));
  t.compute_fraction =
      num_at(r.at("compute_fraction"), r.child("compute_fraction"));
  t.comm_fraction = num_at(r.at("comm_fraction"), r.child("comm_fraction"));
  t.compute_s = num_at(r.at("compute_s"), r.child("compute_s"));
  t.comm_s = num_at(r.at("comm_s"), r.child("comm_s"));
  t.common_jitter_sd =
      num_at(r.at("common_jitter_sd"), r.child("common_jitter_sd"));
  t.host_jitter_sd = num_at(r.at("host_jitter_sd"), r.child("host_jitter_sd"));
  t.smoother_floor_w =
      num_at(r.at("smoother_floor_w"), r.child("smoother_floor_w"));
  t.dt_s = num_at(r.at("dt_s"), r.child("dt_s"));
  t.duration_s = num_at(r.at("duration_s"), r.child("duration_s"));
  t.seed = u64_at(r.at("seed"), r.child("seed"));
  r.finish();
  return t;
}

TelemetrySection parse_telemetry(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TelemetrySection t;
  {
    const std::string ppath = r.child("psu");
    ObjectReader pr(r.at("psu"), ppath);
    t.psu.window_s = num_at(pr.at("window_s"), pr.child("window_s"));
    t.psu.running_avg_s =
        num_at(pr.at("running_avg_s"), pr.child("running_avg_s"));
    t.psu.log_interval_s =
        num_at(pr.at("log_interval_s"), pr.child("log_interval_s"));
    t.psu.bias = num_at(pr.at("bias"), pr.child("bias"));
    t.psu.noise_sd = num_at(pr.at("noise_sd"), pr.child("noise_sd"));
    t.psu.seed = u64_at(pr.at("seed"), pr.child("seed"));
    pr.finish();
  }
  {
    const std::string dpath = r.child("dcim");
    ObjectReader dr(r.at("dcim"), dpath);
    t.dcim.sample_interval_s =
        num_at(dr.at("sample_interval_s"), dr.child("sample_interval_s"));
    t.dcim.accuracy = num_at(dr.at("accuracy"), dr.child("accuracy"));
    t.dcim.seed = u64_at(dr.at("seed"), dr.child("seed"));
    dr.finish();
  }
  t.rack_trace = parse_trace_params(r.at("rack_trace"), r.child("rack_trace"));
  t.aggregator_trace =
      parse_trace_params(r.at("aggregator_trace"), r.child("aggregator_trace"));
  t.rack_budget_w = num_at(r.at("rack_budget_w"), r.child("rack_budget_w"));
  t.racks_per_device =
      int(int_at(r.at("racks_per_device"), r.child("racks_per_device")));
  r.finish();
  return t;
}

PowerTree parse_tree(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  PowerTree tree;
  const json& nodes = arr_at(r.at("nodes"), r.child("nodes"));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string npath = idx(r.child("nodes"), i);
    ObjectReader nr(nodes[i], npath);
    PowerNode n;
    n.id = str_at(nr.at("id"), nr.child("id"));
    n.level = level_from(str_at(nr.at("level"), nr.child("level")),
                         nr.child("level"));
    n.capacity_w = num_at(nr.at("capacity_w"), nr.child("capacity_w"));
    const json& children = arr_at(nr.at("children"), nr.child("children"));
    for (std::size_t k = 0; k < children.size(); ++k)
      n.children.push_back(str_at(children[k], idx(nr.child("children"), k)));
    const json& mech =
        arr_at(nr.at("mechanical_profile"), nr.child("mechanical_profile"));
    for (std::size_t k = 0; k < mech.size(); ++k)
      n.mechanical_profile.push_back(
          num_at(mech[k], idx(nr.child("mechanical_profile"), k)));
    nr.finish();
    tree.nodes.push_back(std::move(n));
  }
  const json& racks = arr_at(r.at("racks"), r.child("racks"));
  for (std::size_t i = 0; i < racks.size(); ++i) {
    const std::string rpath = idx(r.child("racks"), i);
    ObjectReader rr(racks[i], rpath);
    RackAssignment rack;
    rack.rack_id = str_at(rr.at("rack_id"), rr.child("rack_id"));
    rack.type = rack_type_from(str_at(rr.at("type"), rr.child("type")),
                               rr.child("type"));
    rack.provisioned_power_w =
        num_at(rr.at("provisioned_power_w"), rr.child("provisioned_power_w"));
    rack.gpu_count = int(int_at(rr.at("gpu_count"), rr.child("gpu_count")));
    rack.priority = int(int_at(rr.at("priority"), rr.child("priority")));
    rack.rpp_id = str_at(rr.at("rpp_id"), rr.child("rpp_id"));
    rr.finish();
    tree.racks.push_back(std::move(rack));
  }
  r.finish();
  return tree;
}

std::vector<JobSpec> parse_jobs(const json& j, const std::string& path) {
  std::vector<JobSpec> jobs;
  const json& a = arr_at(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string jpath = idx(path, i);
    ObjectReader jr(a[i], jpath);
    JobSpec job;
    job.job_id = str_at(jr.at("job_id"), jr.child("job_id"));
    const json& hosts = arr_at(jr.at("hosts"), jr.child("hosts"));
    for (std::size_t k = 0; k < hosts.size(); ++k) {
      const std::string hpath = idx(jr.child("hosts"), k);
      ObjectReader hr(hosts[k], hpath);
      JobHost h;
      h.server_id = str_at(hr.at("server_id"), hr.child("server_id"));
      h.rpp_id = str_at(hr.at("rpp_id"), hr.child("rpp_id"));
      hr.finish();
      job.hosts.push_back(std::move(h));
    }
    job.gpus_per_host =
        int(int_at(jr.at("gpus_per_host"), jr.child("gpus_per_host")));
    const json& profile =
        arr_at(jr.at("phase_profile"), jr.child("phase_profile"));
    if (profile.empty()) fail(jr.child("phase_profile"), "empty phase profile");
    for (std::size_t k = 0; k < profile.size(); ++k) {
      const std::string spath = idx(jr.child("phase_profile"), k);
      ObjectReader sr(profile[k], spath);
      PhaseSegment seg;
      seg.phase = str_at(sr.at("phase"), sr.child("phase"));
      seg.duration_s = num_at(sr.at("duration_s"), sr.child("duration_s"));
      seg.per_gpu_fraction =
          num_at(sr.at("per_gpu_fraction"), sr.child("per_gpu_fraction"));
      sr.finish();
      if (!(seg.duration_s > 0.0))
        fail(sr.child("duration_s"), "segment duration must be positive");
      job.phase_profile.push_back(std::move(seg));
    }
    job.priority = int(int_at(jr.at("priority"), jr.child("priority")));
    job.size = int_at(jr.at("size"), jr.child("size"));
    job.phase_offset_s =
        num_at(jr.at("phase_offset_s"), jr.child("phase_offset_s"));
    job.start_s = num_at(jr.at("start_s"), jr.child("start_s"));
    job.end_s = num_at(jr.at("end_s"), jr.child("end_s"));
    jr.finish();
    jobs.push_back(std::move(job));
  }
  return jobs;
}

SimScenario parse_sim(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SimScenario s;
  s.tree = parse_tree(r.at("tree"), r.child("tree"));
  s.jobs = parse_jobs(r.at("jobs"), r.child("jobs"));
  {
    const std::string spath = r.child("smoother");
    ObjectReader sr(r.at("smoother"), spath);
    s.smoother.enabled = bool_at(sr.at("enabled"), sr.child("enabled"));
    s.smoother.floor_w = num_at(sr.at("floor_w"), sr.child("floor_w"));
    s.smoother.overhead = num_at(sr.at("overhead"), sr.child("overhead"));
    sr.finish();
  }
  {
    const std::string dpath = r.child("dimmer");
    ObjectReader dr(r.at("dimmer"), dpath);
    s.dimmer.limit_w = num_at(dr.at("limit_w"), dr.child("limit_w"));
    s.dimmer.decision_interval_s = int(
        int_at(dr.at("decision_interval_s"), dr.child("decision_interval_s")));
    s.dimmer.avg_window =
        int(int_at(dr.at("avg_window"), dr.child("avg_window")));
    s.dimmer.cap_expiration_s =
        int(int_at(dr.at("cap_expiration_s"), dr.child("cap_expiration_s")));
    s.dimmer.min_tdp = num_at(dr.at("min_tdp"), dr.child("min_tdp"));
    s.dimmer.base_tdp = num_at(dr.at("base_tdp"), dr.child("base_tdp"));
    s.dimmer.safe_tdp = num_at(dr.at("safe_tdp"), dr.child("safe_tdp"));
    s.dimmer.server_min_pwr_capped = num_at(dr.at("server_min_pwr_capped"),
                                            dr.child("server_min_pwr_capped"));
    s.dimmer.heartbeat_timeout_s = int(
        int_at(dr.at("heartbeat_timeout_s"), dr.child("heartbeat_timeout_s")));
    s.dimmer.quantum_w = num_at(dr.at("quantum_w"), dr.child("quantum_w"));
    s.dimmer.literal_form =
        bool_at(dr.at("literal_form"), dr.child("literal_form"));
    dr.finish();
  }
  s.dimmer_enabled = bool_at(r.at("dimmer_enabled"), r.child("dimmer_enabled"));
  {
    const std::string bpath = r.child("boost");
    ObjectReader br(r.at("boost"), bpath);
    s.boost.enabled = bool_at(br.at("enabled"), br.child("enabled"));
    s.boost.boost_tdp = num_at(br.at("boost_tdp"), br.child("boost_tdp"));
    s.boost.margin = num_at(br.at("margin"), br.child("margin"));
    br.finish();
  }
  {
    const std::string lpath = r.child("latency");
    ObjectReader lr(r.at("latency"), lpath);
    s.latency.median_s = num_at(lr.at("median_s"), lr.child("median_s"));
    s.latency.sigma = num_at(lr.at("sigma"), lr.child("sigma"));
    s.latency.max_s = num_at(lr.at("max_s"), lr.child("max_s"));
    s.latency.seed = u64_at(lr.at("seed"), lr.child("seed"));
    lr.finish();
  }
  s.horizon_s = num_at(r.at("horizon_s"), r.child("horizon_s"));
  s.base_tdp = num_at(r.at("base_tdp"), r.child("base_tdp"));
  s.host_overhead_w =
      num_at(r.at("host_overhead_w"), r.child("host_overhead_w"));
  s.compute_jitter_sd =
      num_at(r.at("compute_jitter_sd"), r.child("compute_jitter_sd"));
  s.host_jitter_sd = num_at(r.at("host_jitter_sd"), r.child("host_jitter_sd"));
  s.heartbeat_loss_at_s =
      num_at(r.at("heartbeat_loss_at_s"), r.child("heartbeat_loss_at_s"));
  s.seed = u64_at(r.at("seed"), r.child("seed"));
  s.msb_it_budget_w =
      num_at(r.at("msb_it_budget_w"), r.child("msb_it_budget_w"));
  s.dimmer_limit_fraction =
      num_at(r.at("dimmer_limit_fraction"), r.child("dimmer_limit_fraction"));
  const json& events = arr_at(r.at("limit_events"), r.child("limit_events"));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string epath = idx(r.child("limit_events"), i);
    ObjectReader er(events[i], epath);
    LimitEvent ev;
    ev.device_id = str_at(er.at("device_id"), er.child("device_id"));
    ev.at_s = num_at(er.at("at_s"), er.child("at_s"));
    ev.factor = num_at(er.at("factor"), er.child("factor"));
    er.finish();
    s.limit_events.push_back(std::move(ev));
  }
  r.finish();
  return s;
}

PhaseOverlay parse_overlay(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  PhaseOverlay ov;
  if (const json* p = r.find("base_tdp"))
    ov.base_tdp = num_at(*p, r.child("base_tdp"));
  if (const json* p = r.find("plan_tdp"))
    ov.plan_tdp = num_at(*p, r.child("plan_tdp"));
  if (const json* p = r.find("dimmer_enabled"))
    ov.dimmer_enabled = bool_at(*p, r.child("dimmer_enabled"));
  if (const json* p = r.find("boost_enabled"))
    ov.boost_enabled = bool_at(*p, r.child("boost_enabled"));
  if (const json* p = r.find("horizon_s"))
    ov.horizon_s = num_at(*p, r.child("horizon_s"));
  if (const json* p = r.find("workload"))
    ov.workload = str_at(*p, r.child("workload"));
  r.finish();
  return ov;
}

// Structural tree validation plus job/event cross-references.
void check_tree(const PowerTree& tree, const std::string& path) {
  for (const auto& issue : validate_tree(tree))
    if (issue.structural)
      fail(path, issue.subject + ": " + issue.message);
}

void check_workload(const PowerTree& tree, const std::vector<JobSpec>& jobs,
                    const std::string& path) {
  check_tree(tree, path + "/tree");
  std::set<std::string> rpps;
  for (const auto& n : tree.nodes)
    if (n.level == Level::RPP) rpps.insert(n.id);
  std::set<std::string> servers;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (std::size_t k = 0; k < jobs[i].hosts.size(); ++k) {
      const auto& h = jobs[i].hosts[k];
      const std::string hpath =
          idx(idx(path + "/jobs", i) + "/hosts", k);
      if (!rpps.count(h.rpp_id))
        fail(hpath + "/rpp_id", "no feeder panel named '" + h.rpp_id + "'");
      if (!servers.insert(h.server_id).second)
        fail(hpath + "/server_id", "duplicate server '" + h.server_id + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Serializers (canonical: objects dump with sorted keys, doubles in
// shortest-round-trip form).

json anchors_json(const std::vector<CurvePoint>& anchors) {
  json a = json::array();
  for (const auto& p : anchors) a.push_back(json::array({p.p, p.value}));
  return a;
}

json curves_json(const CurveSet& c) {
  json gemm = json::array();
  for (const auto& g : c.gemm_anchors)
    gemm.push_back(json::array({g.intensity, g.p, g.rel_flops}));
  return json{{"f_anchors", anchors_json(c.f_anchors)},
              {"hbm_anchors", anchors_json(c.hbm_anchors)},
              {"gemm_anchors", gemm},
              {"p_min", c.p_min},
              {"p_max", c.p_max}};
}

json loss_rule_json(const LossRule& rule) {
  return json{{"fraction", rule.fraction},
              {"base_components", rule.base_components}};
}

json rack_model_json(const RackModel& m) {
  json comps = json::array();
  for (const auto& c : m.components)
    comps.push_back(json{{"name", c.name},
                         {"unit_power", c.unit_power},
                         {"count", c.count},
                         {"derate", c.derate},
                         {"scope", scope_str(c.scope)},
                         {"air_cooled", c.air_cooled}});
  return json{{"components", comps},
              {"losses",
               json{{"vr_loss", loss_rule_json(m.losses.vr_loss)},
                    {"fan_loss", loss_rule_json(m.losses.fan_loss)},
                    {"fan_base_includes_vr", m.losses.fan_base_includes_vr},
                    {"psu_loss", m.losses.psu_loss},
                    {"ac_dc_loss", m.losses.ac_dc_loss}}},
              {"gpu_count_per_rack", m.gpu_count_per_rack},
              {"gpu_component", m.gpu_component},
              {"global_derate", m.global_derate},
              {"aalc_fraction", m.aalc_fraction}};
}

json network_json(const NetworkPowerModel& net) {
  json tiers = json::array();
  for (const auto& t : net.switch_tiers)
    tiers.push_back(json{{"label", t.label},
                         {"rack_power", t.rack_power},
                         {"count_per_two_racks", t.count_per_two_racks}});
  return json{{"switch_tiers", tiers}};
}

json provision_json(const ProvisionInputs& p) {
  return json{{"p_total_w", p.p_total_w},
              {"n_max", p.n_max},
              {"p_min", p.p_min},
              {"p_max", p.p_max},
              {"oversubscription", p.oversubscription},
              {"turnup_reserve_w", p.turnup_reserve_w},
              {"network_fraction", p.network_fraction},
              {"support_fraction", p.support_fraction},
              {"aalc_fraction", p.aalc_fraction},
              {"gpus_per_rack", p.gpus_per_rack},
              {"reference_perf_scale", p.reference_perf_scale},
              {"scenario_label", p.scenario_label}};
}

json trace_params_json(const RackTraceParams& t) {
  return json{{"hosts", t.hosts},
              {"gpus_per_host", t.gpus_per_host},
              {"host_overhead_w", t.host_overhead_w},
              {"compute_fraction", t.compute_fraction},
              {"comm_fraction", t.comm_fraction},
              {"compute_s", t.compute_s},
              {"comm_s", t.comm_s},
              {"common_jitter_sd", t.common_jitter_sd},
              {"host_jitter_sd", t.host_jitter_sd},
              {"smoother_floor_w", t.smoother_floor_w},
              {"dt_s", t.dt_s},
              {"duration_s", t.duration_s},
              {"seed", t.seed}};
}

json telemetry_json(const TelemetrySection& t) {
  return json{{"psu",
               json{{"window_s", t.psu.window_s},
                    {"running_avg_s", t.psu.running_avg_s},
                    {"log_interval_s", t.psu.log_interval_s},
                    {"bias", t.psu.bias},
                    {"noise_sd", t.psu.noise_sd},
                    {"seed", t.psu.seed}}},
              {"dcim",
               json{{"sample_interval_s", t.dcim.sample_interval_s},
                    {"accuracy", t.dcim.accuracy},
                    {"seed", t.dcim.seed}}},
              {"rack_trace", trace_params_json(t.rack_trace)},
              {"aggregator_trace", trace_params_json(t.aggregator_trace)},
              {"rack_budget_w", t.rack_budget_w},
              {"racks_per_device", t.racks_per_device}};
}

json tree_json(const PowerTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes)
    nodes.push_back(json{{"id", n.id},
                         {"level", to_string(n.level)},
                         {"capacity_w", n.capacity_w},
                         {"children", n.children},
                         {"mechanical_profile", n.mechanical_profile}});
  json racks = json::array();
  for (const auto& r : tree.racks)
    racks.push_back(json{{"rack_id", r.rack_id},
                         {"type", to_string(r.type)},
                         {"provisioned_power_w", r.provisioned_power_w},
                         {"gpu_count", r.gpu_count},
                         {"priority", r.priority},
                         {"rpp_id", r.rpp_id}});
  return json{{"nodes", nodes}, {"racks", racks}};
}

json jobs_json(const std::vector<JobSpec>& jobs) {
  json a = json::array();
  for (const auto& job : jobs) {
    json hosts = json::array();
    for (const auto& h : job.hosts)
      hosts.push_back(json{{"server_id", h.server_id}, {"rpp_id", h.rpp_id}});
    json profile = json::array();
    for (const auto& s : job.phase_profile)
      profile.push_back(json{{"phase", s.phase},
                             {"duration_s", s.duration_s},
                             {"per_gpu_fraction", s.per_gpu_fraction}});
    a.push_back(json{{"job_id", job.job_id},
                     {"hosts", hosts},
                     {"gpus_per_host", job.gpus_per_host},
                     {"phase_profile", profile},
                     {"priority", job.priority},
                     {"size", job.size},
                     {"phase_offset_s", job.phase_offset_s},
                     {"start_s", job.start_s},
                     {"end_s", job.end_s}});
  }
  return a;
}

json sim_json(const SimScenario& s) {
  json events = json::array();
  for (const auto& ev : s.limit_events)
    events.push_back(json{{"device_id", ev.device_id},
                          {"at_s", ev.at_s},
                          {"factor", ev.factor}});
  return json{
      {"tree", tree_json(s.tree)},
      {"jobs", jobs_json(s.jobs)},
      {"smoother",
       json{{"enabled", s.smoother.enabled},
            {"floor_w", s.smoother.floor_w},
            {"overhead", s.smoother.overhead}}},
      {"dimmer",
       json{{"limit_w", s.dimmer.limit_w},
            {"decision_interval_s", s.dimmer.decision_interval_s},
            {"avg_window", s.dimmer.avg_window},
            {"cap_expiration_s", s.dimmer.cap_expiration_s},
            {"min_tdp", s.dimmer.min_tdp},
            {"base_tdp", s.dimmer.base_tdp},
            {"safe_tdp", s.dimmer.safe_tdp},
            {"server_min_pwr_capped", s.dimmer.server_min_pwr_capped},
            {"heartbeat_timeout_s", s.dimmer.heartbeat_timeout_s},
            {"quantum_w", s.dimmer.quantum_w},
            {"literal_form", s.dimmer.literal_form}}},
      {"dimmer_enabled", s.dimmer_enabled},
      {"boost",
       json{{"enabled", s.boost.enabled},
            {"boost_tdp", s.boost.boost_tdp},
            {"margin", s.boost.margin}}},
      {"latency",
       json{{"median_s", s.latency.median_s},
            {"sigma", s.latency.sigma},
            {"max_s", s.latency.max_s},
            {"seed", s.latency.seed}}},
      {"horizon_s", s.horizon_s},
      {"base_tdp", s.base_tdp},
      {"host_overhead_w", s.host_overhead_w},
      {"compute_jitter_sd", s.compute_jitter_sd},
      {"host_jitter_sd", s.host_jitter_sd},
      {"heartbeat_loss_at_s", s.heartbeat_loss_at_s},
      {"seed", s.seed},
      {"msb_it_budget_w", s.msb_it_budget_w},
      {"dimmer_limit_fraction", s.dimmer_limit_fraction},
      {"limit_events", events}};
}

json overlay_json(const PhaseOverlay& ov) {
  json j = json::object();
  if (ov.base_tdp) j["base_tdp"] = *ov.base_tdp;
  if (ov.plan_tdp) j["plan_tdp"] = *ov.plan_tdp;
  if (ov.dimmer_enabled) j["dimmer_enabled"] = *ov.dimmer_enabled;
  if (ov.boost_enabled) j["boost_enabled"] = *ov.boost_enabled;
  if (ov.horizon_s) j["horizon_s"] = *ov.horizon_s;
  if (ov.workload) j["workload"] = *ov.workload;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }

  ObjectReader r(j, "");
  Scenario sc;
  sc.schema = str_at(r.at("schema"), r.child("schema"));
  if (sc.schema != kScenarioSchema)
    fail(r.child("schema"), "unsupported schema '" + sc.schema +
                                "', expected '" + kScenarioSchema + "'");
  sc.label = str_at(r.at("label"), r.child("label"));
  sc.provision = parse_provision(r.at("provision"), r.child("provision"));
  sc.rack_model = parse_rack_model(r.at("rack_model"), r.child("rack_model"));
  sc.network = parse_network(r.at("network"), r.child("network"));
  sc.curves = parse_curves(r.at("curves"), r.child("curves"));
  sc.telemetry = parse_telemetry(r.at("telemetry"), r.child("telemetry"));
  sc.fleet_tree = parse_tree(r.at("fleet_tree"), r.child("fleet_tree"));
  check_tree(sc.fleet_tree, r.child("fleet_tree"));
  sc.sim = parse_sim(r.at("sim"), r.child("sim"));
  sc.sim.curves = sc.curves;
  check_workload(sc.sim.tree, sc.sim.jobs, r.child("sim"));
  {
    std::set<std::string> devices;
    for (const auto& n : sc.sim.tree.nodes)
      if (n.level != Level::SB) devices.insert(n.id);
    const std::string epath = r.child("sim") + "/limit_events";
    for (std::size_t i = 0; i < sc.sim.limit_events.size(); ++i)
      if (!devices.count(sc.sim.limit_events[i].device_id))
        fail(idx(epath, i) + "/device_id",
             "no panel or switchboard named '" +
                 sc.sim.limit_events[i].device_id + "'");
  }
  {
    const json& w = r.at("workloads");
    const std::string wpath = r.child("workloads");
    if (!w.is_object()) fail(wpath, "expected an object");
    for (auto it = w.begin(); it != w.end(); ++it) {
      const std::string path = wpath + "/" + it.key();
      ObjectReader wr(*it, path);
      Workload wl;
      wl.tree = parse_tree(wr.at("tree"), wr.child("tree"));
      wl.jobs = parse_jobs(wr.at("jobs"), wr.child("jobs"));
      wr.finish();
      check_workload(wl.tree, wl.jobs, path);
      sc.workloads.emplace(it.key(), std::move(wl));
    }
  }
  {
    const json& p = r.at("phases");
    const std::string ppath = r.child("phases");
    if (!p.is_object()) fail(ppath, "expected an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      PhaseOverlay ov = parse_overlay(*it, ppath + "/" + it.key());
      if (ov.workload && !sc.workloads.count(*ov.workload))
        fail(ppath + "/" + it.key() + "/workload",
             "no workload named '" + *ov.workload + "'");
      sc.phases.emplace(it.key(), std::move(ov));
    }
  }
  {
    const json& labels =
        arr_at(r.at("comparison_labels"), r.child("comparison_labels"));
    for (std::size_t i = 0; i < labels.size(); ++i)
      sc.comparison_labels.push_back(
          str_at(labels[i], idx(r.child("comparison_labels"), i)));
  }
  r.finish();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& scenario) {
  json workloads = json::object();
  for (const auto& [name, w] : scenario.workloads)
    workloads[name] = json{{"tree", tree_json(w.tree)},
                           {"jobs", jobs_json(w.jobs)}};
  json phases = json::object();
  for (const auto& [name, ov] : scenario.phases)
    phases[name] = overlay_json(ov);
  json j{{"schema", scenario.schema},
         {"label", scenario.label},
         {"provision", provision_json(scenario.provision)},
         {"rack_model", rack_model_json(scenario.rack_model)},
         {"network", network_json(scenario.network)},
         {"curves", curves_json(scenario.curves)},
         {"telemetry", telemetry_json(scenario.telemetry)},
         {"fleet_tree", tree_json(scenario.fleet_tree)},
         {"sim", sim_json(scenario.sim)},
         {"workloads", workloads},
         {"phases", phases},
         {"comparison_labels", scenario.comparison_labels}};
  return j.dump(2) + "\n";
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  return detail::fnv1a64(serialize_scenario(scenario));
}

std::string serialize_manifest(const RunManifest& manifest) {
  json metrics = json::object();
  for (const auto& [k, v] : manifest.metrics) metrics[k] = v;
  json j{{"command", manifest.command},
         {"scenario_label", manifest.scenario_label},
         {"scenario_hash_hex", manifest.scenario_hash_hex},
         {"seed", manifest.seed},
         {"tool_version", manifest.tool_version},
         {"phase", manifest.phase},
         {"outputs", manifest.outputs},
         {"metrics", metrics}};
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  ObjectReader r(j, "");
  RunManifest m;
  m.command = str_at(r.at("command"), r.child("command"));
  m.scenario_label =
      str_at(r.at("scenario_label"), r.child("scenario_label"));
  m.scenario_hash_hex =
      str_at(r.at("scenario_hash_hex"), r.child("scenario_hash_hex"));
  m.seed = u64_at(r.at("seed"), r.child("seed"));
  m.tool_version = str_at(r.at("tool_version"), r.child("tool_version"));
  m.phase = str_at(r.at("phase"), r.child("phase"));
  const json& outputs = arr_at(r.at("outputs"), r.child("outputs"));
  for (std::size_t i = 0; i < outputs.size(); ++i)
    m.outputs.push_back(str_at(outputs[i], idx(r.child("outputs"), i)));
  const json& metrics = r.at("metrics");
  if (!metrics.is_object()) fail(r.child("metrics"), "expected an object");
  for (auto it = metrics.begin(); it != metrics.end(); ++it)
    m.metrics.emplace(it.key(),
                      num_at(*it, r.child("metrics") + "/" + it.key()));
  r.finish();
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

SimScenario phase_sim(const Scenario& scenario, const std::string& phase) {
  SimScenario sim = scenario.sim;
  sim.curves = scenario.curves;
  if (phase.empty()) return sim;
  auto it = scenario.phases.find(phase);
  if (it == scenario.phases.end())
    throw ConfigError("scenario has no phase named '" + phase + "'");
  const PhaseOverlay& ov = it->second;
  if (ov.workload) {
    auto wit = scenario.workloads.find(*ov.workload);
    if (wit == scenario.workloads.end())
      throw ConfigError("phase " + phase + " names unknown workload '" +
                        *ov.workload + "'");
    sim.tree = wit->second.tree;
    sim.jobs = wit->second.jobs;
  }
  if (ov.base_tdp) sim.base_tdp = *ov.base_tdp;
  if (ov.dimmer_enabled) sim.dimmer_enabled = *ov.dimmer_enabled;
  if (ov.boost_enabled) sim.boost.enabled = *ov.boost_enabled;
  if (ov.horizon_s) sim.horizon_s = *ov.horizon_s;
  return sim;
}

double phase_plan_tdp(const Scenario& scenario, const std::string& phase) {
  if (!phase.empty()) {
    auto it = scenario.phases.find(phase);
    if (it == scenario.phases.end())
      throw ConfigError("scenario has no phase named '" + phase + "'");
    if (it->second.plan_tdp) return *it->second.plan_tdp;
    if (it->second.base_tdp) return *it->second.base_tdp;
  }
  return scenario.sim.base_tdp;
}

namespace {

struct PlanBundle {
  ProvisionInputs inputs;
  RackModel model;
  CurveSet curves;
};

// Prior-generation baseline: 16 air-cooled accelerators per rack, no rack
// over-commit, leaner fabric share, no sidecar cooling.
PlanBundle h100_reference() {
  PlanBundle b;
  b.inputs.p_total_w = 150e6;
  b.inputs.n_max = 1000000;
  b.inputs.p_min = 600.0;
  b.inputs.p_max = 700.0;
  b.inputs.oversubscription = 0.0;
  b.inputs.turnup_reserve_w = 10e6;
  b.inputs.network_fraction = 0.06;
  b.inputs.support_fraction = 0.10;
  b.inputs.aalc_fraction = 0.0;
  b.inputs.gpus_per_rack = 16;
  b.inputs.reference_perf_scale = 1.0;
  b.inputs.scenario_label = "h100_700";

  RackModel& m = b.model;
  m.components = {
      {"gpu_hbm", 700.0, 16, 1.0, Scope::server_level, false},
      {"platform", 480.0, 16, 1.0, Scope::server_level, true},
  };
  m.losses.vr_loss = {0.0, {}};
  m.losses.fan_loss = {0.0, {}};
  m.losses.fan_base_includes_vr = true;
  m.losses.psu_loss = 0.04;
  m.losses.ac_dc_loss = 0.02;
  m.gpu_count_per_rack = 16;
  m.gpu_component = "gpu_hbm";
  m.global_derate = 0.90;
  m.aalc_fraction = 0.0;

  b.curves.f_anchors = {{600.0, 0.85}, {700.0, 1.0}};
  b.curves.hbm_anchors = {{600.0, 0.9}, {700.0, 1.0}};
  b.curves.gemm_anchors.clear();
  b.curves.p_min = 600.0;
  b.curves.p_max = 700.0;
  return b;
}

// "<anything>_<watts>" pins the column at that limit.
bool trailing_watts(const std::string& label, double* p) {
  const auto pos = label.rfind('_');
  if (pos == std::string::npos || pos + 1 >= label.size()) return false;
  for (std::size_t i = pos + 1; i < label.size(); ++i)
    if (!std::isdigit((unsigned char)label[i])) return false;
  *p = std::stod(label.substr(pos + 1));
  return true;
}

ComparisonColumn pinned_column(const std::string& label,
                               const ProvisionInputs& inputs,
                               const RackModel& model, const CurveSet& curves,
                               double p) {
  ComparisonColumn col;
  col.label = label;
  col.p = p;
  col.n_gpus =
      n_of_p(inputs, provisioned_rack_power(model, p) / inputs.gpus_per_rack);
  col.rack_count = col.n_gpus / inputs.gpus_per_rack;
  col.per_gpu_perf = inputs.reference_perf_scale * f_eval(curves, p);
  col.aggregate_perf = double(col.n_gpus) * col.per_gpu_perf;
  return col;
}

}  // namespace

std::vector<ComparisonColumn> comparison_table(const Scenario& scenario) {
  std::vector<ComparisonColumn> cols;
  for (const auto& label : scenario.comparison_labels) {
    if (label == scenario.provision.scenario_label) {
      ProvisionResult res = solve_relaxed(scenario.provision, scenario.rack_model,
                                          scenario.network, scenario.curves);
      ComparisonColumn col;
      col.label = label;
      col.p = res.p_star;
      col.n_gpus = res.n_gpus;
      col.rack_count = res.rack_count;
      col.per_gpu_perf = res.per_gpu_perf;
      col.aggregate_perf = res.aggregate_perf;
      cols.push_back(std::move(col));
      continue;
    }
    if (label == "h100_700") {
      const PlanBundle b = h100_reference();
      cols.push_back(pinned_column(label, b.inputs, b.model, b.curves, 700.0));
      continue;
    }
    double p = 0.0;
    if (trailing_watts(label, &p)) {
      cols.push_back(pinned_column(label, scenario.provision,
                                   scenario.rack_model, scenario.curves, p));
      continue;
    }
    throw ConfigError("comparison label '" + label +
                      "' matches no plan (expected the scenario label, "
                      "h100_700, or <name>_<watts>)");
  }
  for (auto& col : cols)
    if (!cols.empty() && cols.front().aggregate_perf > 0.0)
      col.aggregate_rel = col.aggregate_perf / cols.front().aggregate_perf;
  return cols;
}

namespace {

constexpr double kMsbCapacityW = 3.0e6;
constexpr double kSbCapacityW = 1.2e6;
constexpr double kRppCapacityW = 197.5e3;

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

std::vector<PhaseSegment> standard_profile() {
  return {{"compute", 48.0, 0.965}, {"exposed_comm", 12.0, 0.33}};
}

JobSpec make_job(const std::string& id, const std::string& rpp_id,
                 const std::vector<std::string>& rack_ids, int hosts_per_rack,
                 int priority, double offset_s) {
  JobSpec job;
  job.job_id = id;
  job.gpus_per_host = 2;
  job.phase_profile = standard_profile();
  job.priority = priority;
  job.phase_offset_s = offset_s;
  for (const auto& rack : rack_ids)
    for (int h = 0; h < hosts_per_rack; ++h)
      job.hosts.push_back({rack + "/h" + two_digits(h), rpp_id});
  job.size = long(job.hosts.size()) * job.gpus_per_host;
  return job;
}

// Two-MSB slice of the fleet. quad_rpps panels carry four racks and one
// rack-spanning job; the rest carry three racks split into a two-rack job
// and a single-rack job (the "small job" the phase report tracks).
Workload lifecycle_workload(int quad_rpps_per_sb, int total_rpps_per_sb,
                            double rack_q_w, bool split_triples,
                            const std::string& job_prefix) {
  Workload w;
  int job_counter = 0;
  auto offset = [&]() { return double((job_counter++ * 7) % 60); };
  for (int m = 0; m < 2; ++m) {
    PowerNode msb;
    msb.id = "msb" + std::to_string(m);
    msb.level = Level::MSB;
    msb.capacity_w = kMsbCapacityW;
    std::vector<PowerNode> sbs, rpps;
    for (int s = 0; s < 2; ++s) {
      PowerNode sb;
      sb.id = msb.id + "/sb" + std::to_string(s);
      sb.level = Level::SB;
      sb.capacity_w = kSbCapacityW;
      for (int r = 0; r < total_rpps_per_sb; ++r) {
        PowerNode rpp;
        rpp.id = sb.id + "/rpp" + std::to_string(r);
        rpp.level = Level::RPP;
        rpp.capacity_w = kRppCapacityW;
        const bool quad = r < quad_rpps_per_sb;
        const int racks = quad ? 4 : 3;
        const std::string tag = "m" + std::to_string(m) + "s" +
                                std::to_string(s) + "r" + std::to_string(r);
        std::vector<std::string> rack_ids;
        for (int k = 0; k < racks; ++k) {
          RackAssignment rack;
          rack.rack_id = rpp.id + "/r" + std::to_string(k);
          rack.type = RackType::gpu_compute;
          rack.provisioned_power_w = rack_q_w;
          rack.gpu_count = 36;
          rack.rpp_id = rpp.id;
          if (quad)
            rack.priority = 2;
          else
            rack.priority = (split_triples && k == racks - 1) ? 0 : 1;
          rack_ids.push_back(rack.rack_id);
          w.tree.racks.push_back(std::move(rack));
        }
        if (quad) {
          w.jobs.push_back(make_job(job_prefix + "-" + tag, rpp.id, rack_ids,
                                    18, 2, offset()));
        } else if (split_triples) {
          w.jobs.push_back(make_job(
              job_prefix + "-" + tag, rpp.id,
              {rack_ids.begin(), rack_ids.end() - 1}, 18, 1, offset()));
          w.jobs.push_back(make_job("small-" + tag, rpp.id,
                                    {rack_ids.back()}, 18, 0, offset()));
        } else {
          w.jobs.push_back(
              make_job(job_prefix + "-" + tag, rpp.id, rack_ids, 18, 1, offset()));
        }
        sb.children.push_back(rpp.id);
        rpps.push_back(std::move(rpp));
      }
      msb.children.push_back(sb.id);
      sbs.push_back(std::move(sb));
    }
    w.tree.nodes.push_back(std::move(msb));
    for (auto& sb : sbs) w.tree.nodes.push_back(std::move(sb));
    for (auto& rpp : rpps) w.tree.nodes.push_back(std::move(rpp));
  }
  return w;
}

PowerTree shared_feeder_tree(int racks, double rack_q_w,
                             const std::vector<int>& rack_priorities) {
  PowerTree tree;
  PowerNode msb{"msb0", Level::MSB, kMsbCapacityW, {"msb0/sb0"}, {}};
  PowerNode sb{"msb0/sb0", Level::SB, 1.0e6, {"msb0/sb0/rpp0"}, {}};
  PowerNode rpp{"msb0/sb0/rpp0", Level::RPP, kRppCapacityW, {}, {}};
  tree.nodes = {msb, sb, rpp};
  for (int k = 0; k < racks; ++k) {
    RackAssignment rack;
    rack.rack_id = rpp.id + "/r" + std::to_string(k);
    rack.type = RackType::gpu_compute;
    rack.provisioned_power_w = rack_q_w;
    rack.gpu_count = 36;
    rack.priority = rack_priorities.at(k);
    rack.rpp_id = rpp.id;
    tree.racks.push_back(std::move(rack));
  }
  return tree;
}

// Shared sections: provisioning inputs, rack model, curves, telemetry, and
// the fleet plan, identical across the built-in scenarios.
Scenario scenario_base() {
  Scenario sc;
  sc.schema = kScenarioSchema;
  sc.provision = ProvisionInputs{};
  sc.rack_model = RackModel::gb200_nvl72();
  sc.network = NetworkPowerModel::backend_defaults();
  sc.curves = CurveSet::gb200_defaults();

  sc.telemetry.psu = PsuMeterModel{};
  sc.telemetry.dcim = DcimMeterModel{};
  sc.telemetry.rack_trace = RackTraceParams{};
  sc.telemetry.aggregator_trace = RackTraceParams{};
  sc.telemetry.aggregator_trace.common_jitter_sd = 0.037;
  sc.telemetry.aggregator_trace.duration_s = 3600.0;
  sc.telemetry.aggregator_trace.seed = 17;
  sc.telemetry.rack_budget_w = 49750.0;
  sc.telemetry.racks_per_device = 4;

  const double q960 = provisioned_rack_power(sc.rack_model, 960.0);
  sc.fleet_tree = reference_fleet(q960, 36);

  sc.sim.curves = sc.curves;
  sc.sim.dimmer.limit_w = 0.97 * kRppCapacityW;
  sc.comparison_labels = {"h100_700", "gb200_1200", "gb200_960"};
  return sc;
}

}  // namespace

Scenario default_scenario() {
  Scenario sc = scenario_base();
  sc.label = "gb200_960";

  const double q960 = provisioned_rack_power(sc.rack_model, 960.0);
  const double q1200 = provisioned_rack_power(sc.rack_model, 1200.0);
  Workload ops = lifecycle_workload(3, 6, q960, true, "train");
  Workload plan = lifecycle_workload(0, 6, q1200, false, "plan");

  sc.sim.tree = ops.tree;
  sc.sim.jobs = ops.jobs;
  sc.sim.horizon_s = 1800.0;
  sc.sim.base_tdp = 1020.0;
  sc.sim.seed = 1;
  sc.workloads.emplace("ops", std::move(ops));
  sc.workloads.emplace("plan1200", std::move(plan));

  PhaseOverlay p1;
  p1.base_tdp = 1200.0;
  p1.plan_tdp = 1200.0;
  p1.workload = "plan1200";
  PhaseOverlay p2;
  p2.base_tdp = 960.0;
  p2.plan_tdp = 960.0;
  p2.workload = "ops";
  PhaseOverlay p3;
  p3.base_tdp = 1020.0;
  p3.plan_tdp = 960.0;
  p3.workload = "ops";
  PhaseOverlay p4 = p3;
  p4.boost_enabled = true;
  sc.phases.emplace("phase1_plan1200", std::move(p1));
  sc.phases.emplace("phase2_plan960", std::move(p2));
  sc.phases.emplace("phase3_uplift1020", std::move(p3));
  sc.phases.emplace("phase4_boost", std::move(p4));
  return sc;
}

Scenario case_study_scenario() {
  Scenario sc = scenario_base();
  sc.label = "case_study_shared_feeder";

  const double q960 = provisioned_rack_power(sc.rack_model, 960.0);
  sc.sim.tree = shared_feeder_tree(4, q960, {2, 2, 0, 3});
  const std::string rpp = "msb0/sb0/rpp0";

  JobSpec large = make_job("train_large", rpp,
                           {rpp + "/r0", rpp + "/r1"}, 18, 2, 0.0);
  JobSpec small = make_job("train_small", rpp, {rpp + "/r2"}, 18, 0, 24.0);
  JobSpec burst = make_job("eval_burst", rpp, {rpp + "/r3"}, 18, 3, 0.0);
  burst.phase_profile = {{"compute", 60.0, 0.97}};
  burst.start_s = 120.0;
  burst.end_s = 180.0;
  sc.sim.jobs = {std::move(large), std::move(small), std::move(burst)};

  // A neighboring feeder claims 22% of the panel budget for six minutes.
  sc.sim.limit_events = {{rpp, 120.0, 0.78}, {rpp, 480.0, 1.0}};
  sc.sim.horizon_s = 900.0;
  sc.sim.base_tdp = 1020.0;
  sc.sim.seed = 3;
  return sc;
}

Scenario overcommit_scenario() {
  Scenario sc = scenario_base();
  sc.label = "rpp_overcommit";

  const double q960 = provisioned_rack_power(sc.rack_model, 960.0);
  sc.sim.tree = shared_feeder_tree(5, q960, {1, 1, 1, 1, 1});
  const std::string rpp = "msb0/sb0/rpp0";
  for (int k = 0; k < 5; ++k)
    sc.sim.jobs.push_back(make_job("sync-r" + std::to_string(k), rpp,
                                   {rpp + "/r" + std::to_string(k)}, 18, 1,
                                   0.0));
  sc.sim.dimmer_enabled = false;  // protection path under test
  sc.sim.horizon_s = 600.0;
  sc.sim.base_tdp = 1020.0;
  sc.sim.seed = 5;
  return sc;
}

}  // namespace wattops
