#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <optional>
#include <string>

#include "wattops/curves.hpp"
#include "wattops/errors.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/provisioner.hpp"
#include "wattops/rack_model.hpp"
#include "wattops/scenario.hpp"
#include "wattops/simengine.hpp"
#include "wattops/telemetry.hpp"
#include "wattops/version.hpp"

namespace py = pybind11;
using namespace wattops;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

py::dict provision_dict(const std::string& scenario_json) {
  const Scenario sc = parse_scenario(scenario_json);
  const ProvisionResult res =
      solve_relaxed(sc.provision, sc.rack_model, sc.network, sc.curves);
  py::dict d;
  d["p_star_w"] = res.p_star;
  d["n_gpus"] = res.n_gpus;
  d["rack_count"] = res.rack_count;
  d["throughput_rel_pmax"] = res.throughput_rel_pmax;
  d["per_gpu_perf"] = res.per_gpu_perf;
  d["aggregate_perf"] = res.aggregate_perf;
  d["n_max_binding"] = res.n_max_binding;
  py::dict eta;
  eta["p_star_w"] = res.eta.p_star;
  eta["eta"] = res.eta.eta;
  eta["unimodal"] = res.eta.unimodal;
  d["eta"] = eta;
  py::list ledger;
  for (const auto& row : res.ledger) {
    py::dict r;
    r["item"] = row.item;
    r["amount_w"] = row.amount_w;
    r["remaining_w"] = row.remaining_w;
    ledger.append(r);
  }
  d["ledger"] = ledger;
  return d;
}

py::list comparison_list(const std::string& scenario_json) {
  const Scenario sc = parse_scenario(scenario_json);
  py::list out;
  for (const auto& c : comparison_table(sc)) {
    py::dict d;
    d["label"] = c.label;
    d["p_w"] = c.p;
    d["n_gpus"] = c.n_gpus;
    d["rack_count"] = c.rack_count;
    d["per_gpu_perf"] = c.per_gpu_perf;
    d["aggregate_perf"] = c.aggregate_perf;
    d["aggregate_rel"] = c.aggregate_rel;
    out.append(d);
  }
  return out;
}

py::dict simulate_dict(const std::string& scenario_json,
                       const std::string& phase,
                       std::optional<std::uint64_t> seed) {
  const Scenario sc = parse_scenario(scenario_json);
  SimScenario sim = phase_sim(sc, phase);
  if (seed) sim.seed = *seed;
  const SimReport r = run_simulation(sim);
  py::dict d;
  d["seed"] = r.seed;
  d["mean_throughput_factor"] = r.mean_throughput_factor;
  d["peak_power_w"] = r.peak_power_w;
  d["cap_events"] = r.capping_events.size();
  d["trips"] = r.trips.size();
  d["throughput_timeline"] = r.throughput_timeline;
  d["total_power_timeline"] = r.total_power_timeline;
  d["stranded_power_timeline"] = r.stranded_power_timeline;
  py::list jobs;
  for (const auto& j : r.per_job) {
    py::dict s;
    s["job_id"] = j.job_id;
    s["mean_host_power_w"] = j.mean_host_power_w;
    s["mean_throughput_factor"] = j.mean_throughput_factor;
    s["capped_seconds"] = j.capped_seconds;
    s["mean_host_power_capped_w"] = j.mean_host_power_capped_w;
    s["mean_host_power_uncapped_w"] = j.mean_host_power_uncapped_w;
    jobs.append(s);
  }
  d["per_job"] = jobs;
  return d;
}

// Mirrors the validate-tdp command: uplift scan, fleet headroom, and the
// aggregator shoot-out on co-fed biased meters.
py::dict validate_tdp_dict(const std::string& scenario_json) {
  const Scenario sc = parse_scenario(scenario_json);
  auto trace_fn = [&](double tdp) {
    return gen_rack_trace(sc.telemetry.rack_trace, tdp);
  };
  const UpliftResult uplift = validate_tdp_uplift(
      trace_fn, sc.telemetry.psu, sc.telemetry.rack_budget_w,
      sc.sim.dimmer.min_tdp, sc.curves.p_max, 10.0);
  const HeadroomReport headroom =
      planned_headroom(sc.fleet_tree, sc.sim.msb_it_budget_w);

  std::vector<PsuStream> streams;
  GroundTruthTrace total;
  for (int i = 0; i < sc.telemetry.racks_per_device; ++i) {
    RackTraceParams params = sc.telemetry.aggregator_trace;
    params.seed += std::uint64_t(i);
    GroundTruthTrace truth = gen_rack_trace(params, sc.sim.base_tdp);
    if (i == 0) {
      total = truth;
    } else {
      for (std::size_t k = 0; k < total.samples.size(); ++k)
        total.samples[k] += truth.samples[k];
    }
    PsuMeterModel meter = sc.telemetry.psu;
    meter.seed += std::uint64_t(i);
    streams.push_back(psu_stream(truth, meter));
  }
  const MinuteAggregation agg =
      aggregate_minutes(streams, sc.telemetry.psu.log_interval_s);
  const std::vector<double> dcim = dcim_minute_max(total, sc.telemetry.dcim);
  const AggregatorChoice choice = select_aggregator(agg, dcim, 90.0);

  py::dict d;
  d["tdp_w"] = uplift.tdp;
  d["p70_at_tdp_w"] = uplift.p70_at_tdp;
  d["rack_budget_w"] = sc.telemetry.rack_budget_w;
  d["stranded_fraction"] = headroom.stranded_fraction;
  py::dict ag;
  ag["best"] = choice.best;
  ag["mean_ratio"] = choice.mean_ratio;
  ag["qualifying_minutes"] = choice.qualifying_minutes;
  d["aggregator"] = ag;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "power provisioning, deployment validation, and runtime capping";
  m.attr("__version__") = kVersion;
  m.attr("SCENARIO_SCHEMA") = kScenarioSchema;

  py::register_exception<ParseError>(m, "ScenarioParseError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<ConfigError>(m, "ConfigurationError");

  m.def("default_scenario_json",
        [] { return serialize_scenario(default_scenario()); },
        "Canonical JSON for the built-in fleet scenario.");
  m.def("case_study_scenario_json",
        [] { return serialize_scenario(case_study_scenario()); },
        "Canonical JSON for the shared-feeder squeeze case study.");
  m.def("overcommit_scenario_json",
        [] { return serialize_scenario(overcommit_scenario()); },
        "Canonical JSON for the unprotected over-commit stress scenario.");
  m.def("canonical_json",
        [](const std::string& text) {
          return serialize_scenario(parse_scenario(text));
        },
        py::arg("scenario_json"),
        "Parses a scenario document and re-serializes it canonically.");
  m.def("scenario_hash_hex",
        [](const std::string& text) {
          return hash_hex(scenario_hash(parse_scenario(text)));
        },
        py::arg("scenario_json"),
        "FNV-1a 64 hash of the canonical serialization, as hex.");
  m.def("provision", &provision_dict, py::arg("scenario_json"),
        "Sizes the fleet and picks the per-accelerator limit.");
  m.def("comparison", &comparison_list, py::arg("scenario_json"),
        "Cross-plan comparison over the scenario's comparison labels.");
  m.def("simulate", &simulate_dict, py::arg("scenario_json"),
        py::arg("phase") = "", py::arg("seed") = py::none(),
        "Runs the 1 Hz operations simulation for one phase.");
  m.def("validate_tdp", &validate_tdp_dict, py::arg("scenario_json"),
        "Validates the capped limit against the rack budget and ranks "
        "aggregation statistics.");
}
