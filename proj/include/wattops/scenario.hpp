#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wattops/curves.hpp"
#include "wattops/dimmer.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/provisioner.hpp"
#include "wattops/rack_model.hpp"
#include "wattops/simengine.hpp"
#include "wattops/telemetry.hpp"

namespace wattops {

// Per-phase overlay: a named subset of knobs applied on top of the base
// scenario so one file drives the whole lifecycle comparison.
struct PhaseOverlay {
  std::optional<double> base_tdp;
  std::optional<double> plan_tdp;  // provisioning limit backing this phase
  std::optional<bool> dimmer_enabled;
  std::optional<bool> boost_enabled;
  std::optional<double> horizon_s;
  std::optional<std::string> workload;  // named job-set override
};

struct TelemetrySection {
  PsuMeterModel psu;
  DcimMeterModel dcim;
  RackTraceParams rack_trace;       // deployment-validation fill workload
  RackTraceParams aggregator_trace;  // mixed production traffic, wider wander
  double rack_budget_w = 49750.0;
  int racks_per_device = 4;
};

// Named workload: a power tree plus the jobs running on it, selectable from
// a phase overlay.
struct Workload {
  PowerTree tree;
  std::vector<JobSpec> jobs;
};

struct Scenario {
  std::string schema;  // must equal kScenarioSchema
  std::string label;
  ProvisionInputs provision;
  RackModel rack_model;
  NetworkPowerModel network;
  CurveSet curves;
  TelemetrySection telemetry;
  PowerTree fleet_tree;  // fleet-scale plan backing the headroom analysis
  SimScenario sim;  // tree, jobs, dimmer, smoother, boost, latency, seeds
  std::map<std::string, Workload> workloads;
  std::map<std::string, PhaseOverlay> phases;
  std::vector<std::string> comparison_labels;  // provision comparison columns
};

// Parses and validates a scenario document. Unknown keys anywhere are
// rejected; cross-references (job hosts to racks, rack to RPP ids) must
// resolve. Throws ParseError with a JSON-pointer-style location.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Canonical serialization: stable key order, fixed float formatting.
// parse(serialize(parse(x))) == parse(x).
std::string serialize_scenario(const Scenario& scenario);

// FNV-1a 64-bit over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& scenario);

struct RunManifest {
  std::string command;
  std::string scenario_label;
  std::string scenario_hash_hex;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string phase;
  std::vector<std::string> outputs;
  std::map<std::string, double> metrics;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& json_text);
RunManifest load_manifest(const std::string& path);

// Materializes the simulation input for one phase: the base sim plus the
// overlay, with the scenario curves attached and the overlay's workload
// resolved. An empty phase name returns the base sim unchanged.
SimScenario phase_sim(const Scenario& scenario, const std::string& phase);

// Provisioning limit backing a phase: the overlay's plan_tdp, else its
// base_tdp, else the base sim's base_tdp.
double phase_plan_tdp(const Scenario& scenario, const std::string& phase);

struct ComparisonColumn {
  std::string label;
  double p = 0.0;             // operating limit for the column
  long n_gpus = 0;
  long rack_count = 0;
  double per_gpu_perf = 0.0;
  double aggregate_perf = 0.0;
  double aggregate_rel = 0.0;  // versus the first column
};

// Cross-plan comparison over scenario.comparison_labels. The scenario's own
// label resolves to the solved plan; "h100_700" to the built-in
// prior-generation baseline; any other label ending in "_<watts>" to the
// scenario's plan pinned at that limit.
std::vector<ComparisonColumn> comparison_table(const Scenario& scenario);

// Built-in default scenario (fleet, workloads, phases) mirroring the
// published deployment; written by `wattops init-scenario` and shipped under
// scenarios/default.json.
Scenario default_scenario();

// Stress variant: one feeder over-committed, protection off by default.
Scenario overcommit_scenario();

// Shared-feeder case study: limit dropped 22% mid-run plus a transient
// high-priority surge.
Scenario case_study_scenario();

}  // namespace wattops
