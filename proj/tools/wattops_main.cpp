#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wattops/curves.hpp"
#include "wattops/dimmer.hpp"
#include "wattops/errors.hpp"
#include "wattops/hierarchy.hpp"
#include "wattops/provisioner.hpp"
#include "wattops/rack_model.hpp"
#include "wattops/scenario.hpp"
#include "wattops/simengine.hpp"
#include "wattops/telemetry.hpp"
#include "wattops/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wattops;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void init_logging() {
  const char* env = std::getenv("WATTOPS_LOG");
  if (!env) return;
  const std::string v(env);
  if (v == "quiet")
    g_log_level = 0;
  else if (v == "info")
    g_log_level = 1;
  else if (v == "debug")
    g_log_level = 2;
}

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[wattops] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (g_log_level >= 2) std::cerr << "[wattops] " << msg << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

struct RunContext {
  Scenario scenario;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::string phase;
};

RunContext make_context(const std::string& scenario_path,
                        const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override,
                        const std::string& phase, bool literal_dimmer) {
  RunContext ctx;
  ctx.scenario = load_scenario(scenario_path);
  ctx.out_dir = out_dir;
  fs::create_directories(ctx.out_dir);
  ctx.phase = phase;
  ctx.seed = seed_override ? *seed_override : ctx.scenario.sim.seed;
  if (seed_override) {
    ctx.scenario.sim.seed = *seed_override;
    ctx.scenario.telemetry.psu.seed = *seed_override;
    ctx.scenario.telemetry.dcim.seed = *seed_override + 1;
    ctx.scenario.telemetry.rack_trace.seed = *seed_override + 2;
    ctx.scenario.telemetry.aggregator_trace.seed = *seed_override + 3;
  }
  if (literal_dimmer) ctx.scenario.sim.dimmer.literal_form = true;
  log_debug("loaded scenario '" + ctx.scenario.label + "' from " +
            scenario_path);
  return ctx;
}

RunManifest base_manifest(const RunContext& ctx, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.scenario_label = ctx.scenario.label;
  m.scenario_hash_hex = hash_hex(scenario_hash(ctx.scenario));
  m.seed = ctx.seed;
  m.tool_version = kVersion;
  m.phase = ctx.phase;
  return m;
}

void finish_manifest(const RunContext& ctx, RunManifest& manifest) {
  manifest.outputs.push_back("manifest.json");
  write_file(ctx.out_dir / "manifest.json", serialize_manifest(manifest));
  log_info("wrote " + (ctx.out_dir / "manifest.json").string());
}

// ---------------------------------------------------------------------------

int cmd_provision(const RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  RunManifest manifest = base_manifest(ctx, "provision");

  ProvisionResult res =
      solve_relaxed(sc.provision, sc.rack_model, sc.network, sc.curves);

  {
    std::ostringstream csv;
    csv << "item,amount_w,remaining_w\n";
    for (const auto& row : res.ledger)
      csv << row.item << "," << fmt(row.amount_w) << ","
          << fmt(row.remaining_w) << "\n";
    write_file(ctx.out_dir / "ledger.csv", csv.str());
    manifest.outputs.push_back("ledger.csv");
  }

  {
    const PerGpuCost cost = g_of_p(sc.rack_model, sc.network);
    std::ostringstream csv;
    csv << "p_w,n_gpus,racks,f,throughput_rel_pmax,eta\n";
    const double step = 10.0;
    for (double p = sc.provision.p_min; p <= sc.provision.p_max + 1e-9;
         p += step) {
      const double pp = std::min(p, sc.provision.p_max);
      try {
        const long n =
            n_of_p(sc.provision, provisioned_rack_power(sc.rack_model, pp) /
                                     sc.provision.gpus_per_rack);
        csv << fmt(pp) << "," << n << ","
            << n / sc.provision.gpus_per_rack << ","
            << fmt(f_eval(sc.curves, pp)) << ","
            << fmt(throughput_rel(sc.provision, sc.rack_model, sc.curves, pp))
            << "," << fmt(eta_eval(sc.curves, cost, pp)) << "\n";
      } catch (const InfeasibleError&) {
        log_debug("grid point " + fmt(pp) + " W infeasible, skipped");
      }
    }
    write_file(ctx.out_dir / "grid.csv", csv.str());
    manifest.outputs.push_back("grid.csv");
  }

  {
    json op{{"p_star_w", res.p_star},
            {"eta", res.eta.eta},
            {"eta_p_star_w", res.eta.p_star},
            {"eta_unimodal", res.eta.unimodal},
            {"n_gpus", res.n_gpus},
            {"rack_count", res.rack_count},
            {"throughput_rel_pmax", res.throughput_rel_pmax},
            {"per_gpu_perf", res.per_gpu_perf},
            {"aggregate_perf", res.aggregate_perf},
            {"n_max_binding", res.n_max_binding}};
    write_file(ctx.out_dir / "operating_point.json", op.dump(2) + "\n");
    manifest.outputs.push_back("operating_point.json");
  }

  std::vector<ComparisonColumn> cols = comparison_table(sc);
  {
    std::ostringstream csv;
    csv << "label,p_w,n_gpus,racks,per_gpu_perf,aggregate_perf,aggregate_rel\n";
    for (const auto& c : cols)
      csv << c.label << "," << fmt(c.p) << "," << c.n_gpus << ","
          << c.rack_count << "," << fmt(c.per_gpu_perf) << ","
          << fmt(c.aggregate_perf) << "," << fmt(c.aggregate_rel) << "\n";
    write_file(ctx.out_dir / "comparison.csv", csv.str());
    manifest.outputs.push_back("comparison.csv");
  }

  manifest.metrics = {
      {"p_star_w", res.p_star},
      {"eta", res.eta.eta},
      {"n_gpus", double(res.n_gpus)},
      {"rack_count", double(res.rack_count)},
      {"throughput_rel_pmax", res.throughput_rel_pmax},
      {"aggregate_perf", res.aggregate_perf},
      {"n_max_binding", res.n_max_binding ? 1.0 : 0.0},
  };
  finish_manifest(ctx, manifest);

  std::printf("operating point: %.0f W per accelerator\n", res.p_star);
  std::printf("  accelerators:      %ld (%ld racks)\n", res.n_gpus,
              res.rack_count);
  std::printf("  throughput vs top-bin plan: %.4f (%+.2f%%)\n",
              res.throughput_rel_pmax, 100.0 * (res.throughput_rel_pmax - 1.0));
  std::printf("  perf per watt at chosen point: %.6g\n", res.eta.eta);
  std::printf("\n%-14s %7s %9s %7s %9s %12s %8s\n", "plan", "p(W)", "gpus",
              "racks", "per-gpu", "aggregate", "rel");
  for (const auto& c : cols)
    std::printf("%-14s %7.0f %9ld %7ld %9.4f %12.1f %8.4f\n", c.label.c_str(),
                c.p, c.n_gpus, c.rack_count, c.per_gpu_perf, c.aggregate_perf,
                c.aggregate_rel);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_validate_tdp(const RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  RunManifest manifest = base_manifest(ctx, "validate-tdp");

  const double p_lo = sc.sim.dimmer.min_tdp;
  const double p_hi = sc.curves.p_max;
  auto trace_fn = [&](double tdp) {
    return gen_rack_trace(sc.telemetry.rack_trace, tdp);
  };
  UpliftResult uplift = validate_tdp_uplift(trace_fn, sc.telemetry.psu,
                                            sc.telemetry.rack_budget_w, p_lo,
                                            p_hi, 10.0);
  log_info("validated uplift: " + fmt(uplift.tdp) + " W (worst-minute p70 " +
           fmt(uplift.p70_at_tdp) + " W against budget " +
           fmt(sc.telemetry.rack_budget_w) + " W)");

  {
    json j{{"tdp_w", uplift.tdp},
           {"p70_at_tdp_w", uplift.p70_at_tdp},
           {"rack_budget_w", sc.telemetry.rack_budget_w},
           {"p_lo_w", p_lo},
           {"p_hi_w", p_hi}};
    write_file(ctx.out_dir / "uplift.json", j.dump(2) + "\n");
    manifest.outputs.push_back("uplift.json");
  }

  HeadroomReport headroom =
      planned_headroom(sc.fleet_tree, sc.sim.msb_it_budget_w);
  for (Level level : {Level::MSB, Level::RPP}) {
    std::ostringstream csv;
    csv << "headroom_w,cumulative_fraction\n";
    for (const auto& [h, frac] : headroom_cdf(headroom, level))
      csv << fmt(h) << "," << fmt(frac) << "\n";
    const std::string name = "headroom_cdf_" + to_string(level) + ".csv";
    write_file(ctx.out_dir / name, csv.str());
    manifest.outputs.push_back(name);
  }
  {
    std::ostringstream csv;
    csv << "id,level,budget_w,planned_w,headroom_w,gpus,per_gpu_w\n";
    for (const auto& n : headroom.per_node) {
      csv << n.id << "," << to_string(n.level) << "," << fmt(n.budget_w) << ","
          << fmt(n.planned_w) << "," << fmt(n.headroom_w) << "," << n.gpus
          << ",";
      if (n.per_gpu_w) csv << fmt(*n.per_gpu_w);
      csv << "\n";
    }
    write_file(ctx.out_dir / "headroom_nodes.csv", csv.str());
    manifest.outputs.push_back("headroom_nodes.csv");
  }

  // Aggregator shoot-out: biased meter streams from co-fed racks against a
  // facility meter on their summed draw.
  AggregatorChoice choice;
  {
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
    MinuteAggregation agg =
        aggregate_minutes(streams, sc.telemetry.psu.log_interval_s);
    std::vector<double> dcim = dcim_minute_max(total, sc.telemetry.dcim);
    choice = select_aggregator(agg, dcim, 90.0);
    json j{{"best", choice.best},
           {"mean_ratio", choice.mean_ratio},
           {"qualifying_minutes", choice.qualifying_minutes}};
    write_file(ctx.out_dir / "aggregator.json", j.dump(2) + "\n");
    manifest.outputs.push_back("aggregator.json");
  }

  manifest.metrics = {
      {"uplift_tdp_w", uplift.tdp},
      {"p70_at_tdp_w", uplift.p70_at_tdp},
      {"rack_budget_w", sc.telemetry.rack_budget_w},
      {"stranded_fraction", headroom.stranded_fraction},
      {"aggregator_qualifying_minutes", double(choice.qualifying_minutes)},
      {"aggregator_is_p70", choice.best == "p70" ? 1.0 : 0.0},
  };
  finish_manifest(ctx, manifest);

  std::printf("validated per-accelerator limit: %.0f W\n", uplift.tdp);
  std::printf("  worst-minute p70 at that limit: %.1f W (budget %.1f W)\n",
              uplift.p70_at_tdp, sc.telemetry.rack_budget_w);
  std::printf("  planned stranded fraction: %.4f\n",
              headroom.stranded_fraction);
  std::printf("  aggregator pick: %s (mean ratio %.4f over %d minutes)\n",
              choice.best.c_str(), choice.mean_ratio.at(choice.best),
              choice.qualifying_minutes);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunContext& ctx) {
  const Scenario& sc = ctx.scenario;
  RunManifest manifest = base_manifest(ctx, "simulate");

  SimScenario sim = phase_sim(sc, ctx.phase);
  sim.seed = ctx.seed;
  if (!ctx.phase.empty()) log_info("running phase '" + ctx.phase + "'");
  SimReport report = run_simulation(sim);

  {
    std::ostringstream csv;
    csv << "t_s,throughput_factor,total_power_w,stranded_power_w\n";
    for (std::size_t i = 0; i < report.throughput_timeline.size(); ++i)
      csv << i << "," << fmt(report.throughput_timeline[i]) << ","
          << fmt(report.total_power_timeline[i]) << ","
          << fmt(report.stranded_power_timeline[i]) << "\n";
    write_file(ctx.out_dir / "timeline.csv", csv.str());
    manifest.outputs.push_back("timeline.csv");
  }
  {
    std::ostringstream csv;
    csv << "time_s,kind,device_id,server_id,tdp_w,overdraw\n";
    for (const auto& ev : report.capping_events)
      csv << fmt(ev.time_s) << ",cap," << ev.device_id << "," << ev.server_id
          << "," << fmt(ev.tdp) << ",\n";
    for (const auto& ev : report.trips)
      csv << fmt(ev.time_s) << ",trip," << ev.device_id << ",,,"
          << fmt(ev.overdraw) << "\n";
    write_file(ctx.out_dir / "events.csv", csv.str());
    manifest.outputs.push_back("events.csv");
  }
  {
    std::ostringstream csv;
    csv << "job_id,mean_host_power_w,mean_throughput_factor,capped_seconds,"
           "mean_host_power_capped_w,mean_host_power_uncapped_w\n";
    for (const auto& s : report.per_job)
      csv << s.job_id << "," << fmt(s.mean_host_power_w) << ","
          << fmt(s.mean_throughput_factor) << "," << fmt(s.capped_seconds)
          << "," << fmt(s.mean_host_power_capped_w) << ","
          << fmt(s.mean_host_power_uncapped_w) << "\n";
    write_file(ctx.out_dir / "jobs.csv", csv.str());
    manifest.outputs.push_back("jobs.csv");
  }

  const double plan_tdp = phase_plan_tdp(sc, ctx.phase);
  const double f_base = f_eval(sc.curves, sim.base_tdp);
  long n_gpus = 0;
  try {
    n_gpus = n_of_p(sc.provision,
                    provisioned_rack_power(sc.rack_model, plan_tdp) /
                        sc.provision.gpus_per_rack);
  } catch (const InfeasibleError&) {
    log_info("plan limit infeasible for fleet sizing; index reported as 0");
  }
  double small_job_perf = 0.0;
  {
    long min_size = -1;
    for (const auto& job : sim.jobs) {
      const long size = long(job.hosts.size()) * job.gpus_per_host;
      if (min_size < 0 || size < min_size) min_size = size;
    }
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < sim.jobs.size(); ++i) {
      const auto& job = sim.jobs[i];
      if (long(job.hosts.size()) * job.gpus_per_host != min_size) continue;
      sum += report.per_job[i].mean_throughput_factor;
      count += 1;
    }
    if (count > 0) small_job_perf = f_base * sum / double(count);
  }
  const double index =
      double(n_gpus) * f_base * report.mean_throughput_factor;

  manifest.metrics = {
      {"mean_throughput_factor", report.mean_throughput_factor},
      {"peak_power_w", report.peak_power_w},
      {"base_tdp_w", sim.base_tdp},
      {"plan_tdp_w", plan_tdp},
      {"f_base", f_base},
      {"n_gpus", double(n_gpus)},
      {"throughput_index", index},
      {"small_job_perf", small_job_perf},
      {"cap_events", double(report.capping_events.size())},
      {"trips", double(report.trips.size())},
  };
  finish_manifest(ctx, manifest);

  std::printf("simulated %.0f s of '%s'%s%s\n", sim.horizon_s,
              sc.label.c_str(), ctx.phase.empty() ? "" : " phase ",
              ctx.phase.c_str());
  std::printf("  mean throughput factor: %.4f\n",
              report.mean_throughput_factor);
  std::printf("  peak facility power:    %.1f W\n", report.peak_power_w);
  std::printf("  capping commands: %zu, breaker trips: %zu\n",
              report.capping_events.size(), report.trips.size());
  std::printf("  throughput index: %.1f (%ld accelerators at plan %.0f W)\n",
              index, n_gpus, plan_tdp);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& out_dir) {
  fs::create_directories(out_dir);
  struct Row {
    std::string run, phase, label, hash;
    double index = 0.0, small = 0.0;
    bool mismatch = false;
  };
  std::vector<Row> rows;
  for (const auto& dir : run_dirs) {
    RunManifest m = load_manifest((fs::path(dir) / "manifest.json").string());
    Row row;
    row.run = dir;
    row.phase = m.phase.empty() ? m.command : m.phase;
    row.label = m.scenario_label;
    row.hash = m.scenario_hash_hex;
    auto it = m.metrics.find("throughput_index");
    if (it == m.metrics.end())
      throw ConfigError("manifest in " + dir +
                        " has no throughput_index metric (was this a "
                        "simulate run?)");
    row.index = it->second;
    auto st = m.metrics.find("small_job_perf");
    row.small = st == m.metrics.end() ? 0.0 : st->second;
    rows.push_back(std::move(row));
  }
  bool any_mismatch = false;
  for (auto& row : rows) {
    row.mismatch = row.hash != rows.front().hash;
    if (row.mismatch) {
      any_mismatch = true;
      std::cerr << "warning: run " << row.run
                << " was produced from a different scenario (hash " << row.hash
                << " vs " << rows.front().hash << "); comparison may not be "
                << "apples-to-apples\n";
    }
  }
  const double base_index = rows.front().index;
  const double base_small = rows.front().small;

  std::ostringstream csv;
  csv << "run,phase,scenario_label,throughput_index,index_rel,small_job_perf,"
         "small_job_rel,small_job_latency_x,scenario_hash,hash_mismatch\n";
  std::ostringstream txt;
  txt << "normalized training throughput (first run = 1.000)\n\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %12s %8s %10s %12s  %s\n", "phase",
                "index", "rel", "small-job", "latency(x)", "bar");
  txt << line;
  for (const auto& row : rows) {
    const double rel = base_index > 0.0 ? row.index / base_index : 0.0;
    const double small_rel = base_small > 0.0 ? row.small / base_small : 0.0;
    const double latency_x = small_rel > 0.0 ? 1.0 / small_rel : 0.0;
    csv << row.run << "," << row.phase << "," << row.label << ","
        << fmt(row.index) << "," << fmt(rel) << "," << fmt(row.small) << ","
        << fmt(small_rel) << "," << fmt(latency_x) << "," << row.hash << ","
        << (row.mismatch ? "true" : "false") << "\n";
    std::string bar(std::size_t(std::max(0.0, rel) * 40.0 + 0.5), '#');
    std::snprintf(line, sizeof(line), "%-22s %12.1f %8.4f %10.4f %12.3f  ",
                  row.phase.c_str(), row.index, rel, latency_x > 0.0 ? small_rel : 0.0,
                  latency_x);
    txt << line << bar << (row.mismatch ? "  (!)" : "") << "\n";
  }
  if (any_mismatch)
    txt << "\n(!) run built from a different scenario file; treat with care\n";

  write_file(fs::path(out_dir) / "report.csv", csv.str());
  write_file(fs::path(out_dir) / "report.txt", txt.str());

  RunManifest manifest;
  manifest.command = "report";
  manifest.scenario_label = rows.front().label;
  manifest.scenario_hash_hex = rows.front().hash;
  manifest.seed = 0;
  manifest.tool_version = kVersion;
  manifest.phase = "";
  manifest.outputs = {"report.csv", "report.txt", "manifest.json"};
  manifest.metrics = {{"runs", double(rows.size())},
                      {"hash_mismatch", any_mismatch ? 1.0 : 0.0}};
  write_file(fs::path(out_dir) / "manifest.json",
             serialize_manifest(manifest));

  std::fputs(txt.str().c_str(), stdout);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_init_scenario(const std::string& preset, const std::string& out_path) {
  Scenario sc;
  if (preset == "default")
    sc = default_scenario();
  else if (preset == "case-study")
    sc = case_study_scenario();
  else if (preset == "overcommit")
    sc = overcommit_scenario();
  else
    throw ConfigError("unknown preset '" + preset +
                      "' (expected default, case-study, or overcommit)");
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  write_file(out_path, serialize_scenario(sc));
  std::printf("wrote %s (%s, hash %s)\n", out_path.c_str(), sc.label.c_str(),
              hash_hex(scenario_hash(sc)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"power provisioning, validation, and runtime capping toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", phase, preset = "default";
  std::string init_out = "scenario.json";
  std::optional<std::uint64_t> seed;
  bool literal_dimmer = false;
  std::vector<std::string> run_dirs;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();
    if (needs_out) cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the scenario RNG seed");
  };

  CLI::App* provision =
      app.add_subcommand("provision", "size the fleet and pick the per-"
                                      "accelerator limit");
  add_common(provision, true);

  CLI::App* validate =
      app.add_subcommand("validate-tdp", "validate the capped limit against "
                                         "the rack budget and rank "
                                         "aggregators");
  add_common(validate, true);

  CLI::App* simulate =
      app.add_subcommand("simulate", "run the 1 Hz operations simulation");
  add_common(simulate, true);
  simulate->add_option("--phase", phase, "phase overlay to apply");
  simulate->add_flag("--compat-literal-dimmer", literal_dimmer,
                     "use the published per-group capping arithmetic");

  CLI::App* report =
      app.add_subcommand("report", "compare simulate runs side by side");
  report->add_option("runs", run_dirs, "simulate output directories")
      ->required()
      ->expected(-1);
  report->add_option("--out", out_dir, "output directory");

  CLI::App* init =
      app.add_subcommand("init-scenario", "write a built-in scenario file");
  init->add_option("--preset", preset, "default, case-study, or overcommit");
  init->add_option("--out", init_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (provision->parsed())
      return cmd_provision(
          make_context(scenario_path, out_dir, seed, "", false));
    if (validate->parsed())
      return cmd_validate_tdp(
          make_context(scenario_path, out_dir, seed, "", false));
    if (simulate->parsed())
      return cmd_simulate(
          make_context(scenario_path, out_dir, seed, phase, literal_dimmer));
    if (report->parsed()) return cmd_report(run_dirs, out_dir);
    if (init->parsed()) return cmd_init_scenario(preset, init_out);
  } catch (const ParseError& e) {
    std::cerr << json{{"error", "parse"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << json{{"error", "infeasible"}, {"message", e.what()}}.dump()
              << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump()
              << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump()
              << "\n";
    return 4;
  }
  return 0;
}
