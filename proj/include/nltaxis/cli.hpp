#pragma once

// Command-line front end: run, sweep, compare, opcheck, plot.
// Exit codes: 0 success, 1 configuration or input error, 2 a simulation
// did not complete (ill-posed abort or tolerance failure), 3 opcheck failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nltaxis/analysis.hpp"
#include "nltaxis/config.hpp"
#include "nltaxis/opcheck.hpp"
#include "nltaxis/output.hpp"
#include "nltaxis/plot.hpp"

namespace nltaxis {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitIncomplete = 2, kExitOpcheck = 3 };

namespace cli_detail {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline void write_run(OutputDir& dir, const std::string& prefix, const Grid1D& grid, const RunResult& r,
                      bool svg) {
  const std::string profiles = profiles_csv(grid, r.samples);
  const std::string diags = diagnostics_csv(r.samples);
  dir.write(prefix + "profiles.csv", profiles);
  dir.write(prefix + "diagnostics.csv", diags);
  if (svg && !r.samples.empty()) {
    for (const auto& [name, doc] : plot_csv(profiles, prefix + "profiles")) dir.write(name, doc);
    for (const auto& [name, doc] : plot_csv(diags, prefix + "diagnostics")) dir.write(name, doc);
  }
}

inline void write_manifest(OutputDir& dir, const std::string& command, json config, json body,
                           double wall) {
  json m;
  m["tool"] = "nltaxis";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = std::move(config);
  for (auto& [k, v] : body.items()) m[k] = v;
  m["outputs"] = dir.listing();
  m["wall_clock_seconds"] = wall;
  std::ofstream f(dir.root() / "manifest.json");
  f << m.dump(2) << '\n';
  if (!f) throw OutputError("cannot write manifest");
}

struct Common {
  std::string config;
  std::string out;
  std::string format;
};

inline ExperimentConfig load(const Common& c) {
  ExperimentConfig ec = load_config(c.config);
  if (!c.out.empty()) ec.output_dir = c.out;
  if (!c.format.empty()) {
    if (c.format == "csv")
      ec.svg = false;
    else if (c.format == "svg" || c.format == "csv,svg" || c.format == "svg,csv")
      ec.svg = true;
    else
      throw ConfigError("--format must be csv, svg or csv,svg");
  }
  ec.resolved["output"] = {{"dir", ec.output_dir}, {"format", ec.svg ? "csv,svg" : "csv"}};
  return ec;
}

inline int cmd_run(const Common& c, std::ostream& out) {
  const ExperimentConfig ec = load(c);
  const auto t0 = Clock::now();
  const RunResult r = integrate(ec.solver);
  OutputDir dir(ec.output_dir);
  write_run(dir, "", ec.solver.grid, r, ec.svg);
  json body;
  body["status"] = std::string(to_string(r.status));
  body["integrator"] = stats_json(r);
  body["diagnostics"] = diagnostics_summary(r);
  write_manifest(dir, "run", ec.resolved, body, seconds_since(t0));
  out << "status " << to_string(r.status) << " at t = " << fmt_double(r.t_final);
  if (!r.message.empty()) out << " (" << r.message << ")";
  out << "\n";
  return r.status == RunStatus::Completed ? kExitOk : kExitIncomplete;
}

inline std::string radius_dir(double r, std::vector<std::string>& used) {
  std::string name = "r_" + fmt_double(r);
  const std::string base = name;
  for (int k = 2; std::find(used.begin(), used.end(), name) != used.end(); ++k)
    name = base + "_" + std::to_string(k);
  used.push_back(name);
  return name + "/";
}

inline int cmd_sweep(const Common& c, const std::string& radii_flag, std::size_t jobs, std::ostream& out) {
  ExperimentConfig ec = load(c);
  if (!radii_flag.empty()) ec.radii = detail::parse_list("--radii", radii_flag);
  if (ec.radii.empty()) throw ConfigError("sweep needs a nonempty radii list");
  ec.resolved["sweep"]["radii"] = ec.radii;
  ec.resolved["sweep"]["jobs"] = jobs;
  Formulation nl = ec.solver.formulation;
  if (nl.tag == FormulationTag::Local) nl.tag = FormulationTag::NonlocalA;
  const auto t0 = Clock::now();
  const SweepReport rep = convergence_sweep(ec.solver, nl, ec.radii, jobs);

  OutputDir dir(ec.output_dir);
  write_run(dir, "reference/", ec.solver.grid, rep.reference, ec.svg);
  std::vector<std::string> used;
  json runs = json::array();
  for (const auto& e : rep.entries) {
    const std::string sub = radius_dir(e.radius, used);
    write_run(dir, sub, ec.solver.grid, e.result, ec.svg);
    runs.push_back({{"r", e.radius},
                    {"directory", sub},
                    {"completed", e.completed},
                    {"error", e.error},
                    {"integrator", stats_json(e.result)}});
  }
  std::string dist = "t,r,d\n";
  for (double t : rep.times)
    for (std::size_t k = 0; k < rep.entries.size(); ++k) {
      const double d = rep.value(k, t);
      if (!std::isnan(d)) dist += fmt_double(t) + ',' + fmt_double(rep.entries[k].radius) + ',' + fmt_double(d) + '\n';
    }
  dir.write("distances.csv", dist);
  if (ec.svg && dist.find('\n') + 1 < dist.size())
    for (const auto& [name, doc] : plot_csv(dist, "distances")) dir.write(name, doc);

  const bool ok = rep.reference_completed && rep.completed_count() > 0;
  json body;
  body["status"] = ok ? "completed" : "incomplete";
  body["formulation"] = std::string(to_string(nl.tag));
  body["reference"] = stats_json(rep.reference);
  body["runs"] = runs;
  json verdicts = json::array();
  for (std::size_t j = 0; j < rep.times.size(); ++j)
    verdicts.push_back({{"t", rep.times[j]}, {"monotone", static_cast<bool>(rep.monotone[j])}});
  body["verdicts"] = verdicts;
  body["slack"] = rep.slack;
  body["convergence"] = rep.all_monotone();
  write_manifest(dir, "sweep", ec.resolved, body, seconds_since(t0));
  out << "reference " << to_string(rep.reference.status) << ", " << rep.completed_count() << "/"
      << rep.entries.size() << " radii completed, convergence " << (rep.all_monotone() ? "true" : "false")
      << "\n";
  return ok ? kExitOk : kExitIncomplete;
}

inline int cmd_compare(const Common& c, std::ostream& out) {
  const ExperimentConfig ec = load(c);
  const auto t0 = Clock::now();
  const double layer = ec.solver.formulation.radius;
  const auto rep = compare_formulations(ec.solver, ec.compare_first, ec.compare_second, layer);
  OutputDir dir(ec.output_dir);
  write_run(dir, "first/", ec.solver.grid, rep.run_a, ec.svg);
  write_run(dir, "second/", ec.solver.grid, rep.run_r, ec.svg);
  std::string diff = "t,d,max_diff_layer,max_diff_interior,operator_interior\n";
  for (const auto& s : rep.samples)
    diff += fmt_double(s.t) + ',' + fmt_double(s.distance) + ',' + fmt_double(s.max_diff_layer) + ',' +
            fmt_double(s.max_diff_interior) + ',' + fmt_double(s.operator_interior) + '\n';
  dir.write("differences.csv", diff);
  if (ec.operator_dump) {
    const Grid1D& g = ec.solver.grid;
    FvSystem a(g, ec.solver.coeffs, ec.compare_first), b(g, ec.solver.coeffs, ec.compare_second);
    std::vector<double> wa(g.size()), wb(g.size());
    std::string ops = "t,x,signal_first,signal_second\n";
    for (const auto& s : rep.run_a.samples) {
      a.drift_signal(s.c, s.v, wa);
      b.drift_signal(s.c, s.v, wb);
      for (std::size_t i = 0; i < g.size(); ++i)
        ops += fmt_double(s.t) + ',' + fmt_double(g.center(i)) + ',' + fmt_double(wa[i]) + ',' + fmt_double(wb[i]) + '\n';
    }
    dir.write("operators.csv", ops);
  }
  if (ec.svg && !rep.samples.empty())
    for (const auto& [name, doc] : plot_csv(diff, "differences")) dir.write(name, doc);
  json body;
  body["status"] = rep.completed ? "completed" : "incomplete";
  body["first"] = stats_json(rep.run_a);
  body["second"] = stats_json(rep.run_r);
  body["layer_width"] = layer;
  json samples = json::array();
  for (const auto& s : rep.samples)
    samples.push_back({{"t", s.t},
                       {"d", s.distance},
                       {"max_diff_layer", s.max_diff_layer},
                       {"max_diff_interior", s.max_diff_interior},
                       {"operator_interior", s.operator_interior}});
  body["differences"] = samples;
  write_manifest(dir, "compare", ec.resolved, body, seconds_since(t0));
  for (const auto& s : rep.samples)
    out << "t = " << fmt_double(s.t) << ": d = " << fmt_double(s.distance)
        << ", layer max = " << fmt_double(s.max_diff_layer)
        << ", interior max = " << fmt_double(s.max_diff_interior) << "\n";
  return rep.completed ? kExitOk : kExitIncomplete;
}

inline int cmd_opcheck(const OpcheckOptions& o, const std::string& out_dir, std::ostream& out,
                       std::ostream& err) {
  std::vector<CheckRow> rows;
  try {
    rows = run_opcheck(o);
  } catch (const std::exception& e) {
    err << "opcheck: operator construction failed: " << e.what() << "\n";
    return kExitOpcheck;
  }
  bool all = true;
  std::string csv = "check,measured,relation,threshold,pass\n";
  for (const auto& r : rows) {
    all = all && r.pass;
    char line[160];
    std::snprintf(line, sizeof line, "%-40s %12.4e %2s %10.3e  %s\n", r.name.c_str(), r.measured,
                  r.relation.c_str(), r.threshold, r.pass ? "PASS" : "FAIL");
    out << line;
    csv += r.name + ',' + fmt_double(r.measured) + ',' + r.relation + ',' + fmt_double(r.threshold) + ',' +
           (r.pass ? "true" : "false") + '\n';
  }
  if (!out_dir.empty()) {
    OutputDir dir(out_dir);
    dir.write("opcheck.csv", csv);
  }
  return all ? kExitOk : kExitOpcheck;
}

inline int cmd_plot(const std::string& csv_path, const std::string& out_dir, std::ostream& out) {
  std::string text;
  try {
    text = read_file(csv_path);
  } catch (const OutputError& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::pair<std::string, std::string>> docs;
  try {
    docs = plot_csv(text, std::filesystem::path(csv_path).stem().string());
  } catch (const PlotError& e) {
    throw ConfigError(csv_path + ": " + e.what());
  }
  std::filesystem::path root = out_dir.empty() ? std::filesystem::path(csv_path).parent_path() : std::filesystem::path(out_dir);
  if (root.empty()) root = ".";
  OutputDir dir(root);
  for (const auto& [name, doc] : docs) {
    dir.write(name, doc);
    out << (dir.root() / name).string() << "\n";
  }
  return kExitOk;
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Nonlocal taxis simulator"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment config (INI)")->required();
    sub->add_option("--out", common.out, "output directory (overrides [output] dir)");
    sub->add_option("--format", common.format, "csv, svg or csv,svg");
  };
  auto* run = app.add_subcommand("run", "integrate one configuration");
  add_common(run);

  std::string radii;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "r -> 0 sweep against the local reference");
  add_common(sweep);
  sweep->add_option("--radii", radii, "comma-separated radii (overrides [sweep] radii)");
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "compare two formulations");
  add_common(compare);

  OpcheckOptions oc;
  std::string op_out;
  auto* opcheck = app.add_subcommand("opcheck", "operator property suite");
  opcheck->add_option("--L", oc.length, "domain length");
  opcheck->add_option("--N", oc.cells, "cells");
  opcheck->add_option("--kernel-value", oc.kernel_value, "constant kernel value F_r");
  opcheck->add_option("--out", op_out, "directory for opcheck.csv");

  std::string csv_path, plot_out;
  auto* plot = app.add_subcommand("plot", "SVG line plots from a CSV output");
  plot->add_option("--csv", csv_path, "CSV file")->required();
  plot->add_option("--out", plot_out, "output directory (default: next to the CSV)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(common, out);
    if (sweep->parsed()) return cmd_sweep(common, radii, jobs, out);
    if (compare->parsed()) return cmd_compare(common, out);
    if (opcheck->parsed()) return cmd_opcheck(oc, op_out, out, err);
    if (plot->parsed()) return cmd_plot(csv_path, plot_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GridMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace nltaxis
