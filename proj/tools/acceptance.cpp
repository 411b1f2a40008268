// Acceptance report: one PASS/FAIL line per criterion. Always exits 0.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nltaxis/cli.hpp"

#ifndef NLTAXIS_SOURCE_DIR
#define NLTAXIS_SOURCE_DIR "."
#endif

using namespace nltaxis;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(NLTAXIS_SOURCE_DIR) / "configs";

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

ExperimentConfig config(const std::string& name) { return load_config(kConfigs / name); }

Verdict rows_verdict(const std::vector<CheckRow>& rows, const std::vector<std::string>& prefixes) {
  Verdict v{true, ""};
  for (const auto& r : rows) {
    bool match = false;
    for (const auto& p : prefixes) match = match || r.name.rfind(p, 0) == 0;
    if (!match) continue;
    v.pass = v.pass && r.pass;
    if (!v.detail.empty()) v.detail += ", ";
    v.detail += r.name + " = " + fmt(r.measured) + (r.pass ? "" : " (FAIL)");
  }
  if (v.detail.empty()) return {false, "no matching checks"};
  return v;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = check_adhesion_identity(OpcheckOptions{});
  const double s = seconds(t0);
  Verdict v = rows_verdict(rows, {"adhesion_vs_T_grad"});
  v.pass = v.pass && s < 5.0;
  v.detail += ", runtime " + fmt(s) + " s";
  return v;
}

Verdict criterion6() {
  ExperimentConfig ec = config("fig1.ini");
  ec.solver.sample_times.clear();
  for (int k = 0; k <= 20; ++k) ec.solver.sample_times.push_back(0.25 * k);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = integrate(ec.solver);
  const double s = seconds(t0);
  if (r.status != RunStatus::Completed) return {false, "run ended " + std::string(to_string(r.status))};
  const double m0 = r.samples.front().mass_c;
  double drift = 0.0, min_c = 0.0, asym = 0.0;
  const std::size_t n = ec.solver.grid.size();
  for (const auto& smp : r.samples) {
    drift = std::max(drift, std::abs(smp.mass_c - m0) / m0);
    min_c = std::min(min_c, smp.min_c);
    for (std::size_t i = 0; i < n; ++i) asym = std::max(asym, std::abs(smp.c[i] - smp.c[n - 1 - i]));
  }
  const bool pass = drift <= 1e-8 && min_c >= -1e-12 && asym <= 1e-6 && s < 60.0;
  return {pass, "mass drift " + fmt(drift) + ", min c " + fmt(min_c) + ", asymmetry " + fmt(asym) +
                    ", N = " + std::to_string(n) + ", runtime " + fmt(s) + " s"};
}

Verdict criterion7() {
  Verdict v{true, ""};
  for (const char* name : {"fig3a.ini", "fig3c.ini"}) {
    const auto ec = config(name);
    const auto rep = convergence_sweep(ec.solver, ec.solver.formulation, {1.0, 0.3, 0.1});
    const double d1 = rep.value(0, 4.0), d3 = rep.value(1, 4.0), d01 = rep.value(2, 4.0);
    const bool ok = rep.reference_completed && d01 < d3 && d3 < d1 && d1 >= 2.0 * d01;
    v.pass = v.pass && ok;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += std::string(name) + " d(t=4) r=1: " + fmt(d1) + ", r=0.3: " + fmt(d3) + ", r=0.1: " + fmt(d01);
  }
  return v;
}

Verdict criterion8() {
  const auto local = config("fig4_local.ini");
  const RunResult lr = integrate(local.solver);
  const bool aborted = lr.status == RunStatus::IllPosedAbort;
  const bool window = aborted && lr.t_final >= 2.5 && lr.t_final <= 4.0;
  const auto wp = validate_wellposedness(local.solver.coeffs, {0.0, 2.0}, {0.0, 1.0}, 1.0);

  auto ec = config("fig4.ini");
  std::size_t counts[2] = {0, 0};
  bool completed = true;
  const double radii[2] = {0.1, 0.3};
  for (int k = 0; k < 2; ++k) {
    SolverConfig cfg = ec.solver;
    cfg.formulation.radius = radii[k];
    cfg.t_end = 5.0;
    cfg.sample_times = {5.0};
    const RunResult r = integrate(cfg);
    completed = completed && r.status == RunStatus::Completed;
    if (!r.samples.empty() && r.samples.back().t == 5.0) counts[k] = aggregate_count(r.samples.back().c, 0.5);
  }
  const bool agg = completed && counts[0] >= 2 && counts[0] >= counts[1];
  return {window && wp.local_ill_posed && agg,
          "local " + std::string(to_string(lr.status)) + " at t* = " + fmt(lr.t_final) +
              (window ? "" : " (outside [2.5, 4])") + ", min effective D = " + fmt(wp.min_effective_diffusion) +
              (wp.local_ill_posed ? " flagged" : " not flagged") + ", nonlocal N = " +
              std::to_string(ec.solver.grid.size()) + " " + (completed ? "completed" : "incomplete") +
              ", count(0.1) = " + std::to_string(counts[0]) + ", count(0.3) = " + std::to_string(counts[1])};
}

Verdict criterion9() {
  double d[2] = {0, 0}, interior[2] = {0, 0};
  const char* names[2] = {"fig1.ini", "fig2.ini"};
  for (int k = 0; k < 2; ++k) {
    const auto ec = config(names[k]);
    const auto rep =
        compare_formulations(ec.solver, ec.compare_first, ec.compare_second, ec.solver.formulation.radius);
    if (!rep.completed || rep.samples.empty()) return {false, std::string(names[k]) + " comparison incomplete"};
    d[k] = rep.samples.back().distance;
    for (const auto& s : rep.samples) interior[k] = std::max(interior[k], s.max_diff_interior);
  }
  const double ratio = d[1] / d[0];
  const bool pass = ratio >= 10.0 && interior[0] <= 1e-4 && interior[1] <= 1e-4;
  return {pass, "d centred " + fmt(d[0]) + ", d seeded " + fmt(d[1]) + ", ratio " + fmt(ratio) +
                    ", interior max centred " + fmt(interior[0]) + ", seeded " + fmt(interior[1]) +
                    " (bound 1e-4)"};
}

Verdict criterion10() {
  const fs::path root = fs::temp_directory_path() / "nltaxis_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  const std::string fig1 = (kConfigs / "fig1.ini").string();
  const int run_a = run_cli({"run", "--config", fig1, "--out", (root / "a").string()}, sink, sink);
  const int run_b = run_cli({"run", "--config", fig1, "--out", (root / "b").string()}, sink, sink);
  bool same = run_a == 0 && run_b == 0;
  for (const char* f : {"profiles.csv", "diagnostics.csv"})
    same = same && read_file(root / "a" / f) == read_file(root / "b" / f);
  const int op = run_cli({"opcheck"}, sink, sink);
  fs::create_directories(root);
  std::ofstream(root / "malformed.ini") << "[model]\npreset = minimal_linear\n[grid]\nN = -\n";
  const int bad_cfg = run_cli({"run", "--config", (root / "malformed.ini").string(), "--out",
                               (root / "m").string()}, sink, sink);
  const int bad_kernel = run_cli({"opcheck", "--kernel-value", "3"}, sink, sink);
  const int local = run_cli({"run", "--config", (kConfigs / "fig4_local.ini").string(), "--out",
                             (root / "l").string()}, sink, sink);
  fs::remove_all(root);
  const bool pass = same && op == 0 && bad_cfg == 1 && bad_kernel == 3 && local == 2;
  return {pass, std::string("byte-identical CSVs ") + (same ? "yes" : "no") + ", opcheck exit " + std::to_string(op) +
                    ", malformed config exit " + std::to_string(bad_cfg) + ", broken kernel exit " +
                    std::to_string(bad_kernel) + ", fig4 local exit " + std::to_string(local)};
}

}  // namespace

int main() {
  std::vector<CheckRow> rows;
  std::string op_error;
  try {
    rows = run_opcheck(OpcheckOptions{});
  } catch (const std::exception& e) {
    op_error = e.what();
  }
  auto from_rows = [&](std::vector<std::string> prefixes) {
    return [&rows, &op_error, prefixes]() -> Verdict {
      if (!op_error.empty()) return {false, op_error};
      return rows_verdict(rows, prefixes);
    };
  };
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, criterion1},
      {2, from_rows({"nonlocal_gradient"})},
      {3, from_rows({"constant_profile"})},
      {4, from_rows({"norm_", "adjointness_"})},
      {5, from_rows({"symbol_"})},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, criterion10},
  };
  int passed = 0;
  for (const auto& [id, fn] : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    passed += v.pass ? 1 : 0;
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), seconds(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", passed, criteria.size());
  return 0;
}
