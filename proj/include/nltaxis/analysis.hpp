#pragma once

// Solution comparison metrics, the Fourier symbol of T_r, r -> 0 sweeps and
// the boundary-layer comparison between the two nonlocal formulations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltaxis/grid.hpp"
#include "nltaxis/kernel.hpp"
#include "nltaxis/operators.hpp"
#include "nltaxis/quadrature.hpp"
#include "nltaxis/solver.hpp"

namespace nltaxis {

/// Mean absolute difference (1/L) * integral |u1 - u2|, midpoint rule.
inline double distance(const Grid1D& grid, std::span<const double> u1, std::span<const double> u2) {
  if (u1.size() != grid.size() || u2.size() != grid.size()) throw GridMismatch();
  double s = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i) s += std::abs(u1[i] - u2[i]);
  return s * grid.spacing() / grid.length();
}

inline double distance(const ScalarField& u1, const ScalarField& u2) {
  require_same_grid(u1, u2);
  return distance(u1.grid(), u1.values(), u2.values());
}

struct DistanceCurve {
  std::vector<double> times;
  std::vector<double> values;
};

/// d(c_a, c_b) at every sample time present in both runs.
inline DistanceCurve distance_curve(const Grid1D& grid, const RunResult& a, const RunResult& b) {
  DistanceCurve out;
  for (const auto& sa : a.samples)
    for (const auto& sb : b.samples)
      if (sa.t == sb.t) {
        out.times.push_back(sa.t);
        out.values.push_back(distance(grid, sa.c, sb.c));
      }
  return out;
}

struct SymbolProfile {
  std::vector<double> xi;
  std::vector<std::complex<double>> values;
  double sup_modulus = 0.0;
};

/// Phi_r(xi) = int_0^1 (1/2) int_{-1}^{1} |y| F_r(r|y|) e^{i r s y xi} dy ds.
/// The integrand is even in y, so Phi is real; the s-integral is done in
/// closed form and y by Gauss-Legendre on `panels` panels.
inline SymbolProfile fourier_symbol(const KernelF& kernel, double r, double xi_max,
                                    std::size_t n_xi, std::size_t panels = 256) {
  if (!(r > 0.0)) throw ConfigError("symbol radius must be positive");
  if (n_xi < 1) throw ConfigError("need at least one frequency");
  SymbolProfile p;
  for (std::size_t k = 0; k < n_xi; ++k) {
    const double xi = n_xi == 1 ? 0.0 : xi_max * static_cast<double>(k) / static_cast<double>(n_xi - 1);
    const double val = quad::gauss_legendre(
        [&](double y) {
          const double a = r * y * xi;
          const double sinc = std::abs(a) < 1e-8 ? 1.0 - a * a / 6.0 : std::sin(a) / a;
          return y * kernel(r, r * y) * sinc;
        },
        0.0, 1.0, panels);
    p.xi.push_back(xi);
    p.values.emplace_back(val, 0.0);
    p.sup_modulus = std::max(p.sup_modulus, std::abs(val));
  }
  return p;
}

/// (1/n) times the mean of |y| F_r(r|y|) over the unit ball; bounds |Phi_r|.
inline double symbol_bound(const KernelF& kernel, double r, std::size_t panels = 256) {
  return quad::gauss_legendre([&](double y) { return y * kernel(r, r * y); }, 0.0, 1.0, panels) /
         kDim;
}

struct SweepEntry {
  double radius = 0.0;
  bool completed = false;
  std::string error;  // set when the run failed or threw
  RunResult result;
  DistanceCurve curve;  // against the reference
};

struct SweepReport {
  FormulationTag nonlocal = FormulationTag::NonlocalA;
  bool reference_completed = false;
  RunResult reference;
  std::vector<SweepEntry> entries;  // radii descending
  std::vector<double> times;
  std::vector<bool> monotone;  // per sample time
  double slack = 0.05;

  std::size_t completed_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.completed ? 1 : 0;
    return n;
  }
  bool all_monotone() const {
    return !monotone.empty() && std::all_of(monotone.begin(), monotone.end(), [](bool b) { return b; });
  }
  /// Distance of entry k at sample time t, NaN if unavailable.
  double value(std::size_t k, double t) const {
    const auto& c = entries.at(k).curve;
    for (std::size_t j = 0; j < c.times.size(); ++j)
      if (c.times[j] == t) return c.values[j];
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// Runs base with the Local formulation as reference and the nonlocal
/// formulation at every radius. At each sample time the verdict requires
/// d(r_{k+1}) <= (1 + slack) d(r_k) along the completed radii.
inline SweepReport convergence_sweep(const SolverConfig& base, Formulation nonlocal,
                                     std::vector<double> radii, std::size_t jobs = 1,
                                     double slack = 0.05) {
  if (radii.empty()) throw ConfigError("sweep needs at least one radius");
  if (nonlocal.tag == FormulationTag::Local) throw ConfigError("sweep formulation must be nonlocal");
  for (double r : radii)
    if (!(r > 0.0)) throw ConfigError("sweep radii must be positive");
  std::stable_sort(radii.begin(), radii.end(), std::greater<>());

  SweepReport rep;
  rep.nonlocal = nonlocal.tag;
  rep.slack = slack;
  {
    SolverConfig cfg = base;
    cfg.formulation = Formulation{FormulationTag::Local};
    cfg.formulation.regularizer = nonlocal.regularizer;
    rep.reference = integrate(cfg);
    rep.reference_completed = rep.reference.status == RunStatus::Completed;
  }
  rep.times = base.sample_times;
  std::sort(rep.times.begin(), rep.times.end());

  auto run_one = [&](double r) {
    SweepEntry e;
    e.radius = r;
    try {
      SolverConfig cfg = base;
      cfg.formulation = nonlocal;
      cfg.formulation.radius = r;
      e.result = integrate(cfg);
      e.completed = e.result.status == RunStatus::Completed;
      if (!e.completed) e.error = std::string(to_string(e.result.status)) + ": " + e.result.message;
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    return e;
  };
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < radii.size(); start += jobs) {
    std::vector<std::future<SweepEntry>> batch;
    for (std::size_t k = start; k < std::min(radii.size(), start + jobs); ++k)
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, run_one, radii[k]));
    for (auto& f : batch) rep.entries.push_back(f.get());
  }

  if (rep.reference_completed)
    for (auto& e : rep.entries)
      if (e.completed) e.curve = distance_curve(base.grid, e.result, rep.reference);

  for (double t : rep.times) {
    bool ok = rep.reference_completed;
    double prev = std::numeric_limits<double>::quiet_NaN();
    std::size_t seen = 0;
    for (std::size_t k = 0; k < rep.entries.size() && ok; ++k) {
      const double d = rep.value(k, t);
      if (std::isnan(d)) continue;
      if (seen > 0 && d > (1.0 + slack) * prev) ok = false;
      prev = d;
      ++seen;
    }
    rep.monotone.push_back(ok && seen > 0);
  }
  return rep;
}

struct BoundaryLayerSample {
  double t = 0.0;
  double distance = 0.0;             // d(c_A, c_R)
  double max_diff_layer = 0.0;       // max |c_A - c_R| within r of either end
  double max_diff_interior = 0.0;    // same on the interior mask
  double operator_interior = 0.0;    // max drift-signal difference on the interior mask
};

struct BoundaryLayerReport {
  double radius = 0.0;  // layer width
  RunResult run_a, run_r;
  bool completed = false;
  std::vector<BoundaryLayerSample> samples;
};

/// Runs two formulations from the same base configuration and splits their
/// differences into the layer within `layer` of either end and the interior
/// mask. The drift signals of both are evaluated on the first run's state.
inline BoundaryLayerReport compare_formulations(const SolverConfig& base, const Formulation& first,
                                                const Formulation& second, double layer) {
  BoundaryLayerReport rep;
  rep.radius = layer;
  SolverConfig ca = base, cr = base;
  ca.formulation = first;
  cr.formulation = second;
  rep.run_a = integrate(ca);
  rep.run_r = integrate(cr);
  rep.completed = rep.run_a.status == RunStatus::Completed && rep.run_r.status == RunStatus::Completed;

  const Grid1D& g = base.grid;
  const auto mask = interior_mask(g, layer);
  FvSystem sys_a(g, base.coeffs, first);
  FvSystem sys_r(g, base.coeffs, second);
  std::vector<double> wa(g.size()), wr(g.size());
  for (const auto& sa : rep.run_a.samples)
    for (const auto& sr : rep.run_r.samples) {
      if (sa.t != sr.t) continue;
      BoundaryLayerSample s;
      s.t = sa.t;
      s.distance = distance(g, sa.c, sr.c);
      sys_a.drift_signal(sa.c, sa.v, wa);
      sys_r.drift_signal(sa.c, sa.v, wr);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = std::abs(sa.c[i] - sr.c[i]);
        if (mask.flags[i]) {
          s.max_diff_interior = std::max(s.max_diff_interior, d);
          s.operator_interior = std::max(s.operator_interior, std::abs(wa[i] - wr[i]));
        } else {
          s.max_diff_layer = std::max(s.max_diff_layer, d);
        }
      }
      rep.samples.push_back(s);
    }
  return rep;
}

/// NonlocalA against NonlocalR (T_r by default) at radius r.
inline BoundaryLayerReport boundary_layer_comparison(const SolverConfig& base, double r,
                                                     OperatorVariant averaging = OperatorVariant::AvgT) {
  Formulation a = base.formulation, b = base.formulation;
  a.tag = FormulationTag::NonlocalA;
  a.radius = r;
  b.tag = FormulationTag::NonlocalR;
  b.radius = r;
  b.averaging = averaging;
  return compare_formulations(base, a, b, r);
}

/// Strict local maxima above threshold * max(field); a plateau counts once.
/// Values beyond the ends count as -infinity.
inline std::size_t aggregate_count(std::span<const double> field, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (field.empty()) return 0;
  const double top = *std::max_element(field.begin(), field.end());
  const double level = threshold * top;
  const std::size_t n = field.size();
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && field[j + 1] == field[i]) ++j;
    const bool left_lower = i == 0 || field[i - 1] < field[i];
    const bool right_lower = j + 1 == n || field[j + 1] < field[i];
    if (left_lower && right_lower && field[i] > level) ++count;
    i = j + 1;
  }
  return count;
}

inline std::size_t aggregate_count(const ScalarField& f, double threshold) {
  return aggregate_count(f.values(), threshold);
}

}  // namespace nltaxis
