#pragma once

// Operator property suite: identities, closed forms, norms, adjointness,
// identity limit and the Fourier symbol. Each check yields one row.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nltaxis/analysis.hpp"
#include "nltaxis/grid.hpp"
#include "nltaxis/kernel.hpp"
#include "nltaxis/operators.hpp"

namespace nltaxis {

struct CheckRow {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string relation;  // how measured compares to threshold
};

struct OpcheckOptions {
  double length = 20.0;
  std::size_t cells = 2000;
  double kernel_value = 2.0;  // constant kernel F_r = value
};

namespace detail {

inline double masked_max_diff(const ScalarField& a, const ScalarField& b, const InteriorMask& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (m.flags[i]) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline CheckRow at_most(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, measured <= threshold, "<="};
}

inline CheckRow at_least(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, measured >= threshold, ">="};
}

// Adhesion velocity of u = 1 on (-1, 1) with F = 2, in coordinates X = x + 1.
inline double constant_profile_closed_form(double X, double r) {
  const double x = X - 1.0;
  if (x <= -1.0 + r) return (-1.0 + r - x) / (r * r);
  if (x >= 1.0 - r) return (1.0 - r - x) / (r * r);
  return 0.0;
}

}  // namespace detail

/// max over the interior mask of |A_r sin - T_r(grad sin)| at N and 2N cells.
inline std::vector<CheckRow> check_adhesion_identity(const OpcheckOptions& o, double r = 0.5) {
  const KernelF k = KernelF::constant(o.kernel_value);
  auto discrepancy = [&](std::size_t n) {
    const Grid1D g(o.length, n);
    const auto u = ScalarField::from_function(g, [](double x) { return std::sin(x); });
    const auto a = build_operator(OperatorVariant::AdhesionVelocity, g, r, k).apply(u);
    const auto t = build_operator(OperatorVariant::AvgT, g, r, k).apply(gradient_field(u));
    return detail::masked_max_diff(a, t, interior_mask(g, r));
  };
  const double coarse = discrepancy(o.cells), fine = discrepancy(2 * o.cells);
  return {detail::at_most("adhesion_vs_T_grad", coarse, 1e-4),
          detail::at_least("adhesion_vs_T_grad_refinement_ratio", coarse / fine, 3.0)};
}

inline std::vector<CheckRow> check_nonlocal_gradient(const OpcheckOptions& o, double r = 0.5) {
  const KernelF k = KernelF::constant(o.kernel_value);
  const Grid1D g(o.length, o.cells);
  const auto u = ScalarField::from_function(g, [](double x) { return std::sin(x); });
  const auto d = build_operator(OperatorVariant::NonlocalGradient, g, r, k).apply(u);
  const auto s = build_operator(OperatorVariant::AvgS, g, r, k).apply(gradient_field(u));
  const double diff = detail::masked_max_diff(d, s, interior_mask(g, r));

  // exact for quadratics when 2r is a multiple of h
  const double rq = 30.0 * g.spacing();
  const auto q = ScalarField::from_function(g, [](double x) { return x * x; });
  const auto dq = build_operator(OperatorVariant::NonlocalGradient, g, rq, k).apply(q);
  double qerr = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.center(i);
    if (x - rq < 0.0 || x + rq > g.length()) continue;
    qerr = std::max(qerr, std::abs(dq[i] - 2.0 * x) / std::max(1.0, 2.0 * x));
  }
  return {detail::at_most("nonlocal_gradient_vs_S_grad", diff, 1e-10),
          detail::at_most("nonlocal_gradient_quadratic_rel_error", qerr, 1e-12)};
}

/// Boundary response of A_r to u = 1 on (-1, 1) with the same spacing.
inline std::vector<CheckRow> check_constant_profile(const OpcheckOptions& o) {
  const KernelF k = KernelF::constant(o.kernel_value);
  const double h = o.length / static_cast<double>(o.cells);
  const auto n = static_cast<std::size_t>(std::llround(2.0 / h));
  const Grid1D g(2.0, n);
  const double r = 30.0 * g.spacing();
  const ScalarField one(g, 1.0);
  const auto a = build_operator(OperatorVariant::AdhesionVelocity, g, r, k).apply(one);
  double pointwise = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pointwise = std::max(pointwise, std::abs(a[i] - detail::constant_profile_closed_form(g.center(i), r)));
    l1 += std::abs(a[i]) * g.spacing();
  }
  const auto t = build_operator(OperatorVariant::AvgT, g, r, k).apply(gradient_field(one));
  double tmax = 0.0;
  for (double x : t.values()) tmax = std::max(tmax, std::abs(x));
  return {detail::at_most("constant_profile_pointwise", pointwise, 1e-8),
          detail::at_most("constant_profile_l1_minus_1", std::abs(l1 - 1.0), 1e-8),
          detail::at_most("constant_profile_T_grad_max", tmax, 1e-14)};
}

/// Power-iteration norms of S_r and T_r: bounds, closeness to 1 at the
/// smallest radius, and a gap to 1 that does not grow as r decreases.
inline std::vector<CheckRow> check_norms(const OpcheckOptions& o,
                                         const std::vector<double>& radii = {0.4, 0.2, 0.1, 0.05}) {
  const KernelF k = KernelF::constant(o.kernel_value);
  const Grid1D g(o.length, o.cells);
  std::vector<CheckRow> rows;
  double worst_s = 0.0, worst_t_excess = -1e300, gap_growth = -1e300;
  double prev_gap_s = 1e300, prev_gap_t = 1e300, last_s = 0.0, last_t = 0.0;
  for (double r : radii) {
    const double ns = operator_norm_estimate(build_operator(OperatorVariant::AvgS, g, r, k)).value;
    const double nt = operator_norm_estimate(build_operator(OperatorVariant::AvgT, g, r, k)).value;
    worst_s = std::max(worst_s, ns);
    worst_t_excess = std::max(worst_t_excess, nt - c2_bound(k, r, 2.0));
    const double gs = std::abs(ns - 1.0), gt = std::abs(nt - 1.0);
    gap_growth = std::max({gap_growth, gs - prev_gap_s, gt - prev_gap_t});
    prev_gap_s = gs;
    prev_gap_t = gt;
    last_s = ns;
    last_t = nt;
  }
  rows.push_back(detail::at_most("norm_S_max", worst_s, 1.0 + 1e-6));
  rows.push_back(detail::at_most("norm_T_minus_C2_max", worst_t_excess, 1e-6));
  rows.push_back(detail::at_most("norm_S_gap_at_smallest_r", std::abs(last_s - 1.0), 0.05));
  rows.push_back(detail::at_most("norm_T_gap_at_smallest_r", std::abs(last_t - 1.0), 0.05));
  rows.push_back(detail::at_most("norm_gap_growth_as_r_decreases", gap_growth, 0.0));
  return rows;
}

/// <R w1, w2> - <w1, R w2> relative to |w1| |w2| over random pairs.
inline std::vector<CheckRow> check_adjointness(const OpcheckOptions& o, std::size_t pairs = 100,
                                               double r = 0.5) {
  const KernelF k = KernelF::constant(o.kernel_value);
  const Grid1D g(o.length, o.cells);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> d;
  std::vector<CheckRow> rows;
  for (auto v : {OperatorVariant::AvgT, OperatorVariant::AvgS}) {
    const auto op = build_operator(v, g, r, k);
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      ScalarField w1(g), w2(g);
      for (auto& x : w1.values()) x = d(rng);
      for (auto& x : w2.values()) x = d(rng);
      const double res = std::abs(inner(op.apply(w1), w2) - inner(w1, op.apply(w2)));
      worst = std::max(worst, res / (l2_norm(w1) * l2_norm(w2)));
    }
    rows.push_back(detail::at_most(std::string("adjointness_") + std::string(to_string(v)), worst, 1e-10));
  }
  return rows;
}

/// L1 distance between T_r w and w for a smooth bump; must not grow as r decreases.
inline std::vector<CheckRow> check_identity_limit(const OpcheckOptions& o) {
  const KernelF k = KernelF::constant(o.kernel_value);
  const Grid1D g(o.length, o.cells);
  const double mid = 0.5 * o.length;
  const auto w = ScalarField::from_function(g, [mid](double x) { return std::exp(-(x - mid) * (x - mid)); });
  double prev = 1e300, growth = -1e300, last = 0.0;
  for (double r : {0.4, 0.2, 0.1, 0.05}) {
    const auto tw = build_operator(OperatorVariant::AvgT, g, r, k).apply(w);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(tw[i] - w[i]) * g.spacing();
    growth = std::max(growth, l1 - prev);
    prev = l1;
    last = l1;
  }
  return {detail::at_most("identity_limit_growth", growth, 0.0),
          detail::at_most("identity_limit_L1_at_r_0.05", last, 1e-2)};
}

inline std::vector<CheckRow> check_symbol(const OpcheckOptions& o) {
  const KernelF k = KernelF::constant(o.kernel_value);
  std::vector<CheckRow> rows;
  double phi0_err = 0.0, sup_excess = -1e300, growth = -1e300, bound_excess = -1e300, prev = 1e300;
  for (double r : {1.0, 0.5, 0.1}) {
    const auto p = fourier_symbol(k, r, 100.0, 2001);
    phi0_err = std::max(phi0_err, std::abs(p.values.front().real() - 1.0));
    sup_excess = std::max(sup_excess, p.sup_modulus - 1.0);
    growth = std::max(growth, p.sup_modulus - prev);
    prev = p.sup_modulus;
    const double b = symbol_bound(k, r);
    for (const auto& z : p.values) bound_excess = std::max(bound_excess, std::abs(z) - b);
  }
  rows.push_back(detail::at_most("symbol_phi0_minus_1", phi0_err, 1e-10));
  rows.push_back(detail::at_most("symbol_sup_minus_1", sup_excess, 1e-9));
  rows.push_back(detail::at_most("symbol_sup_growth_as_r_decreases", growth, 0.0));
  rows.push_back(detail::at_most("symbol_modulus_minus_bound", bound_excess, 1e-9));
  return rows;
}

/// Full suite. Throws ConfigError when the kernel fails validation.
inline std::vector<CheckRow> run_opcheck(const OpcheckOptions& o) {
  KernelF::constant(o.kernel_value).validate(1.0);
  std::vector<CheckRow> all;
  for (auto&& part : {check_adhesion_identity(o), check_nonlocal_gradient(o), check_constant_profile(o),
                      check_norms(o), check_adjointness(o), check_identity_limit(o), check_symbol(o)})
    all.insert(all.end(), part.begin(), part.end());
  return all;
}

}  // namespace nltaxis
