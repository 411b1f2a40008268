#pragma once

// Brute-force evaluation of the nonlocal operators straight from their
// defining integrals, with no precomputed stencil. Test oracle only: cost is
// O(N * window * fine).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nltaxis/grid.hpp"
#include "nltaxis/kernel.hpp"
#include "nltaxis/operators.hpp"
#include "nltaxis/quadrature.hpp"

namespace nltaxis {

namespace oracle_detail {

// Piecewise-linear reconstruction through face averages, written in terms of
// the two face values bracketing p (interior) or the boundary slope.
inline double reconstruct(const ScalarField& u, double p) {
  const Grid1D& g = u.grid();
  const std::size_t n = g.size();
  const double h = g.spacing();
  auto face_value = [&](std::size_t f) { return 0.5 * (u[f - 1] + u[f]); };  // f in 1..n-1
  const std::size_t j = g.locate(p);
  if (j == 0) {
    const double slope = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    return face_value(1) - slope * (h - p);
  }
  if (j == n - 1) {
    const double slope = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    return face_value(n - 1) + slope * (p - g.face(n - 1));
  }
  const double left = face_value(j);
  const double right = face_value(j + 1);
  const double t = (p - g.face(j)) / h;
  return (1.0 - t) * left + t * right;
}

// int over y in [-1,1] of 1/2 |y| F(r|y|) * |{s in [0,1] : a <= r s y <= b}|.
// The s-measure is exact; y is integrated with Gauss-Legendre panels aligned
// to the breakpoints y = a/r, y = b/r, 0.
inline double t_cell_weight(const KernelF& kernel, double r, double a, double b,
                            std::size_t panels) {
  auto s_len = [&](double y) {
    if (y == 0.0) return (a <= 0.0 && b >= 0.0) ? 1.0 : 0.0;
    double lo = a / (r * y), hi = b / (r * y);
    if (y < 0.0) std::swap(lo, hi);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    return std::max(0.0, hi - lo);
  };
  auto integrand = [&](double y) {
    const double ay = std::abs(y);
    return 0.5 * ay * kernel(r, r * ay) * s_len(y);
  };
  std::vector<double> br = {-1.0, 0.0, 1.0, a / r, b / r};
  std::sort(br.begin(), br.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double lo = std::max(-1.0, br[k]);
    const double hi = std::min(1.0, br[k + 1]);
    if (hi > lo) total += quad::gauss_legendre(integrand, lo, hi, panels);
  }
  return total;
}

}  // namespace oracle_detail

/// Evaluates the chosen operator on f at every cell center directly from its
/// definition. `fine` is the number of quadrature panels per smooth piece.
inline ScalarField dense_apply(OperatorVariant variant, const Grid1D& grid, double r,
                               const KernelF& kernel, const ScalarField& f, std::size_t fine) {
  if (fine < 64) throw ConfigError("dense quadrature needs at least 64 sub-points");
  const std::size_t n = grid.size();
  ScalarField out(grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.center(i);
    if (variant == OperatorVariant::NonlocalGradient) {
      const double up = (x + r <= grid.length()) ? oracle_detail::reconstruct(f, x + r) : 0.0;
      const double dn = (x - r >= 0.0) ? oracle_detail::reconstruct(f, x - r) : 0.0;
      out[i] = (up - dn) / (2.0 * r);
      continue;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = grid.face(j) - x;
      const double b = grid.face(j + 1) - x;
      if (b <= -r || a >= r) continue;
      double w = 0.0;
      switch (variant) {
        case OperatorVariant::AdhesionVelocity: {
          auto g = [&](double xi) {
            return (xi > 0.0 ? 1.0 : -1.0) * kernel(r, std::abs(xi)) / (2.0 * r * r);
          };
          const double lo = std::max(a, -r), hi = std::min(b, r);
          if (lo < 0.0 && hi > 0.0)
            w = quad::gauss_legendre(g, lo, 0.0, fine) + quad::gauss_legendre(g, 0.0, hi, fine);
          else
            w = quad::gauss_legendre(g, lo, hi, fine);
          break;
        }
        case OperatorVariant::AvgT:
          w = oracle_detail::t_cell_weight(kernel, r, a, b, fine);
          break;
        case OperatorVariant::AvgS:
          w = (std::min(b, r) - std::max(a, -r)) / (2.0 * r);
          break;
        case OperatorVariant::NonlocalGradient: break;
      }
      acc += w * f[j];
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace nltaxis
