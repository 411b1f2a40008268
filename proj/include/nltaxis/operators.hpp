#pragma once

// Banded-stencil realisations of the nonlocal operators on a Grid1D:
//
//   AdhesionVelocity  A_r u(x) = 1/(2r^2) int_{-r}^{r} u(x+xi) sign(xi) F_r(|xi|) dxi
//   NonlocalGradient  (u(x+r) - u(x-r)) / (2r)
//   AvgT              T_r w(x) = int_0^1 1/2 int_{-1}^{1} w(x+rsy) |y| F_r(r|y|) dy ds
//   AvgS              S_r w(x) = 1/(2r) int_{x-r}^{x+r} w(z) dz
//
// Fields are extended by zero outside [0, L].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nltaxis/grid.hpp"
#include "nltaxis/kernel.hpp"
#include "nltaxis/quadrature.hpp"

namespace nltaxis {

enum class OperatorVariant { AdhesionVelocity, NonlocalGradient, AvgT, AvgS };

inline std::string_view to_string(OperatorVariant v) {
  switch (v) {
    case OperatorVariant::AdhesionVelocity: return "adhesion";
    case OperatorVariant::NonlocalGradient: return "nonlocal_gradient";
    case OperatorVariant::AvgT: return "T";
    case OperatorVariant::AvgS: return "S";
  }
  return "?";
}

inline OperatorVariant parse_variant(std::string_view s) {
  if (s == "adhesion" || s == "A") return OperatorVariant::AdhesionVelocity;
  if (s == "nonlocal_gradient" || s == "grad") return OperatorVariant::NonlocalGradient;
  if (s == "T") return OperatorVariant::AvgT;
  if (s == "S") return OperatorVariant::AvgS;
  throw ConfigError("unknown operator variant '" + std::string(s) + "'");
}

namespace detail {

// Radial profiles of the convolution-type operators as functions of the
// offset xi in [-r, r]. For AvgT the s-integral is done in closed form:
//   int_{|xi|/r}^1 |xi| F_r(|xi|/s) / (2 r^2 s^2) ds = 1/(2r^2) int_{|xi|}^r F_r(rho) drho.
inline double profile(OperatorVariant v, const KernelF& kernel, double r, double xi) {
  const double inv = 1.0 / (2.0 * r * r);
  switch (v) {
    case OperatorVariant::AdhesionVelocity:
      return (xi > 0.0 ? 1.0 : -1.0) * kernel(r, std::abs(xi)) * inv;
    case OperatorVariant::AvgT: return kernel.integral(r, std::abs(xi), r) * inv;
    case OperatorVariant::AvgS: return 1.0 / (2.0 * r);
    case OperatorVariant::NonlocalGradient: break;
  }
  return 0.0;
}

// Coefficients of the continuous piecewise-linear reconstruction u_hat at
// point p: u_hat(p) = sum_k coef[k] * u[first + k]. u_hat passes through the
// face averages (u_j + u_{j+1})/2 and its slope in cell j is the value of
// gradient_field(u) there, so that int_a^b gradient_field(u) = u_hat(b) - u_hat(a).
struct ReconstructionStencil {
  std::size_t first = 0;
  double coef[3] = {0.0, 0.0, 0.0};
};

inline ReconstructionStencil linear_reconstruction(const Grid1D& g, double p) {
  const std::size_t n = g.size();
  const double h = g.spacing();
  const std::size_t j = g.locate(p);
  ReconstructionStencil s;
  if (j == 0) {
    // anchored at face 1/2 with the one-sided slope (-3u0 + 4u1 - u2)/(2h)
    const double d = (p - h) / (2.0 * h);
    s.first = 0;
    s.coef[0] = 0.5 - 3.0 * d;
    s.coef[1] = 0.5 + 4.0 * d;
    s.coef[2] = -d;
  } else if (j == n - 1) {
    // anchored at face N-3/2 with the slope (3u_{N-1} - 4u_{N-2} + u_{N-3})/(2h)
    const double d = (p - g.face(n - 1)) / (2.0 * h);
    s.first = n - 3;
    s.coef[0] = d;
    s.coef[1] = 0.5 - 4.0 * d;
    s.coef[2] = 0.5 + 3.0 * d;
  } else {
    const double d = (p - g.center(j)) / (2.0 * h);
    s.first = j - 1;
    s.coef[0] = 0.25 - d;
    s.coef[1] = 0.5;
    s.coef[2] = 0.25 + d;
  }
  return s;
}

}  // namespace detail

/// Precomputed banded stencil for one operator variant, radius and kernel.
/// Row i holds coefficients for cells i-K .. i+K (K = half bandwidth); entries
/// that fall outside the grid stay zero, which realises extension by zero.
class DiscreteNonlocalOperator {
 public:
  static constexpr std::size_t kDefaultSubdivisions = 8;

  DiscreteNonlocalOperator(OperatorVariant variant, Grid1D grid, double r, KernelF kernel,
                           std::size_t subdivisions = kDefaultSubdivisions)
      : variant_(variant), grid_(std::move(grid)), radius_(r), kernel_(std::move(kernel)),
        subdivisions_(subdivisions) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("operator radius must be positive");
    if (subdivisions_ < 4) throw ConfigError("quadrature subdivisions must be >= 4");
    kernel_.validate(r);
    const double h = grid_.spacing();
    half_band_ = static_cast<std::size_t>(std::ceil(r / h)) + 1;
    width_ = 2 * half_band_ + 1;
    weights_.assign(grid_.size() * width_, 0.0);
    if (variant_ == OperatorVariant::NonlocalGradient)
      build_point_sampling();
    else
      build_convolution();
  }

  OperatorVariant variant() const { return variant_; }
  const Grid1D& grid() const { return grid_; }
  double radius() const { return radius_; }
  const KernelF& kernel() const { return kernel_; }
  std::size_t subdivisions() const { return subdivisions_; }
  std::size_t half_bandwidth() const { return half_band_; }

  /// Coefficient of cell j in row i (zero outside the band).
  double weight(std::size_t i, std::size_t j) const {
    const auto off = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i);
    if (std::abs(off) > static_cast<std::ptrdiff_t>(half_band_)) return 0.0;
    return weights_[i * width_ + static_cast<std::size_t>(off + static_cast<std::ptrdiff_t>(half_band_))];
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = grid_.size();
    const auto K = static_cast<std::ptrdiff_t>(half_band_);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, ii - K);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, ii + K);
      const double* row = weights_.data() + i * width_;
      double acc = 0.0;
      for (std::ptrdiff_t j = lo; j <= hi; ++j)
        acc += row[j - ii + K] * in[static_cast<std::size_t>(j)];
      out[i] = acc;
    }
  }

  /// Transposed product, used by the norm estimate.
  void apply_transpose(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = grid_.size();
    const auto K = static_cast<std::ptrdiff_t>(half_band_);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, ii - K);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, ii + K);
      const double* row = weights_.data() + i * width_;
      for (std::ptrdiff_t j = lo; j <= hi; ++j)
        out[static_cast<std::size_t>(j)] += row[j - ii + K] * in[i];
    }
  }

  ScalarField apply(const ScalarField& f) const {
    if (!(f.grid() == grid_)) throw GridMismatch();
    ScalarField out(grid_);
    apply(f.values(), out.values());
    return out;
  }

 private:
  void build_convolution() {
    // The stencil is translation invariant; rows only differ by which
    // neighbours exist.
    const double h = grid_.spacing();
    const double r = radius_;
    const auto K = static_cast<std::ptrdiff_t>(half_band_);
    std::vector<double> stencil(width_, 0.0);
    auto f = [&](double xi) { return detail::profile(variant_, kernel_, r, xi); };
    for (std::ptrdiff_t k = -K; k <= K; ++k) {
      const double a = std::max(-r, (static_cast<double>(k) - 0.5) * h);
      const double b = std::min(r, (static_cast<double>(k) + 0.5) * h);
      double w = 0.0;
      if (b > a) {
        // split at the kink of the profile
        if (a < 0.0 && b > 0.0)
          w = quad::gauss_legendre(f, a, 0.0, subdivisions_) +
              quad::gauss_legendre(f, 0.0, b, subdivisions_);
        else
          w = quad::gauss_legendre(f, a, b, subdivisions_);
      }
      stencil[static_cast<std::size_t>(k + K)] = w;
    }
    const auto n = static_cast<std::ptrdiff_t>(grid_.size());
    for (std::ptrdiff_t i = 0; i < n; ++i)
      for (std::ptrdiff_t k = -K; k <= K; ++k) {
        const std::ptrdiff_t j = i + k;
        if (j < 0 || j >= n) continue;
        weights_[static_cast<std::size_t>(i) * width_ + static_cast<std::size_t>(k + K)] =
            stencil[static_cast<std::size_t>(k + K)];
      }
  }

  void build_point_sampling() {
    const double r = radius_;
    const double L = grid_.length();
    const auto K = static_cast<std::ptrdiff_t>(half_band_);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double x = grid_.center(i);
      double* row = weights_.data() + i * width_;
      auto add = [&](double p, double sign) {
        if (p < 0.0 || p > L) return;  // extension by zero
        const auto s = detail::linear_reconstruction(grid_, p);
        for (std::size_t q = 0; q < 3; ++q) {
          const std::ptrdiff_t off =
              static_cast<std::ptrdiff_t>(s.first + q) - static_cast<std::ptrdiff_t>(i);
          row[off + K] += sign * s.coef[q] / (2.0 * r);
        }
      };
      add(x + r, 1.0);
      add(x - r, -1.0);
    }
  }

  OperatorVariant variant_;
  Grid1D grid_;
  double radius_;
  KernelF kernel_;
  std::size_t subdivisions_;
  std::size_t half_band_ = 0;
  std::size_t width_ = 0;
  std::vector<double> weights_;
};

inline DiscreteNonlocalOperator build_operator(
    OperatorVariant variant, const Grid1D& grid, double r, const KernelF& kernel,
    std::size_t subdivisions = DiscreteNonlocalOperator::kDefaultSubdivisions) {
  return DiscreteNonlocalOperator(variant, grid, r, kernel, subdivisions);
}

inline ScalarField apply(const DiscreteNonlocalOperator& op, const ScalarField& f) {
  return op.apply(f);
}

/// Second-order gradient: central differences inside, one-sided three-point
/// formulas in the two boundary cells.
inline void gradient_field(std::span<const double> u, double h, std::span<double> out) {
  const std::size_t n = u.size();
  const double inv2h = 1.0 / (2.0 * h);
  out[0] = (3.0 * (u[1] - u[0]) - (u[2] - u[1])) * inv2h;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv2h;
  out[n - 1] = (3.0 * (u[n - 1] - u[n - 2]) - (u[n - 2] - u[n - 3])) * inv2h;
}

inline ScalarField gradient_field(const ScalarField& u) {
  ScalarField out(u.grid());
  gradient_field(u.values(), u.grid().spacing(), out.values());
  return out;
}

/// Discrete L2 inner product h * sum(a_i b_i).
inline double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().spacing();
}

inline double l2_norm(const ScalarField& a) { return std::sqrt(inner(a, a)); }

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on w -> R^T R w. The returned sqrt of the Rayleigh quotient
/// never exceeds the true discrete L2 operator norm.
inline NormEstimate operator_norm_estimate(const DiscreteNonlocalOperator& op,
                                           std::size_t max_iterations = 200,
                                           double rel_tol = 1e-10, std::uint64_t seed = 12345) {
  const std::size_t n = op.grid().size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n), rv(n), w(n);
  for (auto& x : v) x = dist(rng);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double y : x) s += y * y;
    s = std::sqrt(s);
    for (double& y : x) y /= s;
  };
  normalize(v);
  NormEstimate est;
  double prev = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    op.apply(v, rv);
    double s = 0.0;
    for (double y : rv) s += y * y;
    est.value = std::sqrt(s);
    est.iterations = it;
    if (it > 1 && std::abs(est.value - prev) <= rel_tol * est.value) {
      est.converged = true;
      break;
    }
    prev = est.value;
    op.apply_transpose(rv, w);
    v.swap(w);
    normalize(v);
  }
  return est;
}

/// Upper bound C2(r, p) on ||T_r|| in L^p. p = infinity is passed as
/// std::numeric_limits<double>::infinity().
inline double c2_bound(const KernelF& kernel, double r, double p) {
  constexpr double n = kDim;
  if (p == 1.0) {
    double best = 0.0;
    constexpr int kSamples = 4096;
    for (int k = 0; k <= kSamples; ++k) {
      const double rho = static_cast<double>(k) / kSamples;
      best = std::max(best, rho * kernel(r, r * rho));
    }
    return best;
  }
  const double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
  const double integral = quad::gauss_legendre(
      [&](double rho) { return std::pow(rho, n - 1.0 + q) * std::pow(kernel(r, r * rho), q); },
      0.0, 1.0, 64);
  return std::pow(n * integral, 1.0 / q);
}

/// r -> 0 limit of c2_bound: (n+1)(n/(n+q))^{1/q}, or n+1 for p = 1.
inline double c2_limit(double p) {
  constexpr double n = kDim;
  if (p == 1.0) return n + 1.0;
  const double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
  return (n + 1.0) * std::pow(n / (n + q), 1.0 / q);
}

}  // namespace nltaxis
