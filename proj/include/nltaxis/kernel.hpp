#pragma once

// Interaction-force kernels F_r(rho) and the flux regularizer G_eps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nltaxis/grid.hpp"

namespace nltaxis {

/// Spatial dimension of everything in this library.
inline constexpr int kDim = 1;

/// Interaction force F_r(rho) for rho in [0, r]. Normalised so that
/// F_0(0) = n + 1 = 2.
class KernelF {
 public:
  enum class Family { Constant, Exponential, Tabulated };

  static KernelF constant(double value) { return KernelF(Family::Constant, value, {}, {}); }

  /// (n+1) * exp(-r * rho).
  static KernelF exponential() { return KernelF(Family::Exponential, kDim + 1.0, {}, {}); }

  /// Piecewise-linear profile in rho (independent of r), held constant past the
  /// last node. Nodes must start at 0 and increase strictly.
  static KernelF tabulated(std::vector<double> rho, std::vector<double> values) {
    if (rho.size() < 2 || rho.size() != values.size())
      throw ConfigError("tabulated kernel needs >= 2 matching nodes and values");
    if (rho.front() != 0.0) throw ConfigError("tabulated kernel must start at rho = 0");
    for (std::size_t k = 1; k < rho.size(); ++k)
      if (!(rho[k] > rho[k - 1])) throw ConfigError("tabulated kernel nodes must increase");
    return KernelF(Family::Tabulated, 0.0, std::move(rho), std::move(values));
  }

  Family family() const { return family_; }
  double constant_value() const { return scale_; }
  const std::vector<double>& table_rho() const { return rho_; }
  const std::vector<double>& table_values() const { return vals_; }

  std::string describe() const {
    switch (family_) {
      case Family::Constant: return "constant(" + std::to_string(scale_) + ")";
      case Family::Exponential: return "exponential";
      case Family::Tabulated: return "tabulated(" + std::to_string(rho_.size()) + " nodes)";
    }
    return "?";
  }

  double operator()(double r, double rho) const {
    switch (family_) {
      case Family::Constant: return scale_;
      case Family::Exponential: return scale_ * std::exp(-r * rho);
      case Family::Tabulated: return table(rho);
    }
    return 0.0;
  }

  /// Closed-form (or exact piecewise-linear) integral of F_r over [a, b].
  double integral(double r, double a, double b) const {
    if (b <= a) return 0.0;
    switch (family_) {
      case Family::Constant: return scale_ * (b - a);
      case Family::Exponential:
        if (r == 0.0) return scale_ * (b - a);
        return scale_ * (std::exp(-r * a) - std::exp(-r * b)) / r;
      case Family::Tabulated: return table_integral(b) - table_integral(a);
    }
    return 0.0;
  }

  /// Checks continuity/positivity on [0, r0]^2 (sampled) and F_0(0) = n + 1.
  void validate(double r0) const {
    constexpr double kTol = 1e-12;
    const double f00 = (*this)(0.0, 0.0);
    if (std::abs(f00 - (kDim + 1.0)) > kTol)
      throw ConfigError("kernel violates F_0(0) = n + 1 = 2 (got " + std::to_string(f00) + ")");
    constexpr int kSamples = 32;
    for (int a = 0; a <= kSamples; ++a)
      for (int b = 0; b <= kSamples; ++b) {
        const double r = r0 * a / kSamples;
        const double rho = r0 * b / kSamples;
        const double v = (*this)(r, rho);
        if (!(v > 0.0) || !std::isfinite(v))
          throw ConfigError("kernel is not positive at r=" + std::to_string(r) +
                            ", rho=" + std::to_string(rho));
      }
  }

 private:
  KernelF(Family f, double scale, std::vector<double> rho, std::vector<double> vals)
      : family_(f), scale_(scale), rho_(std::move(rho)), vals_(std::move(vals)) {}

  double table(double rho) const {
    if (rho <= 0.0) return vals_.front();
    if (rho >= rho_.back()) return vals_.back();
    auto it = std::upper_bound(rho_.begin(), rho_.end(), rho);
    const std::size_t k = static_cast<std::size_t>(it - rho_.begin()) - 1;
    const double t = (rho - rho_[k]) / (rho_[k + 1] - rho_[k]);
    return vals_[k] + t * (vals_[k + 1] - vals_[k]);
  }

  // Integral of the table from 0 to x.
  double table_integral(double x) const {
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < rho_.size(); ++k) {
      const double a = rho_[k];
      if (x <= a) return s;
      const double b = std::min(x, rho_[k + 1]);
      s += 0.5 * (b - a) * (vals_[k] + table(b));
      if (x <= rho_[k + 1]) return s;
    }
    return s + (x - rho_.back()) * vals_.back();
  }

  Family family_;
  double scale_;
  std::vector<double> rho_;
  std::vector<double> vals_;
};

/// G_eps(x) = x / (1 + eps |x|); identity for eps = 0.
struct RegularizerG {
  double epsilon = 0.0;

  explicit RegularizerG(double eps = 0.0) : epsilon(eps) {
    if (!(eps >= 0.0)) throw ConfigError("regularizer epsilon must be >= 0");
  }

  double operator()(double x) const { return x / (1.0 + epsilon * std::abs(x)); }
  bool active() const { return epsilon > 0.0; }
};

inline ScalarField apply_regularizer(const RegularizerG& g, const ScalarField& w) {
  ScalarField out = w;
  for (double& v : out.values()) v = g(v);
  return out;
}

}  // namespace nltaxis
