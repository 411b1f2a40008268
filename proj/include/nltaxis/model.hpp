#pragma once

// Coefficient functions of the taxis systems, preset families, effective
// local coefficients and lattice-based parameter diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "nltaxis/expression.hpp"
#include "nltaxis/grid.hpp"
#include "nltaxis/kernel.hpp"

namespace nltaxis {

using StateFunction = std::function<double(double c, double v)>;
using ParameterMap = std::map<std::string, double>;

/// Diffusion and haptotactic sensitivity of the r -> 0 limit system.
struct EffectiveLocalCoefficients {
  StateFunction diffusion;    // D~_c
  StateFunction sensitivity;  // chi~
};

struct CoefficientSet {
  std::string family;
  ParameterMap params;

  StateFunction diffusion;    // D_c
  StateFunction sensitivity;  // chi
  StateFunction signal;       // g
  StateFunction signal_dc;    // dg/dc
  StateFunction signal_dv;    // dg/dv
  StateFunction growth_c;     // f_c
  StateFunction growth_v;     // f_v
  double matrix_diffusion = 0.0;  // D_v
  KernelF kernel = KernelF::constant(2.0);

  // Set when the family publishes its own closed-form effective coefficients.
  std::optional<EffectiveLocalCoefficients> effective_override;
};

enum class PresetFamily { MinimalLinear, SaturatingExample, Figure3Family, Custom };

inline std::string_view to_string(PresetFamily f) {
  switch (f) {
    case PresetFamily::MinimalLinear: return "minimal_linear";
    case PresetFamily::SaturatingExample: return "saturating";
    case PresetFamily::Figure3Family: return "figure3";
    case PresetFamily::Custom: return "custom";
  }
  return "?";
}

inline PresetFamily parse_preset(std::string_view s) {
  if (s == "minimal_linear") return PresetFamily::MinimalLinear;
  if (s == "saturating") return PresetFamily::SaturatingExample;
  if (s == "figure3") return PresetFamily::Figure3Family;
  if (s == "custom") return PresetFamily::Custom;
  throw ConfigError("unknown model preset '" + std::string(s) + "'");
}

/// Default parameter set of each preset. build_preset rejects any other key.
inline ParameterMap preset_defaults(PresetFamily f) {
  switch (f) {
    case PresetFamily::MinimalLinear:
      return {{"a", 0.01}, {"S_cc", 0.0}, {"S_cv", 10.0}, {"mu", 1.0}, {"D_v", 0.0}};
    case PresetFamily::SaturatingExample:
      return {{"b", 1.0},    {"S_cc", 0.0}, {"S_cv", 10.0}, {"mu_c", 0.01},    {"K_c", 2.0},
              {"eta_c", 1.0}, {"mu_v", 0.0}, {"K_v", 1.0},   {"lambda_v", 1.0}, {"D_v", 0.0}};
    case PresetFamily::Figure3Family:
      return {{"a", 0.01},   {"b", 1.0},    {"S_cc", 0.0}, {"S_cv", 10.0},    {"mu_c", 0.01},
              {"K_c", 2.0},  {"eta_c", 1.0}, {"mu_v", 0.0}, {"K_v", 1.0},     {"lambda_v", 1.0},
              {"D_v", 0.0},  {"simple_kinetics", 0.0}, {"mu", 1.0}};
    case PresetFamily::Custom: return {{"D_v", 0.0}};
  }
  return {};
}

namespace detail {

inline ParameterMap merge_params(PresetFamily f, const ParameterMap& given) {
  ParameterMap p = preset_defaults(f);
  for (const auto& [k, v] : given) {
    if (!p.count(k))
      throw ConfigError("parameter '" + k + "' is not defined for preset " +
                        std::string(to_string(f)));
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' is not finite");
    p[k] = v;
  }
  for (const auto& [k, v] : p)
    if (v < 0.0) throw ConfigError("parameter '" + k + "' must be nonnegative");
  return p;
}

inline void require_positive(const ParameterMap& p, const char* key) {
  if (!(p.at(key) > 0.0)) throw ConfigError(std::string("parameter '") + key + "' must be > 0");
}

}  // namespace detail

/// Builds one of the closed-form coefficient families. Custom sets go
/// through build_custom instead.
inline CoefficientSet build_preset(PresetFamily family, const ParameterMap& given = {}) {
  if (family == PresetFamily::Custom)
    throw ConfigError("custom coefficient sets need expressions; use build_custom");
  const ParameterMap p = detail::merge_params(family, given);
  CoefficientSet cs;
  cs.family = std::string(to_string(family));
  cs.params = p;
  cs.matrix_diffusion = p.at("D_v");

  if (family == PresetFamily::MinimalLinear) {
    detail::require_positive(p, "a");
    const double a = p.at("a"), scc = p.at("S_cc"), scv = p.at("S_cv"), mu = p.at("mu");
    cs.diffusion = [a](double, double) { return a; };
    cs.sensitivity = [](double, double) { return 1.0; };
    cs.signal = [scc, scv](double c, double v) { return scc * c + scv * v; };
    cs.signal_dc = [scc](double, double) { return scc; };
    cs.signal_dv = [scv](double, double) { return scv; };
    cs.growth_c = [](double, double) { return 0.0; };
    cs.growth_v = [mu](double c, double v) { return -mu * c * v; };
    cs.kernel = KernelF::constant(kDim + 1.0);
    return cs;
  }

  // Both saturating families share g, f_c and f_v.
  const double scc = p.at("S_cc"), scv = p.at("S_cv");
  const double mu_c = p.at("mu_c"), k_c = p.at("K_c"), eta_c = p.at("eta_c");
  const double mu_v = p.at("mu_v"), k_v = p.at("K_v"), lambda_v = p.at("lambda_v");
  detail::require_positive(p, "b");
  const double b = p.at("b");
  cs.signal = [scc, scv](double c, double v) { return (scc * c + scv * v) / (1.0 + c + v); };
  cs.signal_dc = [scc, scv](double c, double v) {
    const double s = 1.0 + c + v;
    return (scc * (1.0 + v) - scv * v) / (s * s);
  };
  cs.signal_dv = [scc, scv](double c, double v) {
    const double s = 1.0 + c + v;
    return (scv * (1.0 + c) - scc * c) / (s * s);
  };
  cs.growth_c = [mu_c, k_c, eta_c](double c, double v) {
    return mu_c * c / (1.0 + c * c) * (k_c - c - eta_c * v);
  };
  cs.growth_v = [mu_v, k_v, lambda_v](double c, double v) {
    return mu_v * v * (k_v - v) - lambda_v * v * c / (1.0 + c);
  };
  cs.kernel = KernelF::exponential();

  if (family == PresetFamily::SaturatingExample) {
    cs.diffusion = [](double c, double v) { return (1.0 + c) / (1.0 + c + v); };
    cs.sensitivity = [b](double c, double v) { return b / (1.0 + c + v); };
    return cs;
  }

  // Figure3Family: D_c = a^2 (1+c)^2 / (1+cv)^2 and chi = b / (1+cv), the
  // pair for which the generic effective-coefficient rule reproduces the
  // published closed forms below.
  detail::require_positive(p, "a");
  const double a = p.at("a");
  cs.diffusion = [a](double c, double v) {
    const double q = (1.0 + c) / (1.0 + c * v);
    return a * a * q * q;
  };
  cs.sensitivity = [b](double c, double v) { return b / (1.0 + c * v); };
  if (p.at("simple_kinetics") != 0.0) {
    const double mu = p.at("mu");
    cs.growth_c = [](double, double) { return 0.0; };
    cs.growth_v = [mu](double c, double v) { return -mu * c * v; };
  }
  EffectiveLocalCoefficients eff;
  eff.diffusion = [a, b, scc, scv](double c, double v) {
    const double s = 1.0 + c + v, q = 1.0 + c * v;
    const double num = a * a * (1.0 + c) * (1.0 + c) * s * s - b * c * q * (scc + (scc - scv) * v);
    return num / (q * q * s * s);
  };
  eff.sensitivity = [b, scc, scv](double c, double v) {
    const double s = 1.0 + c + v;
    return b * (scv + (scv - scc) * c) / ((1.0 + c * v) * s * s);
  };
  cs.effective_override = std::move(eff);
  return cs;
}

/// User-defined coefficients from expressions in c and v. Keys: D_c, chi, g,
/// f_c, f_v and optionally dg_dc, dg_dv; otherwise the partials of g are
/// central differences with step 1e-6.
inline CoefficientSet build_custom(const std::map<std::string, std::string>& exprs,
                                   const ParameterMap& constants, double matrix_diffusion,
                                   KernelF kernel) {
  static const std::set<std::string> kRequired = {"D_c", "chi", "g", "f_c", "f_v"};
  static const std::set<std::string> kOptional = {"dg_dc", "dg_dv"};
  for (const auto& [k, _] : exprs)
    if (!kRequired.count(k) && !kOptional.count(k))
      throw ConfigError("unknown custom coefficient '" + k + "'");
  for (const auto& k : kRequired)
    if (!exprs.count(k)) throw ConfigError("custom model is missing '" + k + "'");
  if (!(matrix_diffusion >= 0.0)) throw ConfigError("D_v must be >= 0");

  auto compile = [&](const std::string& key) -> StateFunction {
    auto e = Expression::parse(exprs.at(key), constants);
    return [e](double c, double v) { return e(c, v); };
  };
  CoefficientSet cs;
  cs.family = "custom";
  cs.params = constants;
  cs.params["D_v"] = matrix_diffusion;
  cs.diffusion = compile("D_c");
  cs.sensitivity = compile("chi");
  cs.signal = compile("g");
  cs.growth_c = compile("f_c");
  cs.growth_v = compile("f_v");
  constexpr double kStep = 1e-6;
  const StateFunction g = cs.signal;
  cs.signal_dc = exprs.count("dg_dc") ? compile("dg_dc") : StateFunction([g](double c, double v) {
    return (g(c + kStep, v) - g(c - kStep, v)) / (2.0 * kStep);
  });
  cs.signal_dv = exprs.count("dg_dv") ? compile("dg_dv") : StateFunction([g](double c, double v) {
    return (g(c, v + kStep) - g(c, v - kStep)) / (2.0 * kStep);
  });
  cs.matrix_diffusion = matrix_diffusion;
  cs.kernel = std::move(kernel);
  return cs;
}

/// D~_c = D_c - c chi dg/dc, chi~ = chi dg/dv, unless the family carries its
/// own closed forms.
inline EffectiveLocalCoefficients effective_coeffs(const CoefficientSet& cs) {
  if (cs.effective_override) return *cs.effective_override;
  EffectiveLocalCoefficients eff;
  eff.diffusion = [d = cs.diffusion, chi = cs.sensitivity, gc = cs.signal_dc](double c, double v) {
    return d(c, v) - c * chi(c, v) * gc(c, v);
  };
  eff.sensitivity = [chi = cs.sensitivity, gv = cs.signal_dv](double c, double v) {
    return chi(c, v) * gv(c, v);
  };
  return eff;
}

struct StateRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct WellposednessReport {
  double c_q1 = 0.0;        // sup c |chi|
  double c_q2 = 0.0;        // sup |dg/dc|
  double d_cmin = 0.0;      // min D_c
  double c_star = 0.0;      // C_Q1 C_Q2 / D_cmin
  double operator_norm = 0.0;
  double margin = 0.0;      // 1 - C* ||R_r||
  double min_effective_diffusion = 0.0;
  double argmin_c = 0.0;
  double argmin_v = 0.0;
  bool diffusion_positive = false;
  bool zero_preserving = false;
  bool local_ill_posed = false;
};

/// Lattice estimates of the constants entering the nonlocal existence
/// condition, plus the sign of the effective local diffusion.
inline WellposednessReport validate_wellposedness(const CoefficientSet& cs, StateRange c_range,
                                                  StateRange v_range, double operator_norm,
                                                  double step = 0.01) {
  if (!(c_range.hi >= c_range.lo) || !(v_range.hi >= v_range.lo) || !(step > 0.0))
    throw ConfigError("validation ranges must be nonempty with a positive step");
  const auto eff = effective_coeffs(cs);
  WellposednessReport rep;
  rep.operator_norm = operator_norm;
  rep.d_cmin = std::numeric_limits<double>::infinity();
  rep.min_effective_diffusion = std::numeric_limits<double>::infinity();
  rep.zero_preserving = true;
  const auto nc = static_cast<long>(std::floor((c_range.hi - c_range.lo) / step + 1e-9));
  const auto nv = static_cast<long>(std::floor((v_range.hi - v_range.lo) / step + 1e-9));
  for (long ic = 0; ic <= nc; ++ic) {
    const double c = c_range.lo + static_cast<double>(ic) * step;
    for (long iv = 0; iv <= nv; ++iv) {
      const double v = v_range.lo + static_cast<double>(iv) * step;
      rep.c_q1 = std::max(rep.c_q1, c * std::abs(cs.sensitivity(c, v)));
      rep.c_q2 = std::max(rep.c_q2, std::abs(cs.signal_dc(c, v)));
      rep.d_cmin = std::min(rep.d_cmin, cs.diffusion(c, v));
      const double dt = eff.diffusion(c, v);
      if (dt < rep.min_effective_diffusion) {
        rep.min_effective_diffusion = dt;
        rep.argmin_c = c;
        rep.argmin_v = v;
      }
    }
  }
  for (long iv = 0; iv <= nv; ++iv)
    if (cs.growth_c(0.0, v_range.lo + static_cast<double>(iv) * step) != 0.0)
      rep.zero_preserving = false;
  for (long ic = 0; ic <= nc; ++ic)
    if (cs.growth_v(c_range.lo + static_cast<double>(ic) * step, 0.0) != 0.0)
      rep.zero_preserving = false;
  rep.diffusion_positive = rep.d_cmin > 0.0;
  rep.c_star = rep.diffusion_positive ? rep.c_q1 * rep.c_q2 / rep.d_cmin
                                      : std::numeric_limits<double>::infinity();
  rep.margin = 1.0 - rep.c_star * operator_norm;
  rep.local_ill_posed = rep.min_effective_diffusion < 0.0;
  return rep;
}

}  // namespace nltaxis
