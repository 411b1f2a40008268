#pragma once

// Conservative finite-volume method of lines for the cell/matrix taxis
// systems on [0, L] with zero-flux ends:
//   c_t = -(flux)_x + f_c,  flux = -D_c c_x + c * chi * w,
//   v_t = D_v v_xx + f_v,
// where the drift signal w is A_r g, R_r(grad g) or grad g.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nltaxis/grid.hpp"
#include "nltaxis/integrator.hpp"
#include "nltaxis/kernel.hpp"
#include "nltaxis/model.hpp"
#include "nltaxis/operators.hpp"

namespace nltaxis {

enum class FormulationTag { NonlocalA, NonlocalR, Local };

inline std::string_view to_string(FormulationTag f) {
  switch (f) {
    case FormulationTag::NonlocalA: return "nonlocal_a";
    case FormulationTag::NonlocalR: return "nonlocal_r";
    case FormulationTag::Local: return "local";
  }
  return "?";
}

inline FormulationTag parse_formulation(std::string_view s) {
  if (s == "nonlocal_a") return FormulationTag::NonlocalA;
  if (s == "nonlocal_r") return FormulationTag::NonlocalR;
  if (s == "local") return FormulationTag::Local;
  throw ConfigError("unknown formulation '" + std::string(s) + "'");
}

struct Formulation {
  FormulationTag tag = FormulationTag::NonlocalA;
  double radius = 1.0;                             // ignored for Local
  OperatorVariant averaging = OperatorVariant::AvgT;  // NonlocalR only: AvgT or AvgS
  RegularizerG regularizer{};
  std::size_t subdivisions = DiscreteNonlocalOperator::kDefaultSubdivisions;
};

struct InitialData {
  ScalarField c;
  ScalarField v;
};

/// Gaussian cell blob exp(-alpha (x - x_c)^2) and a uniform matrix.
inline InitialData initial_conditions(const Grid1D& grid, double alpha, double x_c,
                                      double v_const) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(v_const >= 0.0)) throw ConfigError("initial matrix density must be >= 0");
  return {ScalarField::from_function(grid,
                                     [&](double x) { return std::exp(-alpha * (x - x_c) * (x - x_c)); }),
          ScalarField(grid, v_const)};
}

/// Semi-discrete right-hand side. Stencils are built once here; g is
/// re-evaluated on every call.
class FvSystem {
 public:
  FvSystem(Grid1D grid, CoefficientSet coeffs, Formulation form)
      : grid_(std::move(grid)), cs_(std::move(coeffs)), form_(form) {
    if (form_.tag != FormulationTag::Local) {
      if (!(form_.radius > 0.0)) throw ConfigError("nonlocal formulations need r > 0");
      OperatorVariant var = OperatorVariant::AdhesionVelocity;
      if (form_.tag == FormulationTag::NonlocalR) {
        if (form_.averaging != OperatorVariant::AvgT && form_.averaging != OperatorVariant::AvgS)
          throw ConfigError("nonlocal_r needs the T or S averaging operator");
        var = form_.averaging;
      }
      op_.emplace(var, grid_, form_.radius, cs_.kernel, form_.subdivisions);
    }
    const std::size_t n = grid_.size();
    g_.resize(n);
    w_.resize(n);
    tmp_.resize(n);
    chi_.resize(n);
    dc_.resize(n);
    face_u_.resize(n + 1);
  }

  const Grid1D& grid() const { return grid_; }
  const CoefficientSet& coefficients() const { return cs_; }
  const Formulation& formulation() const { return form_; }
  const std::optional<DiscreteNonlocalOperator>& op() const { return op_; }

  /// Drift signal per cell before the face interpolation (Local: none).
  void drift_signal(std::span<const double> c, std::span<const double> v, std::span<double> out) {
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) g_[i] = cs_.signal(c[i], v[i]);
    if (form_.tag == FormulationTag::NonlocalA) {
      op_->apply(g_, out);
    } else if (form_.tag == FormulationTag::NonlocalR) {
      gradient_field(g_, grid_.spacing(), tmp_);
      op_->apply(tmp_, out);
    } else {
      gradient_field(g_, grid_.spacing(), out);
    }
  }

  /// Advective velocity chi * w at the N+1 faces; both boundary faces are 0.
  void drift_velocity(std::span<const double> c, std::span<const double> v,
                      std::span<double> face) {
    const std::size_t n = grid_.size();
    const double h = grid_.spacing();
    for (std::size_t i = 0; i < n; ++i) chi_[i] = cs_.sensitivity(c[i], v[i]);
    face[0] = 0.0;
    face[n] = 0.0;
    if (form_.tag == FormulationTag::Local) {
      for (std::size_t i = 0; i < n; ++i) g_[i] = cs_.signal(c[i], v[i]);
      for (std::size_t f = 1; f < n; ++f) {
        double w = (g_[f] - g_[f - 1]) / h;
        if (form_.regularizer.active()) w = form_.regularizer(w);
        face[f] = 0.5 * (chi_[f - 1] + chi_[f]) * w;
      }
      return;
    }
    drift_signal(c, v, w_);
    if (form_.regularizer.active())
      for (auto& x : w_) x = form_.regularizer(x);
    for (std::size_t f = 1; f < n; ++f)
      face[f] = 0.5 * (chi_[f - 1] + chi_[f]) * 0.5 * (w_[f - 1] + w_[f]);
  }

  /// Writes dc/dt and dv/dt; returns false if any entry is nonfinite.
  bool rhs(std::span<const double> c, std::span<const double> v, std::span<double> dc,
           std::span<double> dv) {
    const std::size_t n = grid_.size();
    const double h = grid_.spacing();
    drift_velocity(c, v, face_u_);
    for (std::size_t i = 0; i < n; ++i) dc_[i] = cs_.diffusion(c[i], v[i]);

    double flux_left = 0.0;  // face 0: zero flux
    for (std::size_t f = 1; f <= n; ++f) {
      double flux = 0.0;
      if (f < n) {
        const double d = 0.5 * (dc_[f - 1] + dc_[f]);
        flux = -d * (c[f] - c[f - 1]) / h;
        const double u = face_u_[f];
        if (u > 0.0) {
          const double dm = f >= 2 ? c[f - 1] - c[f - 2] : 0.0;
          flux += u * (c[f - 1] + 0.5 * limited_slope(dm, c[f] - c[f - 1]));
        } else if (u < 0.0) {
          const double dm = f + 1 < n ? c[f] - c[f + 1] : 0.0;
          flux += u * (c[f] + 0.5 * limited_slope(dm, c[f - 1] - c[f]));
        }
      }
      const std::size_t i = f - 1;
      dc[i] = -(flux - flux_left) / h + cs_.growth_c(c[i], v[i]);
      flux_left = flux;
    }

    const double dv_coef = cs_.matrix_diffusion / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
      const double vl = i > 0 ? v[i - 1] : v[i];
      const double vr = i + 1 < n ? v[i + 1] : v[i];
      dv[i] = dv_coef * (vl - 2.0 * v[i] + vr) + cs_.growth_v(c[i], v[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(dc[i]) || !std::isfinite(dv[i])) return false;
    return true;
  }

  /// Koren-limited kappa = 1/3 correction phi(dp/dm) * dm, written without
  /// the ratio so that dm = 0 gives 0.
  static double limited_slope(double dm, double dp) {
    if (dm > 0.0) return std::max(0.0, std::min({2.0 * dp, (dm + 2.0 * dp) / 3.0, 2.0 * dm}));
    if (dm < 0.0) return std::min(0.0, std::max({2.0 * dp, (dm + 2.0 * dp) / 3.0, 2.0 * dm}));
    return 0.0;
  }

 private:
  Grid1D grid_;
  CoefficientSet cs_;
  Formulation form_;
  std::optional<DiscreteNonlocalOperator> op_;
  std::vector<double> g_, w_, tmp_, chi_, dc_, face_u_;
};

enum class RunStatus { Completed, IllPosedAbort, ToleranceFailure };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::IllPosedAbort: return "ill-posed-abort";
    case RunStatus::ToleranceFailure: return "tolerance-failure";
  }
  return "?";
}

struct SolverConfig {
  Grid1D grid{20.0, 1000};
  CoefficientSet coeffs;
  Formulation formulation;
  double t_end = 5.0;
  double rtol = 1e-6;
  double atol = 1e-6;
  double max_step = std::numeric_limits<double>::infinity();
  std::vector<double> c0, v0;
  std::vector<double> sample_times;
  std::uint64_t max_steps = 2'000'000;  // beyond this: tolerance-failure
  // Steps leaving any c below this are rejected; NaN disables the check.
  double positivity_floor = -1e-14;
  // Local only: abort once the effective diffusion is negative in some cell.
  bool monitor_effective_diffusion = true;
};

struct Sample {
  double t = 0.0;
  std::vector<double> c, v;
  double mass_c = 0.0, min_c = 0.0, max_c = 0.0, mass_v = 0.0;
};

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::vector<Sample> samples;
  double t_final = 0.0;            // last accepted time
  std::vector<double> c, v;        // last accepted (finite) state
  IntegratorState stats;
  std::string message;
};

inline Sample make_sample(const Grid1D& grid, double t, std::span<const double> c,
                          std::span<const double> v) {
  Sample s;
  s.t = t;
  s.c.assign(c.begin(), c.end());
  s.v.assign(v.begin(), v.end());
  const double h = grid.spacing();
  s.min_c = std::numeric_limits<double>::infinity();
  s.max_c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    s.mass_c += h * c[i];
    s.mass_v += h * v[i];
    s.min_c = std::min(s.min_c, c[i]);
    s.max_c = std::max(s.max_c, c[i]);
  }
  return s;
}

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Complete restart point: grid, integrator controller state and fields.
struct Snapshot {
  double length = 0.0;
  std::uint64_t cells = 0;
  IntegratorState integrator;
  std::vector<double> c, v;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Layout (host byte order, doubles as IEEE-754 binary64):
//   char[8] "NLTXSNAP", u32 version, u64 N, f64 L, f64 t, f64 h, f64 err_prev,
//   u8 last_rejected, u64 accepted, u64 rejected, u64 rhs_evals, f64 c[N], f64 v[N]
inline constexpr std::uint32_t kSnapshotVersion = 1;

inline std::string save_snapshot(const Snapshot& s) {
  if (s.c.size() != s.cells || s.v.size() != s.cells)
    throw SnapshotError("snapshot field sizes disagree with the cell count");
  std::string out;
  auto put = [&out](const auto& x) {
    const auto* p = reinterpret_cast<const char*>(&x);
    out.append(p, sizeof(x));
  };
  out.append("NLTXSNAP", 8);
  put(kSnapshotVersion);
  put(s.cells);
  put(s.length);
  put(s.integrator.t);
  put(s.integrator.h);
  put(s.integrator.err_prev);
  put(static_cast<std::uint8_t>(s.integrator.last_rejected ? 1 : 0));
  put(s.integrator.accepted);
  put(s.integrator.rejected);
  put(s.integrator.rhs_evals);
  out.append(reinterpret_cast<const char*>(s.c.data()), s.c.size() * sizeof(double));
  out.append(reinterpret_cast<const char*>(s.v.data()), s.v.size() * sizeof(double));
  return out;
}

inline Snapshot load_snapshot(std::string_view bytes) {
  std::size_t pos = 0;
  auto get = [&](auto& x) {
    if (bytes.size() - pos < sizeof(x)) throw SnapshotError("snapshot is truncated");
    std::memcpy(&x, bytes.data() + pos, sizeof(x));
    pos += sizeof(x);
  };
  if (bytes.size() < 8 || bytes.substr(0, 8) != "NLTXSNAP")
    throw SnapshotError("not a snapshot (bad magic)");
  pos = 8;
  std::uint32_t version = 0;
  get(version);
  if (version != kSnapshotVersion)
    throw SnapshotError("snapshot version " + std::to_string(version) + " is not supported");
  Snapshot s;
  std::uint8_t rej = 0;
  get(s.cells);
  get(s.length);
  get(s.integrator.t);
  get(s.integrator.h);
  get(s.integrator.err_prev);
  get(rej);
  s.integrator.last_rejected = rej != 0;
  get(s.integrator.accepted);
  get(s.integrator.rejected);
  get(s.integrator.rhs_evals);
  const std::size_t need = 2 * s.cells * sizeof(double);
  if (bytes.size() - pos != need) throw SnapshotError("snapshot is truncated or has trailing data");
  s.c.resize(s.cells);
  s.v.resize(s.cells);
  std::memcpy(s.c.data(), bytes.data() + pos, s.cells * sizeof(double));
  std::memcpy(s.v.data(), bytes.data() + pos + s.cells * sizeof(double), s.cells * sizeof(double));
  return s;
}

inline void write_snapshot_file(const std::string& path, const Snapshot& s) {
  std::ofstream f(path, std::ios::binary);
  const std::string bytes = save_snapshot(s);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw SnapshotError("cannot write " + path);
}

inline Snapshot read_snapshot_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SnapshotError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return load_snapshot(bytes);
}

/// One time integration; can be paused after a step budget, snapshotted and
/// resumed.
class Simulation {
 public:
  explicit Simulation(SolverConfig cfg)
      : cfg_(std::move(cfg)), system_(cfg_.grid, cfg_.coeffs, cfg_.formulation),
        n_(cfg_.grid.size()),
        dp_([this](double, std::span<const double> y, std::span<double> dy) {
              return system_.rhs(y.subspan(0, n_), y.subspan(n_), dy.subspan(0, n_),
                                 dy.subspan(n_));
            },
            2 * cfg_.grid.size(), options(cfg_)) {
    if (!(cfg_.t_end > 0.0)) throw ConfigError("end time must be > 0");
    if (!(cfg_.rtol > 0.0) || !(cfg_.atol > 0.0)) throw ConfigError("tolerances must be > 0");
    if (cfg_.c0.size() != n_ || cfg_.v0.size() != n_)
      throw ConfigError("initial data size does not match the grid");
    for (std::size_t i = 0; i < n_; ++i)
      if (!(cfg_.c0[i] >= 0.0) || !(cfg_.v0[i] >= 0.0))
        throw ConfigError("initial data must be nonnegative and finite");
    std::sort(cfg_.sample_times.begin(), cfg_.sample_times.end());
    for (double ts : cfg_.sample_times)
      if (ts < 0.0 || ts > cfg_.t_end) throw ConfigError("sample time outside [0, T]");
    std::vector<double> y(2 * n_);
    std::copy(cfg_.c0.begin(), cfg_.c0.end(), y.begin());
    std::copy(cfg_.v0.begin(), cfg_.v0.end(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    start(y, IntegratorState{});
  }

  /// Advances until T, an abort, or `step_budget` accepted steps in this call.
  /// Returns true when the run has finished (any status).
  bool advance(std::uint64_t step_budget = std::numeric_limits<std::uint64_t>::max()) {
    if (finished_) return true;
    const double min_step = 1e-12 * cfg_.t_end;
    std::uint64_t taken = 0;
    std::vector<double> buf(2 * n_);
    while (dp_.state().t < cfg_.t_end) {
      if (taken >= step_budget) return false;
      if (dp_.state().accepted + dp_.state().rejected >= cfg_.max_steps)
        return finish(RunStatus::ToleranceFailure, "step limit reached");
      const double t_before = dp_.state().t;
      const StepStatus st = dp_.step();
      if (st == StepStatus::StepUnderflow)
        return finish(RunStatus::IllPosedAbort, "step size underflow");
      if (st != StepStatus::Accepted) {
        if (dp_.state().h < min_step && t_before + dp_.state().h < cfg_.t_end)
          return finish(RunStatus::IllPosedAbort, st == StepStatus::NonFinite
                                                      ? "nonfinite right-hand side"
                                                      : "step size underflow");
        continue;
      }
      ++taken;
      const double t_now = dp_.state().t;
      if (effective_diffusion_negative(dp_.y()))
        return finish(RunStatus::IllPosedAbort, "negative effective diffusion");
      while (next_sample_ < cfg_.sample_times.size() &&
             cfg_.sample_times[next_sample_] <= t_now) {
        const double ts = cfg_.sample_times[next_sample_];
        if (ts == t_now) {
          record(ts, dp_.y());
        } else {
          dp_.dense(ts, buf);
          record(ts, buf);
        }
        ++next_sample_;
      }
    }
    return finish(RunStatus::Completed, "");
  }

  bool finished() const { return finished_; }
  double time() const { return dp_.state().t; }

  /// Restart point at the current step boundary.
  Snapshot snapshot() const {
    Snapshot s;
    s.length = cfg_.grid.length();
    s.cells = n_;
    s.integrator = dp_.state();
    const auto y = dp_.y();
    s.c.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    s.v.assign(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end());
    return s;
  }

  /// Continues from a snapshot; samples before its time are dropped.
  void restore(const Snapshot& s) {
    if (s.cells != n_ || s.length != cfg_.grid.length())
      throw SnapshotError("snapshot grid does not match the configuration");
    std::vector<double> y(2 * n_);
    std::copy(s.c.begin(), s.c.end(), y.begin());
    std::copy(s.v.begin(), s.v.end(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    result_ = RunResult{};
    finished_ = false;
    start(y, s.integrator);
  }

  const RunResult& result() const { return result_; }
  const SolverConfig& config() const { return cfg_; }
  FvSystem& system() { return system_; }

 private:
  static IntegratorOptions options(const SolverConfig& cfg) {
    IntegratorOptions o;
    o.rtol = cfg.rtol;
    o.atol = cfg.atol;
    o.max_step = cfg.max_step;
    o.min_step = 1e-12 * cfg.t_end;
    if (!std::isnan(cfg.positivity_floor)) {
      const std::size_t n = cfg.grid.size();
      const double floor = cfg.positivity_floor;
      o.admissible = [n, floor](std::span<const double> y) {
        for (std::size_t i = 0; i < n; ++i)
          if (y[i] < floor) return false;
        return true;
      };
    }
    return o;
  }

  bool effective_diffusion_negative(std::span<const double> y) const {
    if (!monitor_) return false;
    for (std::size_t i = 0; i < n_; ++i)
      if (monitor_->diffusion(y[i], y[n_ + i]) < 0.0) return true;
    return false;
  }

  void start(const std::vector<double>& y, const IntegratorState& st) {
    next_sample_ = 0;
    if (cfg_.formulation.tag == FormulationTag::Local && cfg_.monitor_effective_diffusion)
      monitor_ = effective_coeffs(cfg_.coeffs);
    if (!dp_.reset(y, st, cfg_.t_end)) {
      finish(RunStatus::IllPosedAbort, "nonfinite right-hand side at start");
      return;
    }
    while (next_sample_ < cfg_.sample_times.size() && cfg_.sample_times[next_sample_] <= st.t) {
      if (cfg_.sample_times[next_sample_] == st.t) record(st.t, y);
      ++next_sample_;
    }
    if (effective_diffusion_negative(y)) finish(RunStatus::IllPosedAbort, "negative effective diffusion");
  }

  void record(double t, std::span<const double> y) {
    result_.samples.push_back(make_sample(cfg_.grid, t, y.subspan(0, n_), y.subspan(n_)));
  }

  bool finish(RunStatus status, std::string message) {
    finished_ = true;
    result_.status = status;
    result_.message = std::move(message);
    result_.t_final = dp_.state().t;
    result_.stats = dp_.state();
    const auto y = dp_.y();
    result_.c.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    result_.v.assign(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end());
    return true;
  }

  SolverConfig cfg_;
  FvSystem system_;
  std::size_t n_;
  DormandPrince5 dp_;
  std::size_t next_sample_ = 0;
  std::optional<EffectiveLocalCoefficients> monitor_;
  bool finished_ = false;
  RunResult result_;
};

inline RunResult integrate(const SolverConfig& cfg) {
  Simulation sim(cfg);
  sim.advance();
  return sim.result();
}

}  // namespace nltaxis
