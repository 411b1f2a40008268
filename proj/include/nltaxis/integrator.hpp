#pragma once

// Dormand-Prince 5(4) explicit integrator with FSAL, PI step-size control and
// continuous (dense) output, for y' = f(t, y) on flat double vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nltaxis {

enum class StepStatus { Accepted, Rejected, NonFinite, StepUnderflow };

struct IntegratorOptions {
  double rtol = 1e-6;
  double atol = 1e-6;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 picks one automatically
  double min_step = 0.0;      // below this the step is reported as underflow
  // Optional constraint on accepted states; a violating step is retried at half size.
  std::function<bool(std::span<const double>)> admissible;
};

/// Mutable state carried between steps. Everything needed to resume exactly.
struct IntegratorState {
  double t = 0.0;
  double h = 0.0;  // proposed next step
  double err_prev = 1e-4;
  bool last_rejected = false;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;

  friend bool operator==(const IntegratorState&, const IntegratorState&) = default;
};

class DormandPrince5 {
 public:
  // Returns false when the derivative contains nonfinite entries.
  using Rhs = std::function<bool(double t, std::span<const double> y, std::span<double> dydt)>;

  DormandPrince5(Rhs rhs, std::size_t dim, IntegratorOptions opt)
      : rhs_(std::move(rhs)), opt_(opt), y_(dim), k1_(dim), k2_(dim), k3_(dim), k4_(dim),
        k5_(dim), k6_(dim), k7_(dim), ytmp_(dim), ynew_(dim), r1_(dim), r2_(dim), r3_(dim),
        r4_(dim), r5_(dim) {}

  /// Sets the state; evaluates f once for the FSAL slot. Returns false if
  /// f(t, y) is not finite.
  bool reset(std::span<const double> y, const IntegratorState& st, double t_end) {
    std::copy(y.begin(), y.end(), y_.begin());
    st_ = st;
    t_end_ = t_end;
    if (!eval(st_.t, y_, k1_)) return false;
    if (st_.h <= 0.0) st_.h = initial_step();
    return true;
  }

  /// Attempts one step, clipped to t_end. On acceptance the dense output
  /// covers [t_old, t].
  StepStatus step() {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double h = std::min({st_.h, opt_.max_step, t_end_ - st_.t});
    if (h < opt_.min_step && st_.t + h < t_end_) return StepStatus::StepUnderflow;
    const std::size_t n = y_.size();
    const double t = st_.t;

    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1_[i];
    if (!eval(t + c2 * h, ytmp_, k2_)) return reject_nonfinite(h);
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    if (!eval(t + c3 * h, ytmp_, k3_)) return reject_nonfinite(h);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    if (!eval(t + c4 * h, ytmp_, k4_)) return reject_nonfinite(h);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    if (!eval(t + c5 * h, ytmp_, k5_)) return reject_nonfinite(h);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                              a65 * k5_[i]);
    if (!eval(t + h, ytmp_, k6_)) return reject_nonfinite(h);
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                              a76 * k6_[i]);
    if (!eval(t + h, ynew_, k7_)) return reject_nonfinite(h);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                            e6 * k6_[i] + e7 * k7_[i]);
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      sum += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(sum / static_cast<double>(n));
    if (!std::isfinite(err)) return reject_nonfinite(h);

    constexpr double beta = 0.04, expo = 0.2 - beta * 0.75, safe = 0.9;
    constexpr double fac_min = 1.0 / 10.0, fac_max = 1.0 / 0.2;  // on h_old / h_new
    const double fac11 = std::pow(err, expo);
    if (err <= 1.0 && opt_.admissible && !opt_.admissible(ynew_)) {
      st_.h = 0.5 * h;
      st_.last_rejected = true;
      ++st_.rejected;
      return StepStatus::Rejected;
    }
    if (err <= 1.0) {
      double fac = fac11 / std::pow(st_.err_prev, beta);
      fac = std::clamp(fac / safe, fac_min, fac_max);
      double h_new = h / fac;
      if (st_.last_rejected) h_new = std::min(h_new, h);
      build_dense(h);
      t_old_ = t;
      h_last_ = h;
      st_.t = (h == t_end_ - t) ? t_end_ : t + h;
      y_.swap(ynew_);
      k1_.swap(k7_);
      st_.err_prev = std::max(err, 1e-4);
      st_.h = h_new;
      st_.last_rejected = false;
      ++st_.accepted;
      return StepStatus::Accepted;
    }
    st_.h = h / std::min(fac_max, fac11 / safe);
    st_.last_rejected = true;
    ++st_.rejected;
    return StepStatus::Rejected;
  }

  /// Continuous extension on the last accepted step; requires t_old <= t <= t_old + h.
  void dense(double t, std::span<double> out) const {
    const double th = (t - t_old_) / h_last_;
    const double th1 = 1.0 - th;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = r1_[i] + th * (r2_[i] + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
  }

  std::span<const double> y() const { return y_; }
  const IntegratorState& state() const { return st_; }
  double last_step_start() const { return t_old_; }
  double last_step_size() const { return h_last_; }

 private:
  bool eval(double t, std::span<const double> y, std::span<double> out) {
    ++st_.rhs_evals;
    return rhs_(t, y, out);
  }

  // A nonfinite stage counts as a rejection with a tenfold smaller step.
  StepStatus reject_nonfinite(double h) {
    st_.h = 0.1 * h;
    st_.last_rejected = true;
    ++st_.rejected;
    return StepStatus::NonFinite;
  }

  void build_dense(double h) {
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double dy = ynew_[i] - y_[i];
      const double bspl = h * k1_[i] - dy;
      r1_[i] = y_[i];
      r2_[i] = dy;
      r3_[i] = bspl;
      r4_[i] = dy - h * k7_[i] - bspl;
      r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                    d7 * k7_[i]);
    }
  }

  // Starting step from the size of y and f(t0, y0) plus one explicit Euler
  // probe for the second derivative.
  double initial_step() {
    if (opt_.initial_step > 0.0) return opt_.initial_step;
    const std::size_t n = y_.size();
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      dnf += (k1_[i] / sk) * (k1_[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, opt_.max_step, t_end_ - st_.t});
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * k1_[i];
    if (!eval(st_.t + h, ytmp_, k2_)) return h * 1e-3;
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      const double d = (k2_[i] - k1_[i]) / sk;
      der2 += d * d;
    }
    der2 = std::sqrt(der2 / static_cast<double>(n)) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf / static_cast<double>(n)));
    const double h1 =
        der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, opt_.max_step, t_end_ - st_.t});
  }

  Rhs rhs_;
  IntegratorOptions opt_;
  IntegratorState st_;
  double t_end_ = 0.0;
  double t_old_ = 0.0;
  double h_last_ = 0.0;
  std::vector<double> y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  std::vector<double> r1_, r2_, r3_, r4_, r5_;
};

}  // namespace nltaxis
