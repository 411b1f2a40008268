#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nltaxis/dense_quadrature.hpp"
#include "nltaxis/operators.hpp"

using namespace nltaxis;
using Catch::Approx;

namespace {

const KernelF kTwo = KernelF::constant(2.0);

ScalarField random_field(const Grid1D& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  ScalarField f(g);
  for (auto& v : f.values()) v = d(rng);
  return f;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double masked_max_diff(const ScalarField& a, const ScalarField& b, const InteriorMask& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (m.flags[i]) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Example 3.1 on Omega = (-1, 1), written in grid coordinates X = x + 1.
double constant_profile(double X, double r) {
  const double x = X - 1.0;
  if (x <= -1.0 + r) return (-1.0 + r - x) / (r * r);
  if (x >= 1.0 - r) return (1.0 - r - x) / (r * r);
  return 0.0;
}

}  // namespace

TEST_CASE("AvgS of a constant is the constant inside", "[operators]") {
  const auto g = make_grid(2.0, 40);
  const auto out = apply(build_operator(OperatorVariant::AvgS, g, 0.25, kTwo), ScalarField(g, 1.0));
  const auto mask = interior_mask(g, 0.25);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mask.flags[i]) REQUIRE(out[i] == Approx(1.0).epsilon(1e-14));
  // the boundary cells see part of the window outside and are damped
  CHECK(out[0] < 1.0);
}

TEST_CASE("adhesion velocity reproduces the slope of a linear profile", "[operators]") {
  const auto g = make_grid(20.0, 2000);
  const double r = 0.5;
  const auto u = ScalarField::from_function(g, [](double x) { return x; });
  const auto out = apply(build_operator(OperatorVariant::AdhesionVelocity, g, r, kTwo), u);
  const auto mask = interior_mask(g, r);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mask.flags[i]) REQUIRE(out[i] == Approx(1.0).epsilon(1e-11));
}

TEST_CASE("adhesion velocity boundary layer for a constant profile", "[operators][constant_profile]") {
  SECTION("single point value") {
    // Omega = (-1,1) -> grid [0,2]; x = -0.9 is the center of cell 0 when h = 0.2.
    const auto g = make_grid(2.0, 10);
    const auto out =
        apply(build_operator(OperatorVariant::AdhesionVelocity, g, 0.5, kTwo), ScalarField(g, 1.0));
    CHECK(out[0] == Approx(1.6).epsilon(1e-13));
  }
  SECTION("closed form and unit L1 norm with r a multiple of h") {
    const auto g = make_grid(2.0, 200);
    const double r = 0.3;
    const ScalarField one(g, 1.0);
    const auto a_out = apply(build_operator(OperatorVariant::AdhesionVelocity, g, r, kTwo), one);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      REQUIRE(a_out[i] == Approx(constant_profile(g.center(i), r)).margin(1e-8));
      l1 += std::abs(a_out[i]) * g.spacing();
    }
    CHECK(l1 == Approx(1.0).margin(1e-8));

    const auto t_out = apply(build_operator(OperatorVariant::AvgT, g, r, kTwo), gradient_field(one));
    CHECK(max_abs(t_out) == 0.0);
  }
}

TEST_CASE("nonlocal gradient is exact for quadratics", "[operators]") {
  const auto g = make_grid(20.0, 2000);
  const double r = 0.3;
  const auto u = ScalarField::from_function(g, [](double x) { return x * x; });
  const auto out = apply(build_operator(OperatorVariant::NonlocalGradient, g, r, kTwo), u);
  // x = 1.005 is the cell center nearest 1.0
  CHECK(out[100] == Approx(2.0 * 1.005).epsilon(1e-12));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.center(i);
    if (x - r < 0.0 || x + r > g.length()) continue;
    REQUIRE(out[i] == Approx(2.0 * x).margin(1e-9));
  }
}

TEST_CASE("T_r(grad u) matches A_r u away from the boundary", "[operators][identity]") {
  const double r = 0.5;
  auto discrepancy = [&](std::size_t n) {
    const auto g = make_grid(20.0, n);
    const auto u = ScalarField::from_function(g, [](double x) { return std::sin(x); });
    const auto a_out = apply(build_operator(OperatorVariant::AdhesionVelocity, g, r, kTwo), u);
    const auto t_out = apply(build_operator(OperatorVariant::AvgT, g, r, kTwo), gradient_field(u));
    return masked_max_diff(a_out, t_out, interior_mask(g, r));
  };
  const double coarse = discrepancy(2000);
  const double fine = discrepancy(4000);
  INFO("coarse " << coarse << " fine " << fine);
  CHECK(coarse <= 1e-4);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("S_r(grad u) equals the nonlocal gradient on the interior", "[operators][identity]") {
  const auto g = make_grid(20.0, 2000);
  const auto u = ScalarField::from_function(g, [](double x) { return std::sin(x); });
  for (double r : {0.5, 0.437, 1.0}) {
    const auto d = apply(build_operator(OperatorVariant::NonlocalGradient, g, r, kTwo), u);
    const auto s = apply(build_operator(OperatorVariant::AvgS, g, r, kTwo), gradient_field(u));
    CHECK(masked_max_diff(d, s, interior_mask(g, r)) <= 1e-10);
  }
}

TEST_CASE("odd operators have antisymmetric interior stencils", "[operators][property]") {
  const auto g = make_grid(20.0, 500);
  for (auto v : {OperatorVariant::AdhesionVelocity, OperatorVariant::NonlocalGradient}) {
    for (double r : {0.5, 0.33, 1.27}) {
      const auto op = build_operator(v, g, r, KernelF::exponential());
      const auto K = op.half_bandwidth();
      REQUIRE(K <= static_cast<std::size_t>(std::ceil(r / g.spacing())) + 1);
      for (std::size_t i = K + 2; i + K + 2 < g.size(); i += 37)
        for (std::size_t k = 0; k <= K; ++k)
          REQUIRE(op.weight(i, i + k) == Approx(-op.weight(i, i - k)).margin(1e-13));
    }
  }
}

TEST_CASE("operators annihilate the zero field", "[operators]") {
  const auto g = make_grid(5.0, 50);
  for (auto v : {OperatorVariant::AdhesionVelocity, OperatorVariant::NonlocalGradient,
                 OperatorVariant::AvgT, OperatorVariant::AvgS})
    CHECK(max_abs(apply(build_operator(v, g, 0.7, kTwo), ScalarField(g))) == 0.0);
}

TEST_CASE("build_operator rejects bad radius and applies only on its grid", "[operators]") {
  const auto g = make_grid(5.0, 50);
  CHECK_THROWS_AS(build_operator(OperatorVariant::AvgT, g, 0.0, kTwo), ConfigError);
  CHECK_THROWS_AS(build_operator(OperatorVariant::AvgT, g, -1.0, kTwo), ConfigError);
  const auto op = build_operator(OperatorVariant::AvgT, g, 0.5, kTwo);
  CHECK_THROWS_AS(op.apply(ScalarField(make_grid(5.0, 60))), GridMismatch);
}

TEST_CASE("averaging operators are self-adjoint", "[operators][property]") {
  const auto g = make_grid(20.0, 400);
  std::mt19937_64 rng(11);
  for (auto v : {OperatorVariant::AvgT, OperatorVariant::AvgS}) {
    for (const auto& kernel : {kTwo, KernelF::exponential()}) {
      const auto op = build_operator(v, g, 0.73, kernel);
      for (int trial = 0; trial < 100; ++trial) {
        const auto w1 = random_field(g, rng);
        const auto w2 = random_field(g, rng);
        const double lhs = inner(op.apply(w1), w2);
        const double rhs = inner(w1, op.apply(w2));
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * l2_norm(w1) * l2_norm(w2));
      }
    }
  }
}

TEST_CASE("T_r tends to the identity as r decreases", "[operators][identity]") {
  const auto g = make_grid(20.0, 2000);
  const auto w = ScalarField::from_function(g, [](double x) { return std::exp(-(x - 10) * (x - 10)); });
  double prev = 1e300;
  for (double r : {0.4, 0.2, 0.1, 0.05}) {
    const auto tw = apply(build_operator(OperatorVariant::AvgT, g, r, KernelF::exponential()), w);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(tw[i] - w[i]) * g.spacing();
    INFO("r = " << r << " L1 = " << l1);
    CHECK(l1 <= prev);
    prev = l1;
  }
}

TEST_CASE("operator norm estimates respect the analytic bounds", "[operators][norm]") {
  const auto g = make_grid(20.0, 2000);
  double prev_gap_t = 1e300, prev_gap_s = 1e300;
  for (double r : {0.4, 0.2, 0.1, 0.05}) {
    const double nt = operator_norm_estimate(build_operator(OperatorVariant::AvgT, g, r, kTwo)).value;
    const double ns = operator_norm_estimate(build_operator(OperatorVariant::AvgS, g, r, kTwo)).value;
    INFO("r = " << r << " |T| = " << nt << " |S| = " << ns);
    CHECK(ns <= 1.0 + 1e-6);
    CHECK(nt <= c2_bound(kTwo, r, 2.0) + 1e-6);
    CHECK(std::abs(nt - 1.0) <= prev_gap_t + 1e-3);
    CHECK(std::abs(ns - 1.0) <= prev_gap_s + 1e-3);
    prev_gap_t = std::abs(nt - 1.0);
    prev_gap_s = std::abs(ns - 1.0);
  }
  CHECK(prev_gap_t <= 0.05);
  CHECK(prev_gap_s <= 0.05);
}

TEST_CASE("stencils agree with the dense-quadrature oracle", "[operators][oracle]") {
  const auto g = make_grid(4.0, 80);
  const double r = 0.5;

  SECTION("T_r delta response") {
    ScalarField delta(g);
    delta[37] = 1.0 / g.spacing();
    for (const auto& kernel : {kTwo, KernelF::exponential()}) {
      const auto fast = apply(build_operator(OperatorVariant::AvgT, g, r, kernel, 64), delta);
      const auto slow = dense_apply(OperatorVariant::AvgT, g, r, kernel, delta, 64);
      for (std::size_t i = 0; i < g.size(); ++i)
        REQUIRE(fast[i] == Approx(slow[i]).epsilon(1e-10).margin(1e-300));
    }
    // default quadrature is already exact for the constant kernel
    const auto fast8 = apply(build_operator(OperatorVariant::AvgT, g, r, kTwo), delta);
    const auto slow = dense_apply(OperatorVariant::AvgT, g, r, kTwo, delta, 64);
    for (std::size_t i = 0; i < g.size(); ++i)
      REQUIRE(fast8[i] == Approx(slow[i]).epsilon(1e-10).margin(1e-300));
  }

  SECTION("random fields, every variant, off-grid radius") {
    std::mt19937_64 rng(5);
    for (auto v : {OperatorVariant::AdhesionVelocity, OperatorVariant::NonlocalGradient,
                   OperatorVariant::AvgT, OperatorVariant::AvgS}) {
      for (const auto& kernel : {kTwo, KernelF::exponential()}) {
        const double rr = 0.437;
        const auto f = random_field(g, rng);
        const auto fast = apply(build_operator(v, g, rr, kernel, 64), f);
        const auto slow = dense_apply(v, g, rr, kernel, f, 64);
        const double scale = max_abs(slow);
        for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(fast[i] - slow[i]) <= 1e-9 * scale);
      }
    }
  }

  SECTION("closed forms") {
    const auto s1 = dense_apply(OperatorVariant::AvgS, g, 0.25, kTwo, ScalarField(g, 1.0), 64);
    CHECK(s1[40] == Approx(1.0).epsilon(1e-14));
    const auto g2 = make_grid(2.0, 200);
    const auto a1 = dense_apply(OperatorVariant::AdhesionVelocity, g2, 0.3, kTwo, ScalarField(g2, 1.0), 64);
    for (std::size_t i = 0; i < g2.size(); ++i)
      REQUIRE(a1[i] == Approx(constant_profile(g2.center(i), 0.3)).margin(1e-10));
  }
}

TEST_CASE("gradient_field is second order", "[operators][gradient]") {
  const auto g = make_grid(20.0, 2000);
  const auto lin = gradient_field(ScalarField::from_function(g, [](double x) { return 3.0 * x - 1.0; }));
  for (double v : lin.values()) REQUIRE(v == Approx(3.0).epsilon(1e-10));
  CHECK(max_abs(gradient_field(ScalarField(g, 4.2))) == 0.0);

  // Central differences carry the leading error h^2/6 * u'''.
  auto err = [](std::size_t n) {
    const auto gg = make_grid(20.0, n);
    const auto d = gradient_field(ScalarField::from_function(gg, [](double x) { return std::sin(x); }));
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) e = std::max(e, std::abs(d[i] - std::cos(gg.center(i))));
    return e;
  };
  const double h = 0.01;
  const double e2000 = err(2000);
  CHECK(e2000 <= h * h / 6.0 * (1.0 + 1e-3));
  CHECK(e2000 >= h * h / 6.0 * 0.99);
  CHECK(e2000 / err(4000) == Approx(4.0).epsilon(1e-2));
}
