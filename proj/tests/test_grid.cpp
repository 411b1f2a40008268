#include <catch_amalgamated.hpp>

#include <random>

#include "nltaxis/grid.hpp"

using namespace nltaxis;
using Catch::Approx;

TEST_CASE("make_grid lays out cell centers", "[grid]") {
  const auto g = make_grid(2.0, 4);
  const auto x = g.centers();
  REQUIRE(x.size() == 4);
  CHECK(x[0] == 0.25);
  CHECK(x[1] == 0.75);
  CHECK(x[2] == 1.25);
  CHECK(x[3] == 1.75);

  const auto fine = make_grid(20.0, 2000);
  CHECK(fine.spacing() == Approx(0.01).epsilon(1e-15));
  CHECK(fine.center(0) == Approx(fine.spacing() / 2));
  CHECK(fine.center(1999) == Approx(20.0 - fine.spacing() / 2));
  for (std::size_t i = 1; i < fine.size(); ++i)
    REQUIRE(fine.center(i) - fine.center(i - 1) == Approx(fine.spacing()).epsilon(1e-12));
}

TEST_CASE("make_grid rejects bad sizes", "[grid]") {
  CHECK_THROWS_AS(make_grid(1.0, 3), ConfigError);
  CHECK_THROWS_AS(make_grid(0.0, 10), ConfigError);
  CHECK_THROWS_AS(make_grid(-1.0, 10), ConfigError);
}

TEST_CASE("eval_extended uses cell averages and zero outside", "[grid]") {
  const auto g = make_grid(2.0, 4);
  const ScalarField one(g, 1.0);
  CHECK(eval_extended(one, -0.1) == 0.0);
  CHECK(eval_extended(one, 2.1) == 0.0);
  CHECK(eval_extended(one, 1.0) == 1.0);

  const ScalarField f(g, std::vector<double>{1, 2, 3, 4});
  CHECK(eval_extended(f, 0.6) == 2.0);
  // faces resolve to the left cell; the domain ends belong to the end cells
  CHECK(eval_extended(f, 0.5) == 1.0);
  CHECK(eval_extended(f, 1.0) == 2.0);
  CHECK(eval_extended(f, 0.0) == 1.0);
  CHECK(eval_extended(f, 2.0) == 4.0);
}

TEST_CASE("interior_mask flags cells farther than r from the boundary", "[grid]") {
  const auto g = make_grid(2.0, 4);
  CHECK(interior_mask(g, 0.5).flags == std::vector<bool>{false, true, true, false});
  CHECK(interior_mask(g, 0.0).flags == std::vector<bool>{true, true, true, true});
  CHECK(interior_mask(g, 1.1).flags == std::vector<bool>{false, false, false, false});

  const auto fine = make_grid(20.0, 400);
  std::size_t prev = fine.size();
  CHECK(interior_mask(fine, 0.0).count() == fine.size());
  for (double r = 0.0; r <= 11.0; r += 0.137) {
    const auto c = interior_mask(fine, r).count();
    REQUIRE(c <= prev);
    prev = c;
  }
  CHECK(prev == 0);
}

TEST_CASE("integrate is the midpoint sum and linear", "[grid]") {
  const auto g = make_grid(2.0, 4);
  CHECK(integrate(ScalarField(g, 1.0)) == 2.0);
  CHECK(integrate(ScalarField(g, 0.0)) == 0.0);
  CHECK(integrate(ScalarField(g, std::vector<double>{1, 2, 3, 4})) == 5.0);

  const auto fine = make_grid(20.0, 1000);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    ScalarField f(fine), h(fine), mix(fine);
    const double a = d(rng), b = d(rng);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      f[i] = d(rng);
      h[i] = d(rng);
      mix[i] = a * f[i] + b * h[i];
    }
    REQUIRE(integrate(mix) == Approx(a * integrate(f) + b * integrate(h)).margin(1e-11));
  }
}
