#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nltaxis/solver.hpp"

using namespace nltaxis;
using Catch::Approx;

namespace {

SolverConfig fig1_config(std::size_t n, FormulationTag tag, double x_c = 10.0) {
  SolverConfig cfg;
  cfg.grid = Grid1D(20.0, n);
  cfg.coeffs = build_preset(PresetFamily::MinimalLinear, {{"a", 0.01}, {"S_cv", 10.0}});
  cfg.formulation.tag = tag;
  cfg.formulation.radius = 1.0;
  cfg.t_end = 5.0;
  cfg.sample_times = {1.0, 2.5, 5.0};
  const auto init = initial_conditions(cfg.grid, 10.0, x_c, 1.0);
  cfg.c0.assign(init.c.values().begin(), init.c.values().end());
  cfg.v0.assign(init.v.values().begin(), init.v.values().end());
  return cfg;
}

std::vector<double> random_values(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

}  // namespace

TEST_CASE("initial conditions", "[solver]") {
  const Grid1D g(20.0, 1001);  // odd N puts a center on x = 10
  const auto centred = initial_conditions(g, 10.0, 10.0, 1.0);
  double peak = 0.0;
  for (double x : centred.c.values()) peak = std::max(peak, x);
  CHECK(peak == Approx(1.0).margin(1e-4));
  for (double x : centred.v.values()) CHECK(x == 1.0);

  const auto left = initial_conditions(g, 10.0, 0.0, 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(left.c[i] <= left.c[i - 1]);

  CHECK_THROWS_AS(initial_conditions(g, 0.0, 10.0, 1.0), ConfigError);
}

TEST_CASE("constant signal gives zero drift", "[solver]") {
  const Grid1D g(20.0, 200);
  const double r = 0.5;
  const auto cs = build_preset(PresetFamily::MinimalLinear, {{"S_cc", 0.0}});
  const std::vector<double> c = random_values(200, 0.0, 1.0, 1), v(200, 1.0);
  std::vector<double> face(201);
  for (auto tag : {FormulationTag::NonlocalR, FormulationTag::Local}) {
    FvSystem sys(g, cs, Formulation{tag, r});
    sys.drift_velocity(c, v, face);
    for (double u : face) CHECK(u == 0.0);
  }
  // A_r sees the zero extension within r of the ends
  FvSystem sys(g, cs, Formulation{FormulationTag::NonlocalA, r});
  sys.drift_velocity(c, v, face);
  const auto mask = interior_mask(g, r);
  for (std::size_t f = 1; f < 200; ++f)
    if (mask.flags[f - 1] && mask.flags[f]) CHECK(std::abs(face[f]) <= 1e-12);
  CHECK(face[1] > 1.0);
  CHECK(face[199] < -1.0);
}

TEST_CASE("local drift of a linear matrix profile", "[solver]") {
  const Grid1D g(20.0, 200);
  const auto cs = build_preset(PresetFamily::MinimalLinear, {{"S_cc", 2.5}, {"S_cv", 10.0}});
  FvSystem sys(g, cs, Formulation{FormulationTag::Local});
  const std::vector<double> c(200, 0.0);
  std::vector<double> v(200), face(201);
  for (std::size_t i = 0; i < 200; ++i) v[i] = g.center(i);
  sys.drift_velocity(c, v, face);
  CHECK(face.front() == 0.0);
  CHECK(face.back() == 0.0);
  for (std::size_t f = 1; f < 200; ++f) CHECK(face[f] == Approx(10.0).epsilon(1e-12));
}

TEST_CASE("small-radius averaged drift approaches the local drift", "[solver]") {
  const Grid1D g(20.0, 2000);
  const double r = 0.05;
  const auto cs = build_preset(PresetFamily::MinimalLinear);
  const std::vector<double> c(2000, 0.0);
  std::vector<double> v(2000);
  for (std::size_t i = 0; i < 2000; ++i) v[i] = 1.0 + 0.5 * std::sin(g.center(i));
  FvSystem nonlocal(g, cs, Formulation{FormulationTag::NonlocalR, r});
  FvSystem local(g, cs, Formulation{FormulationTag::Local});
  std::vector<double> un(2001), ul(2001);
  nonlocal.drift_velocity(c, v, un);
  local.drift_velocity(c, v, ul);
  double scale = 0.0, err = 0.0;
  for (std::size_t f = 1; f < 2000; ++f) {
    const double x = f * g.spacing();
    if (x <= 2.0 * r || x >= 20.0 - 2.0 * r) continue;
    scale = std::max(scale, std::abs(ul[f]));
    err = std::max(err, std::abs(un[f] - ul[f]));
  }
  CHECK(err / scale <= 1e-2);
}

TEST_CASE("right-hand side basic identities", "[solver]") {
  const Grid1D g(20.0, 100);
  SECTION("zero cells stay zero") {
    const auto cs = build_preset(PresetFamily::Figure3Family, {{"S_cc", 2.5}});
    const std::vector<double> c(100, 0.0), v = random_values(100, 0.0, 1.0, 2);
    for (auto tag : {FormulationTag::NonlocalA, FormulationTag::NonlocalR, FormulationTag::Local}) {
      FvSystem sys(g, cs, Formulation{tag, 0.5});
      std::vector<double> dc(100), dv(100);
      REQUIRE(sys.rhs(c, v, dc, dv));
      for (double x : dc) CHECK(x == 0.0);
    }
  }
  SECTION("conservative form telescopes when f_c = 0") {
    const auto cs = build_preset(PresetFamily::Figure3Family, {{"simple_kinetics", 1.0}, {"S_cc", 1.0}});
    for (std::uint64_t seed = 3; seed < 13; ++seed) {
      const auto c = random_values(100, 0.0, 2.0, seed), v = random_values(100, 0.0, 1.0, seed + 100);
      for (auto tag : {FormulationTag::NonlocalA, FormulationTag::NonlocalR, FormulationTag::Local}) {
        FvSystem sys(g, cs, Formulation{tag, 0.7});
        std::vector<double> dc(100), dv(100);
        REQUIRE(sys.rhs(c, v, dc, dv));
        double total = 0.0;
        for (double x : dc) total += x * g.spacing();
        CHECK(std::abs(total) <= 1e-13);
      }
    }
  }
  SECTION("matrix decay") {
    const auto cs = build_preset(PresetFamily::MinimalLinear);
    const std::vector<double> one(100, 1.0);
    FvSystem sys(g, cs, Formulation{FormulationTag::NonlocalA, 1.0});
    std::vector<double> dc(100), dv(100);
    REQUIRE(sys.rhs(one, one, dc, dv));
    for (double x : dv) CHECK(x == Approx(-1.0).epsilon(1e-15));
  }
}

TEST_CASE("limited slope stays between zero and twice either difference", "[solver][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int k = 0; k < 10000; ++k) {
    const double dm = d(rng), dp = d(rng);
    const double s = FvSystem::limited_slope(dm, dp);
    if (dm * dp <= 0.0) {
      CHECK(s == 0.0);
    } else {
      CHECK(s * dm >= 0.0);
      CHECK(std::abs(s) <= 2.0 * std::abs(dm) + 1e-15);
      CHECK(std::abs(s) <= 2.0 * std::abs(dp) + 1e-15);
    }
  }
  // smooth data: unlimited kappa = 1/3 value
  CHECK(FvSystem::limited_slope(1.0, 1.2) == Approx((1.0 + 2.4) / 3.0));
}

TEST_CASE("pure diffusion conserves mass and relaxes to the mean", "[solver]") {
  SolverConfig cfg;
  cfg.grid = Grid1D(2.0, 50);
  cfg.coeffs = build_custom({{"D_c", "1"}, {"chi", "0"}, {"g", "v"}, {"f_c", "0"}, {"f_v", "0"}},
                            {}, 0.0, KernelF::constant(2.0));
  cfg.formulation = Formulation{FormulationTag::Local};
  cfg.t_end = 5.0;
  cfg.sample_times = {0.5, 1.0, 5.0};
  const auto init = initial_conditions(cfg.grid, 10.0, 0.3, 1.0);
  cfg.c0.assign(init.c.values().begin(), init.c.values().end());
  cfg.v0.assign(init.v.values().begin(), init.v.values().end());
  const double m0 = integrate(init.c);
  const auto res = nltaxis::integrate(cfg);
  REQUIRE(res.status == RunStatus::Completed);
  REQUIRE(res.samples.size() == 3);
  for (const auto& s : res.samples) CHECK(std::abs(s.mass_c - m0) / m0 <= 1e-8);
  for (double x : res.samples.back().c) CHECK(x == Approx(m0 / 2.0).margin(1e-4));
}

TEST_CASE("fig-1 configuration: conservation, positivity, symmetry", "[solver][property]") {
  for (auto tag : {FormulationTag::NonlocalA, FormulationTag::NonlocalR, FormulationTag::Local}) {
    const auto cfg = fig1_config(200, tag);
    const double m0 = integrate(ScalarField(cfg.grid, cfg.c0));
    const auto res = nltaxis::integrate(cfg);
    INFO(to_string(tag));
    REQUIRE(res.status == RunStatus::Completed);
    REQUIRE(res.samples.size() == 3);
    for (const auto& s : res.samples) {
      CHECK(std::abs(s.mass_c - m0) / m0 <= 1e-8);
      CHECK(s.min_c >= -1e-12);
      CHECK(s.max_c <= 1.2);
      const std::size_t n = s.c.size();
      for (std::size_t i = 0; i < n / 2; ++i) {
        CHECK(std::abs(s.c[i] - s.c[n - 1 - i]) <= 1e-6);
        CHECK(std::abs(s.v[i] - s.v[n - 1 - i]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("saturating kinetics keep the matrix inside [0, K_v]", "[solver][property]") {
  SolverConfig cfg;
  cfg.grid = Grid1D(20.0, 200);
  cfg.coeffs = build_preset(PresetFamily::SaturatingExample, {{"mu_v", 1.0}, {"K_v", 1.0}});
  cfg.formulation = Formulation{FormulationTag::NonlocalA, 0.5};
  cfg.t_end = 3.0;
  cfg.sample_times = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const auto init = initial_conditions(cfg.grid, 10.0, 10.0, 1.0);
  cfg.c0.assign(init.c.values().begin(), init.c.values().end());
  cfg.v0.assign(init.v.values().begin(), init.v.values().end());
  const auto res = nltaxis::integrate(cfg);
  REQUIRE(res.status == RunStatus::Completed);
  for (const auto& s : res.samples)
    for (double v : s.v) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-9);
    }
}

TEST_CASE("invalid solver configurations are rejected", "[solver]") {
  auto cfg = fig1_config(100, FormulationTag::NonlocalA);
  SECTION("negative initial data") {
    cfg.c0[3] = -1.0;
    CHECK_THROWS_AS(Simulation(cfg), ConfigError);
  }
  SECTION("bad end time") {
    cfg.t_end = 0.0;
    CHECK_THROWS_AS(Simulation(cfg), ConfigError);
  }
  SECTION("bad tolerance") {
    cfg.rtol = 0.0;
    CHECK_THROWS_AS(Simulation(cfg), ConfigError);
  }
  SECTION("sample after the end") {
    cfg.sample_times = {6.0};
    CHECK_THROWS_AS(Simulation(cfg), ConfigError);
  }
  SECTION("nonpositive radius") {
    cfg.formulation.radius = 0.0;
    CHECK_THROWS_AS(Simulation(cfg), ConfigError);
  }
}

TEST_CASE("finite-time blow-up ends in an ill-posed abort", "[solver]") {
  SolverConfig cfg;
  cfg.grid = Grid1D(1.0, 8);
  cfg.coeffs = build_custom({{"D_c", "0"}, {"chi", "0"}, {"g", "0"}, {"f_c", "c^2"}, {"f_v", "0"}},
                            {}, 0.0, KernelF::constant(2.0));
  cfg.formulation = Formulation{FormulationTag::Local};
  cfg.t_end = 2.0;
  cfg.c0.assign(8, 1.0);
  cfg.v0.assign(8, 0.0);
  const auto res = nltaxis::integrate(cfg);
  CHECK(res.status == RunStatus::IllPosedAbort);
  CHECK(res.t_final < 1.01);
  CHECK(res.t_final > 0.99);
  for (double x : res.c) CHECK(std::isfinite(x));
}

TEST_CASE("local runs stop once the effective diffusion turns negative", "[solver]") {
  auto cfg = fig1_config(100, FormulationTag::Local);
  cfg.coeffs = build_preset(PresetFamily::MinimalLinear, {{"S_cc", 2.5}});
  auto res = nltaxis::integrate(cfg);
  CHECK(res.status == RunStatus::IllPosedAbort);
  CHECK(res.t_final == 0.0);
  CHECK(res.message == "negative effective diffusion");

  cfg.formulation = Formulation{FormulationTag::NonlocalA, 1.0};
  cfg.t_end = 0.5;
  cfg.sample_times = {};
  CHECK(nltaxis::integrate(cfg).status == RunStatus::Completed);
}

TEST_CASE("snapshot serialisation", "[solver][snapshot]") {
  Snapshot s;
  s.length = 20.0;
  s.cells = 5;
  s.integrator.t = 1.25;
  s.integrator.h = 0.01;
  s.integrator.err_prev = 0.3;
  s.integrator.last_rejected = true;
  s.integrator.accepted = 17;
  s.integrator.rejected = 4;
  s.integrator.rhs_evals = 130;
  s.c = random_values(5, 0.0, 1.0, 11);
  s.v = random_values(5, 0.0, 1.0, 12);

  const std::string bytes = save_snapshot(s);
  CHECK(load_snapshot(bytes) == s);
  CHECK(save_snapshot(load_snapshot(bytes)) == bytes);

  CHECK_THROWS_AS(load_snapshot(bytes.substr(0, bytes.size() - 1)), SnapshotError);
  CHECK_THROWS_AS(load_snapshot(bytes.substr(0, 10)), SnapshotError);
  CHECK_THROWS_AS(load_snapshot(bytes + "x"), SnapshotError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_snapshot(bad_magic), SnapshotError);
  std::string bad_version = bytes;
  bad_version[8] = 7;
  CHECK_THROWS_WITH(load_snapshot(bad_version), Catch::Matchers::ContainsSubstring("version"));
}

TEST_CASE("resumed run reproduces the uninterrupted run", "[solver][snapshot]") {
  auto cfg = fig1_config(200, FormulationTag::NonlocalA);
  cfg.t_end = 2.0;
  cfg.sample_times = {1.0, 1.5, 2.0};
  const auto full = nltaxis::integrate(cfg);
  REQUIRE(full.status == RunStatus::Completed);

  Simulation first(cfg);
  REQUIRE_FALSE(first.advance(10));
  REQUIRE(first.time() < 1.0);
  const std::string path = "resume_test.snap";
  write_snapshot_file(path, first.snapshot());

  Simulation second(cfg);
  second.restore(read_snapshot_file(path));
  REQUIRE(second.advance());
  const auto& resumed = second.result();
  REQUIRE(resumed.status == RunStatus::Completed);
  REQUIRE(resumed.samples.size() == full.samples.size());
  for (std::size_t k = 0; k < full.samples.size(); ++k) {
    CHECK(resumed.samples[k].t == full.samples[k].t);
    for (std::size_t i = 0; i < full.samples[k].c.size(); ++i) {
      CHECK(std::abs(resumed.samples[k].c[i] - full.samples[k].c[i]) <= 1e-12);
      CHECK(std::abs(resumed.samples[k].v[i] - full.samples[k].v[i]) <= 1e-12);
    }
  }
  CHECK(resumed.stats.accepted == full.stats.accepted);

  Snapshot wrong = first.snapshot();
  wrong.cells = 100;
  wrong.c.resize(100);
  wrong.v.resize(100);
  CHECK_THROWS_AS(second.restore(wrong), SnapshotError);
}
