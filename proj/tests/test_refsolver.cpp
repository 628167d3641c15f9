#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hpinn/refsolver.hpp"
#include "oracles.hpp"

using namespace hpinn;

namespace {

constexpr double kPi = std::numbers::pi;

ref::SolverConfig inviscid(int n, double t_final, std::vector<double> times = {}) {
  ref::SolverConfig c;
  c.n_cells = n;
  c.pde = PdeSpec::burgers(0.0);
  c.t_final = t_final;
  c.snapshot_times = std::move(times);
  return c;
}

double characteristics_error(int n, double cfl = 0.4) {
  auto cfg = inviscid(n, 0.2, {0.2});
  cfg.cfl = cfl;
  const auto snaps = ref::solve(cfg);
  const auto& u = snaps.back().u;
  double err = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) err = std::max(err, std::abs(u[j] - oracle::burgers_characteristic(u.x(j), 0.2)));
  return err;
}

}  // namespace

TEST_SUITE("refsolver") {

TEST_CASE("rhs examples") {
  const PdeSpec burgers = PdeSpec::burgers(0.0);
  GridField zero = GridField::uniform(-1, 1, 40);
  for (double v : ref::rhs(zero, burgers, 0.0).values) CHECK(v == 0.0);

  PdeSpec advection = burgers;
  advection.flux = {ConvectionFlux::Kind::linear, 1.0};
  advection.u_left = -1.0;
  advection.u_right = 1.0;
  GridField x = GridField::uniform(-1, 1, 40);
  x.values = x.coordinates();
  const auto r = ref::rhs(x, advection, 0.0);
  for (std::size_t j = 3; j + 3 < x.size(); ++j) CHECK(std::abs(r[j] + 1.0) < 1e-12);
  CHECK(r[0] == 0.0);
  CHECK(r[x.size() - 1] == 0.0);

  PdeSpec heat = burgers;
  heat.flux = {ConvectionFlux::Kind::linear, 0.0};
  heat.viscosity = 0.05;
  for (int n : {101, 201}) {
    GridField s = GridField::uniform(-1, 1, static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::sin(kPi * s.x(j));
    const auto h = ref::rhs(s, heat, 0.0);
    double err = 0.0;
    for (std::size_t j = 1; j + 1 < s.size(); ++j) err = std::max(err, std::abs(h[j] + 0.05 * kPi * kPi * s[j]));
    CHECK(err < 0.05 * std::pow(kPi, 4) * s.dx * s.dx / 12 * 1.01);
  }
}

TEST_CASE("rk3 step on a zero operator and on a linear sink") {
  GridField u = GridField::uniform(0, 1, 10, 2.0);
  const auto same = ref::tvd_rk3_step(u, 0.3, [](const GridField& v) {
    GridField z = v;
    std::fill(z.values.begin(), z.values.end(), 0.0);
    return z;
  });
  CHECK(same.values == u.values);
  const auto decayed = ref::tvd_rk3_step(u, 0.1, [](const GridField& v) {
    GridField z = v;
    for (double& e : z.values) e = -e;
    return z;
  });
  const double factor = 1 - 0.1 + 0.005 - 0.001 / 6;
  for (double v : decayed.values) CHECK(std::abs(v - 2.0 * factor) < 1e-14);
}

TEST_CASE("cfl violation is rejected") {
  auto cfg = inviscid(200, 0.1);
  const GridField u = ref::initial_field(cfg);
  const double dt = ref::stable_dt(u, cfg.pde, 0.4);
  CHECK_NOTHROW(ref::tvd_rk3_step(u, dt, 0.0, cfg.pde, 0.4));
  CHECK_THROWS_AS(ref::tvd_rk3_step(u, 2 * dt, 0.0, cfg.pde, 0.4), std::invalid_argument);
}

TEST_CASE("t_final zero returns the initial condition") {
  const auto cfg = inviscid(100, 0.0);
  const auto snaps = ref::solve(cfg);
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].u.values == ref::initial_field(cfg).values);
}

TEST_CASE("pre-shock solution matches characteristics") {
  CHECK(characteristics_error(1000) < 1e-3);
}

TEST_CASE("pre-shock convergence order") {
  // small CFL so the third-order RK3 error stays below the spatial error
  const double e250 = characteristics_error(250, 0.1);
  const double e500 = characteristics_error(500, 0.1);
  const double e1000 = characteristics_error(1000, 0.1);
  // node counts include endpoints, so the spacing ratio is not exactly 2
  const auto order = [](double ea, double eb, int na, int nb) {
    return std::log(ea / eb) / std::log(static_cast<double>(nb - 1) / (na - 1));
  };
  CHECK(order(e250, e500, 250, 500) >= 4.0);
  CHECK(order(e500, e1000, 500, 1000) >= 4.0);
}

TEST_CASE("inviscid run: symmetry, maximum principle, total variation, shock location") {
  const std::vector<double> times{0.2, 0.4, 0.6, 0.8, 1.0};
  auto cfg = inviscid(1000, 1.0, times);
  const double tv0 = total_variation(ref::initial_field(cfg).values);
  double tv_prev = tv0;
  double worst_tv_growth = -1.0;
  double worst_max = 0.0;
  double worst_mass = 0.0;
  ref::solve(cfg, [&](double, const GridField& u) {
    const double tv = total_variation(u.values);
    worst_tv_growth = std::max(worst_tv_growth, tv - tv_prev);
    tv_prev = tv;
    for (double v : u.values) worst_max = std::max(worst_max, std::abs(v));
    double mass = 0.0;
    for (double v : u.values) mass += v * u.dx;
    worst_mass = std::max(worst_mass, std::abs(mass));
  });
  CHECK(worst_tv_growth <= 1e-10);
  CHECK(worst_max <= 1.0 + 1e-6);
  CHECK(worst_mass < 1e-8);

  const auto snaps = ref::solve(cfg);
  REQUIRE(snaps.size() == times.size());
  for (const auto& s : snaps) {
    const auto& u = s.u;
    double asym = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) asym = std::max(asym, std::abs(u[j] + u[u.size() - 1 - j]));
    CHECK(asym < 1e-10);
  }
  const auto& last = snaps.back().u;
  std::size_t steepest = 0;
  double grad = 0.0;
  for (std::size_t j = 0; j + 1 < last.size(); ++j) {
    const double g = std::abs(last[j + 1] - last[j]);
    if (g > grad) {
      grad = g;
      steepest = j;
    }
  }
  const double x_mid = 0.5 * (last.x(steepest) + last.x(steepest + 1));
  CHECK(std::abs(x_mid) <= last.dx);
}

TEST_CASE("periodic conservation") {
  ref::SolverConfig cfg = inviscid(401, 0.8);
  cfg.periodic = true;
  cfg.pde.initial_condition = [](double x) { return 0.5 + std::sin(kPi * x); };
  auto mass = [](const GridField& u) {
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) m += u[j] * u.dx;
    return m;
  };
  const double m0 = mass(ref::initial_field(cfg));
  const auto snaps = ref::solve(cfg);
  CHECK(std::abs(mass(snaps.back().u) - m0) < 1e-8);
}

TEST_CASE("snapshot times are hit exactly") {
  const auto snaps = ref::solve(inviscid(200, 0.5, {0.1, 0.33}));
  REQUIRE(snaps.size() == 3);
  CHECK(snaps[0].t == 0.1);
  CHECK(snaps[1].t == 0.33);
  CHECK(snaps[2].t == 0.5);
  CHECK_THROWS_AS(ref::solve(inviscid(200, 0.5, {0.7})), std::invalid_argument);
}

TEST_CASE("config validation") {
  auto c = inviscid(10, 0.1);
  CHECK_THROWS_AS(ref::solve(c), std::invalid_argument);
  c = inviscid(100, 0.1);
  c.cfl = 0.0;
  CHECK_THROWS_AS(ref::solve(c), std::invalid_argument);
}

TEST_CASE("relative error") {
  GridField r = GridField::uniform(-1, 1, 50);
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = std::cos(r.x(j));
  CHECK(ref::relative_error(r, r) == 0.0);
  GridField p = r;
  for (double& v : p.values) v *= 1.01;
  CHECK(std::abs(ref::relative_error(p, r) - 0.01) < 1e-12);
  GridField z = GridField::uniform(-1, 1, 50);
  CHECK_THROWS_AS(ref::relative_error(p, z), std::invalid_argument);
}

TEST_CASE("cubic interpolation is exact for cubics") {
  GridField f = GridField::uniform(-1, 1, 30);
  auto cubic = [](double x) { return 1 - 2 * x + 0.5 * x * x + 3 * x * x * x; };
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = cubic(f.x(j));
  const std::vector<double> xs{-1.0, -0.987, -0.3, 0.0, 0.51, 0.999, 1.0};
  const auto v = ref::interpolate_cubic(f, xs);
  for (std::size_t k = 0; k < xs.size(); ++k) CHECK(std::abs(v[k] - cubic(xs[k])) < 1e-12);
}

}
