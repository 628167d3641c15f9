#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <algorithm>

#include "hpinn/weno.hpp"

using namespace hpinn;
using weno::Boundary;

namespace {

const ConvectionFlux kBurgers{ConvectionFlux::Kind::burgers, 1.0};
const ConvectionFlux kAdvection{ConvectionFlux::Kind::linear, 1.0};

GridField step_field(std::size_t n) {
  GridField u = GridField::uniform(-1.0, 1.0, n);
  for (std::size_t j = 0; j < n; ++j) u[j] = u.x(j) < 0.0 ? 0.0 : 1.0;
  return u;
}

std::vector<std::size_t> flagged(const weno::DiscontinuityMask& m) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j]) out.push_back(j);
  }
  return out;
}

double periodic_error(int cells) {
  // cells + 1 points on [0, 1] with both endpoints stored
  GridField u = GridField::uniform(0.0, 1.0, static_cast<std::size_t>(cells) + 1);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(2 * std::numbers::pi * u.x(j));
  const GridField d = weno::weno_derivative(u, kAdvection, 1.0, Boundary::periodic());
  double err = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    err = std::max(err, std::abs(d[j] - 2 * std::numbers::pi * std::cos(2 * std::numbers::pi * u.x(j))));
  }
  return err;
}

}  // namespace

TEST_SUITE("weno") {

TEST_CASE("lax-friedrichs splitting examples") {
  GridField one = GridField::uniform(-1, 1, 10, 1.0);
  const auto s = weno::lax_friedrichs_split(one, kBurgers, 1.0);
  for (std::size_t j = 0; j < one.size(); ++j) {
    CHECK(s.fplus[j] == 0.75);
    CHECK(s.fminus[j] == -0.25);
  }
  GridField zero = GridField::uniform(-1, 1, 10, 0.0);
  const auto z = weno::lax_friedrichs_split(zero, kBurgers, 0.5);
  for (std::size_t j = 0; j < zero.size(); ++j) {
    CHECK(z.fplus[j] == 0.0);
    CHECK(z.fminus[j] == 0.0);
  }
}

TEST_CASE("splitting identity on random fields") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-2, 2);
  GridField u = GridField::uniform(-1, 1, 200);
  for (double& v : u.values) v = dist(rng);
  const auto s = weno::lax_friedrichs_split(u, kBurgers, 2.2);
  for (std::size_t j = 0; j < u.size(); ++j) {
    CHECK(std::abs(s.fplus[j] + s.fminus[j] - kBurgers.value(u[j])) < 1e-14);
  }
}

TEST_CASE("splitting rejects a non-monotone lambda") {
  GridField u = GridField::uniform(-1, 1, 10, 2.0);
  CHECK_THROWS_AS(weno::lax_friedrichs_split(u, kBurgers, 1.9), std::invalid_argument);
}

TEST_CASE("candidate fluxes") {
  const auto c = weno::candidate_fluxes<double>({4, 4, 4, 4, 4});
  for (double v : c) CHECK(v == doctest::Approx(4.0).epsilon(1e-15));
  const auto lin = weno::candidate_fluxes<double>({-2, -1, 0, 1, 2});
  for (double v : lin) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  const auto s = weno::candidate_fluxes<double>({0, 0, 0, 1, 1});
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("smoothness indicators") {
  for (double v : weno::smoothness_indicators<double>({3, 3, 3, 3, 3})) CHECK(v == 0.0);
  const double b = 0.7;
  const auto lin = weno::smoothness_indicators<double>({1 - 2 * b, 1 - b, 1.0, 1 + b, 1 + 2 * b});
  for (double v : lin) CHECK(v == doctest::Approx(b * b).epsilon(1e-14));
  const auto s = weno::smoothness_indicators<double>({0, 0, 0, 1, 1});
  CHECK(s[2] == doctest::Approx(13.0 / 12.0 + 9.0 / 4.0).epsilon(1e-15));
  CHECK(s[0] == 0.0);
}

TEST_CASE("wenoz weights") {
  const weno::WenoConstants k;
  const auto w0 = weno::wenoz_weights<double>({0, 0, 0}, k);
  CHECK(w0[0] == doctest::Approx(0.1));
  CHECK(w0[1] == doctest::Approx(0.6));
  CHECK(w0[2] == doctest::Approx(0.3));
  const auto w1 = weno::wenoz_weights<double>({0.49, 0.49, 0.49}, k);
  CHECK(w1[0] == doctest::Approx(0.1));
  CHECK(w1[1] == doctest::Approx(0.6));
  const auto w2 = weno::wenoz_weights<double>({100, 1e-6, 1e-6}, k);
  CHECK(w2[0] < 1e-2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto w = weno::wenoz_weights<double>({dist(rng), dist(rng), dist(rng)}, k);
    CHECK(std::abs(w[0] + w[1] + w[2] - 1.0) <= 1e-15);
    CHECK(w[0] >= 0.0);
    CHECK(w[1] >= 0.0);
    CHECK(w[2] >= 0.0);
  }
}

TEST_CASE("interface reconstruction") {
  const weno::WenoConstants k;
  CHECK(weno::reconstruct_interface_flux<double>({2, 2, 2, 2, 2}, k) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(weno::reconstruct_interface_flux<double>({-2, -1, 0, 1, 2}, k) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(weno::reconstruct_interface_flux<double>({0, 0, 0, 1, 1}, k)) < 1e-3);
}

TEST_CASE("derivative of constant and linear data") {
  GridField c = GridField::uniform(-1, 1, 50, 0.3);
  const auto dc = weno::weno_derivative(c, kBurgers, 1.0, Boundary::dirichlet(0.3, 0.3));
  for (double v : dc.values) CHECK(std::abs(v) < 1e-14);

  GridField x = GridField::uniform(-1, 1, 50);
  x.values = x.coordinates();
  const auto dx = weno::weno_derivative(x, kAdvection, 1.0, Boundary::dirichlet(-1, 1));
  for (std::size_t j = 3; j + 3 < x.size(); ++j) CHECK(std::abs(dx[j] - 1.0) < 1e-12);
  const auto dxe = weno::weno_derivative(x, kAdvection, 1.0, Boundary::extrapolate());
  for (std::size_t j = 0; j < x.size(); ++j) CHECK(std::abs(dxe[j] - 1.0) < 1e-12);
}

TEST_CASE("too few points") {
  GridField u = GridField::uniform(-1, 1, 6);
  CHECK_THROWS_AS(weno::weno_derivative(u, kBurgers, 1.0, Boundary::dirichlet(0, 0)), std::invalid_argument);
  GridField v = GridField::uniform(-1, 1, 7);
  CHECK_THROWS_AS(weno::discontinuity_flags(v, {}, Boundary::extrapolate()), std::invalid_argument);
}

TEST_CASE("fifth-order convergence on smooth periodic data") {
  const double e64 = periodic_error(64);
  const double e128 = periodic_error(128);
  const double e256 = periodic_error(256);
  CHECK(std::log2(e64 / e128) >= 4.5);
  CHECK(std::log2(e128 / e256) >= 4.5);
}

TEST_CASE("point derivative agrees with the field derivative") {
  GridField u = GridField::uniform(-1, 1, 40);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = -std::sin(std::numbers::pi * u.x(j)) + 0.3 * (u.x(j) > 0.2);
  const double lambda = 1.5;
  const auto d = weno::weno_derivative(u, kBurgers, lambda, Boundary::dirichlet(0.0, 0.0));
  const auto ext = weno::extend(u, Boundary::dirichlet(0.0, 0.0));
  for (std::size_t j = 0; j < u.size(); ++j) {
    std::array<double, 7> w{};
    for (int m = 0; m < 7; ++m) w[m] = ext[j + m];
    CHECK(std::abs(weno::point_flux_derivative<double>(w, kBurgers, lambda, u.dx, {}) - d[j]) < 1e-12);
  }
}

TEST_CASE("periodic extension wraps the distinct points") {
  GridField u = GridField::uniform(0, 1, 9);
  for (std::size_t j = 0; j < 8; ++j) u[j] = static_cast<double>(j);
  u[8] = 0.0;
  const auto ext = weno::extend(u, Boundary::periodic());
  CHECK(ext[2] == 7.0);
  CHECK(ext[1] == 6.0);
  CHECK(ext[0] == 5.0);
  CHECK(ext[12] == 1.0);
  CHECK(ext[14] == 3.0);
}

TEST_CASE("downstream indicator") {
  CHECK(weno::beta3(0.0, 0.0, 0.0) == 0.0);
  CHECK(std::abs(weno::beta3(2.5, 2.5, 2.5)) < 1e-13);
  CHECK(weno::beta3(0.0, 1.0, 0.0) == doctest::Approx(61.0 / 3.0));
}

TEST_CASE("constant field is never flagged") {
  const auto chi = weno::scale_separation({2, 2, 2, 2, 2, 2}, {});
  for (double c : chi) CHECK(c == doctest::Approx(0.25));
  GridField u = GridField::uniform(-1, 1, 300, 0.4);
  CHECK(weno::discontinuity_flags(u, {}, Boundary::extrapolate()).count() == 0);
  CHECK(weno::discontinuity_flags(u, {}, Boundary::dirichlet(0.4, 0.4)).count() == 0);
}

TEST_CASE("smooth sine is not flagged") {
  GridField u = GridField::uniform(-1, 1, 300);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(std::numbers::pi * u.x(j));
  CHECK(weno::discontinuity_flags(u, {}, Boundary::extrapolate()).count() == 0);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = -u[j];
  CHECK(weno::discontinuity_flags(u, {}, Boundary::extrapolate()).count() == 0);
}

TEST_CASE("unit step is flagged only near the jump") {
  const GridField u = step_field(300);
  const auto flags = flagged(weno::discontinuity_flags(u, {}, Boundary::extrapolate()));
  REQUIRE_FALSE(flags.empty());
  // the jump sits between points 149 and 150
  CHECK(flags.front() >= 147);
  CHECK(flags.back() <= 152);
  CHECK(flags.size() <= 6);
}

TEST_CASE("mirrored step gives mirrored flags up to the lookahead shift") {
  const GridField u = step_field(300);
  GridField m = u;
  for (std::size_t j = 0; j < u.size(); ++j) m[j] = u[u.size() - 1 - j];
  const auto a = flagged(weno::discontinuity_flags(u, {}, Boundary::extrapolate()));
  const auto b = flagged(weno::discontinuity_flags(m, {}, Boundary::extrapolate()));
  // mirror b back; the beta3 window looks one side only, so allow a shift of one
  std::vector<std::size_t> back;
  for (auto j : b) back.push_back(u.size() - 1 - j);
  std::sort(back.begin(), back.end());
  REQUIRE_FALSE(back.empty());
  CHECK(std::abs(static_cast<long>(back.front()) - static_cast<long>(a.front())) <= 1);
  CHECK(std::abs(static_cast<long>(back.back()) - static_cast<long>(a.back())) <= 1);
}

TEST_CASE("dilation") {
  auto m = weno::DiscontinuityMask::zeros(20);
  m.flags[10] = 1;
  m.flags[0] = 1;
  const auto d = weno::dilate(m, 3);
  CHECK(flagged(d) == std::vector<std::size_t>{0, 1, 2, 3, 7, 8, 9, 10, 11, 12, 13});
  CHECK(weno::dilate(m, 0).flags == m.flags);
  CHECK_THROWS(weno::dilate(m, -1));
  for (auto f : d.flags) CHECK((f == 0 || f == 1));
}

}
