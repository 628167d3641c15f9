#include <doctest.h>

#include <cmath>

#include "hpinn/irk.hpp"
#include "oracles.hpp"

using namespace hpinn;

TEST_SUITE("irk") {

TEST_CASE("q=1 is the implicit midpoint rule") {
  const auto t = irk::gauss_legendre_tableau(1);
  CHECK(t.q == 1);
  CHECK(t.c[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.b[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.a[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("q=2 matches the closed form") {
  const auto t = irk::gauss_legendre_tableau(2);
  const double r = std::sqrt(3.0) / 6.0;
  CHECK(std::abs(t.c[0] - (0.5 - r)) < 1e-15);
  CHECK(std::abs(t.c[1] - (0.5 + r)) < 1e-15);
  CHECK(std::abs(t.b[0] - 0.5) < 1e-15);
  CHECK(std::abs(t.b[1] - 0.5) < 1e-15);
  CHECK(std::abs(t.a_at(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(t.a_at(0, 1) - (0.25 - r)) < 1e-15);
  CHECK(std::abs(t.a_at(1, 0) - (0.25 + r)) < 1e-15);
  CHECK(std::abs(t.a_at(1, 1) - 0.25) < 1e-15);
}

TEST_CASE("q=3 matches the closed form") {
  const auto t = irk::gauss_legendre_tableau(3);
  const double s = std::sqrt(15.0);
  CHECK(std::abs(t.c[0] - (0.5 - s / 10)) < 1e-15);
  CHECK(std::abs(t.b[0] - 5.0 / 18) < 1e-15);
  CHECK(std::abs(t.b[1] - 4.0 / 9) < 1e-15);
  CHECK(std::abs(t.a_at(0, 1) - (2.0 / 9 - s / 15)) < 1e-15);
  CHECK(std::abs(t.a_at(2, 0) - (5.0 / 36 + s / 30)) < 1e-15);
}

TEST_CASE("weights sum to one and rows sum to c") {
  for (int q : {1, 2, 3, 4, 7, 10, 20, 50, 100}) {
    CAPTURE(q);
    const auto t = irk::gauss_legendre_tableau(q);
    double sb = 0.0;
    for (double b : t.b) sb += b;
    CHECK(std::abs(sb - 1.0) < 1e-12);
    for (int i = 0; i < q; ++i) {
      double row = 0.0;
      for (int j = 0; j < q; ++j) row += t.a_at(i, j);
      CHECK(std::abs(row - t.c[i]) < 1e-12);
    }
  }
}

TEST_CASE("quadrature order conditions") {
  const auto r1 = irk::verify_order_conditions(irk::gauss_legendre_tableau(1), 2);
  CHECK(std::abs(r1[1]) < 1e-15);
  const auto r2 = irk::verify_order_conditions(irk::gauss_legendre_tableau(2), 4);
  CHECK(std::abs(r2[3]) < 1e-12);
  for (int q : {4, 10}) {
    for (double r : irk::verify_order_conditions(irk::gauss_legendre_tableau(q), 2 * q)) CHECK(std::abs(r) < 1e-9);
  }
  for (double r : irk::verify_order_conditions(irk::gauss_legendre_tableau(50), 100)) CHECK(std::abs(r) < 1e-6);
  // order 2q+1 must fail: the method is exactly order 2q
  const auto r3 = irk::verify_order_conditions(irk::gauss_legendre_tableau(3), 7);
  CHECK(std::abs(r3[6]) > 1e-6);
}

TEST_CASE("stage order conditions") {
  for (int q : {1, 5, 10, 50}) CHECK(irk::stage_order_residual(irk::gauss_legendre_tableau(q)) < 1e-8);
}

TEST_CASE("symmetry of nodes and weights") {
  for (int q : {2, 5, 10, 33}) {
    const auto t = irk::gauss_legendre_tableau(q);
    for (int j = 0; j < q; ++j) {
      CHECK(std::abs(t.c[j] + t.c[q - 1 - j] - 1.0) < 1e-12);
      CHECK(std::abs(t.b[j] - t.b[q - 1 - j]) < 1e-12);
    }
    for (int j = 1; j < q; ++j) CHECK(t.c[j] > t.c[j - 1]);
  }
}

namespace {

// u' = -u, one step dt from u = 1: (I + dt A) k = -1, u1 = 1 + dt b.k
double linear_step(int q, double dt) {
  const auto t = irk::gauss_legendre_tableau(q);
  std::vector<double> m(static_cast<std::size_t>(q * q));
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) m[i * q + j] = (i == j ? 1.0 : 0.0) + dt * t.a_at(i, j);
  }
  const auto k = oracle::solve_dense(m, std::vector<double>(q, -1.0));
  double u1 = 1.0;
  for (int j = 0; j < q; ++j) u1 += dt * t.b[j] * k[j];
  return u1;
}

}  // namespace

TEST_CASE("linear ODE step is the diagonal Pade approximant") {
  // Gauss methods have stability function R = P(-z)/P(z), the (q,q) Pade
  // approximant of exp(-z); its error at z = 0.5 is ~5e-8 for q = 3.
  const double z = 0.5;
  const double p3 = 1 - z / 2 + z * z / 10 - z * z * z / 120;
  const double q3 = 1 + z / 2 + z * z / 10 + z * z * z / 120;
  CHECK(std::abs(linear_step(3, z) - p3 / q3) < 1e-15);
  CHECK(std::abs(linear_step(1, z) - (1 - z / 2) / (1 + z / 2)) < 1e-15);
}

TEST_CASE("linear ODE step reproduces the exponential") {
  for (int q : {4, 6, 10}) CHECK(std::abs(linear_step(q, 0.5) - std::exp(-0.5)) < 1e-10);
}

TEST_CASE("stage count range") {
  CHECK_THROWS_AS(irk::gauss_legendre_tableau(0), std::invalid_argument);
  CHECK_THROWS_AS(irk::gauss_legendre_tableau(-3), std::invalid_argument);
  CHECK_THROWS_AS(irk::gauss_legendre_tableau(irk::kMaxStages + 1), std::invalid_argument);
  CHECK_NOTHROW(irk::gauss_legendre_tableau(irk::kMaxStages));
}

TEST_CASE("json dump") {
  const auto json = irk::gauss_legendre_tableau(2).to_json();
  CHECK(json.find("\"q\": 2") != std::string::npos);
  CHECK(json.find("\"a\"") != std::string::npos);
}

}
