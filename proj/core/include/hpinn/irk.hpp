#pragma once

#include <string>
#include <vector>

namespace hpinn::irk {

/// Coefficients of a q-stage Runge-Kutta method. `a` is row-major q x q.
struct ButcherTableau {
  int q = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  double a_at(int i, int j) const { return a[static_cast<std::size_t>(i) * q + j]; }

  std::string to_json() const;
};

inline constexpr int kMaxStages = 100;

/// Gauss-Legendre collocation method of order 2q. Nodes are the roots of the
/// Legendre polynomial of degree q shifted to (0,1); a_ij is the integral
/// over [0, c_i] of the j-th Lagrange basis polynomial on the nodes, which is
/// the solution of the stage-order conditions sum_j a_ij c_j^(k-1) = c_i^k / k.
///
/// Throws std::invalid_argument for q outside [1, kMaxStages] and
/// std::runtime_error if the stage-order residual exceeds 1e-8.
ButcherTableau gauss_legendre_tableau(int q);

/// Residuals sum_j b_j c_j^(k-1) - 1/k for k = 1..max_order (index k-1).
std::vector<double> verify_order_conditions(const ButcherTableau& t, int max_order);

/// Largest |sum_j a_ij c_j^(k-1) - c_i^k / k| over i and k = 1..q.
double stage_order_residual(const ButcherTableau& t);

}  // namespace hpinn::irk
