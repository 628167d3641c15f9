#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hpinn/grid.hpp"
#include "hpinn/pde.hpp"

namespace hpinn::weno {

struct WenoConstants {
  double eps = 1e-40;  // weight regularization
  std::array<double, 3> d{0.1, 0.6, 0.3};
  double delta = 1e-4;  // indicator regularization, 1-D value
  double p = 6.0;       // scale-separation exponent
  double c_t = 5e-4;    // indicator threshold
};

struct FluxSplit {
  GridField fplus;
  GridField fminus;
  double lambda = 0.0;
};

struct DiscontinuityMask {
  std::vector<std::uint8_t> flags;

  std::size_t size() const { return flags.size(); }
  std::size_t count() const;
  bool operator[](std::size_t j) const { return flags[j] != 0; }

  static DiscontinuityMask zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
};

/// How stencils are continued past the grid ends.
struct Boundary {
  enum class Kind { dirichlet, periodic, extrapolate };
  Kind kind = Kind::dirichlet;
  double left = 0.0;
  double right = 0.0;

  static Boundary dirichlet(double left, double right) { return {Kind::dirichlet, left, right}; }
  static Boundary periodic() { return {Kind::periodic, 0.0, 0.0}; }
  /// Linear extrapolation of the two outermost points.
  static Boundary extrapolate() { return {Kind::extrapolate, 0.0, 0.0}; }
};

inline constexpr int kGhostCells = 3;

/// Values with kGhostCells ghosts on each side (size N + 6). Dirichlet
/// ghosts are the odd reflection about the boundary value,
/// u_{-m} = 2 u_b - u_m, with the end node sitting on the boundary; for a
/// constant field equal to u_b this is constant extension. Periodic ghosts
/// wrap.
std::vector<double> extend(const GridField& u, const Boundary& boundary);

/// f+- = (f(u) +- lambda u) / 2. Throws if lambda < max |f'(u)|.
FluxSplit lax_friedrichs_split(const GridField& u, const ConvectionFlux& flux, double lambda);

// Stencil kernels. Stencils are (f_{j-2}, ..., f_{j+2}) for the
// reconstruction at x_{j+1/2}.

template <class T>
std::array<T, 3> candidate_fluxes(const std::array<T, 5>& f) {
  return {(2.0 * f[0] - 7.0 * f[1] + 11.0 * f[2]) / 6.0,
          (-1.0 * f[1] + 5.0 * f[2] + 2.0 * f[3]) / 6.0,
          (2.0 * f[2] + 5.0 * f[3] - 1.0 * f[4]) / 6.0};
}

template <class T>
std::array<T, 3> smoothness_indicators(const std::array<T, 5>& f) {
  const auto sq = [](const T& v) { return v * v; };
  return {13.0 / 12.0 * sq(f[0] - 2.0 * f[1] + f[2]) + 0.25 * sq(f[0] - 4.0 * f[1] + 3.0 * f[2]),
          13.0 / 12.0 * sq(f[1] - 2.0 * f[2] + f[3]) + 0.25 * sq(f[3] - f[1]),
          13.0 / 12.0 * sq(f[2] - 2.0 * f[3] + f[4]) + 0.25 * sq(3.0 * f[2] - 4.0 * f[3] + f[4])};
}

/// WENO-Z weights. tau5 = |beta0 - beta2| only enters squared, so the sign
/// is irrelevant and no absolute value node is needed.
template <class T>
std::array<T, 3> wenoz_weights(const std::array<T, 3>& beta, const WenoConstants& k) {
  const T tau = beta[0] - beta[2];
  std::array<T, 3> alpha{beta[0], beta[1], beta[2]};
  for (int m = 0; m < 3; ++m) {
    const T ratio = tau / (beta[m] + k.eps);
    alpha[m] = k.d[m] * (ratio * ratio + 1.0);
  }
  const T total = alpha[0] + alpha[1] + alpha[2];
  return {alpha[0] / total, alpha[1] / total, alpha[2] / total};
}

template <class T>
T reconstruct_interface_flux(const std::array<T, 5>& f, const WenoConstants& k) {
  const auto cand = candidate_fluxes(f);
  const auto w = wenoz_weights(smoothness_indicators(f), k);
  return w[0] * cand[0] + w[1] * cand[1] + w[2] * cand[2];
}

/// d f(u)/dx at the center of a 7-point window (u_{i-3}, ..., u_{i+3}),
/// conservative difference of Lax-Friedrichs split WENO-Z fluxes.
template <class T>
T point_flux_derivative(const std::array<T, 7>& u, const ConvectionFlux& flux, double lambda,
                        double dx, const WenoConstants& k) {
  std::array<T, 7> fp{u[0], u[1], u[2], u[3], u[4], u[5], u[6]};
  std::array<T, 7> fm = fp;
  for (int m = 0; m < 7; ++m) {
    const T f = flux.value(u[m]);
    fp[m] = 0.5 * (f + lambda * u[m]);
    fm[m] = 0.5 * (f - lambda * u[m]);
  }
  // window index of offset o is o + 3
  const T right = reconstruct_interface_flux<T>({fp[1], fp[2], fp[3], fp[4], fp[5]}, k) +
                  reconstruct_interface_flux<T>({fm[6], fm[5], fm[4], fm[3], fm[2]}, k);
  const T left = reconstruct_interface_flux<T>({fp[0], fp[1], fp[2], fp[3], fp[4]}, k) +
                 reconstruct_interface_flux<T>({fm[5], fm[4], fm[3], fm[2], fm[1]}, k);
  return (right - left) / dx;
}

/// Conservative WENO-Z approximation of f(u)_x at every grid point.
/// Requires N >= 7.
GridField weno_derivative(const GridField& u, const ConvectionFlux& flux, double lambda,
                          const Boundary& boundary, const WenoConstants& k = {});

/// Downstream smoothness indicator over (f_{j+1}, f_{j+2}, f_{j+3}).
template <class T>
T beta3(const T& a, const T& b, const T& c) {
  return (a * (22.0 * a - 73.0 * b + 29.0 * c) + b * (61.0 * b - 49.0 * c) + 10.0 * c * c) / 3.0;
}

/// Normalized scale-separation measures chi_0..chi_3 from the window
/// (u_{j-2}, ..., u_{j+3}).
std::array<double, 4> scale_separation(const std::array<double, 6>& window, const WenoConstants& k);

/// Flag 0 where every chi_k exceeds C_T, else 1. Requires N >= 8. Use
/// Boundary::extrapolate() to keep the grid ends from reading as jumps.
DiscontinuityMask discontinuity_flags(const GridField& u, const WenoConstants& k,
                                      const Boundary& boundary);

/// Marks every point within `radius` cells of a flagged point.
DiscontinuityMask dilate(const DiscontinuityMask& mask, int radius);

}  // namespace hpinn::weno
