#include "hpinn/weno.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hpinn::weno {

std::size_t DiscontinuityMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

std::vector<double> extend(const GridField& u, const Boundary& boundary) {
  const std::size_t n = u.size();
  std::vector<double> ext(n + 2 * kGhostCells);
  std::copy(u.values.begin(), u.values.end(), ext.begin() + kGhostCells);
  for (int g = 0; g < kGhostCells; ++g) {
    if (boundary.kind == Boundary::Kind::periodic) {
      // The last point duplicates the first on a periodic grid with both
      // endpoints stored, so wrap over n - 1 distinct points.
      const std::size_t period = n - 1;
      ext[kGhostCells - 1 - g] = u.values[(period - 1 - g) % period];
      ext[kGhostCells + n + g] = u.values[(1 + g) % period];
    } else if (boundary.kind == Boundary::Kind::extrapolate) {
      const double m = g + 1.0;
      ext[kGhostCells - 1 - g] = u.values[0] - m * (u.values[1] - u.values[0]);
      ext[kGhostCells + n + g] = u.values[n - 1] + m * (u.values[n - 1] - u.values[n - 2]);
    } else {
      // odd reflection about the boundary value at the end nodes
      ext[kGhostCells - 1 - g] = 2.0 * boundary.left - u.values[1 + g];
      ext[kGhostCells + n + g] = 2.0 * boundary.right - u.values[n - 2 - g];
    }
  }
  return ext;
}

FluxSplit lax_friedrichs_split(const GridField& u, const ConvectionFlux& flux, double lambda) {
  double max_speed = 0.0;
  for (double v : u.values) max_speed = std::max(max_speed, std::abs(flux.derivative(v)));
  if (!(lambda >= max_speed)) {
    std::ostringstream msg;
    msg << "Lax-Friedrichs lambda " << lambda << " below max |f'(u)| = " << max_speed;
    throw std::invalid_argument(msg.str());
  }
  FluxSplit split{u, u, lambda};
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double f = flux.value(u[j]);
    split.fplus[j] = 0.5 * (f + lambda * u[j]);
    split.fminus[j] = 0.5 * (f - lambda * u[j]);
  }
  return split;
}

GridField weno_derivative(const GridField& u, const ConvectionFlux& flux, double lambda,
                          const Boundary& boundary, const WenoConstants& k) {
  u.validate(7);
  const std::size_t n = u.size();
  const std::vector<double> ext = extend(u, boundary);
  std::vector<double> fp(ext.size());
  std::vector<double> fm(ext.size());
  for (std::size_t m = 0; m < ext.size(); ++m) {
    const double f = flux.value(ext[m]);
    fp[m] = 0.5 * (f + lambda * ext[m]);
    fm[m] = 0.5 * (f - lambda * ext[m]);
  }
  // interface[i] sits at x_{i-1/2} for i = 0..n; extended index of x_j is j+3.
  std::vector<double> interface(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t e = i + kGhostCells - 1;  // point left of the interface
    const double plus = reconstruct_interface_flux<double>(
        {fp[e - 2], fp[e - 1], fp[e], fp[e + 1], fp[e + 2]}, k);
    const double minus = reconstruct_interface_flux<double>(
        {fm[e + 3], fm[e + 2], fm[e + 1], fm[e], fm[e - 1]}, k);
    interface[i] = plus + minus;
  }
  GridField out{std::vector<double>(n), u.x0, u.dx};
  for (std::size_t j = 0; j < n; ++j) out[j] = (interface[j + 1] - interface[j]) / u.dx;
  return out;
}

std::array<double, 4> scale_separation(const std::array<double, 6>& w, const WenoConstants& k) {
  const auto beta = smoothness_indicators<double>({w[0], w[1], w[2], w[3], w[4]});
  const std::array<double, 4> b{beta[0], beta[1], beta[2], beta3(w[3], w[4], w[5])};
  std::array<double, 4> gamma{};
  double total = 0.0;
  for (int m = 0; m < 4; ++m) {
    gamma[m] = 1.0 / std::pow(b[m] + k.delta, k.p);
    total += gamma[m];
  }
  for (double& g : gamma) g /= total;
  return gamma;
}

DiscontinuityMask discontinuity_flags(const GridField& u, const WenoConstants& k,
                                      const Boundary& boundary) {
  u.validate(8);
  const std::vector<double> ext = extend(u, boundary);
  DiscontinuityMask mask = DiscontinuityMask::zeros(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const std::size_t e = j + kGhostCells;
    const auto chi = scale_separation({ext[e - 2], ext[e - 1], ext[e], ext[e + 1], ext[e + 2], ext[e + 3]}, k);
    const bool smooth = std::all_of(chi.begin(), chi.end(), [&](double c) { return c > k.c_t; });
    mask.flags[j] = smooth ? 0 : 1;
  }
  return mask;
}

DiscontinuityMask dilate(const DiscontinuityMask& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("dilation radius must be >= 0");
  const auto n = static_cast<std::ptrdiff_t>(mask.size());
  DiscontinuityMask out = DiscontinuityMask::zeros(mask.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    if (!mask.flags[j]) continue;
    for (std::ptrdiff_t m = std::max<std::ptrdiff_t>(0, j - radius);
         m <= std::min<std::ptrdiff_t>(n - 1, j + radius); ++m) {
      out.flags[m] = 1;
    }
  }
  return out;
}

}  // namespace hpinn::weno
