#include "hpinn/pde.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpinn {

void GridField::validate(std::size_t min_points) const {
  if (values.size() < min_points) {
    throw std::invalid_argument("grid field has " + std::to_string(values.size()) +
                                " points, need at least " + std::to_string(min_points));
  }
  if (!(dx > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid field holds a non-finite value");
  }
}

std::vector<double> GridField::coordinates() const {
  std::vector<double> xs(values.size());
  for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = x(j);
  return xs;
}

GridField GridField::uniform(double left, double right, std::size_t n, double fill) {
  if (n < 2 || !(right > left)) throw std::invalid_argument("uniform grid needs n >= 2 and right > left");
  return GridField{std::vector<double>(n, fill), left, (right - left) / static_cast<double>(n - 1)};
}

double total_variation(std::span<const double> values) {
  double tv = 0.0;
  for (std::size_t j = 1; j < values.size(); ++j) tv += std::abs(values[j] - values[j - 1]);
  return tv;
}

void PdeSpec::validate() const {
  if (!(viscosity >= 0.0)) throw std::invalid_argument("pde.viscosity must be >= 0");
  if (!(x_right > x_left)) throw std::invalid_argument("pde.domain must be nonempty");
}

PdeSpec PdeSpec::burgers(double viscosity) {
  PdeSpec pde;
  pde.flux = ConvectionFlux{ConvectionFlux::Kind::burgers, 1.0};
  pde.viscosity = viscosity;
  pde.initial_condition = [](double x) { return -std::sin(std::numbers::pi * x); };
  return pde;
}

}  // namespace hpinn
