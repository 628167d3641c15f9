#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hpinn {

/// Scalar samples on a uniform 1-D grid: x_j = x0 + j * dx.
struct GridField {
  std::vector<double> values;
  double x0 = 0.0;
  double dx = 1.0;

  std::size_t size() const { return values.size(); }
  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double operator[](std::size_t j) const { return values[j]; }
  double& operator[](std::size_t j) { return values[j]; }

  /// Throws std::invalid_argument unless size >= min_points, dx > 0 and all
  /// values are finite.
  void validate(std::size_t min_points) const;

  std::vector<double> coordinates() const;

  /// n points covering [left, right] with both endpoints included.
  static GridField uniform(double left, double right, std::size_t n, double fill = 0.0);
};

double total_variation(std::span<const double> values);

}  // namespace hpinn
