#pragma once

#include <functional>
#include <string>

#include "hpinn/grid.hpp"

namespace hpinn {

/// Convection flux f(u). Evaluation is templated so the same definition
/// serves plain doubles and autodiff nodes.
struct ConvectionFlux {
  enum class Kind { burgers, linear };

  Kind kind = Kind::burgers;
  double speed = 1.0;  // linear only: f(u) = speed * u

  template <class T>
  T value(const T& u) const {
    if (kind == Kind::burgers) return 0.5 * (u * u);
    return u * speed;
  }

  template <class T>
  T derivative(const T& u) const {
    if (kind == Kind::burgers) return u;
    return u * 0.0 + speed;
  }

  double derivative(double u) const { return kind == Kind::burgers ? u : speed; }
  double value(double u) const { return kind == Kind::burgers ? 0.5 * u * u : speed * u; }
};

/// u_t + f(u)_x = nu * u_xx + h(x, t) on [x_left, x_right] with Dirichlet
/// values at both ends. The diffusion function g is the identity.
struct PdeSpec {
  ConvectionFlux flux;
  double viscosity = 0.0;
  std::function<double(double x, double t)> source;  // empty means h = 0
  double x_left = -1.0;
  double x_right = 1.0;
  double u_left = 0.0;
  double u_right = 0.0;
  std::function<double(double x)> initial_condition;

  double source_at(double x, double t) const { return source ? source(x, t) : 0.0; }

  void validate() const;

  /// u(0,x) = -sin(pi x) on [-1,1], u(t,+-1) = 0.
  static PdeSpec burgers(double viscosity);
};

}  // namespace hpinn
