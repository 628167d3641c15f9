#pragma once

#include <functional>
#include <vector>

#include "hpinn/grid.hpp"
#include "hpinn/pde.hpp"
#include "hpinn/weno.hpp"

namespace hpinn::ref {

struct SolverConfig {
  int n_cells = 1000;  // grid points including both boundary nodes
  double cfl = 0.4;
  PdeSpec pde;
  double t_final = 0.0;
  std::vector<double> snapshot_times;
  weno::WenoConstants weno;
  // Periodic boundaries instead of the Dirichlet values in pde.
  bool periodic = false;

  void validate() const;
};

struct Snapshot {
  double t = 0.0;
  GridField u;
};

/// Semi-discrete operator: -(WENO-Z flux divergence) + nu * central second
/// difference + h. Splitting uses lambda = 1.01 max|f'(u)|. Dirichlet boundary
/// nodes are held fixed (rhs = 0 there).
GridField rhs(const GridField& u, const PdeSpec& pde, double t, const weno::WenoConstants& k = {},
              bool periodic = false);

using SpatialOperator = std::function<GridField(const GridField&)>;

/// Three-stage SSP/TVD Runge-Kutta update for an arbitrary operator.
GridField tvd_rk3_step(const GridField& u, double dt, const SpatialOperator& op);

/// Largest stable step for the given field: cfl * dx / max|f'(u)|, also
/// capped by cfl * dx^2 / (2 nu) when nu > 0.
double stable_dt(const GridField& u, const PdeSpec& pde, double cfl);

/// PDE step; throws std::invalid_argument when dt violates stable_dt.
GridField tvd_rk3_step(const GridField& u, double dt, double t, const PdeSpec& pde, double cfl,
                       const weno::WenoConstants& k = {}, bool periodic = false);

/// Initial condition sampled on the n_cells grid over the pde domain.
GridField initial_field(const SolverConfig& config);

/// Marches to every snapshot time (sorted, <= t_final) and t_final,
/// clipping dt to land on each exactly. Optional observer sees every step.
std::vector<Snapshot> solve(const SolverConfig& config,
                            const std::function<void(double t, const GridField&)>& observer = {});

/// Local cubic (4-point Lagrange) interpolation of `field` at xs.
std::vector<double> interpolate_cubic(const GridField& field, std::span<const double> xs);

/// ||pred - ref||_2 / ||ref||_2 with ref interpolated onto pred's grid
/// (used as is when the grids coincide).
double relative_error(const GridField& pred, const GridField& ref);

}  // namespace hpinn::ref
