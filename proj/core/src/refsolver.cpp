#include "hpinn/refsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hpinn::ref {

namespace {
// With lambda exactly max|f'| the split flux has a degenerate critical point at
// the extremum and WENO-Z drops to third order; larger margins add enough
// dissipation to overshoot where the extremum meets the shock.
constexpr double kLambdaSafety = 1.01;
}  // namespace

void SolverConfig::validate() const {
  if (n_cells < 16) throw std::invalid_argument("reference.n_cells must be >= 16");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("reference.cfl must be in (0, 1]");
  if (!(t_final >= 0.0)) throw std::invalid_argument("reference t_final must be >= 0");
  pde.validate();
  if (!pde.initial_condition) throw std::invalid_argument("pde has no initial condition");
}

GridField rhs(const GridField& u, const PdeSpec& pde, double t, const weno::WenoConstants& k,
              bool periodic) {
  const std::size_t n = u.size();
  const weno::Boundary boundary =
      periodic ? weno::Boundary::periodic() : weno::Boundary::dirichlet(pde.u_left, pde.u_right);

  double lambda = 0.0;
  for (double v : u.values) lambda = std::max(lambda, std::abs(pde.flux.derivative(v)));
  lambda *= kLambdaSafety;

  GridField out = weno::weno_derivative(u, pde.flux, lambda, boundary, k);
  for (double& v : out.values) v = -v;

  if (pde.viscosity > 0.0) {
    const std::vector<double> ext = weno::extend(u, boundary);
    const double scale = pde.viscosity / (u.dx * u.dx);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t e = j + weno::kGhostCells;
      out[j] += scale * (ext[e + 1] - 2.0 * ext[e] + ext[e - 1]);
    }
  }
  if (pde.source) {
    for (std::size_t j = 0; j < n; ++j) out[j] += pde.source(u.x(j), t);
  }
  if (!periodic) {
    out[0] = 0.0;
    out[n - 1] = 0.0;
  }
  return out;
}

GridField tvd_rk3_step(const GridField& u, double dt, const SpatialOperator& op) {
  const std::size_t n = u.size();
  GridField u1 = u;
  const GridField l0 = op(u);
  for (std::size_t j = 0; j < n; ++j) u1[j] = u[j] + dt * l0[j];
  GridField u2 = u;
  const GridField l1 = op(u1);
  for (std::size_t j = 0; j < n; ++j) u2[j] = 0.25 * (3.0 * u[j] + u1[j] + dt * l1[j]);
  GridField u3 = u;
  const GridField l2 = op(u2);
  for (std::size_t j = 0; j < n; ++j) u3[j] = (u[j] + 2.0 * u2[j] + 2.0 * dt * l2[j]) / 3.0;
  return u3;
}

double stable_dt(const GridField& u, const PdeSpec& pde, double cfl) {
  double speed = 0.0;
  for (double v : u.values) speed = std::max(speed, std::abs(pde.flux.derivative(v)));
  double dt = speed > 0.0 ? cfl * u.dx / speed : std::numeric_limits<double>::infinity();
  if (pde.viscosity > 0.0) dt = std::min(dt, cfl * u.dx * u.dx / (2.0 * pde.viscosity));
  return dt;
}

GridField tvd_rk3_step(const GridField& u, double dt, double t, const PdeSpec& pde, double cfl,
                       const weno::WenoConstants& k, bool periodic) {
  const double limit = stable_dt(u, pde, cfl);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " violates the CFL bound " << limit;
    throw std::invalid_argument(msg.str());
  }
  // Stage times for the source: t, t + dt, t + dt/2.
  int stage = 0;
  const double stage_times[3] = {t, t + dt, t + 0.5 * dt};
  return tvd_rk3_step(u, dt, [&](const GridField& v) {
    return rhs(v, pde, stage_times[stage++], k, periodic);
  });
}

GridField initial_field(const SolverConfig& config) {
  GridField u = GridField::uniform(config.pde.x_left, config.pde.x_right,
                                   static_cast<std::size_t>(config.n_cells));
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = config.pde.initial_condition(u.x(j));
  if (!config.periodic) {
    u[0] = config.pde.u_left;
    u[u.size() - 1] = config.pde.u_right;
  }
  return u;
}

std::vector<Snapshot> solve(const SolverConfig& config,
                            const std::function<void(double, const GridField&)>& observer) {
  config.validate();
  std::vector<double> targets;
  for (double t : config.snapshot_times) {
    if (t < 0.0 || t > config.t_final + 1e-12) {
      throw std::invalid_argument("snapshot time outside [0, t_final]");
    }
    targets.push_back(std::min(t, config.t_final));
  }
  targets.push_back(config.t_final);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                targets.end());

  GridField u = initial_field(config);
  double t = 0.0;
  std::vector<Snapshot> snapshots;
  for (double target : targets) {
    while (target - t > 1e-12) {
      double dt = stable_dt(u, config.pde, config.cfl);
      bool lands = false;
      if (t + dt >= target - 1e-12) {
        dt = target - t;
        lands = true;
      }
      u = tvd_rk3_step(u, dt, t, config.pde, config.cfl, config.weno, config.periodic);
      t = lands ? target : t + dt;
      if (observer) observer(t, u);
    }
    snapshots.push_back({target, u});
  }
  return snapshots;
}

std::vector<double> interpolate_cubic(const GridField& field, std::span<const double> xs) {
  const auto n = static_cast<std::ptrdiff_t>(field.size());
  if (n < 4) throw std::invalid_argument("cubic interpolation needs at least 4 points");
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const double s = (x - field.x0) / field.dx;
    auto base = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
    base = std::clamp<std::ptrdiff_t>(base, 0, n - 4);
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) {
      double weight = 1.0;
      const double sm = static_cast<double>(base + m);
      for (int l = 0; l < 4; ++l) {
        if (l == m) continue;
        const double sl = static_cast<double>(base + l);
        weight *= (s - sl) / (sm - sl);
      }
      acc += weight * field[static_cast<std::size_t>(base + m)];
    }
    out.push_back(acc);
  }
  return out;
}

double relative_error(const GridField& pred, const GridField& ref) {
  const std::vector<double> xs = pred.coordinates();
  const bool same_grid = pred.size() == ref.size() && pred.x0 == ref.x0 && pred.dx == ref.dx;
  const std::vector<double> r = same_grid ? ref.values : interpolate_cubic(ref, xs);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    num += (pred[j] - r[j]) * (pred[j] - r[j]);
    den += r[j] * r[j];
  }
  if (!(den > 0.0)) throw std::invalid_argument("relative_error: reference has zero norm");
  return std::sqrt(num / den);
}

}  // namespace hpinn::ref
