#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hpinn/autodiff.hpp"
#include "hpinn/grid.hpp"
#include "hpinn/irk.hpp"
#include "hpinn/network.hpp"
#include "hpinn/pde.hpp"
#include "hpinn/weno.hpp"

namespace hpinn {

enum class IndicatorField { solution, flux };
enum class LossNormalization { mean, sum };

struct DiscretizationConfig {
  int n_points = 300;
  double dt = 0.1;
  int q = 10;
  // false gives the original discrete-time PINN (all-zero mask)
  bool hybrid = true;
  int mask_dilation = 3;
  bool recompute_mask = false;
  int recompute_interval = 100;
  IndicatorField indicator_field = IndicatorField::solution;
  double lambda_safety = 1.1;
  weno::WenoConstants weno;

  void validate() const;
};

/// Stage outputs u^{n+c_1}, ..., u^{n+c_q}, u^{n+1} with x-derivatives as
/// graph nodes, stored stage-major.
class StageNodes {
 public:
  StageNodes(int stages, int points);

  int stages() const { return stages_; }
  int points() const { return points_; }
  ad::NodeBundle& at(int stage, int point) { return nodes_[index(stage, point)]; }
  const ad::NodeBundle& at(int stage, int point) const { return nodes_[index(stage, point)]; }

 private:
  std::size_t index(int stage, int point) const {
    return static_cast<std::size_t>(stage) * points_ + point;
  }
  int stages_;
  int points_;
  std::vector<ad::NodeBundle> nodes_;
};

/// Network evaluated over every grid point through the scalar graph.
StageNodes stage_fields(ad::Graph& graph, const nn::BoundParameters& params, const GridField& grid);

/// f(u)_x for one stage: f'(u) u_x at unflagged points, the WENO-Z
/// conservative difference of neighbouring stage nodes at flagged points.
/// Stencils past the ends use odd reflection about the Dirichlet values.
std::vector<ad::Var> hybrid_convection(ad::Graph& graph, const StageNodes& stages, int stage,
                                       const weno::DiscontinuityMask& mask, const PdeSpec& pde,
                                       double lambda, double dx, const weno::WenoConstants& k);

/// N[u] = f(u)_x - nu u_xx - h(x, t_stage); the viscous term always comes
/// from the autodiff second derivative.
std::vector<ad::Var> residual_operator(ad::Graph& graph, const StageNodes& stages, int stage,
                                       const weno::DiscontinuityMask& mask, const PdeSpec& pde,
                                       double lambda, const GridField& grid, double t_stage,
                                       const weno::WenoConstants& k);

/// Per-stage targets u_i^n (q+1 rows of N nodes): stage values plus dt
/// times the a-weighted (rows 0..q-1) or b-weighted (row q) residuals.
std::vector<std::vector<ad::Var>> stage_targets(ad::Graph& graph, const StageNodes& stages,
                                                const std::vector<std::vector<ad::Var>>& residuals,
                                                const irk::ButcherTableau& tableau, double dt);

struct LossNodes {
  ad::Var total;
  ad::Var l_pde;
  ad::Var l_bc;
};

struct LossBreakdown {
  double total = 0.0;
  double l_pde = 0.0;
  double l_bc = 0.0;
};

/// L_PDE: every target against the datum at its point; L_BC: every stage
/// output at both end points against the boundary values. With mean
/// normalization each term is averaged over its entries.
LossNodes compute_loss(ad::Graph& graph, const std::vector<std::vector<ad::Var>>& targets,
                       std::span<const double> data, const StageNodes& stages, double u_left,
                       double u_right, LossNormalization normalization);

/// Loss head for one time step with mask and lambda frozen. The stage
/// outputs are input leaves fed from a batched network evaluation, so the
/// graph is built once and re-evaluated every iteration.
class LossGraph {
 public:
  LossGraph(const PdeSpec& pde, const DiscretizationConfig& disc, const irk::ButcherTableau& tableau,
            const GridField& data, const weno::DiscontinuityMask& mask, double lambda, double t_n,
            LossNormalization normalization);

  LossBreakdown evaluate(const nn::StageJets& jets);

  /// dL/d(u, u_x, u_xx) for the last evaluate().
  void adjoints(nn::StageJets& out);

  std::size_t size() const { return graph_->size(); }

 private:
  std::unique_ptr<ad::Graph> graph_;
  StageNodes leaves_;
  LossNodes loss_{};
  std::vector<double> adjoint_buffer_;
};

}  // namespace hpinn
