#include "hpinn/hybrid.hpp"

#include <stdexcept>

namespace hpinn {

void DiscretizationConfig::validate() const {
  if (n_points < 8) throw std::invalid_argument("discretization.n_points must be >= 8");
  if (!(dt > 0.0)) throw std::invalid_argument("discretization.dt must be > 0");
  if (q < 1 || q > irk::kMaxStages) throw std::invalid_argument("discretization.q_stages out of range");
  if (mask_dilation < 0) throw std::invalid_argument("discretization.mask_dilation must be >= 0");
  if (recompute_interval < 1) throw std::invalid_argument("discretization.recompute_interval must be >= 1");
  if (!(lambda_safety >= 1.0)) throw std::invalid_argument("discretization.lambda_safety must be >= 1");
}

StageNodes::StageNodes(int stages, int points)
    : stages_(stages), points_(points), nodes_(static_cast<std::size_t>(stages) * points) {
  if (stages < 1 || points < 1) throw std::invalid_argument("StageNodes needs positive dimensions");
}

StageNodes stage_fields(ad::Graph& graph, const nn::BoundParameters& params, const GridField& grid) {
  const int stages = params.layers.back().rows;
  const int points = static_cast<int>(grid.size());
  StageNodes out(stages, points);
  for (int i = 0; i < points; ++i) {
    const ad::Var x = graph.input(grid.x(static_cast<std::size_t>(i)));
    const auto bundles = nn::forward_stages(graph, params, x);
    for (int s = 0; s < stages; ++s) out.at(s, i) = bundles[s];
  }
  return out;
}

std::vector<ad::Var> hybrid_convection(ad::Graph& graph, const StageNodes& stages, int stage,
                                       const weno::DiscontinuityMask& mask, const PdeSpec& pde,
                                       double lambda, double dx, const weno::WenoConstants& k) {
  const int n = stages.points();
  if (static_cast<int>(mask.size()) != n) {
    throw std::invalid_argument("hybrid_convection: mask length differs from point count");
  }
  std::vector<ad::Var> out(n);
  // Ghost values past the ends: odd reflection about the boundary value,
  // built lazily since most points never reach them.
  std::vector<ad::Var> ghost_left(weno::kGhostCells);
  std::vector<ad::Var> ghost_right(weno::kGhostCells);
  std::vector<bool> have_left(weno::kGhostCells, false);
  std::vector<bool> have_right(weno::kGhostCells, false);
  auto ghost = [&](int j) {
    if (j < 0) {
      const int m = -j - 1;
      if (!have_left[m]) {
        ghost_left[m] = 2.0 * pde.u_left - stages.at(stage, -j).value;
        have_left[m] = true;
      }
      return ghost_left[m];
    }
    const int m = j - n;
    if (!have_right[m]) {
      ghost_right[m] = 2.0 * pde.u_right - stages.at(stage, 2 * (n - 1) - j).value;
      have_right[m] = true;
    }
    return ghost_right[m];
  };
  for (int i = 0; i < n; ++i) {
    if (!mask[i]) {
      const auto& u = stages.at(stage, i);
      out[i] = pde.flux.derivative(u.value) * u.dx;
      continue;
    }
    std::array<ad::Var, 7> window{};
    for (int m = 0; m < 7; ++m) {
      const int j = i + m - weno::kGhostCells;
      window[m] = (j < 0 || j >= n) ? ghost(j) : stages.at(stage, j).value;
    }
    out[i] = weno::point_flux_derivative<ad::Var>(window, pde.flux, lambda, dx, k);
  }
  return out;
}

std::vector<ad::Var> residual_operator(ad::Graph& graph, const StageNodes& stages, int stage,
                                       const weno::DiscontinuityMask& mask, const PdeSpec& pde,
                                       double lambda, const GridField& grid, double t_stage,
                                       const weno::WenoConstants& k) {
  std::vector<ad::Var> out = hybrid_convection(graph, stages, stage, mask, pde, lambda, grid.dx, k);
  for (int i = 0; i < stages.points(); ++i) {
    if (pde.viscosity != 0.0) out[i] = out[i] - pde.viscosity * stages.at(stage, i).dxx;
    if (pde.source) {
      const double h = pde.source(grid.x(static_cast<std::size_t>(i)), t_stage);
      out[i] = out[i] - h;
    }
  }
  return out;
}

std::vector<std::vector<ad::Var>> stage_targets(ad::Graph& graph, const StageNodes& stages,
                                                const std::vector<std::vector<ad::Var>>& residuals,
                                                const irk::ButcherTableau& tableau, double dt) {
  const int q = tableau.q;
  if (stages.stages() != q + 1 || static_cast<int>(residuals.size()) != q) {
    throw std::invalid_argument("stage_targets: tableau has " + std::to_string(q) +
                                " stages but network provides " +
                                std::to_string(stages.stages() - 1));
  }
  const int n = stages.points();
  for (const auto& r : residuals) {
    if (static_cast<int>(r.size()) != n) throw std::invalid_argument("stage_targets: residual length mismatch");
  }
  std::vector<std::vector<ad::Var>> targets(q + 1, std::vector<ad::Var>(n));
  std::vector<double> coeffs(q + 1);
  std::vector<ad::Var> terms(q + 1);
  for (int i = 0; i <= q; ++i) {
    coeffs[0] = 1.0;
    for (int j = 0; j < q; ++j) coeffs[j + 1] = dt * (i < q ? tableau.a_at(i, j) : tableau.b[j]);
    for (int p = 0; p < n; ++p) {
      terms[0] = stages.at(i, p).value;
      for (int j = 0; j < q; ++j) terms[j + 1] = residuals[j][p];
      targets[i][p] = graph.linear_combination(coeffs, terms);
    }
  }
  return targets;
}

LossNodes compute_loss(ad::Graph& graph, const std::vector<std::vector<ad::Var>>& targets,
                       std::span<const double> data, const StageNodes& stages, double u_left,
                       double u_right, LossNormalization normalization) {
  const auto rows = targets.size();
  const auto n = data.size();
  std::vector<ad::Var> terms;
  terms.reserve(rows * n);
  for (const auto& row : targets) {
    if (row.size() != n) throw std::invalid_argument("compute_loss: target/data length mismatch");
    for (std::size_t p = 0; p < n; ++p) terms.push_back(ad::square(row[p] - data[p]));
  }
  const bool mean = normalization == LossNormalization::mean;
  std::vector<double> coeffs(terms.size(), mean ? 1.0 / static_cast<double>(terms.size()) : 1.0);
  const ad::Var l_pde = graph.linear_combination(coeffs, terms);

  terms.clear();
  const int last = stages.points() - 1;
  for (int s = 0; s < stages.stages(); ++s) {
    terms.push_back(ad::square(stages.at(s, 0).value - u_left));
    terms.push_back(ad::square(stages.at(s, last).value - u_right));
  }
  coeffs.assign(terms.size(), mean ? 1.0 / static_cast<double>(terms.size()) : 1.0);
  const ad::Var l_bc = graph.linear_combination(coeffs, terms);
  return {l_pde + l_bc, l_pde, l_bc};
}

LossGraph::LossGraph(const PdeSpec& pde, const DiscretizationConfig& disc,
                     const irk::ButcherTableau& tableau, const GridField& data,
                     const weno::DiscontinuityMask& mask, double lambda, double t_n,
                     LossNormalization normalization)
    : graph_(std::make_unique<ad::Graph>()),
      leaves_(tableau.q + 1, static_cast<int>(data.size())) {
  ad::Graph& g = *graph_;
  for (int s = 0; s < leaves_.stages(); ++s) {
    for (int i = 0; i < leaves_.points(); ++i) {
      leaves_.at(s, i) = {g.input(0.0), g.input(0.0), g.input(0.0)};
    }
  }
  std::vector<std::vector<ad::Var>> residuals;
  residuals.reserve(tableau.q);
  for (int s = 0; s < tableau.q; ++s) {
    residuals.push_back(residual_operator(g, leaves_, s, mask, pde, lambda, data,
                                          t_n + tableau.c[s] * disc.dt, disc.weno));
  }
  const auto targets = stage_targets(g, leaves_, residuals, tableau, disc.dt);
  loss_ = compute_loss(g, targets, data.values, leaves_, pde.u_left, pde.u_right, normalization);
}

LossBreakdown LossGraph::evaluate(const nn::StageJets& jets) {
  ad::Graph& g = *graph_;
  for (int s = 0; s < leaves_.stages(); ++s) {
    for (int i = 0; i < leaves_.points(); ++i) {
      const auto& leaf = leaves_.at(s, i);
      g.set_value(leaf.value, jets.value(s, i));
      g.set_value(leaf.dx, jets.dx(s, i));
      g.set_value(leaf.dxx, jets.dxx(s, i));
    }
  }
  g.evaluate();
  return {g.value(loss_.total), g.value(loss_.l_pde), g.value(loss_.l_bc)};
}

void LossGraph::adjoints(nn::StageJets& out) {
  graph_->gradient(loss_.total, adjoint_buffer_);
  out.resize(leaves_.stages(), leaves_.points());
  for (int s = 0; s < leaves_.stages(); ++s) {
    for (int i = 0; i < leaves_.points(); ++i) {
      const auto& leaf = leaves_.at(s, i);
      out.value(s, i) = adjoint_buffer_[leaf.value.id];
      out.dx(s, i) = adjoint_buffer_[leaf.dx.id];
      out.dxx(s, i) = adjoint_buffer_[leaf.dxx.id];
    }
  }
}

}  // namespace hpinn
