#include "hpinn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace hpinn {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("training.lr must be > 0");
  if (!(loss_tolerance > 0.0)) throw std::invalid_argument("training.tolerance must be > 0");
  if (max_iterations < 0) throw std::invalid_argument("training.max_iters must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("training adam moments must lie in [0, 1)");
  }
}

Adam::Adam(std::size_t size, const TrainingConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.adam_eps),
      m_(size, 0.0),
      v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> gradient) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = gradient[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
    params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

std::string StepDiagnostics::to_json() const {
  std::ostringstream out;
  out.precision(10);
  out << "{\"step\": " << step << ", \"t\": " << t << ", \"iterations\": " << iterations
      << ", \"final_loss\": " << final_loss.total << ", \"l_pde\": " << final_loss.l_pde
      << ", \"l_bc\": " << final_loss.l_bc << ", \"initial_loss\": " << initial_loss.total
      << ", \"converged\": " << (converged ? "true" : "false") << ", \"flagged_cells\": " << flagged
      << ", \"lambda\": " << lambda << ", \"wall_time\": " << wall_seconds << '}';
  return out.str();
}

namespace {

weno::DiscontinuityMask indicator_mask(const GridField& field, const PdeSpec& pde,
                                       const DiscretizationConfig& disc) {
  if (disc.indicator_field == IndicatorField::flux) {
    GridField f = field;
    for (double& v : f.values) v = pde.flux.value(v);
    return weno::discontinuity_flags(f, disc.weno, weno::Boundary::extrapolate());
  }
  return weno::discontinuity_flags(field, disc.weno, weno::Boundary::extrapolate());
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

TimeStepState prepare_step(const GridField& data, double t, const PdeSpec& pde,
                           const DiscretizationConfig& disc) {
  TimeStepState state;
  state.t = t;
  state.data = data;
  state.mask = disc.hybrid ? weno::dilate(indicator_mask(data, pde, disc), disc.mask_dilation)
                           : weno::DiscontinuityMask::zeros(data.size());
  double speed = 0.0;
  for (double v : data.values) speed = std::max(speed, std::abs(pde.flux.derivative(v)));
  state.lambda = disc.lambda_safety * speed;
  return state;
}

StepResult train_step(const TimeStepState& state, nn::NetworkParameters& params,
                      const irk::ButcherTableau& tableau, const PdeSpec& pde,
                      const DiscretizationConfig& disc, const TrainingConfig& training,
                      int step_index, const std::function<void(int, const LossBreakdown&)>& progress) {
  const auto start = std::chrono::steady_clock::now();
  if (static_cast<int>(state.mask.size()) != static_cast<int>(state.data.size())) {
    throw std::invalid_argument("train_step: mask and data lengths differ");
  }
  if (params.outputs() != tableau.q + 1) {
    throw std::invalid_argument("train_step: network outputs must equal q + 1");
  }

  const std::vector<double> xs = state.data.coordinates();
  weno::DiscontinuityMask mask = state.mask;
  auto head = std::make_unique<LossGraph>(pde, disc, tableau, state.data, mask, state.lambda,
                                          state.t, training.normalization);
  nn::BatchedNetwork network;
  nn::StageJets adjoints;
  std::vector<double> flat = params.flatten();
  std::vector<double> gradient(flat.size());
  Adam adam(flat.size(), training);

  StepDiagnostics diag;
  diag.step = step_index;
  diag.t = state.t + disc.dt;
  diag.lambda = state.lambda;

  int iteration = 0;
  for (;; ++iteration) {
    const nn::StageJets& jets = network.forward(params, xs);

    if (disc.hybrid && disc.recompute_mask && iteration > 0 &&
        iteration % disc.recompute_interval == 0) {
      GridField predicted = state.data;
      for (std::size_t i = 0; i < xs.size(); ++i) predicted[i] = jets.value(tableau.q, static_cast<Eigen::Index>(i));
      weno::DiscontinuityMask next = indicator_mask(predicted, pde, disc);
      for (std::size_t i = 0; i < next.size(); ++i) next.flags[i] |= state.mask.flags[i];
      next = weno::dilate(next, disc.mask_dilation);
      if (next.flags != mask.flags) {
        mask = std::move(next);
        head = std::make_unique<LossGraph>(pde, disc, tableau, state.data, mask, state.lambda,
                                           state.t, training.normalization);
      }
    }

    LossBreakdown loss;
    try {
      loss = head->evaluate(jets);
    } catch (const ad::EvaluationError& e) {
      throw TrainingError(std::string("loss evaluation failed: ") + e.what(), step_index, iteration,
                          norm(flat));
    }
    if (!std::isfinite(loss.total)) {
      throw TrainingError("non-finite loss", step_index, iteration, norm(flat));
    }
    if (iteration == 0) diag.initial_loss = loss;
    diag.final_loss = loss;
    if (progress && iteration % 1000 == 0) progress(iteration, loss);
    if (loss.total < training.loss_tolerance) {
      diag.converged = true;
      break;
    }
    if (iteration >= training.max_iterations) break;

    head->adjoints(adjoints);
    network.backward(adjoints, gradient);
    adam.step(flat, gradient);
    params.assign(flat);
  }

  diag.iterations = iteration;
  diag.flagged = mask.count();

  StepResult result;
  result.prediction = state.data;
  const nn::StageJets& jets = network.outputs();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    result.prediction[i] = jets.value(tableau.q, static_cast<Eigen::Index>(i));
  }
  diag.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.diagnostics = diag;
  return result;
}

GridField collocation_grid(const PdeSpec& pde, const DiscretizationConfig& disc) {
  return GridField::uniform(pde.x_left, pde.x_right, static_cast<std::size_t>(disc.n_points));
}

MarchResult march(const PdeSpec& pde, const DiscretizationConfig& disc,
                  const nn::NetworkConfig& network, const TrainingConfig& training, double t_final,
                  std::span<const ref::Snapshot> references,
                  const std::function<void(const StepDiagnostics&)>& on_step) {
  pde.validate();
  disc.validate();
  training.validate();
  if (!pde.initial_condition) throw std::invalid_argument("pde has no initial condition");
  const double ratio = t_final / disc.dt;
  const auto steps = static_cast<int>(std::llround(ratio));
  if (steps < 1 || std::abs(steps * disc.dt - t_final) > 1e-12) {
    throw std::invalid_argument("t_final must be a positive multiple of dt");
  }

  const irk::ButcherTableau tableau = irk::gauss_legendre_tableau(disc.q);
  nn::NetworkConfig net = network;
  net.outputs = disc.q + 1;
  nn::NetworkParameters params = nn::init_xavier(net);

  GridField u = collocation_grid(pde, disc);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = pde.initial_condition(u.x(j));

  MarchResult result;
  result.trajectory.push_back({0.0, u});
  for (int n = 0; n < steps; ++n) {
    const double t_n = n * disc.dt;
    if (!training.warm_start && n > 0) {
      nn::NetworkConfig fresh = net;
      fresh.seed = net.seed + static_cast<std::uint64_t>(n);
      params = nn::init_xavier(fresh);
    }
    const TimeStepState state = prepare_step(u, t_n, pde, disc);
    StepResult step = train_step(state, params, tableau, pde, disc, training, n);
    const double t_next = (n + 1) * disc.dt;
    step.diagnostics.t = t_next;
    u = std::move(step.prediction);
    result.trajectory.push_back({t_next, u});
    result.steps.push_back(step.diagnostics);
    for (const auto& snap : references) {
      if (std::abs(snap.t - t_next) < 1e-9) {
        result.errors.push_back({t_next, ref::relative_error(u, snap.u)});
      }
    }
    if (on_step) on_step(step.diagnostics);
  }
  result.final_parameters = std::move(params);
  return result;
}

}  // namespace hpinn
