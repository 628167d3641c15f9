#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpinn/hybrid.hpp"
#include "hpinn/irk.hpp"
#include "hpinn/network.hpp"
#include "hpinn/refsolver.hpp"

namespace hpinn {

struct TrainingConfig {
  double learning_rate = 1e-4;
  double loss_tolerance = 1e-5;
  int max_iterations = 200000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool warm_start = true;
  // sum: plain sums of squared mismatches; mean: each term divided by its count
  LossNormalization normalization = LossNormalization::sum;

  void validate() const;
};

/// Full-batch Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, const TrainingConfig& config);
  void step(std::span<double> params, std::span<const double> gradient);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Known data u^n at the collocation points, plus the discontinuity mask and
/// Lax-Friedrichs speed frozen for the step.
struct TimeStepState {
  double t = 0.0;
  GridField data;
  weno::DiscontinuityMask mask;
  double lambda = 0.0;
};

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;  // time reached by the step
  int iterations = 0;
  LossBreakdown initial_loss;
  LossBreakdown final_loss;
  bool converged = false;
  std::size_t flagged = 0;
  double lambda = 0.0;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

struct StepResult {
  GridField prediction;  // u^{n+1} at the collocation points
  StepDiagnostics diagnostics;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int step, int iteration, double parameter_norm)
      : std::runtime_error(what), step_(step), iteration_(iteration), parameter_norm_(parameter_norm) {}
  int step() const noexcept { return step_; }
  int iteration() const noexcept { return iteration_; }
  double parameter_norm() const noexcept { return parameter_norm_; }

 private:
  int step_;
  int iteration_;
  double parameter_norm_;
};

/// Mask from the indicator on `data` (dilated; all zero when the hybrid
/// switch is off) and lambda = safety * max |f'(data)|.
TimeStepState prepare_step(const GridField& data, double t, const PdeSpec& pde,
                           const DiscretizationConfig& disc);

/// Trains `params` in place until the loss drops below the tolerance or the
/// iteration cap is hit.
StepResult train_step(const TimeStepState& state, nn::NetworkParameters& params,
                      const irk::ButcherTableau& tableau, const PdeSpec& pde,
                      const DiscretizationConfig& disc, const TrainingConfig& training,
                      int step_index = 0,
                      const std::function<void(int, const LossBreakdown&)>& progress = {});

struct ErrorSample {
  double t = 0.0;
  double relative_error = 0.0;
};

struct MarchResult {
  std::vector<ref::Snapshot> trajectory;  // u^0, u^1, ... at the collocation points
  std::vector<StepDiagnostics> steps;
  std::vector<ErrorSample> errors;
  nn::NetworkParameters final_parameters;
};

/// Collocation grid: n_points uniform points spanning the pde domain.
GridField collocation_grid(const PdeSpec& pde, const DiscretizationConfig& disc);

/// Time marching from the exact initial condition to t_final. Errors are
/// reported against every reference snapshot whose time is hit by a step.
MarchResult march(const PdeSpec& pde, const DiscretizationConfig& disc,
                  const nn::NetworkConfig& network, const TrainingConfig& training, double t_final,
                  std::span<const ref::Snapshot> references = {},
                  const std::function<void(const StepDiagnostics&)>& on_step = {});

}  // namespace hpinn
