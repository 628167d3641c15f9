#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpinn/hybrid.hpp"
#include "hpinn/network.hpp"
#include "hpinn/trainer.hpp"

namespace hpinn {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceConfig {
  int n_cells = 1000;
  double cfl = 0.4;
};

struct OutputConfig {
  std::vector<double> profile_times{0.2, 1.0};
  std::vector<double> error_times;
  std::filesystem::path dir = "out";
  bool include_baseline = false;
};

struct SweepConfig {
  std::vector<int> q{1, 4, 10, 50};
  std::vector<double> dt{0.1, 0.3, 0.6};
  std::vector<double> nu;  // defaults to {1e-4/pi, 0}
  double t_final = 0.6;

  SweepConfig();
};

/// Everything needed to reproduce one experiment. Loaded from JSON:
///
///   {
///     "pde": {"flux": "burgers", "viscosity": 3.183e-5, "domain": [-1, 1],
///             "boundary": [0, 0], "initial_condition": "neg_sin_pi_x", "source": "none"},
///     "discretization": {"n_points": 300, "dt": 0.1, "q_stages": 10, "hybrid": true,
///                        "mask_dilation": 3, "recompute_mask": false,
///                        "indicator_field": "solution", "lambda_safety": 1.1,
///                        "indicator": {"eps": 1e-40, "delta": 1e-4, "p": 6, "c_t": 5e-4}},
///     "network": {"layers": 5, "width": 20, "seed": 1234},
///     "training": {"lr": 1e-4, "tolerance": 1e-5, "max_iters": 200000,
///                  "warm_start": true, "loss_normalization": "sum"},
///     "reference": {"n_cells": 1000, "cfl": 0.4},
///     "outputs": {"profile_times": [0.2, 1.0], "error_times": [0.6], "dir": "out",
///                 "include_baseline": false},
///     "sweep": {"q": [1, 4, 10, 50], "dt": [0.1, 0.3, 0.6], "nu": [3.183e-5, 0], "t_final": 0.6}
///   }
///
/// Every key is optional; omitted keys take the defaults shown.
struct ExperimentConfig {
  std::string flux = "burgers";
  double flux_speed = 1.0;
  double viscosity = 0.0;
  double x_left = -1.0;
  double x_right = 1.0;
  double u_left = 0.0;
  double u_right = 0.0;
  std::string initial_condition = "neg_sin_pi_x";
  std::string source = "none";

  DiscretizationConfig discretization;
  nn::NetworkConfig network;
  TrainingConfig training;
  ReferenceConfig reference;
  OutputConfig outputs;
  SweepConfig sweep;

  PdeSpec pde() const;
  /// Latest profile or error time.
  double t_final() const;
  void validate() const;

  static ExperimentConfig parse(const std::string& json_text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Resolved config with every default filled in.
  std::string to_json() const;
};

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<ErrorSample> errors;
  std::vector<ErrorSample> baseline_errors;
  std::vector<StepDiagnostics> steps;
  std::vector<StepDiagnostics> baseline_steps;
};

using LogSink = std::function<void(const std::string&)>;

/// Reference snapshots at every profile/error time on the reference grid.
std::vector<ref::Snapshot> reference_snapshots(const ExperimentConfig& config);

/// Writes reference_t<t>.csv (x,u) for every profile time.
RunSummary run_reference(const ExperimentConfig& config, const LogSink& log = {});

/// Hybrid march plus reference: profile_t<t>.csv (x,u_hpinn[,u_pinn_baseline],u_ref),
/// errors.csv and diagnostics.jsonl.
RunSummary run_experiment(const ExperimentConfig& config, const LogSink& log = {});

/// Same pipeline with the indicator disabled (original discrete-time PINN):
/// baseline_profile_t<t>.csv (x,u_pinn_baseline,u_ref), baseline_errors.csv,
/// baseline_diagnostics.jsonl.
RunSummary run_baseline(const ExperimentConfig& config, const LogSink& log = {});

struct SweepRow {
  int q = 0;
  double dt = 0.0;
  double nu = 0.0;
  double rel_error = 0.0;
  long iterations = 0;
  bool converged = false;
  std::string error;
};

/// One hybrid march per (q, dt, nu) cell to sweep.t_final, cells run on up
/// to `jobs` threads. Writes sweep.csv with
/// q,dt,nu,rel_error,iterations,converged,error.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int jobs = 1,
                                const LogSink& log = {});

/// Seed for a sweep cell, a pure function of its inputs.
std::uint64_t cell_seed(std::uint64_t base, int q, double dt, double nu);

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip decimal form, used in file names and CSV cells.
std::string format_number(double value);

}  // namespace hpinn
