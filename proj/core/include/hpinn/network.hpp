#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hpinn/autodiff.hpp"

namespace hpinn::nn {

struct NetworkConfig {
  int hidden_layers = 5;
  int width = 20;
  int outputs = 2;  // q + 1
  std::uint64_t seed = 1234;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_out x fan_in
  Eigen::VectorXd bias;    // fan_out
};

/// Weights and biases of the tanh MLP mapping x to the q+1 stage values.
/// Flat ordering (used by optimizers and gradients): layer by layer, the
/// weight matrix row-major followed by the bias.
class NetworkParameters {
 public:
  NetworkParameters() = default;
  explicit NetworkParameters(std::vector<DenseLayer> layers);

  std::span<const DenseLayer> layers() const { return layers_; }
  std::span<DenseLayer> layers() { return layers_; }

  int inputs() const { return static_cast<int>(layers_.front().weight.cols()); }
  int outputs() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::size_t size() const;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const NetworkParameters& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Glorot-uniform weights with bound sqrt(6 / (fan_in + fan_out)), zero
/// biases; deterministic in config.seed.
NetworkParameters init_xavier(const NetworkConfig& config);

/// Parameter leaves registered in a graph, same order as flatten().
struct BoundParameters {
  struct Layer {
    int rows = 0;
    int cols = 0;
    std::vector<ad::Var> weight;  // row-major
    std::vector<ad::Var> bias;
  };
  std::vector<Layer> layers;
};

BoundParameters bind_parameters(ad::Graph& graph, const NetworkParameters& params);

/// Graph route: stage outputs at a single input node, each with its first
/// and second x-derivative as graph nodes. Hidden layers tanh, output linear.
std::vector<ad::NodeBundle> forward_stages(ad::Graph& graph, const BoundParameters& params,
                                           ad::Var x);

/// Value-only graph route.
std::vector<ad::Var> forward_values(ad::Graph& graph, const BoundParameters& params, ad::Var x);

/// outputs x points matrices for u, u_x and u_xx.
struct StageJets {
  Eigen::MatrixXd value;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dxx;

  void resize(Eigen::Index outputs, Eigen::Index points);
  void set_zero();
};

/// Batched route: propagates (u, u_x, u_xx) through every layer for a whole
/// set of points at once, caches the intermediates, and runs the matching
/// reverse pass. forward() must precede backward().
class BatchedNetwork {
 public:
  const StageJets& forward(const NetworkParameters& params, std::span<const double> xs);

  /// Accumulates nothing; overwrites `gradient` (flat ordering) with the
  /// vector-Jacobian product of the adjoints of the last forward outputs.
  void backward(const StageJets& adjoints, std::vector<double>& gradient) const;

  const StageJets& outputs() const { return out_; }

 private:
  // Column blocks [value | d/dx | d2/dx2], each `points_` wide, so one GEMM
  // per layer covers all three.
  struct LayerCache {
    Eigen::MatrixXd input;  // fan_in x 3N
    Eigen::MatrixXd pre;    // fan_out x 3N pre-activation
    Eigen::ArrayXXd s, s1, s2;  // tanh(z) and its first two derivatives
  };
  const NetworkParameters* params_ = nullptr;
  Eigen::Index points_ = 0;
  std::vector<LayerCache> cache_;
  StageJets out_;
};

/// Text checkpoint: layer shapes then hexadecimal floating-point values;
/// round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const NetworkParameters& params);
NetworkParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace hpinn::nn
