#include "hpinn/network.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hpinn::nn {

namespace {
// Vectorized tanh; Eigen's double tanh is scalar and dominated training time.
// Absolute error is a few ulp of 1.
Eigen::ArrayXXd fast_tanh(const Eigen::ArrayXXd& z) {
  const Eigen::ArrayXXd e = (-2.0 * z.abs()).exp();
  const Eigen::ArrayXXd t = (1.0 - e) / (1.0 + e);
  return (z < 0.0).select(-t, t);
}
}  // namespace

void NetworkConfig::validate() const {
  if (hidden_layers < 1) throw std::invalid_argument("network.layers must be >= 1");
  if (width < 1) throw std::invalid_argument("network.width must be >= 1");
  if (outputs < 2) throw std::invalid_argument("network outputs (q+1) must be >= 2");
}

NetworkParameters::NetworkParameters(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": bias/weight shape mismatch");
    }
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": fan_in mismatch");
    }
  }
}

std::size_t NetworkParameters::size() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

std::vector<double> NetworkParameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat.push_back(layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat.push_back(layer.bias(r));
  }
  return flat;
}

void NetworkParameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw std::invalid_argument("assign: parameter count mismatch");
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = flat[k++];
  }
}

bool NetworkParameters::operator==(const NetworkParameters& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

NetworkParameters init_xavier(const NetworkConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::vector<DenseLayer> layers;
  int fan_in = 1;
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const int fan_out = l == config.hidden_layers ? config.outputs : config.width;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return NetworkParameters(std::move(layers));
}

BoundParameters bind_parameters(ad::Graph& graph, const NetworkParameters& params) {
  BoundParameters bound;
  for (const auto& layer : params.layers()) {
    BoundParameters::Layer b;
    b.rows = static_cast<int>(layer.weight.rows());
    b.cols = static_cast<int>(layer.weight.cols());
    for (int r = 0; r < b.rows; ++r)
      for (int c = 0; c < b.cols; ++c) b.weight.push_back(graph.parameter(layer.weight(r, c)));
    for (int r = 0; r < b.rows; ++r) b.bias.push_back(graph.parameter(layer.bias(r)));
    bound.layers.push_back(std::move(b));
  }
  return bound;
}

namespace {

template <class Act, class Tanh>
std::vector<Act> forward_generic(const BoundParameters& params, Act input, Tanh activation) {
  std::vector<Act> current{input};
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const bool hidden = l + 1 < params.layers.size();
    std::vector<Act> next;
    next.reserve(layer.rows);
    for (int r = 0; r < layer.rows; ++r) {
      Act z = current[0] * layer.weight[static_cast<std::size_t>(r) * layer.cols];
      for (int c = 1; c < layer.cols; ++c) {
        z = z + current[c] * layer.weight[static_cast<std::size_t>(r) * layer.cols + c];
      }
      z = z + layer.bias[r];
      next.push_back(hidden ? activation(z) : z);
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

std::vector<ad::NodeBundle> forward_stages(ad::Graph& graph, const BoundParameters& params,
                                           ad::Var x) {
  return ad::input_derivatives(graph, x, [&](const ad::NodeBundle& seed) {
    return forward_generic<ad::NodeBundle>(params, seed,
                                           [](const ad::NodeBundle& z) { return ad::tanh(z); });
  });
}

std::vector<ad::Var> forward_values(ad::Graph& /*graph*/, const BoundParameters& params, ad::Var x) {
  return forward_generic<ad::Var>(params, x, [](ad::Var z) { return ad::tanh(z); });
}

void StageJets::resize(Eigen::Index outputs, Eigen::Index points) {
  value.resize(outputs, points);
  dx.resize(outputs, points);
  dxx.resize(outputs, points);
}

void StageJets::set_zero() {
  value.setZero();
  dx.setZero();
  dxx.setZero();
}

const StageJets& BatchedNetwork::forward(const NetworkParameters& params,
                                         std::span<const double> xs) {
  params_ = &params;
  const auto layers = params.layers();
  const auto n = static_cast<Eigen::Index>(xs.size());
  points_ = n;
  cache_.resize(layers.size());

  Eigen::MatrixXd input(1, 3 * n);
  input.leftCols(n) = Eigen::Map<const Eigen::RowVectorXd>(xs.data(), n);
  input.middleCols(n, n).setOnes();
  input.rightCols(n).setZero();

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    LayerCache& c = cache_[l];
    c.input = std::move(input);
    c.pre.noalias() = layer.weight * c.input;
    c.pre.leftCols(n).colwise() += layer.bias;

    if (l + 1 == layers.size()) {
      out_.value = c.pre.leftCols(n);
      out_.dx = c.pre.middleCols(n, n);
      out_.dxx = c.pre.rightCols(n);
      break;
    }
    const auto zx = c.pre.middleCols(n, n).array();
    const auto zxx = c.pre.rightCols(n).array();
    c.s = fast_tanh(c.pre.leftCols(n).array());
    c.s1 = 1.0 - c.s.square();
    c.s2 = -2.0 * c.s * c.s1;
    input.resize(c.pre.rows(), 3 * n);
    input.leftCols(n) = c.s.matrix();
    input.middleCols(n, n) = (c.s1 * zx).matrix();
    input.rightCols(n) = (c.s1 * zxx + c.s2 * zx.square()).matrix();
  }
  return out_;
}

void BatchedNetwork::backward(const StageJets& adjoints, std::vector<double>& gradient) const {
  if (params_ == nullptr) throw std::logic_error("BatchedNetwork::backward before forward");
  const auto layers = params_->layers();
  const Eigen::Index n = points_;
  gradient.assign(params_->size(), 0.0);

  // Offsets of each layer's block in the flat ordering.
  std::vector<std::size_t> offset(layers.size(), 0);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    offset[l] = offset[l - 1] + layers[l - 1].weight.size() + layers[l - 1].bias.size();
  }

  Eigen::MatrixXd g(adjoints.value.rows(), 3 * n);
  g.leftCols(n) = adjoints.value;
  g.middleCols(n, n) = adjoints.dx;
  g.rightCols(n) = adjoints.dxx;

  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const LayerCache& c = cache_[l];

    const Eigen::MatrixXd gw = g * c.input.transpose();
    const Eigen::VectorXd gb = g.leftCols(n).rowwise().sum();
    std::size_t k = offset[l];
    for (Eigen::Index r = 0; r < gw.rows(); ++r)
      for (Eigen::Index col = 0; col < gw.cols(); ++col) gradient[k++] = gw(r, col);
    for (Eigen::Index r = 0; r < gb.size(); ++r) gradient[k++] = gb(r);

    if (l == 0) break;

    // Back through tanh of the previous layer:
    //   a = s(z), a_x = s'(z) z_x, a_xx = s'(z) z_xx + s''(z) z_x^2.
    const LayerCache& p = cache_[l - 1];
    const Eigen::MatrixXd ga_all = layer.weight.transpose() * g;
    const auto ga = ga_all.leftCols(n).array();
    const auto gax = ga_all.middleCols(n, n).array();
    const auto gaxx = ga_all.rightCols(n).array();
    const auto zx = p.pre.middleCols(n, n).array();
    const auto zxx = p.pre.rightCols(n).array();
    const Eigen::ArrayXXd s3 = -2.0 * (p.s1.square() + p.s * p.s2);

    g.resize(ga_all.rows(), 3 * n);
    g.leftCols(n) = (ga * p.s1 + gax * zx * p.s2 + gaxx * (zxx * p.s2 + zx.square() * s3)).matrix();
    g.middleCols(n, n) = (gax * p.s1 + 2.0 * gaxx * p.s2 * zx).matrix();
    g.rightCols(n) = (gaxx * p.s1).matrix();
  }
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParameters& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << "hpinn-checkpoint 1\n" << params.layers().size() << '\n';
  out << std::hexfloat;
  for (const auto& layer : params.layers()) {
    out << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out << layer.weight(r, c) << ' ';
      out << '\n';
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << layer.bias(r) << ' ';
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

NetworkParameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  in >> magic >> version >> count;
  if (magic != "hpinn-checkpoint" || version != 1) {
    throw std::runtime_error("not an hpinn checkpoint: " + path.string());
  }
  // libstdc++ streams cannot parse hexfloat, so read tokens and use strtod.
  const auto next = [&in, &path]() {
    std::string token;
    if (!(in >> token)) throw std::runtime_error("truncated checkpoint " + path.string());
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      throw std::runtime_error("bad number '" + token + "' in " + path.string());
    }
    return v;
  };
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l < count; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    in >> rows >> cols;
    if (!in || rows <= 0 || cols <= 0) throw std::runtime_error("bad layer shape in " + path.string());
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = next();
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = next();
    layers.push_back(std::move(layer));
  }
  return NetworkParameters(std::move(layers));
}

}  // namespace hpinn::nn
