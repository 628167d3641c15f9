#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hpinn/network.hpp"
#include "oracles.hpp"

using namespace hpinn;

TEST_SUITE("network") {

TEST_CASE("xavier bounds and zero biases") {
  nn::NetworkConfig cfg;
  cfg.outputs = 11;
  const auto params = nn::init_xavier(cfg);
  const auto layers = params.layers();
  REQUIRE(layers.size() == 6);
  const double first = std::sqrt(6.0 / 21.0);
  CHECK(first == doctest::Approx(0.5345).epsilon(1e-4));
  CHECK(layers[0].weight.cwiseAbs().maxCoeff() <= first);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layers[l].weight.rows() + layers[l].weight.cols()));
    CHECK(layers[l].weight.cwiseAbs().maxCoeff() <= bound);
    // the draw actually spreads over the interval
    CHECK(layers[l].weight.cwiseAbs().maxCoeff() > 0.8 * bound);
  }
  for (const auto& layer : layers) CHECK(layer.bias.isZero(0.0));
}

TEST_CASE("initialization is deterministic in the seed") {
  nn::NetworkConfig cfg;
  const auto a = nn::init_xavier(cfg);
  const auto b = nn::init_xavier(cfg);
  CHECK(a == b);
  cfg.seed += 1;
  CHECK_FALSE(a == nn::init_xavier(cfg));
}

TEST_CASE("parameter count") {
  nn::NetworkConfig cfg;
  cfg.outputs = 11;
  CHECK(nn::init_xavier(cfg).size() == 1951);
  CHECK(nn::init_xavier(cfg).flatten().size() == 1951);
}

TEST_CASE("invalid configs are rejected") {
  nn::NetworkConfig cfg;
  cfg.hidden_layers = 0;
  CHECK_THROWS_AS(nn::init_xavier(cfg), std::invalid_argument);
  cfg = {};
  cfg.outputs = 1;
  CHECK_THROWS_AS(nn::init_xavier(cfg), std::invalid_argument);
  auto params = nn::init_xavier({});
  CHECK_THROWS_AS(params.assign(std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("output length is q+1") {
  nn::NetworkConfig cfg;
  cfg.outputs = 5;
  const auto params = nn::init_xavier(cfg);
  ad::Graph g;
  const auto bound = nn::bind_parameters(g, params);
  CHECK(nn::forward_values(g, bound, g.input(0.1)).size() == 5);
}

TEST_CASE("zero head gives zero outputs") {
  auto params = oracle::random_network(4, 3);
  params.layers().back().weight.setZero();
  params.layers().back().bias.setZero();
  nn::BatchedNetwork net;
  const std::vector<double> xs{-1.0, -0.2, 0.7, 1.0};
  const auto& jets = net.forward(params, xs);
  CHECK(jets.value.isZero(0.0));
  CHECK(jets.dx.isZero(0.0));
  CHECK(jets.dxx.isZero(0.0));
}

TEST_CASE("graph forward at x=0.3 matches matrix oracle") {
  const auto params = oracle::random_network(6, 17);
  ad::Graph g;
  const auto bound = nn::bind_parameters(g, params);
  const auto out = nn::forward_values(g, bound, g.input(0.3));
  const auto ref = oracle::mlp_forward(params, 0.3);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(out[k].value() - ref[k]) < 1e-12);
}

TEST_CASE("hidden activations stay in [-1, 1] for huge inputs") {
  const auto params = oracle::random_network(3, 8);
  for (double x : {-1e6, 1e6}) {
    ad::Graph g;
    const auto bound = nn::bind_parameters(g, params);
    const auto stages = nn::forward_stages(g, bound, g.input(x));
    for (const auto& s : stages) {
      CHECK(std::isfinite(s.value.value()));
      CHECK(std::isfinite(s.dxx.value()));
    }
  }
}

TEST_CASE("batched route matches the graph route") {
  const auto params = oracle::random_network(4, 23, 5, 20, 0.4);
  const std::vector<double> xs{-1.0, -0.45, 0.0, 0.3, 0.95};
  nn::BatchedNetwork net;
  const auto& jets = net.forward(params, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ad::Graph g;
    const auto bound = nn::bind_parameters(g, params);
    const auto stages = nn::forward_stages(g, bound, g.input(xs[i]));
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      const auto ii = static_cast<Eigen::Index>(i);
      CHECK(std::abs(jets.value(si, ii) - stages[s].value.value()) < 1e-12);
      CHECK(std::abs(jets.dx(si, ii) - stages[s].dx.value()) < 1e-11);
      CHECK(std::abs(jets.dxx(si, ii) - stages[s].dxx.value()) < 1e-10);
    }
  }
}

TEST_CASE("batched backward matches the graph gradient") {
  const auto params = oracle::random_network(3, 29, 3, 8, 0.7);
  const std::vector<double> xs{-0.8, -0.1, 0.4, 0.9};
  // arbitrary fixed adjoints on value, dx and dxx
  nn::StageJets adj;
  adj.resize(3, 4);
  for (Eigen::Index s = 0; s < 3; ++s) {
    for (Eigen::Index i = 0; i < 4; ++i) {
      adj.value(s, i) = 0.3 * s - 0.2 * i + 0.1;
      adj.dx(s, i) = std::sin(1.0 + s + 2.0 * i);
      adj.dxx(s, i) = std::cos(3.0 * s - i);
    }
  }
  nn::BatchedNetwork net;
  net.forward(params, xs);
  std::vector<double> grad;
  net.backward(adj, grad);

  ad::Graph g;
  const auto bound = nn::bind_parameters(g, params);
  std::vector<double> coeffs;
  std::vector<ad::Var> terms;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto stages = nn::forward_stages(g, bound, g.input(xs[i]));
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      const auto ii = static_cast<Eigen::Index>(i);
      coeffs.insert(coeffs.end(), {adj.value(si, ii), adj.dx(si, ii), adj.dxx(si, ii)});
      terms.insert(terms.end(), {stages[s].value, stages[s].dx, stages[s].dxx});
    }
  }
  const auto ref = g.parameter_gradient(g.linear_combination(coeffs, terms));
  REQUIRE(ref.size() == grad.size());
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(grad[k] - ref[k]) < 1e-11 * (1 + std::abs(ref[k])));
}

TEST_CASE("backward before forward is an error") {
  nn::BatchedNetwork net;
  nn::StageJets adj;
  std::vector<double> grad;
  CHECK_THROWS_AS(net.backward(adj, grad), std::logic_error);
}

TEST_CASE("checkpoint round-trips bitwise") {
  const auto params = oracle::random_network(11, 41);
  const auto path = std::filesystem::temp_directory_path() / "hpinn_test_checkpoint.txt";
  nn::save_checkpoint(path, params);
  const auto loaded = nn::load_checkpoint(path);
  CHECK(loaded == params);
  CHECK(loaded.flatten() == params.flatten());

  std::ofstream(path) << "not a checkpoint\n";
  CHECK_THROWS(nn::load_checkpoint(path));
  std::filesystem::remove(path);
  CHECK_THROWS(nn::load_checkpoint(path));
}

}
