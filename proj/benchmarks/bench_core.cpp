#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hpinn/hybrid.hpp"
#include "hpinn/irk.hpp"
#include "hpinn/network.hpp"
#include "hpinn/refsolver.hpp"
#include "hpinn/weno.hpp"

namespace {

using namespace hpinn;

GridField sine(std::size_t n) {
  GridField u = GridField::uniform(-1.0, 1.0, n);
  for (std::size_t j = 0; j < n; ++j) u[j] = -std::sin(std::numbers::pi * u.x(j));
  return u;
}

void BM_WenoDerivative(benchmark::State& state) {
  const GridField u = sine(static_cast<std::size_t>(state.range(0)));
  const auto pde = PdeSpec::burgers(0.0);
  const auto boundary = weno::Boundary::dirichlet(0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(weno::weno_derivative(u, pde.flux, 1.1, boundary));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WenoDerivative)->Arg(300)->Arg(1000);

void BM_DiscontinuityFlags(benchmark::State& state) {
  const GridField u = sine(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(weno::discontinuity_flags(u, {}, weno::Boundary::extrapolate()));
  }
}
BENCHMARK(BM_DiscontinuityFlags)->Arg(300);

void BM_BatchedForwardBackward(benchmark::State& state) {
  nn::NetworkConfig cfg;
  cfg.outputs = static_cast<int>(state.range(0)) + 1;
  const auto params = nn::init_xavier(cfg);
  const auto xs = GridField::uniform(-1.0, 1.0, 300).coordinates();
  nn::BatchedNetwork net;
  nn::StageJets adj;
  adj.resize(cfg.outputs, static_cast<Eigen::Index>(xs.size()));
  adj.value.setOnes();
  adj.dx.setOnes();
  adj.dxx.setOnes();
  std::vector<double> grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(params, xs));
    net.backward(adj, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_BatchedForwardBackward)->Arg(1)->Arg(10)->Arg(50);

void BM_LossGraph(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const bool flagged = state.range(1) != 0;
  const auto pde = PdeSpec::burgers(1e-4 / std::numbers::pi);
  DiscretizationConfig disc;
  disc.q = q;
  const auto tab = irk::gauss_legendre_tableau(q);
  const GridField data = sine(300);
  auto mask = weno::DiscontinuityMask::zeros(300);
  if (flagged) {
    for (int j = 140; j < 160; ++j) mask.flags[j] = 1;
  }
  LossGraph head(pde, disc, tab, data, mask, 1.1, 0.0, LossNormalization::mean);
  nn::NetworkConfig cfg;
  cfg.outputs = q + 1;
  nn::BatchedNetwork net;
  const auto& jets = net.forward(nn::init_xavier(cfg), data.coordinates());
  nn::StageJets adj;
  for (auto _ : state) {
    benchmark::DoNotOptimize(head.evaluate(jets));
    head.adjoints(adj);
  }
  state.counters["nodes"] = static_cast<double>(head.size());
}
BENCHMARK(BM_LossGraph)->Args({10, 0})->Args({10, 1})->Args({50, 1});

void BM_ReferenceStep(benchmark::State& state) {
  const GridField u = sine(1000);
  const auto pde = PdeSpec::burgers(0.0);
  const double dt = ref::stable_dt(u, pde, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(ref::tvd_rk3_step(u, dt, 0.0, pde, 0.4));
}
BENCHMARK(BM_ReferenceStep);

}  // namespace
BENCHMARK_MAIN();
