#include <benchmark/benchmark.h>

#include "tshrink/block_solver.hpp"
#include "tshrink/gibbs.hpp"
#include "tshrink/harness.hpp"
#include "tshrink/lasso.hpp"
#include "tshrink/special_functions.hpp"
#include "tshrink/vb.hpp"

using namespace tshrink;

namespace {

// Example 1a replication 0 with its CV-Lasso start, built once.
struct Problem {
  harness::ExperimentSpec spec = harness::experiment_spec("example1a");
  harness::Replicate rep = harness::generate(spec, 0);
  VectorXd init = harness::cv_lasso(rep.data).beta;
  Hyperparameters hyper = harness::experiment_hyperparameters(spec, rep.data.n(), rep.data.p(), spec.sigma);
  VariationalState state = vb::fit(rep.data, hyper, init).state;
};

const Problem& problem() {
  static const Problem p;
  return p;
}

void BM_Trigamma(benchmark::State& state) {
  double x = 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::trigamma(x));
    x += 1e-7;
  }
}
BENCHMARK(BM_Trigamma);

void BM_MeanSweep(benchmark::State& state) {
  const Problem& p = problem();
  const BlockSolver solver(p.rep.data, state.range(0));
  const VectorXd penalty = p.state.sigma * p.state.sigma * p.state.a.cwiseQuotient(p.state.b);
  VectorXd coef = p.state.mu;
  for (auto _ : state) {
    solver.sweep_mean(penalty, coef);
    benchmark::DoNotOptimize(coef.data());
  }
}
BENCHMARK(BM_MeanSweep)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_ShapeUpdates(benchmark::State& state) {
  const Problem& p = problem();
  for (auto _ : state) {
    double sum = 0.0;
    for (Index j = 0; j < p.rep.data.p(); ++j) sum += vb::update_shape(j, p.state, p.rep.data, p.hyper);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_ShapeUpdates)->Unit(benchmark::kMicrosecond);

void BM_VbFit(benchmark::State& state) {
  const Problem& p = problem();
  for (auto _ : state) benchmark::DoNotOptimize(vb::fit(p.rep.data, p.hyper, p.init).iterations);
}
BENCHMARK(BM_VbFit)->Unit(benchmark::kMillisecond);

void BM_GibbsSweep(benchmark::State& state) {
  const Problem& p = problem();
  Rng rng = make_rng(1, Stream::Gibbs);
  VectorXd beta = p.init;
  for (auto _ : state) {
    const VectorXd lambda = gibbs::sample_lambda(beta, p.hyper, rng);
    beta = gibbs::sample_beta_blocks(lambda, beta, p.rep.data, p.hyper, state.range(0), rng);
  }
}
BENCHMARK(BM_GibbsSweep)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
