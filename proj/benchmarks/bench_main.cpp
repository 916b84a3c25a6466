#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "stratwave/branch.hpp"

using namespace stratwave;

namespace {

PhysicalParameters strat(double p0) {
  ProfileOptions opt;
  opt.assert_decreasing = true;
  StratificationProfile pr(p0, [](double p) { return 1.0 - 0.05 * p; },
                           [](double) { return 0.0; }, opt);
  return {9.81, 1.0, 3.0, pr};
}

const LaminarFlow& flow() {
  static LaminarFlow f = shoot_depth(strat(-5.0)).flow;
  return f;
}

}  // namespace

static void BM_Picard(benchmark::State& st) {
  const auto prm = strat(-5.0);
  LaminarOptions opt;
  opt.n_p = int(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(picard_solve(prm, flow().mu, opt).H.back());
}
BENCHMARK(BM_Picard)->Arg(256)->Arg(512)->Arg(1024);

static void BM_WronskianAtTop(benchmark::State& st) {
  const double th = largest_root_theta(flow(), 1.0).theta;
  for (auto _ : st) benchmark::DoNotOptimize(wronskian_at_top(flow(), 1.0, th));
}
BENCHMARK(BM_WronskianAtTop);

static void BM_BranchJacobian(benchmark::State& st) {
  BranchProblem bp(flow(), int(st.range(0)), 2 * int(st.range(0)));
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(bp.size());
  Eigen::VectorXd dl;
  for (auto _ : st) benchmark::DoNotOptimize(bp.jacobian(u, 0.8, &dl).nonZeros());
}
BENCHMARK(BM_BranchJacobian)->Arg(32)->Arg(64);

static void BM_BranchResidual(benchmark::State& st) {
  BranchProblem bp(flow(), int(st.range(0)), 2 * int(st.range(0)));
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(bp.size());
  for (auto _ : st) benchmark::DoNotOptimize(bp.residual(u, 0.8).norm());
}
BENCHMARK(BM_BranchResidual)->Arg(32)->Arg(64);
BENCHMARK_MAIN();
