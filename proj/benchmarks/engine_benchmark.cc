#include <random>

#include <benchmark/benchmark.h>

#include "incidence/engine.h"
#include "incidence/margins.h"

namespace {

using incidence::IOAccounts;
using incidence::Matrix;
using incidence::Vector;

// Dense balanced accounts with intermediate share <= 0.9 per row; the first
// `margins` activities carry margin shares.
IOAccounts Synthetic(int n, int margins, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto k = static_cast<Eigen::Index>(incidence::kNumComponents);
  IOAccounts a;
  for (int i = 0; i < n; ++i) {
    a.activities.push_back({static_cast<std::size_t>(i),
                            "S" + std::to_string(i), "", i < margins});
  }
  a.flows = Matrix::Zero(n, n);
  a.finaldemand = Matrix::Zero(n, k);
  a.taxdest.dest = Matrix::Zero(n, n + k);
  for (int i = 0; i < n; ++i) {
    const double supply = 1000.0 + 9000.0 * u(rng);
    const double share = 0.9 * u(rng);
    Vector w = Vector::NullaryExpr(n, [&] { return 0.05 + u(rng); });
    a.flows.row(i) = (share * supply / w.sum()) * w.transpose();
    Vector f = Vector::NullaryExpr(k, [&] { return 0.05 + u(rng); });
    a.finaldemand.row(i) = ((1.0 - share) * supply / f.sum()) * f.transpose();
    for (Eigen::Index d = 0; d < n + k; ++d) a.taxdest.dest(i, d) = 50.0 * u(rng);
  }
  a.supply = a.flows.rowwise().sum() + a.finaldemand.rowwise().sum();
  a.taxdest.statutory = a.taxdest.dest.rowwise().sum();
  a.marginshares = Vector::Zero(n);
  for (int m = 0; m < margins; ++m) a.marginshares(m) = 0.1 + 0.8 * u(rng);
  return a;
}

void BM_ClosedForm(benchmark::State& state) {
  const auto sys = incidence::BuildSystem(Synthetic(static_cast<int>(state.range(0)), 0, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(incidence::PropagateClosedForm(sys));
  }
}
BENCHMARK(BM_ClosedForm)->Arg(10)->Arg(67)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_Truncated(benchmark::State& state) {
  const auto sys = incidence::BuildSystem(Synthetic(static_cast<int>(state.range(0)), 0, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(incidence::PropagateTruncated(sys, 1e-12, 100000));
  }
}
BENCHMARK(BM_Truncated)->Arg(10)->Arg(67)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_BuildSystem(benchmark::State& state) {
  const IOAccounts acc = Synthetic(static_cast<int>(state.range(0)), 0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(incidence::BuildSystem(acc));
}
BENCHMARK(BM_BuildSystem)->Arg(67)->Unit(benchmark::kMicrosecond);

void BM_RedistributeMargins(benchmark::State& state) {
  const IOAccounts acc = Synthetic(static_cast<int>(state.range(0)), 3, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(incidence::RedistributeMargins(acc));
  }
}
BENCHMARK(BM_RedistributeMargins)->Arg(67)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
