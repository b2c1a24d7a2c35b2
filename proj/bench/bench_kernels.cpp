// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>

#include "momfilter/kernels.hpp"

using namespace momfilter::kernels;

namespace {

std::vector<Complex> field(std::size_t n) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

template <bool Parallel>
void diff_axis_2d(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const Shape s{{m, m}};
  const auto in = field(s.size());
  std::vector<Complex> out(s.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      diff_axis_parallel(in, out, s, 0, 0.1, 4);
    else
      diff_axis_serial(in, out, s, 0, 0.1, 4);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}

template <bool Parallel>
void invert_1d(benchmark::State& state) {
  const auto modes = static_cast<std::size_t>(state.range(0));
  InversionPlan plan;
  plan.xi_shape = Shape{{modes}};
  plan.z_shape = Shape{{501}};
  std::vector<double> xi(modes), w(modes, 0.1), z(501);
  for (std::size_t k = 0; k < modes; ++k) xi[k] = 0.1 * (static_cast<double>(k) - static_cast<double>(modes / 2));
  for (std::size_t p = 0; p < z.size(); ++p) z[p] = -2.5 + 0.01 * static_cast<double>(p);
  plan.xi = {xi};
  plan.weights = {w};
  plan.z = {z};
  const auto rho = field(modes);
  std::vector<Complex> out(z.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      invert_parallel(plan, rho, out);
    else
      invert_serial(plan, rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void exp_update(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = field(n), src = field(n);
  auto y = field(n);
  for (auto _ : state) {
    if constexpr (Parallel)
      exp_update_parallel(f, src, y);
    else
      exp_update_serial(f, src, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void scan(benchmark::State& state) {
  const auto v = field(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const Scan s = Parallel ? scan_parallel(v) : scan_serial(v);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(diff_axis_2d<false>)->Arg(129)->Arg(257);
BENCHMARK(diff_axis_2d<true>)->Arg(129)->Arg(257);
BENCHMARK(invert_1d<false>)->Arg(129)->Arg(257);
BENCHMARK(invert_1d<true>)->Arg(129)->Arg(257);
BENCHMARK(exp_update<false>)->Arg(16641)->Arg(66049);
BENCHMARK(exp_update<true>)->Arg(16641)->Arg(66049);
BENCHMARK(scan<false>)->Arg(16641)->Arg(66049);
BENCHMARK(scan<true>)->Arg(16641)->Arg(66049);

BENCHMARK_MAIN();
