#include <capmeas/capricep.hpp>
#include <capmeas/estimator.hpp>
#include <capmeas/fft.hpp>
#include <capmeas/simulator.hpp>
#include <capmeas/windowing.hpp>

#include <benchmark/benchmark.h>

using namespace capmeas;

namespace {

constexpr int kFs = 44100;

std::vector<double> noise(std::size_t n) { return make_noise({NoiseSpec::Kind::White, 1.0}, n, 1); }

void BM_ForwardReal(benchmark::State& state) {
    const auto x = noise(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fft::forward_real(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForwardReal)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity(benchmark::oNLogN);

void BM_GenerateUnit(benchmark::State& state) {
    const auto L = static_cast<std::size_t>(state.range(0));
    const auto shape = static_cast<TransitionShape>(state.range(1));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(gen_unit_capricep(++seed, default_effective_width(L, kFs), kFs, L, shape));
}
BENCHMARK(BM_GenerateUnit)
    ->ArgsProduct({{1 << 12, 1 << 14}, {static_cast<long>(TransitionShape::Erf), static_cast<long>(TransitionShape::Iir)}})
    ->Unit(benchmark::kMillisecond);

void BM_EstimateWithRepetitions(benchmark::State& state) {
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto s = build_periodic_test_signal({1, 2, 3}, N, 8, kFs);
    SimTarget t;
    t.noise.level = 1e-3;
    const auto y = apply_target(t, Signal(s.period.repeated(9), kFs));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_with_repetitions(s.period, y));
}
BENCHMARK(BM_EstimateWithRepetitions)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

void BM_EstimateSimultaneous(benchmark::State& state) {
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto s = build_periodic_test_signal({1, 2, 3}, N, 8, kFs);
    SimTarget t;
    t.eps3 = 0.01;
    const auto y = apply_target(t, Signal(s.period.repeated(9), kFs));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_simultaneous(s.period, y));
}
BENCHMARK(BM_EstimateSimultaneous)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

void BM_Safeguard(benchmark::State& state) {
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto X = dft(noise(N), N, kFs);
    for (auto _ : state) {
        const auto theta = safeguard_threshold(X, std::nullopt, SafeguardConfig{});
        benchmark::DoNotOptimize(safeguard(X, theta));
    }
}
BENCHMARK(BM_Safeguard)->Arg(1 << 15)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

void BM_Fold(benchmark::State& state) {
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto w = periodic_weighting(std::vector<double>{1.0, -0.5}, N, 2);
    const auto x = noise(2 * N);
    for (auto _ : state) benchmark::DoNotOptimize(fold_to_period(x, w));
}
BENCHMARK(BM_Fold)->Arg(1 << 15);

}  // namespace
BENCHMARK_MAIN();
