// Serial reference vs OpenMP path for the hot kernels. Arg 0 = serial,
// 1 = parallel; the thread count follows OMP_NUM_THREADS.

#include "bilrip/bilinear_ops.hpp"
#include "bilrip/recovery.hpp"
#include "bilrip/rnmp.hpp"
#include "bilrip/sensing.hpp"

#include <benchmark/benchmark.h>

using namespace bilrip;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_Convolve(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(1));
    Rng rng(1);
    std::normal_distribution<double> g;
    Vector s(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) s[i] = g(rng), h[i] = g(rng);
    for (auto _ : state) benchmark::DoNotOptimize(convolve(s, h, exec_of(state)));
    label(state);
}
BENCHMARK(BM_Convolve)->ArgsProduct({{0, 1}, {256, 2048}})->Unit(benchmark::kMicrosecond);

void BM_Brute(benchmark::State& state) {
    const auto map = BilinearMapSpec::circular_convolution(64);
    const ConeSpec cx{Support(64, {0, 5, 9, 30}), ConeKind::subspace};
    const ConeSpec cy{Support(64, {1, 2, 40}), ConeKind::positive_orthant};
    for (auto _ : state) benchmark::DoNotOptimize(estimate_brute(map, cx, cy, 100000, 3, exec_of(state)));
    label(state);
}
BENCHMARK(BM_Brute)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
    const MeasurementEnsemble e{EnsembleKind::gaussian, 256, 1024, 4};
    for (auto _ : state) benchmark::DoNotOptimize(generate(e, exec_of(state)));
    label(state);
}
BENCHMARK(BM_Generate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RipMonteCarlo(benchmark::State& state) {
    const auto map = BilinearMapSpec::circular_convolution(64);
    const ConeSpec c{Support(64, {0, 3, 17, 40}), ConeKind::positive_orthant};
    const Matrix phi = generate({EnsembleKind::gaussian, 32, 64, 5});
    RipMonteCarloOptions opt;
    opt.n_samples = 5000;
    opt.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(rip_monte_carlo(map, c, c, phi, opt));
    label(state);
}
BENCHMARK(BM_RipMonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Concentration(benchmark::State& state) {
    Vector r = Vector::Zero(512);
    r[3] = 1.0;
    r[100] = -2.0;
    const MeasurementEnsemble e{EnsembleKind::gaussian, 500, 512, 6};
    for (auto _ : state) benchmark::DoNotOptimize(concentration_test(r, e, 2000, 0.5, exec_of(state)));
    label(state);
}
BENCHMARK(BM_Concentration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PhaseTransition(benchmark::State& state) {
    PhaseTransitionConfig cfg;
    cfg.n = 64;
    cfg.m_grid = {16, 32};
    cfg.trials = 8;
    cfg.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(phase_transition(cfg));
    label(state);
}
BENCHMARK(BM_PhaseTransition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
