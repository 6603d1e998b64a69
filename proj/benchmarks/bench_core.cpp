#include <benchmark/benchmark.h>

#include <memory>

#include "nfpc/montecarlo.hpp"
#include "nfpc/optimizer.hpp"
#include "nfpc/philox.hpp"
#include "nfpc/scenario.hpp"

using namespace nfpc;

namespace {

GridSpec grid(int dim, int cells, int steps = 100) {
    GridSpec g;
    g.dim = dim;
    g.half_width = 4.0;
    g.cells = cells;
    g.horizon = 1.0;
    g.steps = steps;
    return g;
}

ControlField random_control(const GridSpec& g, double bound) {
    auto omega = std::make_shared<const OmegaMask>(OmegaMask::box(g, {-1.0, -1.0}, {1.0, 1.0}));
    PhiloxStream rng(1, 0);
    std::vector<double> v(omega->count());
    for (auto& x : v) x = bound * rng.uniform();
    return ControlField(omega, bound, std::move(v));
}

ControlProblem finance(int cells) {
    ControlProblem pr;
    pr.grid = grid(1, cells);
    pr.omega = std::make_shared<const OmegaMask>(OmegaMask::box(pr.grid, {-1.0, -1.0}, {1.0, 1.0}));
    pr.op = std::make_shared<const ConvolutionOperator>(build_kernel(pr.grid, KernelParams{}));
    pr.bound = 2.0;
    FinanceParams fp;
    fp.alpha = 0.1;
    auto [model, cost] = finance_preset(fp);
    pr.model = std::move(model);
    pr.cost = std::move(cost);
    InitialDensityParams d;
    d.components = {GaussianComponent{1.0, {0.0, 0.0}, 0.04}};
    pr.rho0 = make_initial_density(pr.grid, d);
    return pr;
}

void apply_s(benchmark::State& state, int dim, ConvolutionMethod method) {
    const GridSpec g = grid(dim, static_cast<int>(state.range(0)));
    const Kernel k = build_kernel(g, KernelParams{});
    const ControlField u = random_control(g, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(apply_S(k, u, method));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.cell_count()));
}

void BM_ApplyS_FFT_1d(benchmark::State& s) { apply_s(s, 1, ConvolutionMethod::fft); }
void BM_ApplyS_Direct_1d(benchmark::State& s) { apply_s(s, 1, ConvolutionMethod::direct); }
void BM_ApplyS_FFT_2d(benchmark::State& s) { apply_s(s, 2, ConvolutionMethod::fft); }

void BM_SolveForward(benchmark::State& state) {
    const ControlProblem pr = finance(static_cast<int>(state.range(0)));
    const ControlField u = random_control(pr.grid, pr.bound);
    for (auto _ : state) benchmark::DoNotOptimize(solve_forward(u, *pr.op, pr.model, pr.rho0));
}

void BM_SolveAdjoint(benchmark::State& state) {
    const ControlProblem pr = finance(static_cast<int>(state.range(0)));
    const ScalarField su = pr.op->apply(random_control(pr.grid, pr.bound));
    for (auto _ : state) benchmark::DoNotOptimize(solve_adjoint(su, pr.model, pr.cost));
}

void BM_SimulatePaths(benchmark::State& state) {
    const ControlProblem pr = finance(256);
    const ScalarField su = pr.op->apply(random_control(pr.grid, pr.bound));
    McConfig c;
    c.paths = static_cast<std::size_t>(state.range(0));
    c.dt = 1e-3;
    c.threads = static_cast<unsigned>(state.range(1));
    c.checkpoints = {0.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(su, pr.model, pr.rho0, c));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ApplyS_FFT_1d)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_ApplyS_Direct_1d)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_ApplyS_FFT_2d)->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_SolveForward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveAdjoint)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulatePaths)->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
