#include <benchmark/benchmark.h>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"
#include "vqls/gradient.hpp"
#include "vqls/problem.hpp"
#include "vqls/rng.hpp"
#include "vqls/simulator.hpp"

namespace {

using namespace vqls;

void BM_SingleQubitGate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Statevector s = zero_state(n);
    const Gate g = Gate::ry(n / 2, 0.3);
    for (auto _ : state) {
        apply_gate(s, g);
        benchmark::DoNotOptimize(s.amplitudes().data());
    }
    state.SetItemsProcessed(state.iterations() * (int64_t{1} << n));
}
BENCHMARK(BM_SingleQubitGate)->Arg(8)->Arg(12)->Arg(14);

void BM_HeaCircuitRun(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Ansatz a = build_hea(n, 4);
    Rng rng(1);
    std::vector<double> alpha(a.num_parameters());
    for (double& v : alpha) v = rng.uniform(-3.1, 3.1);
    const Circuit c = a.bind(alpha);
    const Statevector in = zero_state(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_circuit(c, in));
    }
}
BENCHMARK(BM_HeaCircuitRun)->Arg(6)->Arg(10);

void BM_LocalCostEvaluation(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const QlspInstance inst = ising_qlsp(n, 0.1, 20.0);
    const Ansatz a = build_hea(n, 4);
    Rng rng(2);
    std::vector<double> alpha(a.num_parameters());
    for (double& v : alpha) v = rng.uniform(-3.1, 3.1);
    const Circuit c = a.bind(alpha);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_cost(inst, c, CostKind::Local));
    }
}
BENCHMARK(BM_LocalCostEvaluation)->Arg(4)->Arg(6)->Arg(8);

void BM_AnalyticGradient(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const QlspInstance inst = ising_qlsp(n, 0.1, 20.0);
    const Ansatz a = build_hea(n, 2);
    Rng rng(3);
    std::vector<double> alpha(a.num_parameters());
    for (double& v : alpha) v = rng.uniform(-3.1, 3.1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            analytic_gradient(inst, a, alpha, CostKind::Local));
    }
}
BENCHMARK(BM_AnalyticGradient)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
