// Serial reference kernels against their OpenMP versions, plus end-to-end
// propagation costs. Thread count follows OMP_NUM_THREADS.

#include "dicke/dynamics.hpp"
#include "dicke/kernels.hpp"
#include "dicke/spectral.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dicke;

namespace {

ModelParams model(int n) { return params_from_lab_units(n, 0.935, -1.0, 7.0); }

QuantumState random_state(std::size_t dim) {
    std::mt19937 rng(1);
    std::normal_distribution<double> nd;
    QuantumState v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = {nd(rng), nd(rng)};
    return v.normalized();
}

template <bool Parallel>
void BM_Apply(benchmark::State& state) {
    const auto p = model(static_cast<int>(state.range(0)));
    const DickeKernel h(p, 0.4 * p.coupling_j());
    const auto in = random_state(p.dim());
    QuantumState out(in.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            h.apply(in, out);
        else
            h.apply_serial(in, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["dim"] = static_cast<double>(p.dim());
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(p.dim()));
}

template <bool Parallel>
void BM_ReducedDensity(benchmark::State& state) {
    const auto p = model(static_cast<int>(state.range(0)));
    const Basis basis(p);
    const auto psi = random_state(p.dim());
    for (auto _ : state) {
        auto rho = Parallel ? reduced_spin_density(psi, basis) : reduced_spin_density_serial(psi, basis);
        benchmark::DoNotOptimize(rho.data());
    }
}

void BM_KrylovHold(benchmark::State& state) {
    const auto p = model(static_cast<int>(state.range(0)));
    const DickeKernel h(p, 0.4 * p.coupling_j());
    const auto start = random_state(p.dim());
    int matvecs = 0;
    for (auto _ : state) {
        auto psi = start;
        matvecs = krylov_evolve(h, 0.1, psi).matvecs;
        benchmark::DoNotOptimize(psi.data());
    }
    state.counters["matvecs"] = matvecs;
}

template <EigenMethod M>
void BM_SectorGap(benchmark::State& state) {
    const auto p = model(static_cast<int>(state.range(0)));
    const DickeKernel h(p, 0.26 * p.coupling_j());
    EigensolverOptions eo;
    eo.method = M;
    for (auto _ : state) benchmark::DoNotOptimize(lowest_in_sector(h, +1, 2, eo));
    state.counters["dim"] = static_cast<double>(p.dim());
}

void BM_ThermalBangBang(benchmark::State& state) {
    auto p = params_from_lab_units(20, 0.935, -1.0, 7.0, 0.0, 0.0, 2.0);
    const auto ens = thermal_ensemble(p.nbar);
    PropagationOptions po;
    po.output_points = 11;
    po.compute_qfi = false;
    for (auto _ : state) {
        auto traj = propagate_thermal(ens, p, RampSchedule::bang_bang(0.4 * p.coupling_j(), 0.5), po);
        benchmark::DoNotOptimize(traj.records.data());
    }
    state.counters["members"] = static_cast<double>(ens.n.size());
}

} // namespace

BENCHMARK_TEMPLATE(BM_Apply, false)->Name("apply/serial")->Arg(20)->Arg(40)->Arg(80);
BENCHMARK_TEMPLATE(BM_Apply, true)->Name("apply/openmp")->Arg(20)->Arg(40)->Arg(80);
BENCHMARK_TEMPLATE(BM_ReducedDensity, false)->Name("reduced_density/serial")->Arg(40)->Arg(80);
BENCHMARK_TEMPLATE(BM_ReducedDensity, true)->Name("reduced_density/openmp")->Arg(40)->Arg(80);
BENCHMARK(BM_KrylovHold)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_SectorGap, EigenMethod::Lanczos)->Name("sector_gap/lanczos")->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_SectorGap, EigenMethod::ShiftInvert)->Name("sector_gap/shift_invert")->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThermalBangBang)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
