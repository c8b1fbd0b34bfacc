#include <benchmark/benchmark.h>
#include <omp.h>

#include "fracheat/covariance.hpp"
#include "fracheat/field.hpp"
#include "fracheat/potential.hpp"

using namespace fracheat;

namespace {

void threads_from(const benchmark::State& s) { omp_set_num_threads(s.range(0) == 0 ? 1 : omp_get_num_procs()); }

void BM_simulate(benchmark::State& s) {
    threads_from(s);
    SimConfig c;
    c.model = SpectrumModel::white(0.5);
    c.d = 2;
    c.n_modes = 64;
    c.n_x = 129;
    for (int j = 0; j < 17; ++j) c.t_grid.push_back(0.5 + j / 32.0);
    for (auto _ : s) benchmark::DoNotOptimize(simulate(c, 64));
}

void BM_gamma_batch(benchmark::State& s) {
    threads_from(s);
    SeriesOptions o;
    o.parallel = s.range(0) != 0;
    CovarianceEngine e(SpectrumModel::riesz(0.5, 0.5), o);
    std::vector<SpaceTime> p, q;
    for (int i = 0; i < 400; ++i) {
        p.push_back({1.0, 0.0});
        q.push_back({0.5 + i / 800.0, i * 0.007});
    }
    for (auto _ : s) benchmark::DoNotOptimize(e.gamma_sq_batch(p, q));
}

void BM_energy_matrix(benchmark::State& s) {
    threads_from(s);
    const auto c = segment_cloud(0, 1, 512);
    for (auto _ : s) benchmark::DoNotOptimize(energy_matrix(c, {0.5, 4}));
}

}  // namespace

// argument 0: serial reference, 1: all cores
BENCHMARK(BM_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gamma_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_energy_matrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
