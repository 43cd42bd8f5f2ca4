#include <benchmark/benchmark.h>

#include <random>

#include "sst/diffusion_basis.hpp"
#include "sst/smooth_test.hpp"

namespace {

sst::Dataset gaussian_points(int m, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    sst::Dataset pts(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = gauss(rng);
    return pts;
}

void BM_gram_matrix(benchmark::State& state) {
    int m = static_cast<int>(state.range(0));
    auto pts = gaussian_points(m, 2, 1);
    sst::KernelConfig cfg{4.0};
    for (auto _ : state) {
        auto K = sst::gram_matrix(pts, pts, cfg);
        benchmark::DoNotOptimize(K.data());
    }
}
BENCHMARK(BM_gram_matrix)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)
    ->Unit(benchmark::kMillisecond);

void BM_basis_build(benchmark::State& state) {
    int m = static_cast<int>(state.range(0));
    auto pts = gaussian_points(m, 2, 2);
    for (auto _ : state) {
        auto basis = sst::DiffusionBasis::build(pts, sst::KernelConfig{4.0}, 10);
        benchmark::DoNotOptimize(basis.eigenvalues().data());
    }
}
BENCHMARK(BM_basis_build)->Arg(250)->Arg(500)->Arg(1000)
    ->Unit(benchmark::kMillisecond);

void BM_extend(benchmark::State& state) {
    int m = static_cast<int>(state.range(0));
    auto train = gaussian_points(m, 2, 3);
    auto basis = sst::DiffusionBasis::build(train, sst::KernelConfig{4.0}, 10);
    auto data = gaussian_points(50, 2, 4);
    Eigen::MatrixXd psi;
    sst::Vector s;
    for (auto _ : state) {
        basis.extend_all(data, 10, psi, s);
        benchmark::DoNotOptimize(psi.data());
    }
}
BENCHMARK(BM_extend)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_statistics_grid(benchmark::State& state) {
    int m = static_cast<int>(state.range(0));
    auto train = gaussian_points(m, 2, 5);
    auto grid = sst::lambda_grid({sst::KernelConfig{2.0}, sst::KernelConfig{4.0},
                                  sst::KernelConfig{8.0}},
                                 {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    auto bases = sst::build_bases(train, grid);
    auto data = gaussian_points(50, 2, 6);
    for (auto _ : state) {
        auto t = sst::t_lambda_all(bases, grid, data);
        benchmark::DoNotOptimize(t.data());
    }
}
BENCHMARK(BM_statistics_grid)->Arg(500)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
