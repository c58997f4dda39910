#include <benchmark/benchmark.h>

#include <cmath>

#include "rieszlab/measure.hpp"
#include "rieszlab/riesz.hpp"
#include "rieszlab/topcover.hpp"

using namespace rieszlab;

static void BM_KernelSum(benchmark::State& state) {
    const CantorSquare sq = make_cantor_square(1.5, static_cast<int>(state.range(0)), 4.0, 1.0);
    RieszEngine eng(1.5);
    const Measure mu = sq.measure;
    const std::vector<Point2> pts{{2.0, 1.0}};
    for (auto _ : state) {
        auto v = eng.transform_direct(mu, pts);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(sq.measure.size()));
}
BENCHMARK(BM_KernelSum)->Arg(3)->Arg(4)->Arg(5);

static void BM_TransformFFT(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec spec(8.0, n);
    const GridField f = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    RieszEngine eng(1.5);
    for (auto _ : state) {
        auto r = eng.transform_fft(f);
        benchmark::DoNotOptimize(r.field);
    }
}
BENCHMARK(BM_TransformFFT)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_NewtonConv(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec spec(8.0, n);
    const GridField f = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    RieszEngine eng(1.5);
    for (auto _ : state) {
        auto u = eng.newton_potential_grid(f);
        benchmark::DoNotOptimize(u);
    }
}
BENCHMARK(BM_NewtonConv)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_TopCover(benchmark::State& state) {
    const CantorSquare sq = make_cantor_square(1.5, static_cast<int>(state.range(0)), 2.0, 1.0);
    const Measure mu = sq.measure;
    const double cell = std::pow(sq.theta, state.range(0));
    for (auto _ : state) {
        auto c = build_top_cover(mu, 1.5, cell * 1.5, 100.0, 0.01);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_TopCover)->Arg(3)->Arg(4);

BENCHMARK_MAIN();
