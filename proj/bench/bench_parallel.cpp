// Serial reference vs OpenMP kernels. Arguments are thread counts; 0 means
// the serial reference where one exists.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <algorithm>
#include <vector>

#include "grassdisagg/engine.hpp"
#include "grassdisagg/forest.hpp"
#include "grassdisagg/random.hpp"
#include "grassdisagg/svr.hpp"
#include "grassdisagg/synthgen.hpp"

using namespace grassdisagg;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix x;
    std::vector<double> row(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
        x.append_row(row);
    }
    return x;
}

const Dataset& bench_dataset() {
    static const Dataset ds = [] {
        GenParams p = preset_params("default");
        p.n_sites = 60;
        return generate_dataset(p, omp_get_max_threads());
    }();
    return ds;
}

void thread_args(benchmark::internal::Benchmark* b) {
    const int most = std::max(4, omp_get_max_threads());
    for (int t = 1; t < most; t *= 2) b->Arg(t);
    b->Arg(most);
}

void BM_GramSerial(benchmark::State& state) {
    const FeatureMatrix x = random_matrix(1500, 27, 1);
    for (auto _ : state) benchmark::DoNotOptimize(reference::rbf_gram_matrix(x, 0.05));
}
BENCHMARK(BM_GramSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_GramParallel(benchmark::State& state) {
    const FeatureMatrix x = random_matrix(1500, 27, 1);
    for (auto _ : state) benchmark::DoNotOptimize(rbf_gram_matrix(x, 0.05, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_GramParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Forest(benchmark::State& state) {
    const TrainingSet set = build_training_set(bench_dataset(), DisaggConfig{});
    ForestParams params;
    params.n_trees = 40;
    params.seed = 3;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_forest(set.x, set.y, params, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Forest)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DisaggregateBatch(benchmark::State& state) {
    DisaggConfig cfg;
    cfg.regressor = RegressorKind::forest;
    cfg.forest.n_trees = 40;
    const TrainedModel model = train(bench_dataset(), cfg, omp_get_max_threads());
    std::vector<BatchItem> items;
    for (const auto& r : bench_dataset().records()) items.push_back({&r, std::nullopt, true});
    for (auto _ : state)
        benchmark::DoNotOptimize(disaggregate_batch(model.regressor, items, cfg, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DisaggregateBatch)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Generate(benchmark::State& state) {
    GenParams p = preset_params("default");
    for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Generate)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
