// Serial reference vs OpenMP-parallel forest fitting and batch prediction.
#include <benchmark/benchmark.h>

#include "fraudtree/dataset.hpp"
#include "fraudtree/ssrf.hpp"

using namespace fraudtree;

namespace {

const Dataset& bench_data() {
    static Dataset ds = generate_synthetic(20000, 0.05, 10, 0.4, 42);
    return ds;
}

std::vector<int> all_rows(std::size_t n) {
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i);
    return out;
}

SsrfConfig bench_config(int n_trees) {
    SsrfConfig cfg;
    cfg.n_trees = n_trees;
    cfg.seed = 42;
    return cfg;
}

void BM_fit(benchmark::State& state, Execution exec) {
    const Dataset& ds = bench_data();
    auto rows = all_rows(ds.n_rows);
    auto cfg = bench_config(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto model = fit_ssrf(ds, rows, ds.labels, cfg, exec);
        benchmark::DoNotOptimize(model.trees.data());
    }
    state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
}

void BM_predict(benchmark::State& state, Execution exec) {
    const Dataset& ds = bench_data();
    auto rows = all_rows(ds.n_rows);
    static SsrfModel model = fit_ssrf(ds, rows, ds.labels, bench_config(100));
    for (auto _ : state) {
        auto probs = predict_ssrf_many(model, ds, exec);
        benchmark::DoNotOptimize(probs.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(ds.n_rows));
    state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
}

}  // namespace

BENCHMARK_CAPTURE(BM_fit, serial, Execution::serial)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_fit, parallel, Execution::parallel)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_predict, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_predict, parallel, Execution::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
