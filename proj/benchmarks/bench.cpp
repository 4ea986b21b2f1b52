// Microbenchmarks for the hot paths: trigger search, split search, and
// end-to-end training on the built-in synthetic benchmark model.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "ttree/data.hpp"
#include "ttree/estimators.hpp"
#include "ttree/learner.hpp"
#include "ttree/synthetic.hpp"

namespace {

using namespace ttree;

DataSplit benchmark_split(std::size_t n, double validation_fraction) {
    PlantedModel model = default_benchmark_model(42);
    Dataset data = generate(model, n);
    return split_dataset(data, validation_fraction, 0.0, 0.0, 42);
}

void bm_trigger_search(benchmark::State& state) {
    const DataSplit split = benchmark_split(static_cast<std::size_t>(state.range(0)), 0.4);
    const NodeSample node = NodeSample::whole(split);
    CriterionConfig config;
    config.kind = CriterionKind::Learn;
    if (state.range(1) > 0)
        config.max_trigger_candidates = static_cast<std::size_t>(state.range(1));

    for (auto _ : state) {
        auto result = find_trigger(split, node, config);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(bm_trigger_search)
    ->ArgsProduct({{200, 1000, 5000}, {0, 10, 50}})
    ->ArgNames({"n", "cap"});

void bm_best_split(benchmark::State& state) {
    const DataSplit split = benchmark_split(static_cast<std::size_t>(state.range(0)), 0.4);
    const NodeSample node = NodeSample::whole(split);
    LearnerConfig config;
    config.criterion.kind = CriterionKind::Learn;
    config.criterion.max_trigger_candidates = 10;
    config.min_group_size = 25;

    for (auto _ : state) {
        auto choice = best_split(split, node, config);
        benchmark::DoNotOptimize(choice);
    }
}
BENCHMARK(bm_best_split)->Arg(500)->Arg(2000)->ArgName("n");

void bm_train(benchmark::State& state) {
    const DataSplit split = benchmark_split(static_cast<std::size_t>(state.range(0)), 0.4);
    LearnerConfig config;
    config.criterion.kind = CriterionKind::Learn;
    config.criterion.max_trigger_candidates = 10;
    config.min_group_size = 25;

    for (auto _ : state) {
        Tree tree = train(split, config);
        benchmark::DoNotOptimize(tree);
    }
}
BENCHMARK(bm_train)->Arg(500)->Arg(2000)->ArgName("n")->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
