#include <benchmark/benchmark.h>

#include <omp.h>

#include "led/detector.hpp"
#include "led/injector.hpp"
#include "led/rng.hpp"
#include "led/synth.hpp"

using namespace led;

namespace {

std::vector<BBox> random_boxes(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<BBox> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(rng.uniform() * 900, rng.uniform() * 900, 5 + rng.uniform() * 95, 5 + rng.uniform() * 95);
    }
    return out;
}

// Clean GT pages with one sampled plan injected into each.
struct Workload {
    Dataset gt;
    std::vector<DocumentLayout> pred;
    std::vector<DocumentPair> pairs;

    explicit Workload(std::size_t n_docs) : gt(synth_dataset(n_docs, 99)) {
        InjectionConfig cfg;
        pred.reserve(gt.documents.size());
        for (std::size_t i = 0; i < gt.documents.size(); ++i) {
            const auto& d = gt.documents[i];
            pred.push_back(inject(d, gt.categories, sample_plan(d, gt.categories, cfg, derive_seed(1, i)), cfg).prediction);
        }
        for (std::size_t i = 0; i < pred.size(); ++i) pairs.push_back({&gt.documents[i], &pred[i]});
    }
};

const Workload& workload() {
    static const Workload w(2000);
    return w;
}

void BM_IouMatrixSerial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_boxes(n, 1), b = random_boxes(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(iou_matrix_serial(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_IouMatrixParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_boxes(n, 1), b = random_boxes(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(iou_matrix_parallel(a, b, 0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_DiagnoseBatchSerial(benchmark::State& state) {
    const auto& w = workload();
    for (auto _ : state) benchmark::DoNotOptimize(diagnose_batch_serial(w.pairs));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.pairs.size()));
}

void BM_DiagnoseBatchParallel(benchmark::State& state) {
    const auto& w = workload();
    for (auto _ : state) benchmark::DoNotOptimize(diagnose_batch(w.pairs, {}, 0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.pairs.size()));
    state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_IouMatrixSerial)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IouMatrixParallel)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DiagnoseBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiagnoseBatchParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
