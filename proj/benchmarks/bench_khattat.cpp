// Hot paths of one optimisation step, on the word BIRD.
#include <benchmark/benchmark.h>

#include "khattat/acap.hpp"
#include "khattat/augment.hpp"
#include "khattat/features.hpp"
#include "khattat/font.hpp"
#include "khattat/losses.hpp"
#include "khattat/optimizer.hpp"
#include "khattat/pipeline.hpp"
#include "khattat/raster.hpp"
#include "khattat/scorer.hpp"
#include "khattat/triangulation.hpp"

using namespace khattat;

namespace {

const WordLayout& bird() {
    static const WordLayout w = prepare_region(load_glyph_outlines(KHATTAT_BENCH_FONT, "BIRD"), {0, 4});
    return w;
}

void BM_Render(benchmark::State& state) {
    const int size = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(render(bird(), size));
}
BENCHMARK(BM_Render)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_RenderGradient(benchmark::State& state) {
    const int size = int(state.range(0));
    const RasterImage upstream(size, size, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(render_gradient(bird(), size, upstream));
}
BENCHMARK(BM_RenderGradient)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Triangulate(benchmark::State& state) {
    const auto pts = gather_points(bird(), {0, 4});
    const auto edges = contour_edges(bird(), {0, 4});
    for (auto _ : state) benchmark::DoNotOptimize(triangulate(pts, edges));
}
BENCHMARK(BM_Triangulate)->Unit(benchmark::kMillisecond);

void BM_Acap(benchmark::State& state) {
    const auto pts = gather_points(bird(), {0, 4});
    const auto ref = triangulate(pts, contour_edges(bird(), {0, 4}));
    auto moved = pts;
    for (Vec2& p : moved) p.x *= 1.01;
    for (auto _ : state) benchmark::DoNotOptimize(acap_loss(ref, moved));
}
BENCHMARK(BM_Acap)->Unit(benchmark::kMicrosecond);

void BM_FilterBank(benchmark::State& state) {
    const int size = int(state.range(0));
    const RasterImage img = render(bird(), size);
    const FilterBankExtractor bank;
    const auto ref = bank.extract(img);
    for (auto _ : state) benchmark::DoNotOptimize(bank.compare(ref, img));
}
BENCHMARK(BM_FilterBank)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Augment(benchmark::State& state) {
    const RasterImage img = render(bird(), 256);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(augment(img, AugmentationSpec{seed++, 0.05, 0.85}));
}
BENCHMARK(BM_Augment)->Unit(benchmark::kMillisecond);

void BM_ObjectiveStep(benchmark::State& state) {
    const int size = int(state.range(0));
    const MockSdsScorer scorer(circle_target(bird(), {1, 2}, size));
    const FilterBankExtractor bank;
    const MorphObjective objective(bird(), {1, 2}, LossWeights::for_region(1), scorer, bank, "p", size);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(objective.evaluate(bird(), AugmentationSpec{seed++, 0.05, 0.85}));
}
BENCHMARK(BM_ObjectiveStep)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
