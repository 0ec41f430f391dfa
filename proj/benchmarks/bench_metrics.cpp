#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "mpskit/extraction.hpp"
#include "mpskit/rng.hpp"
#include "mpskit/setmetrics.hpp"
#include "mpskit/stats.hpp"

using namespace mpskit;

namespace {

PixelMask random_mask(int h, int w, std::uint64_t seed, double density) {
    PixelMask mask(h, w);
    Rng rng(seed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (uniform_unit(rng) < density) mask.set(y, x, true);
        }
    }
    return mask;
}

void bm_dice(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const PixelMask a = random_mask(side, side, 1, 0.1);
    const PixelMask b = random_mask(side, side, 2, 0.12);
    for (auto _ : state) benchmark::DoNotOptimize(dice(a, b));
}
BENCHMARK(bm_dice)->Arg(32)->Arg(224)->Unit(benchmark::kMicrosecond);

void bm_distance_transform(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const PixelMask mask = random_mask(side, side, 3, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(squared_distance_transform(mask));
}
BENCHMARK(bm_distance_transform)->Arg(32)->Arg(224)->Unit(benchmark::kMicrosecond);

void bm_hausdorff(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const PixelMask a = random_mask(side, side, 4, 0.1);
    const PixelMask b = random_mask(side, side, 5, 0.12);
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff(a, b));
}
BENCHMARK(bm_hausdorff)->Arg(32)->Arg(224)->Unit(benchmark::kMicrosecond);

void bm_kruskal_wallis(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    GroupedSample sample;
    Rng rng(6);
    for (int g = 0; g < 3; ++g) {
        std::vector<double> values(static_cast<std::size_t>(n));
        for (double& v : values) v = uniform_unit(rng) + 0.1 * g;
        sample.groups.push_back({"g" + std::to_string(g), std::move(values)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(kruskal_wallis(sample));
}
BENCHMARK(bm_kruskal_wallis)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void bm_fit_size_model(benchmark::State& state) {
    const std::int64_t per_model = state.range(0);
    std::vector<MpsRecord> records;
    Rng rng(7);
    for (int m = 0; m < 3; ++m) {
        for (std::int64_t i = 0; i < per_model; ++i) {
            MpsRecord r;
            r.model_id = "m" + std::to_string(m);
            r.image_id = "i" + std::to_string(i);
            r.predicted_class = 1;
            r.correct = i % 2 == 0;
            r.area_ratio = 0.1 * (m + 1) + (*r.correct ? 0.0 : 0.03) + 0.01 * uniform_unit(rng);
            records.push_back(std::move(r));
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_size_model(records));
}
BENCHMARK(bm_fit_size_model)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace
