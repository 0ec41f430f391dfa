#include <benchmark/benchmark.h>

#include "mpskit/extraction.hpp"
#include "mpskit/oracle.hpp"
#include "mpskit/responsibility.hpp"
#include "mpskit/rng.hpp"

using namespace mpskit;

namespace {

ImageTensor active_image(int h, int w, std::uint64_t seed) {
    ImageTensor image(h, w, 1);
    Rng rng(seed);
    for (float& v : image.values) v = 0.2f + 0.8f * static_cast<float>(uniform_unit(rng));
    return image;
}

OracleHandle block_oracle(int h, int w) {
    SyntheticOracleSpec spec;
    spec.kind = SyntheticKind::pixel_key;
    spec.model_id = "bench";
    spec.architecture_tag = "bench";
    spec.input_height = h;
    spec.input_width = w;
    for (int y = 10; y < 12; ++y) {
        for (int x = 10; x < 12; ++x) spec.key_pixels.push_back({y, x});
    }
    return make_synthetic_oracle(spec);
}

void bm_landscape(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const ImageTensor image = active_image(side, side, 1234);
    const OracleHandle oracle = block_oracle(side, side);
    const BaselineSpec baseline;
    SearchConfig config;
    config.iterations = static_cast<int>(state.range(1));
    config.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_landscape(image, *oracle, config, baseline));
    }
}
BENCHMARK(bm_landscape)
    ->Args({32, 1})
    ->Args({32, 20})
    ->Args({64, 20})
    ->Unit(benchmark::kMillisecond);

void bm_landscape_workers(benchmark::State& state) {
    const ImageTensor image = active_image(64, 64, 1234);
    const OracleHandle oracle = block_oracle(64, 64);
    const BaselineSpec baseline;
    SearchConfig config;
    config.seed = 7;
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_landscape(image, *oracle, config, baseline, workers));
    }
}
BENCHMARK(bm_landscape_workers)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_extract(benchmark::State& state) {
    const ImageTensor image = active_image(32, 32, 99);
    const OracleHandle oracle = block_oracle(32, 32);
    const BaselineSpec baseline;
    SearchConfig config;
    config.seed = 7;
    const ResponsibilityLandscape landscape = build_landscape(image, *oracle, config, baseline);
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_mps(image, landscape, *oracle, baseline));
    }
}
BENCHMARK(bm_extract)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
