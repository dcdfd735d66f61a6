// OpenMP kernels against their serial loops and the naive reference versions.
// Run with OMP_NUM_THREADS=1,2,... to see the scaling.

#include <benchmark/benchmark.h>

#include <random>

#include "itof/pipeline/bilateral.hpp"
#include "itof/reference.hpp"
#include "itof/tinynet/conv.hpp"
#include "itof/transient_sim.hpp"

using namespace itof;

namespace {

nn::TensorGrid random_input(std::size_t n, std::size_t c, std::size_t hw) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    nn::TensorGrid t(n, c, hw, hw);
    for (double& v : t.values()) v = u(rng);
    return t;
}

nn::ConvLayer layer32() {
    std::mt19937_64 rng(2);
    nn::ConvLayer l("bench", 32, 32, 3, 3, nn::Activation::relu);
    l.init_uniform(rng);
    return l;
}

void conv_forward(benchmark::State& st, Exec exec) {
    const auto layer = layer32();
    const auto x = random_input(256, 32, 9);
    for (auto _ : st) benchmark::DoNotOptimize(nn::conv2d_forward(x, layer, nullptr, exec));
    st.SetItemsProcessed(st.iterations() * 256);
}

void conv_forward_reference(benchmark::State& st) {
    const auto layer = layer32();
    const auto x = random_input(16, 32, 9);
    for (auto _ : st) benchmark::DoNotOptimize(reference::conv2d_forward(x, layer));
    st.SetItemsProcessed(st.iterations() * 16);
}

void conv_backward(benchmark::State& st, Exec exec) {
    auto layer = layer32();
    const auto x = random_input(256, 32, 9);
    nn::ConvCache cache;
    const auto y = nn::conv2d_forward(x, layer, &cache, exec);
    for (auto _ : st) benchmark::DoNotOptimize(nn::conv2d_backward(y, cache, layer, exec));
    st.SetItemsProcessed(st.iterations() * 256);
}

void render(benchmark::State& st, Exec exec) {
    SceneConfig sc;
    sc.width = 32;
    sc.height = 32;
    const auto scene = generate_scene(5, 3, 5.0, sc);
    RenderConfig rc;
    rc.bounce_samples = 256;
    for (auto _ : st) benchmark::DoNotOptimize(render_transient(scene, rc, exec));
    st.SetItemsProcessed(st.iterations() * 32 * 32);
}

DepthMap noisy_depth() {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(2.0, 0.05);
    DepthMap d(256, 256);
    for (std::size_t i = 0; i < d.size(); ++i) {
        d.depth_m[i] = n(rng);
        d.valid[i] = 1;
    }
    return d;
}

void bilateral(benchmark::State& st, Exec exec) {
    const auto d = noisy_depth();
    for (auto _ : st) benchmark::DoNotOptimize(pipeline::bilateral_filter(d, 3.0, 0.05, exec));
    st.SetItemsProcessed(st.iterations() * d.size());
}

void bilateral_reference(benchmark::State& st) {
    const auto d = noisy_depth();
    for (auto _ : st) benchmark::DoNotOptimize(reference::bilateral_filter(d, 3.0, 0.05));
    st.SetItemsProcessed(st.iterations() * d.size());
}

}  // namespace

BENCHMARK_CAPTURE(conv_forward, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(conv_forward, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_forward_reference)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(conv_backward, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(conv_backward, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(render, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(render, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bilateral, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bilateral, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bilateral_reference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
