#include <benchmark/benchmark.h>

#include <numeric>

#include "fqkit/attn/attn_sim.hpp"
#include "fqkit/dulut/builder.hpp"
#include "fqkit/lut/kernel.hpp"
#include "fqkit/posembed/posembed.hpp"
#include "fqkit/qans/softmax.hpp"

using namespace fqkit;

namespace {

IntTensor all_codes(std::size_t repeat) {
    std::vector<std::int32_t> v;
    v.reserve(256 * repeat);
    for (std::size_t r = 0; r < repeat; ++r)
        for (int c = -128; c <= 127; ++c) v.push_back(c);
    return IntTensor::vector(std::move(v));
}

dulut::FunctionSpec exp_fn() { return dulut::FunctionSpec::builtin("exp", -20, 0); }

void BM_LutEval(benchmark::State& state) {
    auto lut = dulut::build_linear_lut(exp_fn(), 8, static_cast<int>(state.range(0)));
    IntTensor codes = all_codes(256);
    for (auto _ : state) benchmark::DoNotOptimize(lut::lut_eval_batch(codes, lut.table));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(codes.size()));
}
BENCHMARK(BM_LutEval)->Arg(5)->Arg(8);

void BM_DulutEval(benchmark::State& state) {
    auto pair = dulut::build_dulut(exp_fn(), dulut::BuildConfig{}).pair;
    IntTensor codes = all_codes(256);
    for (auto _ : state) benchmark::DoNotOptimize(lut::dulut_eval_batch(codes, pair));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(codes.size()));
}
BENCHMARK(BM_DulutEval);

void BM_BuildDulut(benchmark::State& state) {
    dulut::BuildConfig cfg;
    cfg.m1 = cfg.m2 = static_cast<int>(state.range(0));
    const char* names[] = {"exp", "silu", "gelu"};
    auto kind = dulut::parse_function_kind(names[state.range(1)]);
    auto [lo, hi] = dulut::FunctionSpec::default_domain(kind);
    auto f = dulut::FunctionSpec::builtin(kind, lo, hi);
    for (auto _ : state) benchmark::DoNotOptimize(dulut::build_dulut(f, cfg));
}
BENCHMARK(BM_BuildDulut)->ArgsProduct({{16, 32, 64}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_QansSoftmax(benchmark::State& state) {
    attn::SuiteConfig sc;
    sc.rows = static_cast<int>(state.range(0));
    Tensor x = attn::suite_logits(sc, 0);
    qans::QansConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(qans::qans_softmax(x, 1, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_QansSoftmax)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_IntegerSoftmax(benchmark::State& state) {
    attn::SuiteConfig sc;
    Tensor x = attn::suite_logits(sc, 0);
    qans::QansConfig cfg;
    auto pair = qans::build_exp_pair(14, cfg).pair;
    IntTensor codes = qans::stabilized_codes(qans::stabilize(x, 1), 14, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(qans::integer_softmax_via_dulut(codes, 1, pair));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(codes.size()));
}
BENCHMARK(BM_IntegerSoftmax)->Unit(benchmark::kMillisecond);

void BM_MlpForward(benchmark::State& state) {
    auto mlp = pe::MlpSpec::random(192, 256, 256, 0.35, 0.1, 1);
    Tensor x({static_cast<std::size_t>(state.range(0)), 192}, 0.25);
    for (auto _ : state) benchmark::DoNotOptimize(mlp.forward(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_AnchorInterpolate(benchmark::State& state) {
    auto set = pe::AnchorAxisSet::random(4, 64, 0.8, 3);
    pe::RayGrid grid;
    auto pts = grid.lidar_points();
    for (auto _ : state)
        benchmark::DoNotOptimize(pe::qfpe_features(pts, set, pe::PerceptionRange::standard()));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_AnchorInterpolate);

}  // namespace

BENCHMARK_MAIN();
