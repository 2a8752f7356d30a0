#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fqkit/attn/attn_sim.hpp"
#include "fqkit/core/quant.hpp"
#include "fqkit/util/error.hpp"

using namespace fqkit;
using namespace fqkit::attn;

namespace {

FusionResult fuse(double pe_range, std::uint64_t seed = 3) {
    Shape s{64, 64};
    FusionScenario sc{image_features(s, seed), pe_range > 0 ? pe_surrogate(s, pe_range, seed + 1) : Tensor(s, 0.0), 8};
    return fuse_and_quantize(sc);
}

}  // namespace

TEST(Fusion, GeneratorsHitTheirRanges) {
    Tensor img = image_features({32, 32}, 1);
    for (double v : img.values()) EXPECT_LE(std::abs(v), kImageRange);
    Tensor pe = pe_surrogate({32, 32}, kCameraRayRange, 2);
    double m = 0;
    for (double v : pe.values()) m = std::max(m, std::abs(v));
    EXPECT_DOUBLE_EQ(m, kCameraRayRange);
}

TEST(Fusion, CameraRayRangeLeavesFewBins) {
    auto wide = fuse(kCameraRayRange);
    EXPECT_NEAR(wide.params.scale(), 2 * kCameraRayRange / 256, 0.02);
    EXPECT_GE(wide.metrics.effective_bins, 3);
    EXPECT_LE(wide.metrics.effective_bins, 9);
    auto narrow = fuse(kQfpeRange);
    EXPECT_GE(narrow.metrics.effective_bins, 4 * wide.metrics.effective_bins);
}

TEST(Fusion, MatchedRangesKeepFullOccupancy) {
    auto m = fuse(kImageRange);
    auto alone = fuse(0);
    EXPECT_GE(m.metrics.effective_bins, alone.metrics.effective_bins / 2);
    EXPECT_GE(m.retention, 0.4);
}

TEST(Fusion, ZeroPeIsImageAlone) {
    Tensor img = image_features({16, 16}, 5);
    auto r = fuse_and_quantize({img, Tensor({16, 16}, 0.0), 8});
    QuantParams p = calibrate(std::vector<Tensor>{img}, 8);
    EXPECT_EQ(r.params, p);
    EXPECT_EQ(r.codes, quantize(img, p));
}

TEST(Fusion, BinsShrinkAsPeGrows) {
    std::int64_t prev = 1 << 30;
    for (double range = 2 * kImageRange; range <= 200; range *= 1.3) {
        auto r = fuse(range);
        EXPECT_LE(r.metrics.effective_bins, prev) << range;
        prev = r.metrics.effective_bins;
    }
}

TEST(Fusion, EffectiveBinsFormula) {
    EXPECT_EQ(effective_bins(8.0, 1.015625, 8), 8);
    EXPECT_EQ(effective_bins(8.0, 0.0001, 8), 256);
    EXPECT_EQ(effective_bins(0.0, 1.0, 8), 1);
}

TEST(Fusion, ShapeMismatchThrows) {
    EXPECT_THROW(fuse_and_quantize({Tensor({2, 2}), Tensor({4}), 8}), ShapeError);
}

TEST(Attention, ModeNames) {
    for (auto m : {SoftmaxMode::exact, SoftmaxMode::naive_quant, SoftmaxMode::qans, SoftmaxMode::qans_dulut})
        EXPECT_EQ(parse_softmax_mode(mode_name(m)), m);
    EXPECT_THROW(parse_softmax_mode("fp8"), UsageError);
}

TEST(Attention, SuiteLogitsMatchTheConstruction) {
    SuiteConfig cfg;
    cfg.instances = 2;
    cfg.rows = 16;
    auto inst = attention_suite(cfg);
    ASSERT_EQ(inst.size(), 2u);
    Tensor l = attention_logits(inst[1].queries, inst[1].keys);
    Tensor direct = suite_logits(cfg, 1);
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], direct[i], 1e-9);
    for (std::size_t r = 0; r < 16; ++r) {
        std::vector<double> row(direct.values().begin() + r * 256, direct.values().begin() + (r + 1) * 256);
        std::sort(row.rbegin(), row.rend());
        double gap = row[0] - row[1];
        EXPECT_GE(gap, cfg.margin_lo - 1e-9);
        EXPECT_LT(gap, cfg.margin_hi);
        EXPECT_GE(row[cfg.competitors - 1], row[0] - cfg.cluster_depth - 1e-9);
    }
}

TEST(Attention, ExactModeHasZeroMetrics) {
    SuiteConfig cfg;
    cfg.instances = 1;
    cfg.rows = 8;
    auto inst = attention_suite(cfg).front();
    auto r = run_attention(inst.queries, inst.keys, inst.values, SoftmaxMode::exact);
    EXPECT_EQ(r.metrics, DistortionMetrics{});
}

TEST(Attention, QansNoWorseThanNaive) {
    SuiteConfig cfg;
    cfg.instances = 2;
    cfg.rows = 64;
    for (const auto& inst : attention_suite(cfg)) {
        auto naive = run_attention(inst.queries, inst.keys, inst.values, SoftmaxMode::naive_quant);
        auto q = run_attention(inst.queries, inst.keys, inst.values, SoftmaxMode::qans);
        auto qd = run_attention(inst.queries, inst.keys, inst.values, SoftmaxMode::qans_dulut);
        EXPECT_LT(q.metrics.l1_error, naive.metrics.l1_error);
        EXPECT_LE(q.metrics.argmax_shift_rate, naive.metrics.argmax_shift_rate);
        EXPECT_GT(naive.metrics.argmax_shift_rate, 0.0);
        EXPECT_EQ(q.metrics.argmax_shift_rate, 0.0);
        EXPECT_LT(qd.metrics.l1_error, naive.metrics.l1_error);
        EXPECT_GE(q.selected_i, 1);
        EXPECT_LE(q.selected_i, 20);
    }
}

TEST(Attention, CompareDistributions) {
    Tensor p({1, 3}, std::vector<double>{0.1, 0.7, 0.2});
    Tensor q({1, 3}, std::vector<double>{0.1, 0.3, 0.6});
    auto m = compare_distributions(p, q);
    EXPECT_NEAR(m.l1_error, 0.8, 1e-12);
    EXPECT_EQ(m.argmax_shift_rate, 1.0);
    EXPECT_NEAR(m.peak_attenuation, 0.4, 1e-12);
}

TEST(Ablation, DeterministicAndSingleRow) {
    AblationConfig one;
    one.anchor_counts = {3};
    one.qans_n.clear();
    one.dulut_sizes.clear();
    one.suite.instances = 1;
    one.suite.rows = 8;
    auto rows = ablation_sweep(one);
    ASSERT_EQ(rows.size(), 1u);

    AblationConfig small;
    small.suite.instances = 1;
    small.suite.rows = 16;
    small.dulut_sizes = {{16, 16}};
    std::ostringstream a, b;
    write_ablation_csv(a, ablation_sweep(small));
    write_ablation_csv(b, ablation_sweep(small));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(ablation_sweep(small).size(), 4u + 6u + 1u);
}

TEST(Studies, FusionRowsAndCsv) {
    auto rows = fusion_study(7);
    ASSERT_FALSE(rows.empty());
    std::ostringstream out;
    write_fusion_csv(out, rows);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "pe_source,pe_max_abs,scale,effective_bins,retention");
}
