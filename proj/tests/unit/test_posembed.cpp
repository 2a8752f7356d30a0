#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fqkit/posembed/posembed.hpp"
#include "fqkit/util/error.hpp"

using namespace fqkit;
using namespace fqkit::pe;

TEST(Normalize, Examples) {
    auto r = PerceptionRange::standard();
    EXPECT_EQ(normalize({0, 0, -1}, r), (Point3{0.5, 0.5, 0.5}));
    EXPECT_NEAR(normalize({30, 0, -1}, r).x, 81.2 / 102.4, 1e-12);
    Point3 far = normalize({1e6, -1e6, 100}, r);
    EXPECT_EQ(far, (Point3{1, 0, 1}));
    EXPECT_THROW(PerceptionRange::named("huge"), UsageError);
    PerceptionRange bad;
    bad.z_hi = bad.z_lo;
    EXPECT_THROW(bad.validate(), RangeError);
}

TEST(InverseSigmoid, Examples) {
    EXPECT_EQ(inverse_sigmoid(0.5, 0.0), 0.0);
    EXPECT_NEAR(inverse_sigmoid(0.0), std::log(1e-5 / (1 - 1e-5)), 1e-12);
    EXPECT_NEAR(inverse_sigmoid(0.0), -11.5129, 1e-4);
    EXPECT_NEAR(inverse_sigmoid(1.0), 11.5129, 1e-4);
    EXPECT_NEAR(eta_max(), 11.512915, 1e-6);
    for (int i = 0; i <= 200; ++i) {
        double x = -10 + 0.1 * i;
        EXPECT_NEAR(inverse_sigmoid(1 / (1 + std::exp(-x)), 0.0), x, 1e-9);
    }
    Tensor t = inverse_sigmoid(Tensor::vector({0, 0.5, 1}));
    EXPECT_EQ(t[1], 0.0);
    EXPECT_NEAR(t[0], -t[2], 1e-9);
}

TEST(LidarRay, Examples) {
    Point3 p = lidar_ray_sample({0, 0, 0}, {1, 0, 0}, 30);
    EXPECT_EQ(p, (Point3{30, 0, 0}));
    EXPECT_NEAR(normalize(p, PerceptionRange::standard()).x, 0.79297, 1e-5);
    EXPECT_EQ(lidar_ray_sample({1, 2, 3}, {0, 1, 0}, 0), (Point3{1, 2, 3}));
    EXPECT_THROW(lidar_ray_sample({0, 0, 0}, {1, 1, 0}), RangeError);
}

TEST(Mlp, ZeroWeightsGiveZeroAndMidInputsGiveBias) {
    auto z = MlpSpec::zeros(6, 4, 3);
    Tensor out = z.forward(Tensor({2, 6}, 7.0));
    for (double v : out.values()) EXPECT_EQ(v, 0.0);

    // every coordinate at its range midpoint -> inverse sigmoid stage is 0
    auto mlp = MlpSpec::random(6, 8, 5, 0.5, 0.2, 3);
    std::vector<std::vector<Point3>> px{{{0, 0, -1}, {0, 0, -1}}};
    Tensor in = camera_ray_inputs(px, PerceptionRange::standard());
    for (double v : in.values()) EXPECT_NEAR(v, 0.0, 1e-12);
    Tensor bias_only = mlp.forward(Tensor({1, 6}, 0.0));
    Tensor pe = camera_ray_pe(px, mlp, PerceptionRange::standard());
    EXPECT_EQ(pe, bias_only);
}

TEST(Mlp, ShapeChecks) {
    EXPECT_THROW(MlpSpec(Tensor({3, 4}), Tensor({5}), Tensor({4, 2}), Tensor({2})), ShapeError);
    auto m = MlpSpec::zeros(3, 4, 2);
    EXPECT_THROW(m.forward(Tensor({1, 5})), ShapeError);
}

TEST(Anchors, Examples) {
    std::array<AxisAnchors, 3> axes;
    for (auto& a : axes) {
        a.locations = {0, 0.5, 1};
        a.embeddings = {{1, -1}, {0.2, 0.4}, {-0.6, 0.8}};
    }
    AnchorAxisSet set(axes, 1.0);
    EXPECT_EQ(set.interpolate(0, 0.5), (std::vector<double>{0.2, 0.4}));
    auto mid = set.interpolate(1, 0.25);
    EXPECT_NEAR(mid[0], 0.6, 1e-15);
    EXPECT_NEAR(mid[1], -0.3, 1e-15);
    EXPECT_EQ(set.interpolate(2, -3), axes[2].embeddings[0]);
    EXPECT_EQ(set.interpolate(2, 9), axes[2].embeddings[2]);
}

TEST(Anchors, Validation) {
    std::array<AxisAnchors, 3> axes;
    for (auto& a : axes) {
        a.locations = {0, 1};
        a.embeddings = {{0.1}, {0.2}};
    }
    EXPECT_NO_THROW(AnchorAxisSet(axes, 0.5));
    EXPECT_THROW(AnchorAxisSet(axes, 0.15), RangeError);  // |E| > gamma
    auto dup = axes;
    dup[1].locations = {0.5, 0.5};
    EXPECT_THROW(AnchorAxisSet(dup, 1), ConfigError);
    auto ragged = axes;
    ragged[2].embeddings = {{0.1, 0.2}, {0.3, 0.4}};
    EXPECT_THROW(AnchorAxisSet(ragged, 1), ShapeError);
    EXPECT_THROW(AnchorAxisSet::random(1, 4, 1, 0), ConfigError);
}

TEST(Anchors, MagnitudeBoundConvexityAndContinuity) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (double gamma : {0.1, 0.8, 2.0}) {
        for (int count = 2; count <= 8; ++count) {
            auto set = AnchorAxisSet::random(count, 16, gamma, rng());
            for (int trial = 0; trial < 200; ++trial) {
                int a = trial % 3;
                double t = u(rng);
                auto e = set.interpolate(a, t);
                const auto& ax = set.axis(a);
                std::size_t j = 0;
                while (j + 2 < ax.locations.size() && t > ax.locations[j + 1]) ++j;
                for (std::size_t d = 0; d < e.size(); ++d) {
                    ASSERT_LE(std::abs(e[d]), gamma);
                    double lo = std::min(ax.embeddings[j][d], ax.embeddings[j + 1][d]);
                    double hi = std::max(ax.embeddings[j][d], ax.embeddings[j + 1][d]);
                    ASSERT_GE(e[d], lo);
                    ASSERT_LE(e[d], hi);
                }
                auto e2 = set.interpolate(a, t + 1e-9);
                for (std::size_t d = 0; d < e.size(); ++d) ASSERT_NEAR(e[d], e2[d], 1e-6 * gamma * count);
            }
            for (int a = 0; a < 3; ++a)
                for (std::size_t i = 0; i < set.axis(a).locations.size(); ++i)
                    ASSERT_EQ(set.interpolate(a, set.axis(a).locations[i]), set.axis(a).embeddings[i]);
        }
    }
}

TEST(Anchors, JsonRoundtrip) {
    auto set = AnchorAxisSet::random(4, 5, 0.8, 9);
    auto back = AnchorAxisSet::from_json(set.to_json());
    EXPECT_EQ(back.to_json(), set.to_json());
    EXPECT_EQ(back.gamma(), 0.8);
    EXPECT_THROW(AnchorAxisSet::from_json("[]"), Error);
}

TEST(Qfpe, FeatureLayout) {
    auto set = AnchorAxisSet::random(3, 4, 0.8, 2);
    std::vector<Point3> pts{{10, -20, 0}};
    auto r = PerceptionRange::standard();
    Tensor f = qfpe_features(pts, set, r);
    ASSERT_EQ(f.shape(), (Shape{1, 12}));
    Point3 n = normalize(pts[0], r);
    for (int a = 0; a < 3; ++a) {
        auto e = set.interpolate(a, n[a]);
        for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(f.at(0, a * 4 + d), e[d]);
    }
    auto mlp = MlpSpec::random(12, 8, 3, 0.3, 0.1, 4);
    EXPECT_EQ(qfpe_embed(pts[0], set, r, mlp), mlp.forward(f).values());
}

TEST(Report, RatioAndBounds) {
    auto mlp = MlpSpec::random(192, 256, 256, 0.35, 0.1, 1);
    RayGrid grid;
    grid.rows = 2;
    grid.cols = 8;
    auto r = PerceptionRange::standard();
    auto cam = magnitude_report(mlp, PeKind::camera_ray, grid, r);
    EXPECT_NEAR(cam.eta_max, 11.5129, 1e-3);
    EXPECT_NEAR(cam.printed_ratio, 4.423, 1e-3);
    EXPECT_DOUBLE_EQ(cam.weight_bound, 256.0 * 192.0 * mlp.max_weight() * mlp.max_weight() * cam.stage1);
    EXPECT_LE(cam.measured_max_abs, cam.full_bound);
    EXPECT_EQ(cam.grid_points, 16u);

    auto anchors = AnchorAxisSet::random(4, 64, 0.8, 2);
    auto q = magnitude_report(mlp, PeKind::qfpe, grid, r, &anchors);
    EXPECT_LE(q.measured_max_abs, q.full_bound);
    EXPECT_LT(q.measured_max_abs, cam.measured_max_abs);
    EXPECT_THROW(magnitude_report(mlp, PeKind::qfpe, grid, r), ConfigError);
}

TEST(Report, ZeroGammaCollapsesToBiasTerms) {
    auto mlp = MlpSpec::random(12, 16, 4, 0.5, 0.1, 5);
    auto anchors = AnchorAxisSet::random(3, 4, 0.0, 6);
    RayGrid grid;
    grid.rows = 1;
    grid.cols = 4;
    auto q = magnitude_report(mlp, PeKind::qfpe, grid, PerceptionRange::standard(), &anchors);
    EXPECT_EQ(q.weight_bound, 0.0);
    EXPECT_DOUBLE_EQ(q.full_bound, 16 * mlp.max_weight() * mlp.max_bias1() + mlp.max_bias2());
}
