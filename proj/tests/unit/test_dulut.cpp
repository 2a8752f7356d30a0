#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fqkit/dulut/builder.hpp"
#include "fqkit/dulut/function.hpp"
#include "fqkit/dulut/measure.hpp"
#include "fqkit/lut/io.hpp"
#include "fqkit/util/error.hpp"

using namespace fqkit;
using namespace fqkit::dulut;

namespace {

FunctionSpec fn(const char* name) {
    auto kind = parse_function_kind(name);
    auto [lo, hi] = FunctionSpec::default_domain(kind);
    return FunctionSpec::builtin(kind, lo, hi);
}

}  // namespace

TEST(Function, NamesAndDomains) {
    EXPECT_THROW(parse_function_kind("nosuch"), UnknownFunction);
    for (auto k : {FunctionKind::exp, FunctionKind::silu, FunctionKind::gelu, FunctionKind::sigmoid,
                   FunctionKind::inverse_sigmoid, FunctionKind::identity})
        EXPECT_EQ(parse_function_kind(function_name(k)), k);
    EXPECT_THROW(FunctionSpec::builtin("exp", 1, 1), ConfigError);
    EXPECT_THROW(FunctionSpec::builtin("inverse_sigmoid", 0, 0.5), ConfigError);
}

TEST(Function, SecondDerivativeMatchesFiniteDifferences) {
    for (const char* name : {"exp", "silu", "gelu", "sigmoid", "inverse_sigmoid"}) {
        FunctionSpec f = fn(name);
        const double lo = f.domain_lo(), hi = f.domain_hi();
        for (int i = 1; i < 50; ++i) {
            double x = lo + (hi - lo) * i / 50.0;
            double h = 1e-4 * (hi - lo);
            double fd = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
            EXPECT_NEAR(f.second_derivative(x), fd, 1e-4 * (1 + std::abs(fd))) << name << " at " << x;
        }
    }
}

TEST(Function, MaxCurvatureDominatesDenseSampling) {
    for (const char* name : {"exp", "silu", "gelu", "sigmoid", "inverse_sigmoid"}) {
        FunctionSpec f = fn(name);
        const double lo = f.domain_lo(), hi = f.domain_hi();
        for (int seg = 0; seg < 16; ++seg) {
            double a = lo + (hi - lo) * seg / 16, b = lo + (hi - lo) * (seg + 1) / 16;
            double dense = 0;
            for (int i = 0; i <= 400; ++i) dense = std::max(dense, std::abs(f.second_derivative(a + (b - a) * i / 400)));
            double claimed = f.max_abs_second_derivative(a, b);
            EXPECT_GE(claimed, dense * (1 - 1e-9)) << name;
            EXPECT_LE(claimed, dense * 1.01 + 1e-12) << name;
        }
    }
}

TEST(Function, CustomGridInterpolates) {
    std::vector<std::pair<double, double>> s;
    for (int i = 0; i <= 300; ++i) {
        double x = -3 + 6.0 * i / 300;
        s.emplace_back(x, x * x);
    }
    auto f = FunctionSpec::custom(s, -3, 3);
    EXPECT_NEAR(f(1.0), 1.0, 1e-3);
    EXPECT_NEAR(f.second_derivative(0.5), 2.0, 1e-6);
    EXPECT_THROW(FunctionSpec::custom({{0, 0}, {0, 1}, {1, 1}}, 0, 1), ConfigError);
}

TEST(InterpBound, Examples) {
    EXPECT_NEAR(interp_error_bound(FunctionSpec::builtin("identity", -8, 8), -8, 8, 0.25), 0.25, 1e-15);
    EXPECT_NEAR(interp_error_bound(FunctionSpec::builtin("exp", -20, 0), -1, 0, 0), 0.125, 1e-12);
}

TEST(LinearLut, IdentityReproducesCodes) {
    auto lut = build_linear_lut(FunctionSpec::builtin("identity", -8, 8), 8, 5);
    for (std::int32_t c = -128; c <= 127; ++c) EXPECT_EQ(lut::eval_code(c, lut), c);
}

TEST(LinearLut, FullTableIsPureRoundOff) {
    FunctionSpec f = fn("exp");
    auto lut = build_linear_lut(f, 8, 8);
    auto prof = measure(f, lut, 0);
    EXPECT_LE(prof.max_excess, 1e-12);
    for (const auto& e : prof.codes) EXPECT_EQ(e.fhat, e.ideal);
}

TEST(LinearLut, SixteenEntryExpTable) {
    auto lut = build_linear_lut(FunctionSpec::builtin("exp", -20, 0), 4, 4);
    EXPECT_EQ(lut.table.entries().size(), 17u);
    EXPECT_EQ(lut.table.shift_bit(), 0);
    EXPECT_TRUE(lut.table.monotone());
}

TEST(LinearLut, SegmentsMeetCurvatureBound) {
    for (const char* name : {"exp", "silu", "gelu"})
        for (int t_bit : {3, 4, 5, 6, 7}) {
            FunctionSpec f = fn(name);
            auto lut = build_linear_lut(f, 8, t_bit);
            auto prof = measure(f, lut, 0);
            EXPECT_LE(bound_excess(f, value_segments(lut), prof, lut.output), 1e-9) << name << " t_bit " << t_bit;
        }
}

TEST(Builder, IdentityConvergesImmediately) {
    auto b = build_dulut(FunctionSpec::builtin("identity", -8, 8), BuildConfig{});
    EXPECT_EQ(b.report.iterations_used, 0);
    EXPECT_LE(b.report.global_max_are, 1e-12);
}

TEST(Builder, ConfigValidation) {
    FunctionSpec f = fn("exp");
    auto bad = [&](auto mutate) {
        BuildConfig c;
        mutate(c);
        EXPECT_THROW(build_dulut(f, c), ConfigError);
    };
    bad([](BuildConfig& c) { c.m1 = 24; });
    bad([](BuildConfig& c) { c.m2 = 2; });
    bad([](BuildConfig& c) { c.delta = 0; });
    bad([](BuildConfig& c) { c.max_iters = 0; });
    bad([](BuildConfig& c) { c.k_hw = 2; });  // 32 * 2 < 256 codes
    bad([](BuildConfig& c) { c.input_bits = 20; });
    bad([](BuildConfig& c) { c.output_range = std::pair{1.0, 1.0}; });
}

class BuilderProps : public ::testing::TestWithParam<const char*> {};

TEST_P(BuilderProps, LoopInvariants) {
    FunctionSpec f = fn(GetParam());
    for (int m : {16, 32, 64}) {
        BuildConfig cfg;
        cfg.m1 = cfg.m2 = m;
        auto b = build_dulut(f, cfg);
        const auto& r = b.report;
        for (std::size_t i = 1; i < r.history.size(); ++i)
            EXPECT_LE(r.history[i].objective, r.history[i - 1].objective);
        ASSERT_EQ(r.index_spans.size(), static_cast<std::size_t>(m));
        EXPECT_EQ(std::accumulate(r.index_spans.begin(), r.index_spans.end(), 0), 256);
        for (auto s : r.index_spans) EXPECT_GE(s, 0);  // flat stretches may share one index
        EXPECT_EQ(b.pair.table1().entries().size(), static_cast<std::size_t>(m + 1));
        EXPECT_EQ(b.pair.table2().entries().size(), static_cast<std::size_t>(m + 1));
        EXPECT_TRUE(b.pair.table1().monotone());
        EXPECT_LE(r.bound_excess, 1e-9);
        EXPECT_LE(r.iterations_used, cfg.max_iters);

        auto again = build_dulut(f, cfg);
        EXPECT_EQ(lut::to_json(again.pair), lut::to_json(b.pair));
        EXPECT_EQ(lut::to_binary(again.pair), lut::to_binary(b.pair));
    }
}

TEST_P(BuilderProps, ReportAgreesWithMeasurement) {
    FunctionSpec f = fn(GetParam());
    auto b = build_dulut(f, BuildConfig{});
    auto prof = measure(f, b.pair, b.report.are_epsilon);
    EXPECT_DOUBLE_EQ(prof.max_rel_error, b.report.max_rel_error);
    double worst = 0;
    for (double a : b.report.per_segment_are) worst = std::max(worst, a);
    EXPECT_DOUBLE_EQ(worst, b.report.global_max_are);
}

TEST_P(BuilderProps, NoWorseThanCurvatureOnlyMerge) {
    FunctionSpec f = fn(GetParam());
    auto d = build_dulut(f, BuildConfig{});
    auto c = curvature_only_merge(f, BuildConfig{});
    EXPECT_GE(c.report.global_max_are, d.report.global_max_are);
}

INSTANTIATE_TEST_SUITE_P(Functions, BuilderProps, ::testing::Values("exp", "silu", "gelu"));

TEST(Builder, ExpPairBeatsHalfSizeLinearTable) {
    FunctionSpec f = fn("exp");
    auto pair = build_dulut(f, BuildConfig{});
    double eps = pair.report.are_epsilon;
    double pair_err = measure(f, pair.pair, eps).max_rel_error;
    double lin128 = measure(f, build_linear_lut(f, 8, 7), eps).max_rel_error;
    double lin256 = measure(f, build_linear_lut(f, 8, 8), eps).max_rel_error;
    EXPECT_LE(pair_err, lin128);
    EXPECT_LE(pair_err, 1.10 * lin256);
}

TEST(Builder, ResolutionConstraintAvoidsCollisionsInSiluBand) {
    FunctionSpec f = FunctionSpec::builtin("silu", -64, 63.5);
    auto b = build_dulut(f, BuildConfig{}, lut::AffineMap::symmetric(0.5, 8));
    EXPECT_EQ(lut::count_collisions(b.pair, {16, 24}), 0);
}

TEST(Measure, ArEpsilonDefaultsToOneStep) {
    lut::AffineMap out{8, 0.125, 0};
    EXPECT_EQ(resolve_are_epsilon(0, out), 0.125);
    EXPECT_EQ(resolve_are_epsilon(0.5, out), 0.5);
}
