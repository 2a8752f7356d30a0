#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fqkit/attn/attn_sim.hpp"
#include "fqkit/qans/softmax.hpp"
#include "fqkit/util/error.hpp"

using namespace fqkit;
using namespace fqkit::qans;

namespace {

Tensor random_logits(std::size_t rows, std::size_t cols, double spread, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-spread, spread);
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = d(rng);
    return Tensor({rows, cols}, v);
}

double row_sum(const Tensor& t, std::size_t r) {
    double s = 0;
    for (std::size_t c = 0; c < t.shape()[1]; ++c) s += t.at(r, c);
    return s;
}

}  // namespace

TEST(Stabilize, Examples) {
    EXPECT_EQ(stabilize(Tensor::vector({0, 0, 0}), 0).values(), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(stabilize(Tensor::vector({500, -500}), 0).values(), (std::vector<double>{0, -1000}));
    EXPECT_THROW(stabilize(Tensor({2, 0}, std::vector<double>{}), 1), ShapeError);
    EXPECT_THROW(stabilize(Tensor::vector({1, INFINITY}), 0), RangeError);
}

TEST(Stabilize, RowMaxIsZeroAndSoftmaxUnchanged) {
    Tensor x = random_logits(8, 17, 50, 1);
    Tensor s = stabilize(x, 1);
    for (std::size_t r = 0; r < 8; ++r) {
        double m = -INFINITY;
        for (std::size_t c = 0; c < 17; ++c) m = std::max(m, s.at(r, c));
        EXPECT_EQ(m, 0.0);
    }
    Tensor a = softmax(x, 1), b = softmax(s, 1);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Softmax, ShiftInvariance) {
    Tensor x = random_logits(4, 33, 20, 2);
    Tensor y = x;
    for (auto& v : y.data()) v += 123.25;
    Tensor a = softmax(x, 1), b = softmax(y, 1);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Softmax, AlongLeadingAxis) {
    Tensor x = random_logits(5, 3, 10, 3);
    Tensor p = softmax(x, 0);
    for (std::size_t c = 0; c < 3; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < 5; ++r) s += p.at(r, c);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Candidates, QuantizationExamples) {
    QansConfig cfg;
    EXPECT_DOUBLE_EQ(candidate_scale(20, 8), 0.15625);
    Tensor xs = Tensor::vector({0.0, -1000.0, -0.07});
    Tensor q = quantize_stabilized(xs, 20, cfg);
    EXPECT_EQ(q[0], 0.0);
    EXPECT_DOUBLE_EQ(q[1], -20.0);
    EXPECT_EQ(q[2], 0.0);
    EXPECT_THROW(stabilized_codes(Tensor::vector({0.5}), 3, cfg), RangeError);
}

TEST(Candidates, RangeIsMinusIToZero) {
    QansConfig cfg;
    Tensor xs = stabilize(random_logits(4, 64, 300, 4), 1);
    for (int i = 1; i <= 40; ++i) {
        Tensor q = quantize_stabilized(xs, i, cfg);
        for (double v : q.values()) {
            EXPECT_LE(v, 0.0);
            EXPECT_GE(v, -static_cast<double>(i) - 1e-12);
        }
        IntTensor codes = stabilized_codes(xs, i, cfg);
        for (auto c : codes.values()) {
            EXPECT_LE(c, 0);
            EXPECT_GE(c, -128);
        }
    }
}

TEST(Config, Validation) {
    QansConfig c;
    c.n = 0;
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.k = 1;
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.frozen_index = 0;
    EXPECT_THROW(validate(c), ConfigError);
    EXPECT_EQ(parse_error_norm("l2"), ErrorNorm::l2);
    EXPECT_THROW(parse_error_norm("linf"), UsageError);
}

TEST(Qans, EqualLogitsPickFirstCandidate) {
    Tensor x({3, 8}, 2.5);
    auto r = qans_softmax(x, 1, QansConfig{});
    EXPECT_EQ(r.selected_i, 1);
    for (double e : r.per_candidate_error) EXPECT_EQ(e, 0.0);
}

TEST(Qans, SelectionIsBruteForceArgmin) {
    for (auto norm : {ErrorNorm::l1, ErrorNorm::l2}) {
        QansConfig cfg;
        cfg.norm = norm;
        cfg.n = 30;
        Tensor x = random_logits(16, 64, 200, 5);
        auto r = qans_softmax(x, 1, cfg);
        Tensor pf = softmax(x, 1);
        int best = 1;
        double best_err = INFINITY;
        for (int i = 1; i <= cfg.n; ++i) {
            Tensor pq = softmax(quantize_stabilized(stabilize(x, 1), i, cfg), 1);
            double e = distribution_error(pf, pq, 1, norm);
            EXPECT_DOUBLE_EQ(e, r.per_candidate_error[i - 1]);
            if (e < best_err) best_err = e, best = i;
        }
        EXPECT_EQ(r.selected_i, best);
        EXPECT_DOUBLE_EQ(r.selected_scale, candidate_scale(best, cfg.k));
        for (std::size_t row = 0; row < 16; ++row) EXPECT_NEAR(row_sum(r.p_q, row), 1.0, 1e-12);
    }
}

TEST(Qans, ErrorPlateausOnceRangeIsCovered) {
    attn::SuiteConfig sc;
    sc.instances = 1;
    sc.rows = 64;
    Tensor x = attn::suite_logits(sc, 0);
    QansConfig cfg;
    cfg.n = 40;
    auto r = qans_softmax(x, 1, cfg);
    auto best_of = [&](int n) {
        return *std::min_element(r.per_candidate_error.begin(), r.per_candidate_error.begin() + n);
    };
    EXPECT_GT(best_of(1), 10 * best_of(20));
    EXPECT_LE(std::abs(best_of(20) - best_of(40)), 0.05 * best_of(20));
}

TEST(Qans, FrozenIndexSkipsSelection) {
    Tensor x = random_logits(4, 32, 100, 6);
    QansConfig cfg;
    cfg.frozen_index = 7;
    auto r = qans_softmax(x, 1, cfg);
    EXPECT_EQ(r.selected_i, 7);
    Tensor expect = softmax(quantize_stabilized(stabilize(x, 1), 7, cfg), 1);
    EXPECT_EQ(r.p_q, expect);
}

TEST(Qans, CalibratedIndexMinimisesSummedError) {
    std::vector<Tensor> batches{random_logits(8, 32, 100, 7), random_logits(8, 32, 100, 8)};
    QansConfig cfg;
    int idx = calibrate_index(batches, 1, cfg);
    auto total = [&](int i) {
        double s = 0;
        for (const auto& b : batches)
            s += distribution_error(softmax(b, 1), softmax(quantize_stabilized(stabilize(b, 1), i, cfg), 1), 1,
                                    cfg.norm);
        return s;
    };
    for (int i = 1; i <= cfg.n; ++i) EXPECT_LE(total(idx), total(i));
}

TEST(NaiveQuant, SmallRangeMatchesFloat) {
    Tensor x = random_logits(8, 32, 1, 9);
    Tensor a = softmax(x, 1), b = naive_quant_softmax(x, 1, QuantParams(12, 1.0 / 2048));
    EXPECT_LT(distribution_error(a, b, 1, ErrorNorm::l1), 1e-3);
}

TEST(NaiveQuant, WideRangeDistortsAndConstantIsUniform) {
    Tensor x = Tensor({1, 3}, std::vector<double>{0, 200, 400});
    Tensor b = naive_quant_softmax(x, 1, QuantParams(8, 5.0));
    EXPECT_NEAR(b.at(0, 0) + b.at(0, 1) + b.at(0, 2), 1.0, 1e-12);
    // a near tie collapses onto one code and the peak halves
    Tensor tie = Tensor({1, 3}, std::vector<double>{0, 398, 400});
    Tensor pf = softmax(tie, 1), pq = naive_quant_softmax(tie, 1, QuantParams(8, 5.0));
    EXPECT_GT(pf.at(0, 2), 0.85);
    EXPECT_NEAR(pq.at(0, 2), 0.5, 1e-12);
    Tensor c = naive_quant_softmax(Tensor({1, 4}, 3.0), 1, QuantParams(8, 5.0));
    for (double v : c.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(IntegerSoftmax, Basics) {
    QansConfig cfg;
    auto pair = build_exp_pair(20, cfg).pair;
    Tensor one = integer_softmax_via_dulut(IntTensor({2, 1}, std::vector<std::int32_t>{-5, 0}), 1, pair);
    EXPECT_EQ(one.values(), (std::vector<double>{1.0, 1.0}));
    Tensor flat = integer_softmax_via_dulut(IntTensor({1, 8}, -3), 1, pair);
    for (double v : flat.values()) EXPECT_EQ(v, 0.125);
}

TEST(IntegerSoftmax, AgreesWithinPairBudget) {
    QansConfig cfg;
    Tensor x = random_logits(32, 64, 40, 10);
    auto r = qans_softmax(x, 1, cfg);
    auto built = build_exp_pair(r.selected_i, cfg);
    IntTensor codes = stabilized_codes(stabilize(x, 1), r.selected_i, cfg);
    Tensor pi = integer_softmax_via_dulut(codes, 1, built.pair);
    const double budget = built.report.max_rel_error * 64 + 64 * std::ldexp(1.0, -24);
    for (std::size_t row = 0; row < 32; ++row) {
        double l1 = 0;
        for (std::size_t c = 0; c < 64; ++c) l1 += std::abs(pi.at(row, c) - r.p_q.at(row, c));
        EXPECT_LE(l1, budget);
    }
}

TEST(IntegerSoftmax, AccumulatorOverflowIsRejected) {
    QansConfig cfg;
    auto pair = build_exp_pair(20, cfg).pair;
    IntegerSoftmaxConfig narrow{12};
    EXPECT_THROW(integer_softmax_via_dulut(IntTensor({1, 64}, 0), 1, pair, narrow), RangeError);
}
