#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fqkit/dulut/builder.hpp"
#include "fqkit/lut/io.hpp"
#include "fqkit/lut/kernel.hpp"
#include "fqkit/util/error.hpp"
#include "support/oracles.hpp"

using namespace fqkit;
using namespace fqkit::lut;

namespace {

LutTable random_table(int t_bit, int i_bit, unsigned seed) {
    std::mt19937 rng(seed);
    std::int32_t lim = std::int32_t{1} << i_bit;  // i_bit + 1 signed bits
    std::uniform_int_distribution<std::int32_t> d(-lim, lim - 1);
    std::vector<std::int32_t> e((std::size_t{1} << t_bit) + 1);
    for (auto& v : e) v = d(rng);
    return LutTable(t_bit, i_bit, e);
}

}  // namespace

TEST(Kernel, MatchesBigIntegerOracleExhaustively) {
    for (int i_bit : {4, 8}) {
        for (int t_bit = 2; t_bit <= i_bit; ++t_bit) {
            for (unsigned seed = 0; seed < 5; ++seed) {
                LutTable t = random_table(t_bit, i_bit, seed * 31 + t_bit);
                for (std::int32_t c = t.q_min(); c <= t.q_max(); ++c)
                    ASSERT_EQ(lut_eval(c, t), oracle::lut_blend(c, t.entries(), t_bit, i_bit))
                        << "i_bit " << i_bit << " t_bit " << t_bit << " code " << c;
            }
        }
    }
}

TEST(Kernel, SixteenBitSpotCheck) {
    LutTable t = random_table(6, 16, 99);
    for (std::int32_t c = t.q_min(); c <= t.q_max(); c += 97)
        ASSERT_EQ(lut_eval(c, t), oracle::lut_blend(c, t.entries(), 6, 16));
}

TEST(Kernel, IdentityReproducesCodes) {
    for (int i_bit : {4, 8, 10})
        for (int t_bit = 2; t_bit <= i_bit; ++t_bit) {
            auto t = LutTable::identity(t_bit, i_bit);
            for (std::int32_t c = t.q_min(); c <= t.q_max(); ++c) ASSERT_EQ(lut_eval(c, t), c);
        }
}

TEST(Kernel, DirectIndexingWhenShiftIsZero) {
    auto t = random_table(4, 4, 3);
    for (std::int32_t c = -8; c <= 7; ++c)
        EXPECT_EQ(lut_eval(c, t), std::clamp(t.entries()[c + 8], -8, 7));
}

TEST(Kernel, OutOfRangeCodeThrows) {
    auto t = LutTable::identity(3, 4);
    EXPECT_THROW(lut_eval(8, t), RangeError);
    EXPECT_THROW(lut_eval(-9, t), RangeError);
}

TEST(Kernel, TableValidation) {
    EXPECT_THROW(LutTable(5, 4, std::vector<std::int32_t>(33)), ConfigError);
    EXPECT_THROW(LutTable(3, 4, std::vector<std::int32_t>(8)), ConfigError);
    EXPECT_THROW(LutTable(3, 4, std::vector<std::int32_t>(9, 100)), Error);
}

TEST(Kernel, BatchEqualsLoopAndCommutesWithPermutation) {
    auto t = random_table(5, 8, 17);
    std::vector<std::int32_t> codes(256);
    std::iota(codes.begin(), codes.end(), -128);
    std::shuffle(codes.begin(), codes.end(), std::mt19937(1));
    IntTensor in({16, 16}, codes);
    IntTensor out = lut_eval_batch(in, t);
    EXPECT_EQ(out.shape(), in.shape());
    for (std::size_t i = 0; i < codes.size(); ++i) EXPECT_EQ(out[i], lut_eval(codes[i], t));
    EXPECT_TRUE(lut_eval_batch(IntTensor(), t).empty());
}

TEST(Pair, IdentityFirstStageCollapsesToSecond) {
    auto t2 = random_table(5, 8, 5);
    DulutPair pair(LutTable::identity(8, 8), t2, AffineMap{}, AffineMap{});
    for (std::int32_t c = -128; c <= 127; ++c) EXPECT_EQ(dulut_eval(c, pair), lut_eval(c, t2));
}

TEST(Pair, MonotoneStagesGiveMonotoneComposite) {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::int32_t> e1(33), e2(33);
        std::uniform_int_distribution<std::int32_t> d1(-128, 128), d2(-200, 200);
        for (auto& x : e1) x = d1(rng);
        for (auto& x : e2) x = d2(rng);
        std::sort(e1.begin(), e1.end());
        std::sort(e2.begin(), e2.end());
        DulutPair pair(LutTable(5, 8, e1), LutTable(5, 8, e2), AffineMap{}, AffineMap{});
        for (std::int32_t c = -127; c <= 127; ++c) ASSERT_LE(dulut_eval(c - 1, pair), dulut_eval(c, pair));
    }
}

TEST(Pair, MismatchedWidthsRejected) {
    EXPECT_THROW(DulutPair(LutTable::identity(4, 8), LutTable::identity(4, 6), AffineMap{}, AffineMap{}), ConfigError);
}

TEST(Collisions, MatchBruteForce) {
    for (unsigned seed = 0; seed < 10; ++seed) {
        auto t = random_table(4, 8, seed);
        std::vector<std::int64_t> outs;
        for (std::int32_t c = -128; c <= 127; ++c) outs.push_back(lut_eval(c, t));
        EXPECT_EQ(count_collisions(t, {-128, 127}), oracle::adjacent_collisions(outs));
    }
}

TEST(Collisions, SteepTableWithinShiftHasNone) {
    // slope of at least one output per code: shift_num = 8, entries 8 apart
    std::vector<std::int32_t> e(33);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = static_cast<std::int32_t>(j) * 8 - 128;
    LutTable t(5, 8, e);
    EXPECT_EQ(count_collisions(t, {-128, 127}), 0);
    EXPECT_EQ(count_collisions(t, {0, 7}), 0);
}

TEST(Io, JsonAndBinaryRoundtrip) {
    auto built = dulut::build_dulut(dulut::FunctionSpec::builtin("exp", -20, 0), dulut::BuildConfig{});
    const DulutPair& p = built.pair;
    EXPECT_EQ(pair_from_json(to_json(p)), p);
    auto a = from_binary(to_binary(p));
    ASSERT_EQ(a.tables.size(), 2u);
    EXPECT_EQ(DulutPair(a.tables[0], a.tables[1], a.input, a.output), p);

    auto lin = dulut::build_linear_lut(dulut::FunctionSpec::builtin("silu", -8, 8), 8, 5);
    EXPECT_EQ(linear_from_json(to_json(lin)), lin);
    auto b = from_binary(to_binary(lin));
    ASSERT_EQ(b.tables.size(), 1u);
    EXPECT_EQ(b.tables[0], lin.table);
    EXPECT_EQ(table_from_json(to_json(lin.table)), lin.table);
}

TEST(Io, RejectsCorruptInput) {
    auto lin = dulut::build_linear_lut(dulut::FunctionSpec::builtin("exp", -20, 0), 8, 5);
    std::string bin = to_binary(lin);
    EXPECT_THROW(from_binary(bin.substr(0, bin.size() - 1)), Error);
    EXPECT_THROW(from_binary(bin + "x"), Error);
    std::string bad = bin;
    bad[0] = 'X';
    EXPECT_THROW(from_binary(bad), Error);
    EXPECT_THROW(pair_from_json("{\"table1\": 3}"), Error);
    EXPECT_THROW(pair_from_json("not json"), Error);
}
