#include "fqkit/lut/kernel.hpp"

#include <algorithm>
#include <string>

#include "fqkit/util/error.hpp"
#include "fqkit/util/parallel.hpp"

namespace fqkit::lut {

namespace {

void check_bits(int t_bit, int i_bit) {
    if (t_bit < 2 || t_bit > 12) throw ConfigError("t_bit must be in [2, 12]");
    if (i_bit < 4 || i_bit > 16) throw ConfigError("i_bit must be in [4, 16]");
    if (t_bit > i_bit) throw ConfigError("t_bit must not exceed i_bit");
}

}  // namespace

LutTable::LutTable(int t_bit, int i_bit, std::vector<std::int32_t> entries)
    : LutTable(t_bit, i_bit, std::move(entries), -(std::int32_t{1} << i_bit), (std::int32_t{1} << i_bit) - 1) {}

LutTable::LutTable(int t_bit, int i_bit, std::vector<std::int32_t> entries, std::int32_t entry_min,
                   std::int32_t entry_max)
    : t_bit_(t_bit), i_bit_(i_bit), entries_(std::move(entries)), entry_min_(entry_min), entry_max_(entry_max) {
    check_bits(t_bit, i_bit);
    if (entry_min > entry_max) throw ConfigError("entry_min > entry_max");
    if (entries_.size() != (std::size_t{1} << t_bit) + 1)
        throw ConfigError("table needs 2^t_bit + 1 entries, got " + std::to_string(entries_.size()));
    for (auto e : entries_)
        if (e < entry_min_ || e > entry_max_)
            throw RangeError("table entry " + std::to_string(e) + " outside [" + std::to_string(entry_min_) + ", " +
                             std::to_string(entry_max_) + "]");
}

LutTable LutTable::identity(int t_bit, int i_bit) {
    check_bits(t_bit, i_bit);
    std::int32_t n = std::int32_t{1} << t_bit;
    std::int32_t step = std::int32_t{1} << (i_bit - t_bit);
    std::int32_t base = std::int32_t{1} << (i_bit - 1);
    std::vector<std::int32_t> e(n + 1);
    for (std::int32_t j = 0; j <= n; ++j) e[j] = j * step - base;
    return LutTable(t_bit, i_bit, std::move(e));
}

bool LutTable::monotone() const { return std::is_sorted(entries_.begin(), entries_.end()); }

DulutPair::DulutPair(LutTable table1, LutTable table2, AffineMap input, AffineMap output)
    : table1_(std::move(table1)), table2_(std::move(table2)), input_(input), output_(output) {
    if (table1_.i_bit() != table2_.i_bit()) throw ConfigError("pair tables must share i_bit");
    if (input_.bits != table1_.i_bit() || output_.bits != table2_.i_bit())
        throw ConfigError("pair code maps must use the table bit width");
    if (!table1_.monotone()) throw ConfigError("table1 is not monotone");
    auto [lo, hi] = std::minmax_element(table1_.entries().begin(), table1_.entries().end());
    if (*lo < table2_.q_min() || *hi > table2_.q_max() + 1)
        throw RangeError("table1 entries leave the input range of table2");
    if (!(input_.scale > 0.0) || !(output_.scale > 0.0)) throw ConfigError("pair scales must be positive");
}

std::int32_t lut_eval(std::int32_t code, const LutTable& table) {
    if (code < table.q_min() || code > table.q_max())
        throw RangeError("input code " + std::to_string(code) + " outside [" + std::to_string(table.q_min()) + ", " +
                         std::to_string(table.q_max()) + "]");
    const auto& t = table.entries();
    const int shift_bit = table.shift_bit();
    const std::int64_t x = static_cast<std::int64_t>(code) + (std::int64_t{1} << (table.i_bit() - 1));
    std::int64_t y;
    if (shift_bit == 0) {
        y = t[static_cast<std::size_t>(x)];
    } else {
        const std::int64_t shift_num = std::int64_t{1} << shift_bit;
        const std::int64_t idx = x >> shift_bit;
        const std::int64_t p = x & (shift_num - 1);
        const std::int64_t s = (shift_num - p) * t[static_cast<std::size_t>(idx)] + p * t[static_cast<std::size_t>(idx + 1)];
        // arithmetic shift == floor division, also for negative sums
        y = (s + (std::int64_t{1} << (shift_bit - 1))) >> shift_bit;
    }
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(y, table.q_min(), table.q_max()));
}

namespace {

template <typename Eval>
IntTensor map_codes(const IntTensor& codes, Eval&& eval) {
    std::vector<std::int32_t> out(codes.size());
    auto in = codes.data();
    parallel_for(codes.size(), 1 << 14, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = eval(in[i]);
    });
    return IntTensor(codes.shape(), std::move(out));
}

template <typename Eval>
std::int64_t collisions(CodeRange r, Eval&& eval) {
    if (r.lo > r.hi) throw RangeError("empty code range");
    std::int64_t n = 0;
    std::int32_t prev = eval(r.lo);
    for (std::int32_t c = r.lo + 1; c <= r.hi; ++c) {
        std::int32_t cur = eval(c);
        if (cur == prev) ++n;
        prev = cur;
    }
    return n;
}

}  // namespace

IntTensor lut_eval_batch(const IntTensor& codes, const LutTable& table) {
    return map_codes(codes, [&](std::int32_t c) { return lut_eval(c, table); });
}

std::int32_t dulut_eval(std::int32_t code, const DulutPair& pair) {
    return lut_eval(lut_eval(code, pair.table1()), pair.table2());
}

IntTensor dulut_eval_batch(const IntTensor& codes, const DulutPair& pair) {
    return map_codes(codes, [&](std::int32_t c) { return dulut_eval(c, pair); });
}

std::int64_t count_collisions(const LutTable& table, CodeRange range) {
    return collisions(range, [&](std::int32_t c) { return lut_eval(c, table); });
}

std::int64_t count_collisions(const DulutPair& pair, CodeRange range) {
    return collisions(range, [&](std::int32_t c) { return dulut_eval(c, pair); });
}

}  // namespace fqkit::lut
