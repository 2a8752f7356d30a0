#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fqkit/core/tensor.hpp"
#include "fqkit/lut/affine_map.hpp"

namespace fqkit::lut {

// Interpolating table evaluated with the integer blend
//   x = i + 2^(i_bit-1); idx = x >> shift_bit; p = x mod 2^shift_bit
//   y = clip(((2^shift_bit - p) T[idx] + p T[idx+1] + 2^(shift_bit-1)) >> shift_bit)
// Stored entries span i_bit + 1 signed bits by default: the extra slot of an
// identity map holds 2^(i_bit-1), and value tables may overshoot the output
// range by the slope of their last segment.
class LutTable {
public:
    LutTable(int t_bit, int i_bit, std::vector<std::int32_t> entries);
    LutTable(int t_bit, int i_bit, std::vector<std::int32_t> entries, std::int32_t entry_min,
             std::int32_t entry_max);

    // entries[j] = j * shift_num - 2^(i_bit-1); reproduces every code
    static LutTable identity(int t_bit, int i_bit);

    int t_bit() const { return t_bit_; }
    int i_bit() const { return i_bit_; }
    int shift_bit() const { return i_bit_ - t_bit_; }
    std::int32_t shift_num() const { return std::int32_t{1} << shift_bit(); }
    std::int32_t segments() const { return std::int32_t{1} << t_bit_; }
    std::int32_t q_min() const { return -(std::int32_t{1} << (i_bit_ - 1)); }
    std::int32_t q_max() const { return (std::int32_t{1} << (i_bit_ - 1)) - 1; }
    std::int32_t entry_min() const { return entry_min_; }
    std::int32_t entry_max() const { return entry_max_; }
    const std::vector<std::int32_t>& entries() const { return entries_; }

    bool monotone() const;

    friend bool operator==(const LutTable&, const LutTable&) = default;

private:
    int t_bit_;
    int i_bit_;
    std::vector<std::int32_t> entries_;
    std::int32_t entry_min_;
    std::int32_t entry_max_;
};

// Cascaded pair: table1 maps input codes to table2 index space, table2 holds
// the function values. input/output describe the real-valued meaning of the
// codes on either side.
class DulutPair {
public:
    DulutPair(LutTable table1, LutTable table2, AffineMap input, AffineMap output);

    const LutTable& table1() const { return table1_; }
    const LutTable& table2() const { return table2_; }
    const AffineMap& input() const { return input_; }
    const AffineMap& output() const { return output_; }
    double in_scale() const { return input_.scale; }
    double out_scale() const { return output_.scale; }

    friend bool operator==(const DulutPair&, const DulutPair&) = default;

private:
    LutTable table1_;
    LutTable table2_;
    AffineMap input_;
    AffineMap output_;
};

// Single interpolating table with its code maps; the baseline a pair is
// compared against.
struct LinearLut {
    LutTable table;
    AffineMap input;
    AffineMap output;

    friend bool operator==(const LinearLut&, const LinearLut&) = default;
};

struct CodeRange {
    std::int32_t lo;
    std::int32_t hi;  // inclusive
};

std::int32_t lut_eval(std::int32_t code, const LutTable& table);
IntTensor lut_eval_batch(const IntTensor& codes, const LutTable& table);

std::int32_t dulut_eval(std::int32_t code, const DulutPair& pair);
IntTensor dulut_eval_batch(const IntTensor& codes, const DulutPair& pair);

inline std::int32_t eval_code(std::int32_t code, const LinearLut& lut) { return lut_eval(code, lut.table); }
inline std::int32_t eval_code(std::int32_t code, const DulutPair& pair) { return dulut_eval(code, pair); }

// Adjacent code pairs (c, c+1) inside the range with identical outputs.
std::int64_t count_collisions(const LutTable& table, CodeRange range);
std::int64_t count_collisions(const DulutPair& pair, CodeRange range);

}  // namespace fqkit::lut
