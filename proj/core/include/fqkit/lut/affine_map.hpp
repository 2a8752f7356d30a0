#pragma once

#include <cstdint>

namespace fqkit::lut {

// Affine code <-> real mapping for table domains and ranges:
//   real(c) = (c - zero_point) * scale
// The zero point is real-valued so a table can cover an arbitrary interval
// with all 2^bits codes. With zero_point = 0 it is the symmetric quantizer.
struct AffineMap {
    int bits = 8;
    double scale = 1.0;
    double zero_point = 0.0;

    std::int32_t q_min() const { return -(std::int32_t{1} << (bits - 1)); }
    std::int32_t q_max() const { return (std::int32_t{1} << (bits - 1)) - 1; }
    std::int32_t code_count() const { return std::int32_t{1} << bits; }

    double real(double code) const { return (code - zero_point) * scale; }

    // nearest code, saturated to [q_min, q_max + extra_top]
    std::int32_t code(double value, std::int32_t extra_top = 0) const;

    // q_min -> lo and q_max -> hi
    static AffineMap from_range(double lo, double hi, int bits);
    static AffineMap symmetric(double scale, int bits) { return AffineMap{bits, scale, 0.0}; }

    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

}  // namespace fqkit::lut
