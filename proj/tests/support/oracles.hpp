#pragma once

// Independent references the library is checked against. Nothing here calls
// into the code under test.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

namespace fqkit::oracle {

using big = boost::multiprecision::cpp_int;

// floor(a / b) for b > 0 with arbitrary-precision integers
inline big floor_div(const big& a, const big& b) {
    big q = a / b;  // truncates toward zero
    if (a % b != 0 && a < 0) q -= 1;
    return q;
}

// The interpolating table blend written out with exact integers and
// explicit floor division instead of shifts and masks.
inline std::int64_t lut_blend(std::int64_t code, const std::vector<std::int32_t>& table, int t_bit, int i_bit) {
    const int shift_bit = i_bit - t_bit;
    const big shift_num = big(1) << shift_bit;
    const big x = big(code) + (big(1) << (i_bit - 1));
    const big idx = floor_div(x, shift_num);
    const big p = x - idx * shift_num;
    const auto i = static_cast<std::size_t>(idx);
    big y;
    if (shift_bit == 0) {
        y = table[i];
    } else {
        big s = (shift_num - p) * big(table[i]) + p * big(table[i + 1]);
        y = floor_div(s + shift_num / 2, shift_num);
    }
    const big lo = -(big(1) << (i_bit - 1));
    const big hi = (big(1) << (i_bit - 1)) - 1;
    if (y < lo) y = lo;
    if (y > hi) y = hi;
    return static_cast<std::int64_t>(y);
}

// Adjacent equal outputs over an explicit output list.
inline std::int64_t adjacent_collisions(const std::vector<std::int64_t>& outputs) {
    std::int64_t n = 0;
    for (std::size_t i = 1; i < outputs.size(); ++i)
        if (outputs[i] == outputs[i - 1]) ++n;
    return n;
}

}  // namespace fqkit::oracle
