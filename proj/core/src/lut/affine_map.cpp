#include "fqkit/lut/affine_map.hpp"

#include <algorithm>
#include <cmath>

#include "fqkit/util/error.hpp"

namespace fqkit::lut {

std::int32_t AffineMap::code(double value, std::int32_t extra_top) const {
    double q = std::round(value / scale + zero_point);
    q = std::clamp(q, static_cast<double>(q_min()), static_cast<double>(q_max() + extra_top));
    return static_cast<std::int32_t>(q);
}

AffineMap AffineMap::from_range(double lo, double hi, int bits) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("affine range needs lo < hi");
    if (bits < 2 || bits > 16) throw ConfigError("bits must be in [2, 16]");
    AffineMap m;
    m.bits = bits;
    m.scale = (hi - lo) / static_cast<double>(m.code_count() - 1);
    m.zero_point = static_cast<double>(m.q_min()) - lo / m.scale;
    return m;
}

}  // namespace fqkit::lut
