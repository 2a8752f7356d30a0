#include "fqkit/core/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace fqkit {

bool all_finite(const Tensor& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fqkit
