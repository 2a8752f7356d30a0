#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fqkit/util/error.hpp"

namespace fqkit {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

// Dense row-major tensor. A zero extent is allowed and yields an empty
// tensor; the default-constructed tensor has shape {0}.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() : shape_{0} {}

    BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_.empty()) throw ShapeError("tensor needs at least one dimension");
        if (element_count(shape_) != data_.size()) throw ShapeError("tensor shape does not match data length");
    }

    explicit BasicTensor(Shape shape, T fill = T{})
        : BasicTensor(shape, std::vector<T>(element_count(shape), fill)) {}

    static BasicTensor vector(std::vector<T> data) {
        Shape s{data.size()};
        return BasicTensor(std::move(s), std::move(data));
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }
    const std::vector<T>& values() const { return data_; }

    const T& operator[](std::size_t i) const { return data_[i]; }
    T& operator[](std::size_t i) { return data_[i]; }

    // 2-D convenience accessors
    const T& at(std::size_t r, std::size_t c) const { return data_[r * shape_.back() + c]; }
    T& at(std::size_t r, std::size_t c) { return data_[r * shape_.back() + c]; }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using IntTensor = BasicTensor<std::int32_t>;

bool all_finite(const Tensor& t);

// Iterates the 1-D lanes of a tensor along `axis`: for each lane calls
// fn(offset, stride, length) where element j sits at offset + j*stride.
template <typename Fn>
void for_each_lane(const Shape& shape, std::size_t axis, Fn&& fn) {
    if (axis >= shape.size()) throw ShapeError("axis out of range");
    std::size_t len = shape[axis];
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
    std::size_t outer = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= shape[d];
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) fn(o * len * inner + i, inner, len);
}

}  // namespace fqkit
