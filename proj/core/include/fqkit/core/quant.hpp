#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "fqkit/core/tensor.hpp"

namespace fqkit {

// Round half away from zero, the tie rule used for every real -> code
// conversion in the library.
double round_half_away(double v);

class QuantParams {
public:
    QuantParams(int bit_width, double scale);

    int bit_width() const { return bits_; }
    double scale() const { return scale_; }
    std::int32_t q_min() const { return -(std::int32_t{1} << (bits_ - 1)); }
    std::int32_t q_max() const { return (std::int32_t{1} << (bits_ - 1)) - 1; }

    friend bool operator==(const QuantParams&, const QuantParams&) = default;

private:
    int bits_;
    double scale_;
};

struct CalibStats {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t sample_count = 0;
};

enum class CalibMode { symmetric, asymmetric };

CalibStats collect_stats(std::span<const Tensor> samples);

// symmetric:  s = max(|x_max|, |x_min|) * 2 / 2^k
// asymmetric: s = (x_max - x_min) / 2^k
QuantParams calibrate(const CalibStats& stats, int k, CalibMode mode = CalibMode::symmetric);
QuantParams calibrate(std::span<const Tensor> samples, int k, CalibMode mode = CalibMode::symmetric);

std::int32_t quantize(double x, const QuantParams& p);
IntTensor quantize(const Tensor& x, const QuantParams& p);

double dequantize(std::int32_t q, const QuantParams& p);
Tensor dequantize(const IntTensor& q, const QuantParams& p);

std::string to_json(const QuantParams& p);
QuantParams quant_params_from_json(std::string_view text);

}  // namespace fqkit
