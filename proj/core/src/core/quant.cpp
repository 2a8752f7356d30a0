#include "fqkit/core/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "fqkit/util/error.hpp"

namespace fqkit {

double round_half_away(double v) { return std::round(v); }

QuantParams::QuantParams(int bit_width, double scale) : bits_(bit_width), scale_(scale) {
    if (bit_width < 2 || bit_width > 16) throw ConfigError("bit_width must be in [2, 16]");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be positive and finite");
}

CalibStats collect_stats(std::span<const Tensor> samples) {
    CalibStats st;
    st.x_min = std::numeric_limits<double>::infinity();
    st.x_max = -std::numeric_limits<double>::infinity();
    for (const auto& t : samples) {
        for (double v : t.data()) {
            if (!std::isfinite(v)) throw RangeError("calibration sample is not finite");
            st.x_min = std::min(st.x_min, v);
            st.x_max = std::max(st.x_max, v);
        }
        st.sample_count += t.size();
    }
    if (st.sample_count == 0) throw ConfigError("empty calibration sample set");
    return st;
}

QuantParams calibrate(const CalibStats& stats, int k, CalibMode mode) {
    if (stats.sample_count == 0) throw ConfigError("empty calibration sample set");
    if (stats.x_min > stats.x_max) throw ConfigError("calibration stats have x_min > x_max");
    double levels = std::ldexp(1.0, k);
    double s = mode == CalibMode::symmetric
                   ? std::max(std::abs(stats.x_max), std::abs(stats.x_min)) * 2.0 / levels
                   : (stats.x_max - stats.x_min) / levels;
    if (!(s > 0.0)) throw ConfigError("degenerate calibration");
    return QuantParams(k, s);
}

QuantParams calibrate(std::span<const Tensor> samples, int k, CalibMode mode) {
    return calibrate(collect_stats(samples), k, mode);
}

std::int32_t quantize(double x, const QuantParams& p) {
    double q = round_half_away(x / p.scale());
    q = std::clamp(q, static_cast<double>(p.q_min()), static_cast<double>(p.q_max()));
    return static_cast<std::int32_t>(q);
}

IntTensor quantize(const Tensor& x, const QuantParams& p) {
    std::vector<std::int32_t> out(x.size());
    std::transform(x.data().begin(), x.data().end(), out.begin(), [&](double v) { return quantize(v, p); });
    return IntTensor(x.shape(), std::move(out));
}

double dequantize(std::int32_t q, const QuantParams& p) {
    if (q < p.q_min() || q > p.q_max()) throw RangeError("code outside quantizer bounds");
    return static_cast<double>(q) * p.scale();
}

Tensor dequantize(const IntTensor& q, const QuantParams& p) {
    std::vector<double> out(q.size());
    std::transform(q.data().begin(), q.data().end(), out.begin(), [&](std::int32_t v) { return dequantize(v, p); });
    return Tensor(q.shape(), std::move(out));
}

std::string to_json(const QuantParams& p) {
    nlohmann::json j{{"bit_width", p.bit_width()}, {"scale", p.scale()}};
    return j.dump();
}

QuantParams quant_params_from_json(std::string_view text) {
    try {
        auto j = nlohmann::json::parse(text);
        return QuantParams(j.at("bit_width").get<int>(), j.at("scale").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad QuantParams json: ") + e.what());
    }
}

}  // namespace fqkit
