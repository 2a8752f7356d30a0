#include "fqkit/qans/softmax.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "fqkit/util/error.hpp"
#include "fqkit/util/parallel.hpp"

namespace fqkit::qans {

ErrorNorm parse_error_norm(std::string_view name) {
    if (name == "l1" || name == "L1") return ErrorNorm::l1;
    if (name == "l2" || name == "L2") return ErrorNorm::l2;
    throw UsageError("unknown error norm '" + std::string(name) + "'");
}

std::string_view norm_name(ErrorNorm n) { return n == ErrorNorm::l1 ? "l1" : "l2"; }

void validate(const QansConfig& cfg) {
    if (cfg.k < 2 || cfg.k > 16) throw ConfigError("QANS bit width must be in [2, 16]");
    if (cfg.n < 1) throw ConfigError("QANS needs at least one candidate");
    if (cfg.frozen_index && (*cfg.frozen_index < 1 || *cfg.frozen_index > cfg.n))
        throw ConfigError("frozen candidate index outside [1, n]");
}

double candidate_scale(int i, int k) {
    if (i < 1) throw ConfigError("candidate index starts at 1");
    return std::ldexp(static_cast<double>(i), -(k - 1));
}

Tensor stabilize(const Tensor& logits, std::size_t axis) {
    if (!all_finite(logits)) throw RangeError("logits must be finite");
    Tensor out = logits;
    for_each_lane(logits.shape(), axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        if (len == 0) throw ShapeError("softmax over an empty axis");
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < len; ++j) m = std::max(m, out[off + j * stride]);
        for (std::size_t j = 0; j < len; ++j) out[off + j * stride] -= m;
    });
    return out;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    Tensor out = stabilize(x, axis);
    for_each_lane(out.shape(), axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        double sum = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            double& v = out[off + j * stride];
            v = std::exp(v);
            sum += v;
        }
        for (std::size_t j = 0; j < len; ++j) out[off + j * stride] /= sum;
    });
    return out;
}

IntTensor stabilized_codes(const Tensor& x_s, int i, const QansConfig& cfg) {
    validate(cfg);
    const double s = candidate_scale(i, cfg.k);
    const double lo = -std::ldexp(1.0, cfg.k - 1);
    const double hi = std::ldexp(1.0, cfg.k - 1) - 1.0;
    std::vector<std::int32_t> codes(x_s.size());
    for (std::size_t j = 0; j < x_s.size(); ++j) {
        double v = x_s[j];
        if (!(v <= 0.0)) throw RangeError("stabilized logits must be non-positive");
        codes[j] = static_cast<std::int32_t>(std::clamp(round_half_away(v / s), lo, hi));
    }
    return IntTensor(x_s.shape(), std::move(codes));
}

Tensor quantize_stabilized(const Tensor& x_s, int i, const QansConfig& cfg) {
    IntTensor codes = stabilized_codes(x_s, i, cfg);
    const double s = candidate_scale(i, cfg.k);
    std::vector<double> out(codes.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = codes[j] * s + 0.0;
    return Tensor(x_s.shape(), std::move(out));
}

double distribution_error(const Tensor& p, const Tensor& q, std::size_t axis, ErrorNorm norm) {
    if (p.shape() != q.shape()) throw ShapeError("distribution shapes differ");
    double total = 0.0;
    std::size_t lanes = 0;
    for_each_lane(p.shape(), axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        double acc = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            double d = p[off + j * stride] - q[off + j * stride];
            acc += norm == ErrorNorm::l1 ? std::abs(d) : d * d;
        }
        total += norm == ErrorNorm::l1 ? acc : std::sqrt(acc);
        ++lanes;
    });
    return lanes == 0 ? 0.0 : total / static_cast<double>(lanes);
}

namespace {

Tensor candidate_softmax(const Tensor& x_s, std::size_t axis, int i, const QansConfig& cfg) {
    return softmax(quantize_stabilized(x_s, i, cfg), axis);
}

std::vector<double> candidate_errors(const Tensor& x_s, const Tensor& p_f, std::size_t axis,
                                     const QansConfig& cfg) {
    std::vector<double> err(static_cast<std::size_t>(cfg.n));
    parallel_for(err.size(), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c)
            err[c] = distribution_error(p_f, candidate_softmax(x_s, axis, static_cast<int>(c) + 1, cfg), axis,
                                        cfg.norm);
    });
    return err;
}

int first_argmin(const std::vector<double>& v) {
    return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin()) + 1;
}

}  // namespace

QansResult qans_softmax(const Tensor& logits, std::size_t axis, const QansConfig& cfg) {
    validate(cfg);
    Tensor x_s = stabilize(logits, axis);
    QansResult r;
    r.p_f = softmax(x_s, axis);
    r.per_candidate_error = candidate_errors(x_s, r.p_f, axis, cfg);
    r.selected_i = cfg.frozen_index ? *cfg.frozen_index : first_argmin(r.per_candidate_error);
    r.selected_scale = candidate_scale(r.selected_i, cfg.k);
    r.p_q = candidate_softmax(x_s, axis, r.selected_i, cfg);
    return r;
}

int calibrate_index(std::span<const Tensor> batches, std::size_t axis, const QansConfig& cfg) {
    validate(cfg);
    if (batches.empty()) throw ConfigError("calibration needs at least one batch");
    std::vector<double> total(static_cast<std::size_t>(cfg.n), 0.0);
    for (const Tensor& b : batches) {
        Tensor x_s = stabilize(b, axis);
        auto err = candidate_errors(x_s, softmax(x_s, axis), axis, cfg);
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += err[c];
    }
    return first_argmin(total);
}

Tensor naive_quant_softmax(const Tensor& logits, std::size_t axis, const QuantParams& p) {
    return softmax(dequantize(quantize(logits, p), p), axis);
}

dulut::BuiltPair build_exp_pair(int selected_i, const QansConfig& cfg, ExpPairBudget budget) {
    validate(cfg);
    const double s = candidate_scale(selected_i, cfg.k);
    const double lo = -(std::ldexp(1.0, cfg.k) - 1.0) * s;
    auto f = dulut::FunctionSpec::builtin(dulut::FunctionKind::exp, lo, 0.0);
    dulut::BuildConfig bc;
    bc.input_bits = cfg.k;
    bc.m1 = budget.m1;
    bc.m2 = budget.m2;
    bc.output_range = std::pair{0.0, 1.0};
    return dulut::build_dulut(f, bc, lut::AffineMap::from_range(lo, 0.0, cfg.k));
}

Tensor integer_softmax_via_dulut(const IntTensor& logits_q, std::size_t axis, const lut::DulutPair& pair,
                                 const IntegerSoftmaxConfig& cfg) {
    const auto& out = pair.output();
    if (out.zero_point != static_cast<double>(out.q_min()))
        throw ConfigError("exp pair must map its lowest output code to 0");
    const int bits = pair.input().bits;
    const std::int32_t offset = (std::int32_t{1} << (bits - 1)) - 1;
    const std::int32_t lowest = -(std::int32_t{1} << (bits - 1));
    constexpr int frac_bits = 24;

    std::vector<double> probs(logits_q.size());
    for_each_lane(logits_q.shape(), axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
        if (len == 0) throw ShapeError("softmax over an empty axis");
        int need = bits + static_cast<int>(std::bit_width(len - 1)) + pair.table2().t_bit();
        if (need > cfg.acc_bits)
            throw RangeError("accumulator overflow: row of " + std::to_string(len) + " needs " +
                             std::to_string(need) + " bits, have " + std::to_string(cfg.acc_bits));
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < len; ++j) {
            std::int32_t q = logits_q[off + j * stride];
            if (q > 0 || q < lowest) throw RangeError("QANS code outside [-2^(k-1), 0]");
            std::int64_t w = lut::dulut_eval(q + offset, pair) - out.q_min();
            probs[off + j * stride] = static_cast<double>(w);
            sum += w;
        }
        if (sum == 0) throw RangeError("exp table returned zero for the whole row");
        const std::int64_t recip = (std::int64_t{1} << (2 * frac_bits)) / sum;
        for (std::size_t j = 0; j < len; ++j) {
            double& p = probs[off + j * stride];
            auto w = static_cast<std::int64_t>(p);
            std::int64_t fixed = (w * recip + (std::int64_t{1} << (frac_bits - 1))) >> frac_bits;
            p = std::ldexp(static_cast<double>(fixed), -frac_bits);
        }
    });
    return Tensor(logits_q.shape(), std::move(probs));
}

}  // namespace fqkit::qans
