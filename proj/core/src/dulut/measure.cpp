#include "fqkit/dulut/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fqkit/util/error.hpp"

namespace fqkit::dulut {

using lut::AffineMap;

double resolve_are_epsilon(double are_epsilon, const AffineMap& output) {
    return are_epsilon > 0.0 ? are_epsilon : output.scale;
}

namespace {

template <typename Lut>
ErrorProfile profile(const FunctionSpec& f, const Lut& table, const AffineMap& in, const AffineMap& out,
                     double are_epsilon) {
    ErrorProfile p;
    p.are_epsilon = resolve_are_epsilon(are_epsilon, out);
    p.codes.reserve(static_cast<std::size_t>(in.code_count()));
    double sum_rel = 0.0;
    for (std::int32_t c = in.q_min(); c <= in.q_max(); ++c) {
        CodeError e;
        e.code_in = c;
        e.real_in = in.real(c);
        e.f = f(e.real_in);
        if (!std::isfinite(e.f)) throw RangeError("function is not finite on its domain");
        e.code_out = lut::eval_code(c, table);
        e.fhat = out.real(e.code_out);
        e.ideal = out.real(out.code(e.f));
        e.abs_err = std::abs(e.f - e.fhat);
        double denom = std::abs(e.f) + p.are_epsilon;
        e.rel_err = e.abs_err / denom;
        e.excess = std::max(0.0, (e.abs_err - std::abs(e.f - e.ideal)) / denom);
        p.max_rel_error = std::max(p.max_rel_error, e.rel_err);
        p.max_abs_error = std::max(p.max_abs_error, e.abs_err);
        p.max_excess = std::max(p.max_excess, e.excess);
        sum_rel += e.rel_err;
        p.codes.push_back(e);
    }
    p.mean_rel_error = sum_rel / static_cast<double>(p.codes.size());
    p.max_abs_error_lsb = p.max_abs_error / out.scale;
    return p;
}

}  // namespace

ErrorProfile measure(const FunctionSpec& f, const lut::LinearLut& lut, double are_epsilon) {
    return profile(f, lut, lut.input, lut.output, are_epsilon);
}

ErrorProfile measure(const FunctionSpec& f, const lut::DulutPair& pair, double are_epsilon) {
    return profile(f, pair, pair.input(), pair.output(), are_epsilon);
}

AffineMap output_map_for(const FunctionSpec& f, const AffineMap& input) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::int32_t c = input.q_min(); c <= input.q_max(); ++c) {
        double v = f(input.real(c));
        if (!std::isfinite(v)) throw RangeError("function is not finite on its domain");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        // constant function: any positive step represents it exactly
        double step = std::max(std::abs(lo), 1.0) / static_cast<double>(input.code_count());
        return AffineMap{input.bits, step, static_cast<double>(input.q_min()) - lo / step};
    }
    return AffineMap::from_range(lo, hi, input.bits);
}

AffineMap input_map_for(const FunctionSpec& f, int bits) {
    return AffineMap::from_range(f.domain_lo(), f.domain_hi(), bits);
}

namespace {

// codes per value segment when the index map is the table output itself
std::vector<SegmentSpan> spans_from_positions(const lut::LutTable& value_table, const AffineMap& in,
                                              const std::vector<double>& knot_codes,
                                              const std::vector<std::int32_t>& index_of_code) {
    std::int32_t m = value_table.segments();
    std::int32_t sb = value_table.shift_bit();
    std::vector<SegmentSpan> out(static_cast<std::size_t>(m));
    for (std::int32_t k = 0; k < m; ++k) {
        out[k].x_lo = in.real(knot_codes[k]);
        out[k].x_hi = in.real(knot_codes[k + 1]);
        out[k].first_code = std::numeric_limits<std::int32_t>::max();
        out[k].last_code = std::numeric_limits<std::int32_t>::min();
    }
    for (std::size_t i = 0; i < index_of_code.size(); ++i) {
        std::int32_t code = in.q_min() + static_cast<std::int32_t>(i);
        std::int32_t k = (index_of_code[i] - value_table.q_min()) >> sb;
        k = std::min(k, m - 1);
        out[k].first_code = std::min(out[k].first_code, code);
        out[k].last_code = std::max(out[k].last_code, code);
    }
    for (auto& s : out)
        if (s.first_code > s.last_code) {
            s.first_code = 0;
            s.last_code = -1;
        }
    return out;
}

}  // namespace

std::vector<SegmentSpan> value_segments(const lut::LinearLut& l) {
    const auto& t = l.table;
    std::vector<double> knots(static_cast<std::size_t>(t.segments()) + 1);
    for (std::size_t k = 0; k < knots.size(); ++k)
        knots[k] = static_cast<double>(t.q_min()) + static_cast<double>(k) * t.shift_num();
    std::vector<std::int32_t> idx;
    for (std::int32_t c = t.q_min(); c <= t.q_max(); ++c) idx.push_back(c);
    return spans_from_positions(t, l.input, knots, idx);
}

std::vector<SegmentSpan> value_segments(const lut::DulutPair& pair) {
    return value_segments(pair.table1(), pair.table2(), pair.input());
}

std::vector<SegmentSpan> value_segments(const lut::LutTable& t1, const lut::LutTable& t2, const AffineMap& input) {
    const auto& e = t1.entries();
    // invert the continuous index map y(x) = piecewise linear through
    // (q_min + j * sn1, T1[j]) at every table2 knot
    std::vector<double> knots(static_cast<std::size_t>(t2.segments()) + 1);
    for (std::size_t k = 0; k < knots.size(); ++k) {
        double y = static_cast<double>(t2.q_min()) + static_cast<double>(k) * t2.shift_num();
        double x;
        if (y <= e.front()) {
            x = t1.q_min();
        } else if (y >= e.back()) {
            x = static_cast<double>(t1.q_min()) + static_cast<double>(t1.segments()) * t1.shift_num();
        } else {
            auto it = std::upper_bound(e.begin(), e.end(), y);  // first entry > y
            std::size_t j = static_cast<std::size_t>(it - e.begin()) - 1;
            double frac = (y - e[j]) / static_cast<double>(e[j + 1] - e[j]);
            x = static_cast<double>(t1.q_min()) + (static_cast<double>(j) + frac) * t1.shift_num();
        }
        knots[k] = x;
    }
    std::vector<std::int32_t> idx;
    for (std::int32_t c = t1.q_min(); c <= t1.q_max(); ++c) idx.push_back(lut::lut_eval(c, t1));
    return spans_from_positions(t2, input, knots, idx);
}

double bound_excess(const FunctionSpec& f, const std::vector<SegmentSpan>& segments, std::span<const double> abs_err,
                  std::int32_t first_code, double output_step) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
        if (s.last_code < s.first_code) continue;
        double measured = 0.0;
        for (std::int32_t c = s.first_code; c <= s.last_code; ++c)
            measured = std::max(measured, abs_err[static_cast<std::size_t>(c - first_code)]);
        double h = s.x_hi - s.x_lo;
        double bound = h * h / 8.0 * f.max_abs_second_derivative(s.x_lo, s.x_hi) + output_step;
        worst = std::max(worst, measured - bound);
    }
    return worst;
}

double bound_excess(const FunctionSpec& f, const std::vector<SegmentSpan>& segments, const ErrorProfile& profile,
                  const AffineMap& output) {
    std::vector<double> abs_err;
    abs_err.reserve(profile.codes.size());
    for (const auto& c : profile.codes) abs_err.push_back(c.abs_err);
    return bound_excess(f, segments, abs_err, profile.codes.front().code_in, output.scale);
}

}  // namespace fqkit::dulut
