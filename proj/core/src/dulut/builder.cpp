#include "fqkit/dulut/builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "fqkit/util/error.hpp"

namespace fqkit::dulut {

using lut::AffineMap;
using lut::LutTable;

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2i(int v) {
    int r = 0;
    while ((1 << r) < v) ++r;
    return r;
}

// value-table entries may overshoot the output code range by one bit
std::int32_t value_entry(double v, const AffineMap& out) {
    double q = std::round(v / out.scale + out.zero_point);
    double lim = std::ldexp(1.0, out.bits);
    return static_cast<std::int32_t>(std::clamp(q, -lim, lim - 1.0));
}

AffineMap output_map(const FunctionSpec& f, const BuildConfig& cfg, const AffineMap& in) {
    if (cfg.output_range) return AffineMap::from_range(cfg.output_range->first, cfg.output_range->second, in.bits);
    return output_map_for(f, in);
}

using Spans = std::vector<std::int32_t>;

// The index map keeps table1's input knots uniform (sn1 codes apart) and
// gives segment i an integer number of table2 index positions d_i >= 0,
// sum d_i = 2^b. table1 holds the running sum, so the identity map is
// d_i = sn1 and every move stays exactly representable and monotone.
// table2 knots sit every sn2 index positions; each holds f at the real
// input that the continuous index map sends there.
class PairModel {
public:
    PairModel(const FunctionSpec& f, const BuildConfig& cfg, const AffineMap& in)
        : f_(f), in_(in), out_(output_map(f, cfg, in)), bits_(cfg.input_bits), m1_(cfg.m1), m2_(cfg.m2) {
        count_ = std::int32_t{1} << bits_;
        qmin_ = -(count_ / 2);
        sn1_ = count_ / m1_;
        sn2_ = count_ / m2_;
        eps_ = resolve_are_epsilon(cfg.are_epsilon, out_);
        fx_.resize(static_cast<std::size_t>(count_));
        ideal_code_.resize(fx_.size());
        ideal_err_.resize(fx_.size());
        for (std::int32_t i = 0; i < count_; ++i) {
            double v = f_(in_.real(qmin_ + i));
            if (!std::isfinite(v)) throw RangeError("function is not finite on its domain");
            fx_[i] = v;
            ideal_code_[i] = out_.code(v);
            ideal_err_[i] = std::abs(v - out_.real(ideal_code_[i]));
        }
        distinct_ideal_.resize(static_cast<std::size_t>(m1_));
        for (int s = 0; s < m1_; ++s) {
            int n = 1;
            for (int j = 1; j < sn1_; ++j)
                if (ideal_code_[s * sn1_ + j] != ideal_code_[s * sn1_ + j - 1]) ++n;
            distinct_ideal_[s] = n;
        }
    }

    const AffineMap& input() const { return in_; }
    const AffineMap& output() const { return out_; }
    int m1() const { return m1_; }
    int sn1() const { return sn1_; }
    int sn2() const { return sn2_; }
    std::int32_t qmin() const { return qmin_; }
    double eps() const { return eps_; }

    Spans identity_spans() const { return Spans(static_cast<std::size_t>(m1_), sn1_); }

    LutTable index_table(const Spans& d) const {
        std::vector<std::int32_t> e(static_cast<std::size_t>(m1_) + 1);
        e[0] = qmin_;
        for (int i = 0; i < m1_; ++i) e[i + 1] = e[i] + d[i];
        if (e.back() != qmin_ + count_) throw std::logic_error("index spans do not sum to the code count");
        if (!std::is_sorted(e.begin(), e.end())) throw std::logic_error("index map is not monotone");
        return LutTable(log2i(m1_), bits_, std::move(e), qmin_, qmin_ + count_);
    }

    LutTable value_table(const Spans& d) const {
        std::vector<std::int32_t> y(static_cast<std::size_t>(m1_) + 1);
        y[0] = qmin_;
        for (int i = 0; i < m1_; ++i) y[i + 1] = y[i] + d[i];
        std::vector<std::int32_t> e(static_cast<std::size_t>(m2_) + 1);
        for (int k = 0; k <= m2_; ++k) {
            std::int32_t yk = qmin_ + k * sn2_;
            auto it = std::upper_bound(y.begin(), y.end(), yk);
            int i = static_cast<int>(it - y.begin()) - 1;
            i = std::clamp(i, 0, m1_ - 1);
            while (d[i] == 0 && i > 0) --i;
            double x = static_cast<double>(qmin_) + static_cast<double>(i) * sn1_;
            if (d[i] > 0) x += static_cast<double>(yk - y[i]) / d[i] * sn1_;
            e[k] = value_entry(f_(in_.real(x)), out_);
        }
        return LutTable(log2i(m2_), bits_, std::move(e));
    }

    struct Eval {
        std::vector<double> seg_are;  // excess ARE per table1 segment
        double max_are = 0.0;
        double max_code_excess = 0.0;
        double sum_sq_excess = 0.0;
        double bound_gap = 0.0;
        bool resolution_ok = true;
    };

    Eval evaluate(const LutTable& t1, const LutTable& t2, const Spans& d) const {
        Eval ev;
        ev.seg_are.assign(static_cast<std::size_t>(m1_), 0.0);
        std::vector<std::int32_t> y(static_cast<std::size_t>(count_));
        std::vector<double> abs_err(y.size());
        for (std::int32_t i = 0; i < count_; ++i) {
            y[i] = lut::lut_eval(qmin_ + i, t1);
            double fh = out_.real(lut::lut_eval(y[i], t2));
            abs_err[i] = std::abs(fx_[i] - fh);
            double r = std::max(0.0, (abs_err[i] - ideal_err_[i]) / (std::abs(fx_[i]) + eps_));
            ev.seg_are[i / sn1_] += r;
            ev.max_code_excess = std::max(ev.max_code_excess, r);
            ev.sum_sq_excess += r * r;
        }
        for (auto& a : ev.seg_are) a /= sn1_;
        ev.max_are = *std::max_element(ev.seg_are.begin(), ev.seg_are.end());
        // a compressed segment must keep as many distinct index positions as
        // it needs distinct outputs, or adjacent codes collide
        for (int s = 0; s < m1_ && ev.resolution_ok; ++s) {
            if (d[s] >= sn1_) continue;
            int n = 1;
            for (int j = 1; j < sn1_; ++j)
                if (y[s * sn1_ + j] != y[s * sn1_ + j - 1]) ++n;
            if (n < distinct_ideal_[s]) ev.resolution_ok = false;
        }
        ev.bound_gap = bound_excess(f_, value_segments(t1, t2, in_), abs_err, qmin_, out_.scale);
        return ev;
    }

    Eval evaluate(const Spans& d) const { return evaluate(index_table(d), value_table(d), d); }

private:
    const FunctionSpec& f_;
    AffineMap in_;
    AffineMap out_;
    int bits_;
    int m1_;
    int m2_;
    std::int32_t count_;
    std::int32_t qmin_;
    int sn1_;
    int sn2_;
    double eps_;
    std::vector<double> fx_;
    std::vector<std::int32_t> ideal_code_;
    std::vector<double> ideal_err_;
    std::vector<int> distinct_ideal_;
};

struct Move {
    int merged = -1;
    int neighbor = -1;
    int split = -1;
    Spans spans;
};

// Candidate moves in the order they are tried: split targets by descending
// score, merge sources by ascending score. The merge source gives up `unit`
// index positions together with whichever neighbour has the smaller combined
// score (ties to the left), in proportion to their current spans.
template <typename Accept>
bool try_moves(const Spans& d, const std::vector<double>& score, int unit, Accept&& accept) {
    const int m = static_cast<int>(d.size());
    std::vector<int> by_min(d.size());
    std::iota(by_min.begin(), by_min.end(), 0);
    std::vector<int> by_max = by_min;
    std::stable_sort(by_min.begin(), by_min.end(), [&](int a, int b) { return score[a] < score[b]; });
    std::stable_sort(by_max.begin(), by_max.end(), [&](int a, int b) { return score[a] > score[b]; });
    for (int jmax : by_max) {
        if (!(score[jmax] > 0.0)) break;
        for (int jmin : by_min) {
            if (jmin == jmax) continue;
            int nb = -1;
            for (int n : {jmin - 1, jmin + 1}) {
                if (n < 0 || n >= m || n == jmax) continue;
                if (nb < 0 || score[n] < score[nb]) nb = n;
            }
            if (nb < 0) continue;
            int a = std::min(jmin, nb);
            int b = std::max(jmin, nb);
            std::int32_t total = d[a] + d[b];
            if (total < unit) continue;
            auto ra = static_cast<std::int32_t>(static_cast<std::int64_t>(unit) * d[a] / total);
            std::int32_t rb = unit - ra;
            Move mv{jmin, nb, jmax, d};
            mv.spans[a] -= ra;
            mv.spans[b] -= rb;
            mv.spans[jmax] += unit;
            if (accept(mv)) return true;
        }
    }
    return false;
}

// Move loop shared by both builders: try moves at the current unit, halve
// the unit when none is accepted, stop at unit 1.
template <typename Score, typename Accept>
int run_moves(Spans& d, int start_unit, int max_iters, Score&& score, Accept&& accept, bool& done) {
    int unit = start_unit;
    int iter = 0;
    while (iter < max_iters && !done) {
        ++iter;
        if (try_moves(d, score(), unit, [&](const Move& mv) { return accept(mv, iter, unit); })) continue;
        if (unit == 1) break;
        unit /= 2;
    }
    return iter;
}

void check_feasible(const BuildConfig& cfg, const AffineMap& input) {
    validate(cfg);
    int k_hw = cfg.k_hw > 0 ? cfg.k_hw : (1 << cfg.input_bits) / cfg.m1;
    if (static_cast<std::int64_t>(cfg.m1) * k_hw < (std::int64_t{1} << cfg.input_bits))
        throw ConfigError("infeasible budget: m1 * k_hw (" + std::to_string(cfg.m1) + " * " + std::to_string(k_hw) +
                          ") is smaller than the code count " + std::to_string(1 << cfg.input_bits));
    if (input.bits != cfg.input_bits) throw ConfigError("input map bit width differs from the config");
}

}  // namespace

void validate(const BuildConfig& cfg) {
    if (cfg.input_bits < 4 || cfg.input_bits > 16) throw ConfigError("input bit width must be in [4, 16]");
    if (!is_pow2(cfg.m1) || !is_pow2(cfg.m2)) throw ConfigError("m1 and m2 must be powers of two");
    if (cfg.m1 < 4 || cfg.m2 < 4) throw ConfigError("m1 and m2 must be at least 4");
    if (cfg.m1 > (1 << cfg.input_bits) || cfg.m2 > (1 << cfg.input_bits))
        throw ConfigError("infeasible budget: more segments than input codes");
    if (cfg.k_hw < 0) throw ConfigError("k_hw must be non-negative");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
    if (cfg.max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (cfg.output_range && !(cfg.output_range->second > cfg.output_range->first))
        throw ConfigError("output range needs lo < hi");
}

lut::LinearLut build_linear_lut(const FunctionSpec& f, int i_bit, int t_bit) {
    return build_linear_lut(f, t_bit, input_map_for(f, i_bit));
}

lut::LinearLut build_linear_lut(const FunctionSpec& f, int t_bit, const AffineMap& input,
                                std::optional<std::pair<double, double>> output_range) {
    if (t_bit > input.bits) throw ConfigError("t_bit must not exceed i_bit");
    AffineMap out = output_range ? AffineMap::from_range(output_range->first, output_range->second, input.bits)
                                 : output_map_for(f, input);
    std::int32_t n = std::int32_t{1} << t_bit;
    std::int32_t sn = std::int32_t{1} << (input.bits - t_bit);
    std::vector<std::int32_t> e(static_cast<std::size_t>(n) + 1);
    for (std::int32_t j = 0; j <= n; ++j) {
        double v = f(input.real(input.q_min() + j * sn));
        if (!std::isfinite(v)) throw RangeError("function is not finite on its domain");
        e[j] = value_entry(v, out);
    }
    return lut::LinearLut{LutTable(t_bit, input.bits, std::move(e)), input, out};
}

double interp_error_bound(const FunctionSpec& f, double lo, double hi, double eps_hw) {
    double h = hi - lo;
    if (!(h > 0.0)) throw RangeError("segment of zero width");
    return h * h / 8.0 * f.max_abs_second_derivative(lo, hi) + eps_hw;
}

ErrorReport assess(const FunctionSpec& f, const lut::DulutPair& pair, double are_epsilon) {
    ErrorProfile prof = measure(f, pair, are_epsilon);
    ErrorReport rep;
    rep.are_epsilon = prof.are_epsilon;
    rep.max_rel_error = prof.max_rel_error;
    rep.mean_rel_error = prof.mean_rel_error;
    rep.max_abs_error_lsb = prof.max_abs_error_lsb;

    const auto& t1 = pair.table1();
    const int m1 = t1.segments();
    const int sn1 = t1.shift_num();
    auto vsegs = value_segments(pair);
    rep.bound_excess = bound_excess(f, vsegs, prof, pair.output());
    std::vector<double> vbound(vsegs.size());
    for (std::size_t k = 0; k < vsegs.size(); ++k)
        vbound[k] = vsegs[k].x_hi > vsegs[k].x_lo
                        ? interp_error_bound(f, vsegs[k].x_lo, vsegs[k].x_hi, pair.out_scale())
                        : pair.out_scale();

    for (int i = 0; i < m1; ++i) {
        SegmentRecord s;
        s.index = i;
        s.lo_code = t1.q_min() + i * sn1;
        s.hi_code = s.lo_code + sn1 - 1;
        for (int j = 0; j < sn1; ++j) {
            const auto& c = prof.codes[static_cast<std::size_t>(i * sn1 + j)];
            s.are += c.rel_err;
            s.excess_are += c.excess;
            s.max_abs_error = std::max(s.max_abs_error, c.abs_err);
        }
        s.are /= sn1;
        s.excess_are /= sn1;
        for (std::size_t k = 0; k < vsegs.size(); ++k)
            if (vsegs[k].first_code <= s.hi_code && vsegs[k].last_code >= s.lo_code)
                s.bound_eq4 = std::max(s.bound_eq4, vbound[k]);
        rep.per_segment_are.push_back(s.are);
        rep.per_segment_excess_are.push_back(s.excess_are);
        rep.segments.push_back(s);
        rep.index_spans.push_back(t1.entries()[i + 1] - t1.entries()[i]);
    }
    rep.global_max_are = *std::max_element(rep.per_segment_are.begin(), rep.per_segment_are.end());
    rep.global_mean_are = std::accumulate(rep.per_segment_are.begin(), rep.per_segment_are.end(), 0.0) / m1;
    rep.global_max_excess_are =
        *std::max_element(rep.per_segment_excess_are.begin(), rep.per_segment_excess_are.end());
    return rep;
}

BuiltPair build_dulut(const FunctionSpec& f, const BuildConfig& cfg) {
    return build_dulut(f, cfg, input_map_for(f, cfg.input_bits));
}

BuiltPair build_dulut(const FunctionSpec& f, const BuildConfig& cfg, const AffineMap& input) {
    check_feasible(cfg, input);
    if (f.kind() == FunctionKind::custom && f.samples().size() < (std::size_t{1} << cfg.input_bits))
        throw ConfigError("custom function needs at least 2^i_bit samples");
    PairModel model(f, cfg, input);
    using Eval = PairModel::Eval;

    Spans d = model.identity_spans();
    Eval cur = model.evaluate(d);
    // a move may not push any value segment past the curvature bound (or further
    // past it, should the uniform start already exceed it)
    auto within_bound = [&](const Eval& ev) { return ev.bound_gap <= std::max(0.0, cur.bound_gap); };
    std::vector<HistoryEntry> history;
    bool done = cur.max_are <= cfg.delta;
    int iter = run_moves(
        d, model.sn1(), cfg.max_iters, [&]() -> const std::vector<double>& { return cur.seg_are; },
        [&](const Move& mv, int it, int unit) {
            Eval ev = model.evaluate(mv.spans);
            if (!ev.resolution_ok || !within_bound(ev) || !(ev.max_are < cur.max_are)) return false;
            d = mv.spans;
            cur = std::move(ev);
            history.push_back({it, mv.merged, mv.neighbor, mv.split, unit, cur.max_are});
            done = cur.max_are <= cfg.delta;
            return true;
        },
        done);
    if (history.empty() && done) iter = 0;

    LutTable t1 = model.index_table(d);
    LutTable t2 = model.value_table(d);
    if (cfg.polish_values && cur.max_are > 0.0) {
        // +-1 code nudges of table2 values, two rounds: first the worst
        // per-code excess, then the worst segment ARE; neither round may
        // worsen what the other settled
        auto per_code = [](const Eval& e) { return std::tuple(e.max_code_excess, e.max_are, e.sum_sq_excess); };
        auto per_segment = [](const Eval& e) { return std::tuple(e.max_are, e.max_code_excess, e.sum_sq_excess); };
        Eval best = cur;
        auto polish = [&](auto key, double code_cap) {
            bool improved = true;
            for (int pass = 0; improved && pass < 64; ++pass) {
                improved = false;
                for (std::size_t k = 0; k < t2.entries().size(); ++k) {
                    for (int step : {-1, 1}) {
                        auto e = t2.entries();
                        e[k] += step;
                        if (e[k] < t2.entry_min() || e[k] > t2.entry_max()) continue;
                        LutTable cand(t2.t_bit(), t2.i_bit(), std::move(e));
                        Eval ev = model.evaluate(t1, cand, d);
                        if (ev.max_are <= cur.max_are && ev.max_code_excess <= code_cap && within_bound(ev) &&
                            key(ev) < key(best)) {
                            t2 = std::move(cand);
                            best = std::move(ev);
                            improved = true;
                        }
                    }
                }
            }
        };
        polish(per_code, std::numeric_limits<double>::infinity());
        polish(per_segment, best.max_code_excess);
        if (per_code(best) < per_code(cur) || per_segment(best) < per_segment(cur)) {
            ++iter;
            history.push_back({iter, -1, -1, -1, 0, best.max_are});
            cur = std::move(best);
        }
    }

    lut::DulutPair pair(std::move(t1), std::move(t2), model.input(), model.output());
    ErrorReport rep = assess(f, pair, model.eps());
    rep.iterations_used = iter;
    rep.history = std::move(history);
    return {std::move(pair), std::move(rep)};
}

BuiltPair curvature_only_merge(const FunctionSpec& f, const BuildConfig& cfg) {
    return curvature_only_merge(f, cfg, input_map_for(f, cfg.input_bits));
}

BuiltPair curvature_only_merge(const FunctionSpec& f, const BuildConfig& cfg, const AffineMap& input) {
    check_feasible(cfg, input);
    PairModel model(f, cfg, input);
    std::vector<double> curv(static_cast<std::size_t>(model.m1()));
    for (int i = 0; i < model.m1(); ++i)
        curv[i] = f.max_abs_second_derivative(input.real(model.qmin() + i * model.sn1()),
                                              input.real(model.qmin() + (i + 1) * model.sn1()));
    // knot spacing inside segment i is sn1 * sn2 / d_i codes
    const double knot_step = input.scale * model.sn1() * model.sn2();
    auto cost = [&](const Spans& d) {
        std::vector<double> c(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] == 0) {
                c[i] = curv[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            } else {
                double h = knot_step / d[i];
                c[i] = h * h / 8.0 * curv[i];
            }
        }
        return c;
    };
    auto worst = [](const std::vector<double>& c) { return *std::max_element(c.begin(), c.end()); };

    Spans d = model.identity_spans();
    auto c = cost(d);
    std::vector<HistoryEntry> history;
    bool done = false;
    int iter = run_moves(
        d, model.sn1(), cfg.max_iters, [&]() -> const std::vector<double>& { return c; },
        [&](const Move& mv, int it, int unit) {
            auto nc = cost(mv.spans);
            if (!(worst(nc) < worst(c))) return false;
            d = mv.spans;
            c = std::move(nc);
            history.push_back({it, mv.merged, mv.neighbor, mv.split, unit, worst(c)});
            return true;
        },
        done);

    lut::DulutPair pair(model.index_table(d), model.value_table(d), model.input(), model.output());
    ErrorReport rep = assess(f, pair, model.eps());
    rep.iterations_used = iter;
    rep.history = std::move(history);
    return {std::move(pair), std::move(rep)};
}

}  // namespace fqkit::dulut
