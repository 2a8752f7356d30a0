#include "fqkit/attn/attn_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "fqkit/dulut/builder.hpp"
#include "fqkit/posembed/posembed.hpp"
#include "fqkit/util/csv.hpp"
#include "fqkit/util/error.hpp"
#include "fqkit/util/rng.hpp"

namespace fqkit::attn {

namespace {

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.values()) m = std::max(m, std::abs(v));
    return m;
}

std::size_t argmax_row(const Tensor& p, std::size_t r) {
    std::size_t n = p.shape()[1];
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (p.at(r, j) > p.at(r, best)) best = j;
    return best;
}

template <typename T>
std::int64_t distinct(const BasicTensor<T>& t) {
    std::set<T> s(t.values().begin(), t.values().end());
    return static_cast<std::int64_t>(s.size());
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t n = a.shape()[0], m = a.shape()[1], p = b.shape()[1];
    Tensor c({n, p});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) {
            double v = a.at(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < p; ++j) c.at(i, j) += v * b.at(k, j);
        }
    return c;
}

// PE networks shared by the fusion and ablation studies: 64 depth samples
// (or 64-wide anchors) per axis feed 192 inputs, 256 hidden, 256 out.
pe::MlpSpec study_mlp(std::uint64_t seed) { return pe::MlpSpec::random(192, 256, 256, 0.35, 0.1, seed); }

pe::RayGrid study_grid() { return pe::RayGrid{}; }

}  // namespace

Tensor image_features(Shape shape, std::uint64_t seed, double bound) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = std::clamp(rng.normal() * bound / 3.0, -bound, bound);
    return t;
}

Tensor pe_surrogate(Shape shape, double range, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (double& v : t.data()) {
        double z = rng.normal();
        v = z * z * z;
    }
    double m = max_abs(t);
    for (double& v : t.data()) v = m > 0.0 ? v / m * range : 0.0;
    return t;
}

std::int64_t effective_bins(double img_range, double scale, int k) {
    if (!(scale > 0.0)) throw RangeError("scale must be positive");
    auto bins = static_cast<std::int64_t>(std::floor(img_range / scale)) + 1;
    return std::min(bins, std::int64_t{1} << k);
}

FusionResult fuse_and_quantize(const FusionScenario& s) {
    if (s.img_feat.shape() != s.pe_feat.shape()) throw ShapeError("image and PE features must have the same shape");
    if (s.img_feat.empty()) throw ShapeError("empty feature map");
    Tensor fused = s.img_feat;
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += s.pe_feat[i];
    FusionResult r;
    r.params = calibrate(std::span(&fused, 1), s.k);
    r.codes = quantize(fused, r.params);
    auto [lo, hi] = std::minmax_element(s.img_feat.values().begin(), s.img_feat.values().end());
    r.img_range = *hi - *lo;
    r.metrics.effective_bins = effective_bins(r.img_range, r.params.scale(), s.k);
    r.retention = static_cast<double>(r.metrics.effective_bins) / std::ldexp(1.0, s.k);
    return r;
}

SoftmaxMode parse_softmax_mode(std::string_view name) {
    if (name == "float") return SoftmaxMode::exact;
    if (name == "naive_quant" || name == "naive-quant") return SoftmaxMode::naive_quant;
    if (name == "qans") return SoftmaxMode::qans;
    if (name == "qans_dulut" || name == "qans-dulut") return SoftmaxMode::qans_dulut;
    throw UsageError("unknown softmax mode '" + std::string(name) + "'");
}

std::string_view mode_name(SoftmaxMode m) {
    switch (m) {
        case SoftmaxMode::exact: return "float";
        case SoftmaxMode::naive_quant: return "naive_quant";
        case SoftmaxMode::qans: return "qans";
        case SoftmaxMode::qans_dulut: return "qans_dulut";
    }
    return "?";
}

DistortionMetrics compare_distributions(const Tensor& p, const Tensor& q) {
    if (p.shape() != q.shape() || p.rank() != 2) throw ShapeError("distributions must be matching matrices");
    DistortionMetrics m;
    const std::size_t rows = p.shape()[0];
    if (rows == 0) return m;
    std::size_t shifted = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        double l1 = 0.0;
        for (std::size_t j = 0; j < p.shape()[1]; ++j) l1 += std::abs(p.at(r, j) - q.at(r, j));
        m.l1_error += l1;
        std::size_t a = argmax_row(p, r);
        if (argmax_row(q, r) != a) ++shifted;
        m.peak_attenuation += p.at(r, a) - q.at(r, a);
    }
    m.l1_error /= static_cast<double>(rows);
    m.peak_attenuation /= static_cast<double>(rows);
    m.argmax_shift_rate = static_cast<double>(shifted) / static_cast<double>(rows);
    return m;
}

Tensor attention_logits(const Tensor& queries, const Tensor& keys) {
    if (queries.rank() != 2 || keys.rank() != 2 || queries.shape()[1] != keys.shape()[1])
        throw ShapeError("queries and keys need the same feature width");
    const std::size_t n = queries.shape()[0], m = keys.shape()[0], d = keys.shape()[1];
    const double inv = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor out({n, m});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += queries.at(i, k) * keys.at(j, k);
            out.at(i, j) = acc * inv;
        }
    return out;
}

AttentionResult run_attention(const Tensor& queries, const Tensor& keys, const Tensor& values, SoftmaxMode mode,
                              const AttentionOptions& opt) {
    if (values.rank() != 2 || values.shape()[0] != keys.shape()[0])
        throw ShapeError("values need one row per key");
    if (queries.rank() == 2 && queries.shape()[0] > 1024) throw ShapeError("at most 1024 query rows");
    Tensor logits = attention_logits(queries, keys);
    Tensor exact = qans::softmax(logits, 1);
    AttentionResult r;
    std::int64_t bins = 0;
    switch (mode) {
        case SoftmaxMode::exact: r.probs = exact; break;
        case SoftmaxMode::naive_quant: {
            QuantParams p(opt.qans.k, opt.naive_scale);
            r.probs = qans::naive_quant_softmax(logits, 1, p);
            bins = distinct(quantize(logits, p));
            break;
        }
        case SoftmaxMode::qans:
        case SoftmaxMode::qans_dulut: {
            auto q = qans::qans_softmax(logits, 1, opt.qans);
            r.selected_i = q.selected_i;
            IntTensor codes = qans::stabilized_codes(qans::stabilize(logits, 1), q.selected_i, opt.qans);
            bins = distinct(codes);
            if (mode == SoftmaxMode::qans) {
                r.probs = std::move(q.p_q);
            } else {
                auto pair = qans::build_exp_pair(q.selected_i, opt.qans, opt.pair_budget);
                r.probs = qans::integer_softmax_via_dulut(codes, 1, pair.pair);
            }
            break;
        }
    }
    r.metrics = compare_distributions(exact, r.probs);
    r.metrics.effective_bins = bins;
    r.output = matmul(r.probs, values);
    return r;
}

Tensor suite_logits(const SuiteConfig& cfg, int instance) {
    if (cfg.rows < 1 || cfg.keys < 2 || cfg.instances < 1) throw ConfigError("suite needs rows, keys and instances");
    if (!(cfg.margin_lo > 0.0 && cfg.margin_hi > cfg.margin_lo && cfg.cluster_depth >= cfg.margin_hi))
        throw ConfigError("suite margins must satisfy 0 < margin_lo < margin_hi <= cluster_depth");
    Rng rng(cfg.seed * 1000003 + static_cast<std::uint64_t>(instance));
    const auto n = static_cast<std::size_t>(cfg.keys);
    Tensor x({static_cast<std::size_t>(cfg.rows), n});
    for (std::size_t r = 0; r < x.shape()[0]; ++r) {
        double top = -cfg.clip;
        for (std::size_t j = 0; j < n; ++j) {
            x.at(r, j) = std::clamp(rng.normal() * cfg.spread, -cfg.clip, cfg.clip);
            top = std::max(top, x.at(r, j));
        }
        std::size_t peak = rng.below(n);
        double margin = rng.uniform(cfg.margin_lo, cfg.margin_hi);
        double pv = top + margin;
        x.at(r, peak) = pv;
        // the closest competitor sits exactly `margin` below the peak
        for (int c = 0; c < cfg.competitors; ++c) {
            std::size_t j = rng.below(n);
            if (j == peak) continue;
            x.at(r, j) = c == 0 ? pv - margin : pv - rng.uniform(margin, cfg.cluster_depth);
        }
    }
    return x;
}

std::vector<AttentionInstance> attention_suite(const SuiteConfig& cfg) {
    std::vector<AttentionInstance> out;
    const auto n = static_cast<std::size_t>(cfg.keys);
    // keys are sqrt(d) times the identity, so Q K^T / sqrt(d) returns the
    // designed logits unchanged
    Tensor keys({n, n});
    const double sq = std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) keys.at(j, j) = sq;
    for (int i = 0; i < cfg.instances; ++i) {
        Rng rng(cfg.seed * 7919 + static_cast<std::uint64_t>(i) + 1);
        Tensor values({n, static_cast<std::size_t>(cfg.value_dim)});
        for (double& v : values.data()) v = rng.normal();
        out.push_back({suite_logits(cfg, i), keys, std::move(values)});
    }
    return out;
}

std::vector<AblationRow> ablation_sweep(const AblationConfig& cfg) {
    std::vector<AblationRow> rows;
    const std::uint64_t seed = cfg.suite.seed;

    if (!cfg.anchor_counts.empty()) {
        auto mlp = study_mlp(seed);
        auto grid = study_grid();
        auto pts = grid.lidar_points();
        Tensor img = image_features({pts.size(), mlp.d_out()}, seed);
        for (int count : cfg.anchor_counts) {
            auto anchors = pe::AnchorAxisSet::random(count, mlp.d_in() / 3, 0.8, seed + static_cast<std::uint64_t>(count));
            Tensor pe_feat = pe::qfpe_embed(pts, anchors, pe::PerceptionRange::standard(), mlp);
            auto fr = fuse_and_quantize({img, pe_feat, 8});
            rows.push_back({"anchors",
                            fmt::format("anchors={}", count),
                            {{"pe_max_abs", max_abs(pe_feat)},
                             {"effective_bins", static_cast<double>(fr.metrics.effective_bins)}}});
        }
    }

    if (!cfg.qans_n.empty()) {
        const int n_max = *std::max_element(cfg.qans_n.begin(), cfg.qans_n.end());
        qans::QansConfig qc;
        qc.n = n_max;
        std::vector<qans::QansResult> traces;
        std::vector<Tensor> stabilized;
        for (int i = 0; i < cfg.suite.instances; ++i) {
            Tensor logits = suite_logits(cfg.suite, i);
            traces.push_back(qans::qans_softmax(logits, 1, qc));
            stabilized.push_back(qans::stabilize(logits, 1));
        }
        for (int n : cfg.qans_n) {
            double err = 0.0, shift = 0.0;
            for (std::size_t t = 0; t < traces.size(); ++t) {
                const auto& e = traces[t].per_candidate_error;
                auto best = std::min_element(e.begin(), e.begin() + n);
                int sel = static_cast<int>(best - e.begin()) + 1;
                err += *best;
                Tensor pq = qans::softmax(qans::quantize_stabilized(stabilized[t], sel, qc), 1);
                shift += compare_distributions(traces[t].p_f, pq).argmax_shift_rate;
            }
            double cnt = static_cast<double>(traces.size());
            rows.push_back({"qans_n", fmt::format("n={}", n), {{"l1_error", err / cnt}, {"argmax_shift_rate", shift / cnt}}});
        }
    }

    if (!cfg.dulut_sizes.empty()) {
        auto suite = attention_suite(cfg.suite);
        const struct {
            const char* name;
            double lo, hi;
        } fns[] = {{"exp", -20.0, 0.0}, {"silu", -8.0, 8.0}, {"gelu", -8.0, 8.0}};
        for (auto [m1, m2] : cfg.dulut_sizes) {
            AblationRow row{"dulut_entries", fmt::format("{}x{}", m1, m2), {}};
            dulut::BuildConfig bc;
            bc.m1 = m1;
            bc.m2 = m2;
            for (const auto& f : fns) {
                auto built = dulut::build_dulut(dulut::FunctionSpec::builtin(f.name, f.lo, f.hi), bc);
                row.metrics.emplace_back(std::string(f.name) + "_max_rel_error", built.report.max_rel_error);
            }
            AttentionOptions opt;
            opt.pair_budget = {m1, m2};
            double l1 = 0.0;
            for (const auto& inst : suite)
                l1 += run_attention(inst.queries, inst.keys, inst.values, SoftmaxMode::qans_dulut, opt).metrics.l1_error;
            row.metrics.emplace_back("l1_error", l1 / static_cast<double>(suite.size()));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    std::vector<std::string> cols{"sweep", "setting"};
    for (const auto& r : rows)
        for (const auto& [name, v] : r.metrics)
            if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
    CsvWriter w(out);
    w.header(cols);
    for (const auto& r : rows) {
        w.cell(r.sweep).cell(r.setting);
        for (std::size_t c = 2; c < cols.size(); ++c) {
            auto it = std::find_if(r.metrics.begin(), r.metrics.end(), [&](const auto& m) { return m.first == cols[c]; });
            if (it == r.metrics.end())
                w.cell(std::string_view{});
            else
                w.cell(it->second);
        }
        w.end_row();
    }
}

std::vector<FusionRow> fusion_study(std::uint64_t seed, int k) {
    const std::size_t tokens = 256, channels = 256;
    Tensor img = image_features({tokens, channels}, seed);
    std::vector<std::pair<std::string, Tensor>> sources;
    sources.emplace_back("none", Tensor({tokens, channels}));
    sources.emplace_back("surrogate-matched", pe_surrogate({tokens, channels}, kImageRange, seed + 1));
    sources.emplace_back("surrogate-qfpe", pe_surrogate({tokens, channels}, kQfpeRange, seed + 1));
    sources.emplace_back("surrogate-camera-ray", pe_surrogate({tokens, channels}, kCameraRayRange, seed + 1));

    auto mlp = study_mlp(seed);
    auto grid = study_grid();
    auto cam = grid.camera_samples();
    sources.emplace_back("camera-ray", pe::camera_ray_pe(cam, mlp, pe::PerceptionRange::standard()));
    auto anchors = pe::AnchorAxisSet::random(3, mlp.d_in() / 3, 0.8, seed + 3);
    sources.emplace_back("qfpe", pe::qfpe_embed(grid.lidar_points(), anchors, pe::PerceptionRange::standard(), mlp));

    std::vector<FusionRow> rows;
    for (auto& [name, pe_feat] : sources) {
        if (pe_feat.shape() != img.shape()) throw ShapeError("PE grid does not match the image feature map");
        auto r = fuse_and_quantize({img, pe_feat, k});
        rows.push_back({name, max_abs(pe_feat), r.params.scale(), r.metrics.effective_bins, r.retention});
    }
    return rows;
}

void write_fusion_csv(std::ostream& out, const std::vector<FusionRow>& rows) {
    CsvWriter w(out);
    w.header({"pe_source", "pe_max_abs", "scale", "effective_bins", "retention"});
    for (const auto& r : rows) {
        w.cell(r.pe_source).cell(r.pe_range).cell(r.scale).cell(r.effective_bins).cell(r.retention);
        w.end_row();
    }
}

std::vector<AttentionRow> attention_study(const SuiteConfig& suite, const AttentionOptions& opt) {
    std::vector<AttentionRow> rows;
    auto instances = attention_suite(suite);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& in = instances[i];
        for (auto mode : {SoftmaxMode::exact, SoftmaxMode::naive_quant, SoftmaxMode::qans, SoftmaxMode::qans_dulut}) {
            auto r = run_attention(in.queries, in.keys, in.values, mode, opt);
            rows.push_back({static_cast<int>(i), mode, r.selected_i, r.metrics});
        }
    }
    return rows;
}

void write_attention_csv(std::ostream& out, const std::vector<AttentionRow>& rows) {
    CsvWriter w(out);
    w.header({"instance", "mode", "selected_i", "l1_error", "argmax_shift_rate", "peak_attenuation", "effective_bins"});
    for (const auto& r : rows) {
        w.cell(r.instance).cell(mode_name(r.mode)).cell(r.selected_i);
        w.cell(r.metrics.l1_error).cell(r.metrics.argmax_shift_rate).cell(r.metrics.peak_attenuation);
        w.cell(r.metrics.effective_bins);
        w.end_row();
    }
}

}  // namespace fqkit::attn
