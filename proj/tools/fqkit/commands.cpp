#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fqkit/attn/attn_sim.hpp"
#include "fqkit/dulut/builder.hpp"
#include "fqkit/lut/io.hpp"
#include "fqkit/posembed/posembed.hpp"
#include "fqkit/qans/softmax.hpp"
#include "fqkit/util/csv.hpp"
#include "fqkit/util/error.hpp"
#include "manifest.hpp"

namespace fqkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path manifest_next_to(const fs::path& output) {
    return output.parent_path() / (output.stem().string() + ".manifest.json");
}

dulut::FunctionSpec make_function(const std::string& name, std::optional<double> lo, std::optional<double> hi,
                                  const std::vector<std::pair<double, double>>& samples) {
    auto kind = dulut::parse_function_kind(name);
    if (kind == dulut::FunctionKind::custom) {
        if (samples.size() < 2) throw UsageError("--fn custom needs --samples with at least two rows");
        return dulut::FunctionSpec::custom(samples, lo.value_or(samples.front().first),
                                           hi.value_or(samples.back().first));
    }
    auto [dlo, dhi] = dulut::FunctionSpec::default_domain(kind);
    return dulut::FunctionSpec::builtin(kind, lo.value_or(dlo), hi.value_or(dhi));
}

std::vector<std::pair<double, double>> read_samples(const std::string& path) {
    std::vector<std::pair<double, double>> out;
    for (const auto& row : parse_numeric_csv(read_file(path))) {
        if (row.size() < 2) throw Error("sample file rows need x and f(x)");
        out.emplace_back(row[0], row[1]);
    }
    return out;
}

json function_json(const dulut::FunctionSpec& f) {
    json j{{"name", f.name()}, {"lo", f.domain_lo()}, {"hi", f.domain_hi()}};
    if (f.kind() == dulut::FunctionKind::custom) j["samples"] = f.samples();
    return j;
}

dulut::FunctionSpec function_of(const json& j) {
    std::vector<std::pair<double, double>> samples;
    if (j.contains("samples")) samples = j.at("samples").get<std::vector<std::pair<double, double>>>();
    return make_function(j.at("name").get<std::string>(), j.at("lo").get<double>(), j.at("hi").get<double>(),
                         samples);
}

json report_json(const dulut::ErrorReport& r) {
    json hist = json::array();
    for (const auto& h : r.history)
        hist.push_back(json{{"iteration", h.iteration},
                            {"merged_segment", h.merged_segment},
                            {"neighbor_segment", h.neighbor_segment},
                            {"split_segment", h.split_segment},
                            {"unit", h.unit},
                            {"objective", h.objective}});
    return json{{"global_max_are", r.global_max_are},
                {"global_mean_are", r.global_mean_are},
                {"global_max_excess_are", r.global_max_excess_are},
                {"max_rel_error", r.max_rel_error},
                {"mean_rel_error", r.mean_rel_error},
                {"max_abs_error_lsb", r.max_abs_error_lsb},
                {"bound_excess", r.bound_excess},
                {"iterations_used", r.iterations_used},
                {"index_spans", r.index_spans},
                {"history", hist}};
}

}  // namespace

RunFiles run_build_dulut(const BuildDulutOpts& o) {
    RunFiles files;
    std::vector<std::pair<double, double>> samples;
    if (!o.samples.empty()) {
        samples = read_samples(o.samples);
        files.inputs.push_back(o.samples);
    }
    auto f = make_function(o.fn, o.lo, o.hi, samples);
    dulut::BuildConfig cfg;
    cfg.input_bits = o.i_bit;
    cfg.m1 = o.m1;
    cfg.m2 = o.m2;
    cfg.k_hw = o.k_hw;
    cfg.delta = o.delta;
    cfg.max_iters = o.max_iters;
    cfg.are_epsilon = o.are_eps;
    cfg.polish_values = !o.no_polish;
    auto built = dulut::build_dulut(f, cfg);
    const auto& rep = built.report;

    json pj = json::parse(lut::to_json(built.pair));
    pj["function"] = function_json(f);
    pj["are_epsilon"] = rep.are_epsilon;
    pj["report"] = report_json(rep);

    std::ostringstream csv;
    CsvWriter w(csv);
    w.header({"segment", "lo_code", "hi_code", "index_span", "are", "excess_are", "max_abs_error", "bound_eq4"});
    for (const auto& s : rep.segments) {
        w.cell(s.index).cell(std::int64_t{s.lo_code}).cell(std::int64_t{s.hi_code});
        w.cell(std::int64_t{rep.index_spans[static_cast<std::size_t>(s.index)]});
        w.cell(s.are).cell(s.excess_are).cell(s.max_abs_error).cell(s.bound_eq4);
        w.end_row();
    }

    fs::path dir(o.out_dir);
    write_file(dir / "pair.json", pj.dump(2) + "\n");
    write_file(dir / "report.csv", csv.str());
    write_file(dir / "pair.bin", lut::to_binary(built.pair));
    files.outputs = {(dir / "pair.json").string(), (dir / "report.csv").string(), (dir / "pair.bin").string()};
    files.manifest_path = dir / "manifest.json";
    return files;
}

RunFiles run_eval(const EvalOpts& o) {
    RunFiles files{{o.table, o.input}, {o.out}, manifest_next_to(o.out)};

    // either a pair or a linear table, from JSON or the binary dump
    std::optional<lut::DulutPair> pair;
    std::optional<lut::LinearLut> linear;
    std::optional<dulut::FunctionSpec> f;
    double are_eps = 0.0;
    std::string bytes = read_file(o.table);
    if (fs::path(o.table).extension() == ".bin") {
        auto art = lut::from_binary(bytes);
        if (art.tables.size() == 2)
            pair.emplace(art.tables[0], art.tables[1], art.input, art.output);
        else
            linear = lut::LinearLut{art.tables[0], art.input, art.output};
    } else {
        json j;
        try {
            j = json::parse(bytes);
        } catch (const json::exception& e) {
            throw Error(std::string("bad table json: ") + e.what());
        }
        if (j.contains("table1"))
            pair = lut::pair_from_json(bytes);
        else
            linear = lut::linear_from_json(bytes);
        if (j.contains("function") && o.fn.empty()) f = function_of(j.at("function"));
        are_eps = j.value("are_epsilon", 0.0);
    }
    if (!o.fn.empty()) f = make_function(o.fn, o.lo, o.hi, {});
    if (!f) throw UsageError("table carries no target function; pass --fn");
    if (o.are_eps) are_eps = *o.are_eps;

    const lut::AffineMap& in = pair ? pair->input() : linear->input;
    const lut::AffineMap& out = pair ? pair->output() : linear->output;
    const double eps = dulut::resolve_are_epsilon(are_eps, out);

    std::ostringstream csv;
    CsvWriter w(csv);
    w.header({"code_in", "code_out", "real_in", "real_out", "abs_err", "rel_err"});
    for (const auto& row : parse_numeric_csv(read_file(o.input))) {
        if (row.empty()) continue;
        double c = row[0];
        if (c != std::floor(c) || c < in.q_min() || c > in.q_max())
            throw RangeError("input code " + format_real(c) + " does not fit the table's " + std::to_string(in.bits) +
                             "-bit input");
        auto code = static_cast<std::int32_t>(c);
        std::int32_t y = pair ? lut::dulut_eval(code, *pair) : lut::lut_eval(code, linear->table);
        double x = in.real(code);
        double fx = (*f)(x);
        double fh = out.real(y);
        double err = std::abs(fx - fh);
        w.cell(std::int64_t{code}).cell(std::int64_t{y}).cell(x).cell(fh).cell(err).cell(err / (std::abs(fx) + eps));
        w.end_row();
    }
    write_file(o.out, csv.str());
    return files;
}

RunFiles run_qans(const QansOpts& o) {
    RunFiles files{{o.input}, {o.report}, manifest_next_to(o.report)};
    auto rows = parse_numeric_csv(read_file(o.input));
    if (rows.empty()) throw Error("logit file has no rows");
    const std::size_t width = rows.front().size();
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != width) throw ShapeError("logit rows differ in length");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    Tensor logits({rows.size(), width}, std::move(flat));

    qans::QansConfig cfg;
    cfg.k = o.k;
    cfg.n = o.n;
    cfg.norm = qans::parse_error_norm(o.norm);
    if (o.frozen_index > 0) cfg.frozen_index = o.frozen_index;
    try {
        qans::validate(cfg);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    auto r = qans::qans_softmax(logits, 1, cfg);

    std::ostringstream csv;
    CsvWriter w(csv);
    w.header({"candidate_i", "scale", "error", "selected"});
    for (int i = 1; i <= cfg.n; ++i) {
        w.cell(i).cell(qans::candidate_scale(i, cfg.k)).cell(r.per_candidate_error[static_cast<std::size_t>(i - 1)]);
        w.cell(i == r.selected_i ? 1 : 0);
        w.end_row();
    }
    write_file(o.report, csv.str());

    if (!o.out.empty()) {
        std::ostringstream pc;
        CsvWriter pw(pc);
        for (std::size_t i = 0; i < r.p_q.shape()[0]; ++i) {
            for (std::size_t j = 0; j < width; ++j) pw.cell(r.p_q.at(i, j));
            pw.end_row();
        }
        write_file(o.out, pc.str());
        files.outputs.push_back(o.out);
    }
    return files;
}

namespace {

struct PeSetup {
    pe::PerceptionRange range;
    pe::RayGrid grid;
    std::size_t d_hidden = 256;
    std::size_t d_out = 256;
    double weight_bound = 0.35;
    double bias_bound = 0.1;
    int anchor_count = 3;
    double gamma = 0.8;
    std::optional<pe::AnchorAxisSet> anchors;
};

PeSetup pe_setup(const std::string& text) {
    PeSetup s;
    if (text.empty()) return s;
    try {
        json j = json::parse(text);
        if (j.contains("range")) {
            const auto& r = j.at("range");
            if (r.is_string()) {
                s.range = pe::PerceptionRange::named(r.get<std::string>());
            } else {
                s.range = {r.at("x_lo"), r.at("x_hi"), r.at("y_lo"), r.at("y_hi"), r.at("z_lo"), r.at("z_hi")};
            }
        }
        if (j.contains("mlp")) {
            const auto& m = j.at("mlp");
            s.d_hidden = m.value("d_hidden", s.d_hidden);
            s.d_out = m.value("d_out", s.d_out);
            s.weight_bound = m.value("weight_bound", s.weight_bound);
            s.bias_bound = m.value("bias_bound", s.bias_bound);
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            s.grid.rows = g.value("rows", s.grid.rows);
            s.grid.cols = g.value("cols", s.grid.cols);
            s.grid.fov_deg = g.value("fov_deg", s.grid.fov_deg);
            s.grid.elevation_deg = g.value("elevation_deg", s.grid.elevation_deg);
            s.grid.depth_samples = g.value("depth_samples", s.grid.depth_samples);
            s.grid.depth_min = g.value("depth_min", s.grid.depth_min);
            s.grid.depth_max = g.value("depth_max", s.grid.depth_max);
            s.grid.lidar_depth = g.value("lidar_depth", s.grid.lidar_depth);
        }
        if (j.contains("anchors")) {
            const auto& a = j.at("anchors");
            if (a.is_object() && a.contains("count")) {
                s.anchor_count = a.at("count");
                s.gamma = a.value("gamma", s.gamma);
            } else {
                s.anchors = pe::AnchorAxisSet::from_json(a.dump());
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad PE config: ") + e.what());
    }
    return s;
}

}  // namespace

RunFiles run_pe_report(const PeReportOpts& o) {
    RunFiles files{{}, {o.out}, manifest_next_to(o.out)};
    auto kind = pe::parse_pe_kind(o.kind);
    std::string text;
    if (!o.config.empty()) {
        text = read_file(o.config);
        files.inputs.push_back(o.config);
    }
    PeSetup s = pe_setup(text);
    s.range.validate();

    // QFPE anchors default to the camera-ray input width so both kinds can
    // share one MLP
    const auto dim = static_cast<std::size_t>(s.grid.depth_samples);
    if (!s.anchors) s.anchors = pe::AnchorAxisSet::random(s.anchor_count, dim, s.gamma, o.seed + 1);
    std::size_t d_in = kind == pe::PeKind::camera_ray ? 3 * dim : 3 * s.anchors->dim();
    auto mlp = pe::MlpSpec::random(d_in, s.d_hidden, s.d_out, s.weight_bound, s.bias_bound, o.seed);
    auto rep = pe::magnitude_report(mlp, kind, s.grid, s.range, &*s.anchors, o.eps);

    std::ostringstream csv;
    CsvWriter w(csv);
    w.header({"metric", "value"});
    auto row = [&](std::string_view k, auto v) {
        w.cell(k).cell(v);
        w.end_row();
    };
    row("kind", pe::pe_kind_name(rep.kind));
    row("eps", rep.eps);
    row("eta_max", rep.eta_max);
    row("stage1_bound", rep.stage1);
    row("printed_stage1", rep.printed_stage1);
    row("printed_ratio", rep.printed_ratio);
    row("weight_gamma", rep.weight_gamma);
    row("d_in", static_cast<std::int64_t>(rep.d_in));
    row("d_hidden", static_cast<std::int64_t>(rep.d_hidden));
    row("weight_only_bound", rep.weight_bound);
    row("full_bound", rep.full_bound);
    row("measured_max_abs", rep.measured_max_abs);
    row("grid_points", static_cast<std::int64_t>(rep.grid_points));
    row("bound_holds", std::int64_t{rep.measured_max_abs <= rep.full_bound ? 1 : 0});
    write_file(o.out, csv.str());
    return files;
}

RunFiles run_sim(const SimOpts& o) {
    RunFiles files{{}, {o.out}, manifest_next_to(o.out)};
    attn::SuiteConfig suite;
    suite.seed = o.seed;
    suite.instances = o.instances;
    suite.rows = o.rows;
    suite.keys = o.keys;
    attn::AttentionOptions opt;
    opt.naive_scale = o.naive_scale;
    opt.qans.k = o.k;
    opt.qans.n = o.n;

    std::ostringstream csv;
    if (o.scenario == "fusion") {
        attn::write_fusion_csv(csv, attn::fusion_study(o.seed, o.k));
    } else if (o.scenario == "attention") {
        attn::write_attention_csv(csv, attn::attention_study(suite, opt));
    } else if (o.scenario == "ablation") {
        attn::AblationConfig cfg;
        cfg.suite = suite;
        attn::write_ablation_csv(csv, attn::ablation_sweep(cfg));
    } else {
        throw UsageError("unknown scenario '" + o.scenario + "' (fusion, attention, ablation)");
    }
    write_file(o.out, csv.str());
    return files;
}

}  // namespace fqkit::cli
