#include "app.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fqkit/util/error.hpp"
#include "manifest.hpp"

#ifndef FQKIT_VERSION
#define FQKIT_VERSION "dev"
#endif

namespace fqkit::cli {

namespace fs = std::filesystem;

namespace {

// flags whose values are output locations; replay --redirect rewrites them
const std::set<std::string> kOutputFlags{"--out", "--out-dir", "--report"};

// Canonical flag list of a parsed subcommand, defaults included, in
// declaration order.
std::vector<std::string> canonical_args(const CLI::App& sub, std::map<std::string, std::string>& config) {
    std::vector<std::string> args;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        std::string name = "--" + opt->get_lnames().front();
        if (name == "--help") continue;
        if (opt->get_type_size_max() == 0) {
            bool on = opt->count() > 0;
            config[name] = on ? "true" : "false";
            if (on) args.push_back(name);
            continue;
        }
        std::string value = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
        if (value.empty()) continue;
        config[name] = value;
        args.push_back(name);
        args.push_back(value);
    }
    return args;
}

struct Command {
    CLI::App* app;
    std::function<RunFiles()> run;
    const std::uint64_t* seed;
};

int replay(const std::string& manifest, const std::string& redirect) {
    RunManifest m = read_manifest(manifest);
    std::vector<std::string> argv{m.command};
    for (std::size_t i = 0; i < m.args.size(); ++i) {
        argv.push_back(m.args[i]);
        if (!redirect.empty() && kOutputFlags.contains(m.args[i]) && i + 1 < m.args.size()) {
            const std::string& v = m.args[++i];
            argv.push_back(m.args[i - 1] == "--out-dir" ? redirect : (fs::path(redirect) / fs::path(v).filename()).string());
        }
    }
    return run(argv);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"fqkit: fixed-point LUT, integer softmax and PE quantization toolkit", "fqkit"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", FQKIT_VERSION);

    std::vector<Command> commands;

    BuildDulutOpts bd;
    auto* c_bd = app.add_subcommand("build-dulut", "Build a cascaded table pair for a nonlinearity");
    c_bd->add_option("--fn", bd.fn, "exp, silu, gelu, sigmoid, inverse_sigmoid, identity or custom")->required();
    c_bd->add_option("--lo", bd.lo, "Domain lower end (default per function)");
    c_bd->add_option("--hi", bd.hi, "Domain upper end (default per function)");
    c_bd->add_option("--samples", bd.samples, "x,f(x) CSV for --fn custom");
    c_bd->add_option("--i-bit", bd.i_bit, "Input code width");
    c_bd->add_option("--m1", bd.m1, "Index table segments");
    c_bd->add_option("--m2", bd.m2, "Value table segments");
    c_bd->add_option("--k-hw", bd.k_hw, "Codes one index segment may cover (0 = 2^i_bit / m1)");
    c_bd->add_option("--delta", bd.delta, "Stop once the worst segment ARE is at or below this");
    c_bd->add_option("--max-iters", bd.max_iters, "Iteration cap");
    c_bd->add_option("--are-eps", bd.are_eps, "Relative error guard (0 = one output step)");
    c_bd->add_flag("--no-polish", bd.no_polish, "Skip the value-table polish");
    c_bd->add_option("--out-dir", bd.out_dir, "Directory for pair.json, report.csv, pair.bin, manifest.json");
    c_bd->add_option("--seed", bd.seed, "Accepted for uniformity; the build is deterministic");
    commands.push_back({c_bd, [&] { return run_build_dulut(bd); }, &bd.seed});

    EvalOpts ev;
    auto* c_ev = app.add_subcommand("eval", "Evaluate a table file on input codes");
    c_ev->add_option("--table", ev.table, "pair.json, linear table JSON or .bin dump")->required();
    c_ev->add_option("--input", ev.input, "CSV whose first column holds input codes")->required();
    c_ev->add_option("--out", ev.out, "Output CSV")->required();
    c_ev->add_option("--fn", ev.fn, "Target function (overrides the one stored with the table)");
    c_ev->add_option("--lo", ev.lo, "Domain lower end for --fn");
    c_ev->add_option("--hi", ev.hi, "Domain upper end for --fn");
    c_ev->add_option("--are-eps", ev.are_eps, "Relative error guard (default: stored value, else one output step)");
    c_ev->add_option("--seed", ev.seed, "Accepted for uniformity");
    commands.push_back({c_ev, [&] { return run_eval(ev); }, &ev.seed});

    QansOpts qa;
    auto* c_qa = app.add_subcommand("qans", "Pick the QANS truncation bound for a logit matrix");
    c_qa->add_option("--input", qa.input, "Logit CSV, one softmax row per line")->required();
    c_qa->add_option("--report", qa.report, "Per-candidate report CSV")->required();
    c_qa->add_option("--out", qa.out, "Optional CSV of the selected quantized softmax");
    c_qa->add_option("--k", qa.k, "Bit width");
    c_qa->add_option("--n", qa.n, "Number of candidate bounds");
    c_qa->add_option("--norm", qa.norm, "l1 or l2");
    c_qa->add_option("--frozen-index", qa.frozen_index, "Use this candidate instead of selecting (0 = select)");
    c_qa->add_option("--seed", qa.seed, "Accepted for uniformity");
    commands.push_back({c_qa, [&] { return run_qans(qa); }, &qa.seed});

    PeReportOpts pr;
    auto* c_pr = app.add_subcommand("pe-report", "Magnitude bounds and measured range of a PE");
    c_pr->add_option("--kind", pr.kind, "camera-ray or qfpe")->required();
    c_pr->add_option("--config", pr.config, "PE JSON config (range, mlp, grid, anchors)");
    c_pr->add_option("--out", pr.out, "Report CSV")->required();
    c_pr->add_option("--eps", pr.eps, "Inverse-sigmoid guard");
    c_pr->add_option("--seed", pr.seed, "Seed for random MLP and anchors");
    commands.push_back({c_pr, [&] { return run_pe_report(pr); }, &pr.seed});

    SimOpts sm;
    auto* c_sm = app.add_subcommand("sim", "Fusion, attention and ablation simulations");
    c_sm->add_option("--scenario", sm.scenario, "fusion, attention or ablation")->required();
    c_sm->add_option("--out", sm.out, "Metrics CSV")->required();
    c_sm->add_option("--seed", sm.seed, "Suite seed");
    c_sm->add_option("--instances", sm.instances, "Suite instances");
    c_sm->add_option("--rows", sm.rows, "Rows per instance");
    c_sm->add_option("--keys", sm.keys, "Keys per row");
    c_sm->add_option("--k", sm.k, "Bit width");
    c_sm->add_option("--n", sm.n, "QANS candidates");
    c_sm->add_option("--naive-scale", sm.naive_scale, "Scale of the quantize-before-stabilization baseline");
    commands.push_back({c_sm, [&] { return run_sim(sm); }, &sm.seed});

    std::string manifest_path, redirect;
    auto* c_rp = app.add_subcommand("replay", "Rerun a command from its manifest");
    c_rp->add_option("--manifest", manifest_path, "manifest.json written by an earlier run")->required();
    c_rp->add_option("--redirect", redirect, "Write outputs into this directory instead");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_rp->parsed()) return replay(manifest_path, redirect);
        for (const auto& cmd : commands) {
            if (!cmd.app->parsed()) continue;
            RunManifest m;
            m.command = cmd.app->get_name();
            m.args = canonical_args(*cmd.app, m.config);
            m.seed = std::to_string(*cmd.seed);
            m.tool_version = FQKIT_VERSION;
            auto t0 = std::chrono::steady_clock::now();
            RunFiles files = cmd.run();
            m.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.inputs = files.inputs;
            m.outputs = files.outputs;
            write_manifest(files.manifest_path, m);
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "fqkit: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "fqkit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fqkit: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace fqkit::cli
