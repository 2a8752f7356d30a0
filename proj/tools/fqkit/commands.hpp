#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fqkit::cli {

// Files a command touched; the manifest goes to manifest_path.
struct RunFiles {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::filesystem::path manifest_path;
};

struct BuildDulutOpts {
    std::string fn;
    std::optional<double> lo;
    std::optional<double> hi;
    std::string samples;  // x,f grid for --fn custom
    int i_bit = 8;
    int m1 = 32;
    int m2 = 32;
    int k_hw = 0;
    double delta = 1e-4;
    int max_iters = 1024;
    double are_eps = 0.0;
    bool no_polish = false;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

struct EvalOpts {
    std::string table;
    std::string input;
    std::string out;
    std::string fn;  // overrides the function stored with the table
    std::optional<double> lo;
    std::optional<double> hi;
    std::optional<double> are_eps;
    std::uint64_t seed = 0;
};

struct QansOpts {
    std::string input;
    std::string report;
    std::string out;  // optional probabilities
    int k = 8;
    int n = 20;
    std::string norm = "l1";
    int frozen_index = 0;
    std::uint64_t seed = 0;
};

struct PeReportOpts {
    std::string kind;
    std::string config;
    std::string out;
    double eps = 1e-5;
    std::uint64_t seed = 7;
};

struct SimOpts {
    std::string scenario;
    std::string out;
    std::uint64_t seed = 7;
    int instances = 8;
    int rows = 256;
    int keys = 256;
    int k = 8;
    int n = 20;
    double naive_scale = 5.0;
};

RunFiles run_build_dulut(const BuildDulutOpts& o);
RunFiles run_eval(const EvalOpts& o);
RunFiles run_qans(const QansOpts& o);
RunFiles run_pe_report(const PeReportOpts& o);
RunFiles run_sim(const SimOpts& o);

}  // namespace fqkit::cli
