#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fqkit/dulut/function.hpp"
#include "fqkit/dulut/measure.hpp"
#include "fqkit/lut/kernel.hpp"

namespace fqkit::dulut {

struct BuildConfig {
    int input_bits = 8;      // b
    int k_hw = 0;            // codes one table1 segment may cover; 0 = 2^b / m1
    int m1 = 32;             // table1 segments
    int m2 = 32;             // table2 segments
    double delta = 1e-4;     // stop once the worst segment ARE is at or below this
    int max_iters = 1024;
    double are_epsilon = 0;  // relative-error guard; <= 0 selects one output step
    bool polish_values = true;
    // real interval the output codes cover; default is f's range on the domain
    std::optional<std::pair<double, double>> output_range;
};

void validate(const BuildConfig& cfg);

// One accepted step of the build loop. objective is the worst segment
// excess ARE after the step (the quantity the loop drives down).
struct HistoryEntry {
    int iteration = 0;
    int merged_segment = -1;  // -1 for the final value polish
    int neighbor_segment = -1;
    int split_segment = -1;
    int unit = 0;             // index positions moved
    double objective = 0.0;
};

struct SegmentRecord {
    int index = 0;
    std::int32_t lo_code = 0;
    std::int32_t hi_code = 0;
    double are = 0.0;         // mean |f - fhat| / (|f| + eps) over the segment
    double excess_are = 0.0;  // same with the output-rounding floor removed
    double max_abs_error = 0.0;
    double bound_eq4 = 0.0;   // (h^2/8) max|f''| + one output step
};

// Segments are table1 segments. ARE is measured on dequantized reals with
// are_epsilon as the denominator guard.
struct ErrorReport {
    std::vector<double> per_segment_are;
    double global_max_are = 0.0;
    double global_mean_are = 0.0;
    std::vector<double> per_segment_excess_are;
    double global_max_excess_are = 0.0;
    int iterations_used = 0;
    std::vector<HistoryEntry> history;
    std::vector<SegmentRecord> segments;
    std::vector<std::int32_t> index_spans;  // table2 index positions per table1 segment
    double are_epsilon = 0.0;
    double max_rel_error = 0.0;  // worst single code
    double mean_rel_error = 0.0;
    double max_abs_error_lsb = 0.0;
    double bound_excess = 0.0;     // <= 0 when every value segment meets the bound
};

struct BuiltPair {
    lut::DulutPair pair;
    ErrorReport report;
};

lut::LinearLut build_linear_lut(const FunctionSpec& f, int i_bit, int t_bit);
lut::LinearLut build_linear_lut(const FunctionSpec& f, int t_bit, const lut::AffineMap& input,
                                std::optional<std::pair<double, double>> output_range = std::nullopt);

// Error-driven merge/split of the table1 index map under the resolution
// constraint, followed by an optional +-1 polish of the table2 values.
BuiltPair build_dulut(const FunctionSpec& f, const BuildConfig& cfg);
BuiltPair build_dulut(const FunctionSpec& f, const BuildConfig& cfg, const lut::AffineMap& input);

// Contrast baseline: the same moves ranked only by (h^2/8) max|f''|, with no
// hardware evaluation and no resolution constraint. Its history records the
// worst curvature bound instead of an ARE.
BuiltPair curvature_only_merge(const FunctionSpec& f, const BuildConfig& cfg);
BuiltPair curvature_only_merge(const FunctionSpec& f, const BuildConfig& cfg, const lut::AffineMap& input);

// (h^2/8) max|f''| + eps_hw over [lo, hi]
double interp_error_bound(const FunctionSpec& f, double lo, double hi, double eps_hw);

// Report rows for an arbitrary pair (used for loaded tables too).
ErrorReport assess(const FunctionSpec& f, const lut::DulutPair& pair, double are_epsilon);

}  // namespace fqkit::dulut
