#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fqkit/dulut/function.hpp"
#include "fqkit/lut/kernel.hpp"

namespace fqkit::dulut {

// Exhaustive per-code comparison of a table against its target function on
// dequantized reals. ideal is the best value the output code map can hold,
// so excess = (|f - fhat| - |f - ideal|) / (|f| + eps) isolates the error
// the table adds on top of output rounding.
struct CodeError {
    std::int32_t code_in = 0;
    std::int32_t code_out = 0;
    double real_in = 0.0;
    double f = 0.0;
    double fhat = 0.0;
    double ideal = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double excess = 0.0;
};

struct ErrorProfile {
    std::vector<CodeError> codes;  // ordered by input code
    double are_epsilon = 0.0;
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    double max_abs_error = 0.0;
    double max_abs_error_lsb = 0.0;  // in output quantization steps
    double max_excess = 0.0;
};

// are_epsilon <= 0 selects one output quantization step.
double resolve_are_epsilon(double are_epsilon, const lut::AffineMap& output);

ErrorProfile measure(const FunctionSpec& f, const lut::LinearLut& lut, double are_epsilon);
ErrorProfile measure(const FunctionSpec& f, const lut::DulutPair& pair, double are_epsilon);

// Output map covering f over every input code (q_min -> min f, q_max -> max f).
lut::AffineMap output_map_for(const FunctionSpec& f, const lut::AffineMap& input);

// Input map covering the function domain with all codes.
lut::AffineMap input_map_for(const FunctionSpec& f, int bits);

// Interval of one interpolation segment in real input units together with
// the codes that land in it.
struct SegmentSpan {
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::int32_t first_code = 0;
    std::int32_t last_code = -1;  // last < first when no code lands here
};

// Value-table segments seen from the input side: for the pair, segment k of
// table2 is the preimage under the piecewise-linear index map of table1.
std::vector<SegmentSpan> value_segments(const lut::LinearLut& lut);
std::vector<SegmentSpan> value_segments(const lut::DulutPair& pair);
std::vector<SegmentSpan> value_segments(const lut::LutTable& table1, const lut::LutTable& table2,
                                        const lut::AffineMap& input);

// Largest amount by which a segment's measured max |f - fhat| exceeds
// (h^2/8) max|f''| + one output step; <= 0 means every segment complies.
double bound_excess(const FunctionSpec& f, const std::vector<SegmentSpan>& segments, const ErrorProfile& profile,
                  const lut::AffineMap& output);
// abs_err[i] belongs to input code first_code + i
double bound_excess(const FunctionSpec& f, const std::vector<SegmentSpan>& segments, std::span<const double> abs_err,
                  std::int32_t first_code, double output_step);

}  // namespace fqkit::dulut
