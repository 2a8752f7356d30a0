#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fqkit::dulut {

enum class FunctionKind { exp, silu, gelu, sigmoid, inverse_sigmoid, identity, custom };

FunctionKind parse_function_kind(std::string_view name);  // throws UnknownFunction
std::string_view function_name(FunctionKind kind);

// Target nonlinearity plus the real interval the input codes cover.
// Custom functions are given as a dense (x, f(x)) grid, evaluated by linear
// interpolation (linear extrapolation outside the grid) and differentiated
// twice by finite differences.
class FunctionSpec {
public:
    static FunctionSpec builtin(FunctionKind kind, double domain_lo, double domain_hi);
    static FunctionSpec builtin(std::string_view name, double domain_lo, double domain_hi);
    static FunctionSpec custom(std::vector<std::pair<double, double>> samples, double domain_lo, double domain_hi);

    // default domains: exp [-20, 0], silu/gelu/identity [-8, 8], sigmoid [-8, 8],
    // inverse_sigmoid [0.001, 0.999]
    static std::pair<double, double> default_domain(FunctionKind kind);

    FunctionKind kind() const { return kind_; }
    std::string_view name() const { return function_name(kind_); }
    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }

    double operator()(double x) const;
    double second_derivative(double x) const;
    // max |f''| on [a, b]: exact for the built-ins, over the sample triples
    // touching [a, b] for custom grids
    double max_abs_second_derivative(double a, double b) const;

private:
    FunctionSpec(FunctionKind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

    FunctionKind kind_;
    double lo_;
    double hi_;
    std::vector<std::pair<double, double>> samples_;
};

}  // namespace fqkit::dulut
