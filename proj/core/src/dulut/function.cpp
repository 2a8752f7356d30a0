#include "fqkit/dulut/function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "fqkit/util/error.hpp"

namespace fqkit::dulut {

namespace {

constexpr std::pair<FunctionKind, std::string_view> kNames[] = {
    {FunctionKind::exp, "exp"},
    {FunctionKind::silu, "silu"},
    {FunctionKind::gelu, "gelu"},
    {FunctionKind::sigmoid, "sigmoid"},
    {FunctionKind::inverse_sigmoid, "inverse_sigmoid"},
    {FunctionKind::identity, "identity"},
    {FunctionKind::custom, "custom"},
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// zeros of f''' for the built-ins (exp and inverse_sigmoid have monotone
// f'', identity has none)
std::span<const double> critical_points(FunctionKind kind) {
    static constexpr double silu[] = {-3.435840993535110689, 0.0, 3.435840993535110689};
    static constexpr double gelu[] = {-2.0, 0.0, 2.0};
    static constexpr double sigm[] = {-1.3169578969248167086, 1.3169578969248167086};
    switch (kind) {
        case FunctionKind::silu: return silu;
        case FunctionKind::gelu: return gelu;
        case FunctionKind::sigmoid: return sigm;
        default: return {};
    }
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

FunctionKind parse_function_kind(std::string_view name) {
    for (auto [k, n] : kNames)
        if (n == name) return k;
    throw UnknownFunction(std::string(name));
}

std::string_view function_name(FunctionKind kind) {
    for (auto [k, n] : kNames)
        if (k == kind) return n;
    return "?";
}

std::pair<double, double> FunctionSpec::default_domain(FunctionKind kind) {
    switch (kind) {
        case FunctionKind::exp: return {-20.0, 0.0};
        case FunctionKind::inverse_sigmoid: return {0.001, 0.999};
        default: return {-8.0, 8.0};
    }
}

FunctionSpec FunctionSpec::builtin(FunctionKind kind, double domain_lo, double domain_hi) {
    if (kind == FunctionKind::custom) throw ConfigError("custom functions need samples");
    if (!(domain_lo < domain_hi)) throw ConfigError("function domain needs lo < hi");
    if (kind == FunctionKind::inverse_sigmoid && (domain_lo <= 0.0 || domain_hi >= 1.0))
        throw ConfigError("inverse_sigmoid domain must lie inside (0, 1)");
    return FunctionSpec(kind, domain_lo, domain_hi);
}

FunctionSpec FunctionSpec::builtin(std::string_view name, double domain_lo, double domain_hi) {
    return builtin(parse_function_kind(name), domain_lo, domain_hi);
}

FunctionSpec FunctionSpec::custom(std::vector<std::pair<double, double>> samples, double domain_lo,
                                  double domain_hi) {
    if (!(domain_lo < domain_hi)) throw ConfigError("function domain needs lo < hi");
    if (samples.size() < 3) throw ConfigError("custom function needs at least 3 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second))
            throw RangeError("custom sample is not finite");
        if (i > 0 && !(samples[i].first > samples[i - 1].first))
            throw ConfigError("custom sample x values must be strictly increasing");
    }
    FunctionSpec f(FunctionKind::custom, domain_lo, domain_hi);
    f.samples_ = std::move(samples);
    return f;
}

double FunctionSpec::operator()(double x) const {
    switch (kind_) {
        case FunctionKind::exp: return std::exp(x);
        case FunctionKind::silu: return x * sigmoid(x);
        case FunctionKind::gelu: return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
        case FunctionKind::sigmoid: return sigmoid(x);
        case FunctionKind::inverse_sigmoid: return std::log(x / (1.0 - x));
        case FunctionKind::identity: return x;
        case FunctionKind::custom: {
            const auto& s = samples_;
            auto it = std::upper_bound(s.begin(), s.end(), x, [](double v, const auto& p) { return v < p.first; });
            std::size_t i = static_cast<std::size_t>(it - s.begin());
            i = std::clamp<std::size_t>(i, 1, s.size() - 1);
            const auto& [x0, y0] = s[i - 1];
            const auto& [x1, y1] = s[i];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return 0.0;
}

double FunctionSpec::second_derivative(double x) const {
    switch (kind_) {
        case FunctionKind::exp: return std::exp(x);
        case FunctionKind::silu: {
            double s = sigmoid(x);
            return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
        }
        case FunctionKind::gelu: return normal_pdf(x) * (2.0 - x * x);
        case FunctionKind::sigmoid: {
            double s = sigmoid(x);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case FunctionKind::inverse_sigmoid: return (2.0 * x - 1.0) / (x * x * (1.0 - x) * (1.0 - x));
        case FunctionKind::identity: return 0.0;
        case FunctionKind::custom: {
            // second divided difference over the sample triple nearest x
            const auto& s = samples_;
            auto it = std::lower_bound(s.begin(), s.end(), x, [](const auto& p, double v) { return p.first < v; });
            std::size_t i = static_cast<std::size_t>(it - s.begin());
            i = std::clamp<std::size_t>(i, 1, s.size() - 2);
            const auto& [x0, y0] = s[i - 1];
            const auto& [x1, y1] = s[i];
            const auto& [x2, y2] = s[i + 1];
            return 2.0 * ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0);
        }
    }
    return 0.0;
}

double FunctionSpec::max_abs_second_derivative(double a, double b) const {
    if (a > b) std::swap(a, b);
    double m = 0.0;
    if (kind_ == FunctionKind::custom) {
        // every sample triple touching [a, b]
        const auto& s = samples_;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i + 1].first < a || s[i - 1].first > b) continue;
            m = std::max(m, std::abs(second_derivative(s[i].first)));
        }
        return std::max({m, std::abs(second_derivative(a)), std::abs(second_derivative(b))});
    }
    // |f''| peaks at the interval ends or at a zero of f''' inside it
    m = std::max(std::abs(second_derivative(a)), std::abs(second_derivative(b)));
    for (double c : critical_points(kind_))
        if (c > a && c < b) m = std::max(m, std::abs(second_derivative(c)));
    return m;
}

}  // namespace fqkit::dulut
