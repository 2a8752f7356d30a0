#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fqkit/core/quant.hpp"
#include "fqkit/core/tensor.hpp"
#include "fqkit/qans/softmax.hpp"

namespace fqkit::attn {

// Dynamic ranges of the two PE surrogates and of the image features.
inline constexpr double kCameraRayRange = 130.0;
inline constexpr double kQfpeRange = 29.7;
inline constexpr double kImageRange = 4.0;

// Gaussian with sigma = bound / 3, clipped to [-bound, bound].
Tensor image_features(Shape shape, std::uint64_t seed, double bound = kImageRange);

// Stand-in for a PE activation map: mostly moderate values with a thin tail,
// rescaled so max |v| equals `range` exactly.
Tensor pe_surrogate(Shape shape, double range, std::uint64_t seed);

struct FusionScenario {
    Tensor img_feat;
    Tensor pe_feat;
    int k = 8;
};

struct DistortionMetrics {
    double l1_error = 0.0;           // mean per-row L1 distance
    double argmax_shift_rate = 0.0;  // rows whose argmax moved
    double peak_attenuation = 0.0;   // mean of p_f - p_q at the float argmax
    std::int64_t effective_bins = 0;

    friend bool operator==(const DistortionMetrics&, const DistortionMetrics&) = default;
};

// Codes the image band [min, max] spans at scale s: floor(range / s) + 1,
// capped at the code count.
std::int64_t effective_bins(double img_range, double scale, int k);

struct FusionResult {
    IntTensor codes;
    QuantParams params{8, 1.0};
    double img_range = 0.0;
    double retention = 0.0;  // effective_bins / 2^k
    DistortionMetrics metrics;
};

// One symmetric per-tensor scale calibrated on img + pe.
FusionResult fuse_and_quantize(const FusionScenario& s);

enum class SoftmaxMode { exact, naive_quant, qans, qans_dulut };
SoftmaxMode parse_softmax_mode(std::string_view name);
std::string_view mode_name(SoftmaxMode m);

struct AttentionOptions {
    double naive_scale = 5.0;
    qans::QansConfig qans;
    qans::ExpPairBudget pair_budget;
};

struct AttentionResult {
    Tensor output;  // rows x d_v
    Tensor probs;   // rows x keys
    DistortionMetrics metrics;
    int selected_i = 0;  // QANS modes only
};

// Row-wise distortion of q against the reference p. effective_bins is left
// at zero.
DistortionMetrics compare_distributions(const Tensor& p, const Tensor& q);

// softmax(Q K^T / sqrt(d)) V with the chosen softmax path; metrics are taken
// against the exact path on the same inputs.
AttentionResult run_attention(const Tensor& queries, const Tensor& keys, const Tensor& values, SoftmaxMode mode,
                              const AttentionOptions& opt = {});

Tensor attention_logits(const Tensor& queries, const Tensor& keys);

// Wide-range synthetic attention suite. Each row holds a background drawn
// from N(0, spread) clipped to +-clip, one peak above the background by a
// margin in [margin_lo, margin_hi), and a few close competitors at most
// cluster_depth below the peak.
struct SuiteConfig {
    int instances = 8;
    int rows = 256;
    int keys = 256;
    int value_dim = 32;
    double spread = 120.0;
    double clip = 500.0;
    double margin_lo = 0.5;
    double margin_hi = 5.0;
    int competitors = 6;
    double cluster_depth = 15.0;
    std::uint64_t seed = 7;
};

struct AttentionInstance {
    Tensor queries;
    Tensor keys;
    Tensor values;
};

Tensor suite_logits(const SuiteConfig& cfg, int instance);
std::vector<AttentionInstance> attention_suite(const SuiteConfig& cfg);

struct AblationConfig {
    std::vector<int> anchor_counts{2, 3, 4, 5};
    std::vector<int> qans_n{1, 5, 10, 20, 30, 40};
    std::vector<std::pair<int, int>> dulut_sizes{{16, 16}, {16, 32}, {32, 32}, {64, 64}};
    SuiteConfig suite;
};

// One row per configuration. Columns that do not apply to a sweep are empty.
struct AblationRow {
    std::string sweep;
    std::string setting;
    std::vector<std::pair<std::string, double>> metrics;
};

std::vector<AblationRow> ablation_sweep(const AblationConfig& cfg);

// CSV writers for the three sim scenarios
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

struct FusionRow {
    std::string pe_source;
    double pe_range = 0.0;
    double scale = 0.0;
    std::int64_t effective_bins = 0;
    double retention = 0.0;
};
std::vector<FusionRow> fusion_study(std::uint64_t seed, int k = 8);
void write_fusion_csv(std::ostream& out, const std::vector<FusionRow>& rows);

struct AttentionRow {
    int instance = 0;
    SoftmaxMode mode = SoftmaxMode::exact;
    int selected_i = 0;
    DistortionMetrics metrics;
};
std::vector<AttentionRow> attention_study(const SuiteConfig& suite, const AttentionOptions& opt = {});
void write_attention_csv(std::ostream& out, const std::vector<AttentionRow>& rows);

}  // namespace fqkit::attn
