#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fqkit/core/tensor.hpp"

namespace fqkit::pe {

inline constexpr double kInverseSigmoidEps = 1e-5;

// Metric box the coordinates are normalized against.
struct PerceptionRange {
    double x_lo = -51.2, x_hi = 51.2;
    double y_lo = -51.2, y_hi = 51.2;
    double z_lo = -5.0, z_hi = 3.0;

    static PerceptionRange standard() { return {}; }
    static PerceptionRange wide() { return {-61.2, 61.2, -61.2, 61.2, -10.0, 10.0}; }
    static PerceptionRange named(std::string_view name);  // "standard" or "wide"

    void validate() const;
};

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

// Per-axis (p - lo) / (hi - lo), clamped to [0, 1].
Point3 normalize(const Point3& p, const PerceptionRange& r);

// ln(v / (1 - v)) with v first clamped to [eps, 1 - eps], so both ends stay
// finite and v = 0 gives ln(eps / (1 - eps)).
double inverse_sigmoid(double v, double eps = kInverseSigmoidEps);
Tensor inverse_sigmoid(const Tensor& v, double eps = kInverseSigmoidEps);

// Largest |inverse_sigmoid| over [0, 1].
double eta_max(double eps = kInverseSigmoidEps);

// Two fully connected layers with ReLU between them. Weights are stored
// input-major: w1 is d_in x d_hidden, w2 is d_hidden x d_out.
class MlpSpec {
public:
    MlpSpec(Tensor w1, Tensor b1, Tensor w2, Tensor b2);

    // Weights and biases uniform in [-weight_bound, weight_bound] and
    // [-bias_bound, bias_bound].
    static MlpSpec random(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, double weight_bound,
                          double bias_bound, std::uint64_t seed);
    static MlpSpec zeros(std::size_t d_in, std::size_t d_hidden, std::size_t d_out);

    std::size_t d_in() const { return w1_.shape()[0]; }
    std::size_t d_hidden() const { return w1_.shape()[1]; }
    std::size_t d_out() const { return w2_.shape()[1]; }

    double max_weight() const { return max_weight_; }  // largest |W1|, |W2| entry
    double max_bias1() const { return max_bias1_; }
    double max_bias2() const { return max_bias2_; }

    // x: rows x d_in -> rows x d_out
    Tensor forward(const Tensor& x) const;

private:
    Tensor w1_, b1_, w2_, b2_;
    double max_weight_ = 0.0;
    double max_bias1_ = 0.0;
    double max_bias2_ = 0.0;
};

// Camera-ray baseline: each pixel contributes its depth samples, every
// coordinate goes through normalize and inverse_sigmoid, the per-pixel
// values are concatenated (x, y, z per sample) and fed to the MLP.
// Returns pixels x d_out.
Tensor camera_ray_inputs(std::span<const std::vector<Point3>> pixels, const PerceptionRange& r,
                         double eps = kInverseSigmoidEps);
Tensor camera_ray_pe(std::span<const std::vector<Point3>> pixels, const MlpSpec& mlp, const PerceptionRange& r,
                     double eps = kInverseSigmoidEps);

// origin + depth * dir; dir must be unit length within 1e-6.
Point3 lidar_ray_sample(const Point3& origin, const Point3& dir, double depth = 30.0);

// Anchors along one axis: strictly increasing normalized locations, one
// embedding of common dimension per location.
struct AxisAnchors {
    std::vector<double> locations;
    std::vector<std::vector<double>> embeddings;
};

class AnchorAxisSet {
public:
    AnchorAxisSet(std::array<AxisAnchors, 3> axes, double gamma);

    // count evenly spaced anchors on [0, 1] per axis, entries uniform in
    // [-gamma, gamma]
    static AnchorAxisSet random(int count, std::size_t dim, double gamma, std::uint64_t seed);

    const AxisAnchors& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    std::size_t dim() const { return dim_; }
    double gamma() const { return gamma_; }

    // t outside the anchor span is clamped to the end anchors
    std::vector<double> interpolate(int a, double t) const;

    // [{"axis": "x", "locations": [...], "embeddings": [[...]], "gamma": g}, ...]
    std::string to_json() const;
    static AnchorAxisSet from_json(std::string_view text);

private:
    std::array<AxisAnchors, 3> axes_;
    double gamma_;
    std::size_t dim_ = 0;
};

// Concatenated axis embeddings (e_x, e_y, e_z) per point: points x 3*dim.
Tensor qfpe_features(std::span<const Point3> points, const AnchorAxisSet& anchors, const PerceptionRange& r);
Tensor qfpe_embed(std::span<const Point3> points, const AnchorAxisSet& anchors, const PerceptionRange& r,
                  const MlpSpec& mlp);
std::vector<double> qfpe_embed(const Point3& p, const AnchorAxisSet& anchors, const PerceptionRange& r,
                               const MlpSpec& mlp);

enum class PeKind { camera_ray, qfpe };
PeKind parse_pe_kind(std::string_view name);
std::string_view pe_kind_name(PeKind k);

// Pixel grid for the sampled sweeps: rays from the origin through a
// rows x cols grid of directions spanning the horizontal field of view and
// a small elevation band.
struct RayGrid {
    int rows = 8;
    int cols = 32;
    double fov_deg = 360.0;
    double elevation_deg = 10.0;
    int depth_samples = 64;
    double depth_min = 1.0;
    double depth_max = 61.2;
    double lidar_depth = 30.0;

    std::vector<Point3> directions() const;
    std::vector<std::vector<Point3>> camera_samples() const;
    std::vector<Point3> lidar_points() const;
};

// Stage-1 magnitude is the largest input the MLP can see: eta_max for the
// camera ray, gamma for the anchors. The weight-only bound is
// d_hidden * d_in * Gamma^2 * stage1; the full bound also carries biases.
struct MagnitudeReport {
    PeKind kind = PeKind::camera_ray;
    double eps = kInverseSigmoidEps;
    double eta_max = 0.0;
    double stage1 = 0.0;
    double printed_stage1 = 0.0;  // 11.5 or 2.6 as printed for the two PE forms
    double printed_ratio = 0.0;   // 11.5 / 2.6
    double weight_gamma = 0.0;
    std::size_t d_in = 0;
    std::size_t d_hidden = 0;
    double weight_bound = 0.0;
    double full_bound = 0.0;
    double measured_max_abs = 0.0;
    std::size_t grid_points = 0;
};

MagnitudeReport magnitude_report(const MlpSpec& mlp, PeKind kind, const RayGrid& grid, const PerceptionRange& r,
                                 const AnchorAxisSet* anchors = nullptr, double eps = kInverseSigmoidEps);

}  // namespace fqkit::pe
