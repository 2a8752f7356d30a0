#include "fqkit/posembed/posembed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "fqkit/util/error.hpp"
#include "fqkit/util/parallel.hpp"
#include "fqkit/util/rng.hpp"

namespace fqkit::pe {

using json = nlohmann::json;

namespace {

constexpr const char* kAxisNames[3] = {"x", "y", "z"};

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.values()) m = std::max(m, std::abs(v));
    return m;
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

PerceptionRange PerceptionRange::named(std::string_view name) {
    if (name == "standard") return standard();
    if (name == "wide") return wide();
    throw UsageError("unknown perception range '" + std::string(name) + "'");
}

void PerceptionRange::validate() const {
    if (!(x_lo < x_hi) || !(y_lo < y_hi) || !(z_lo < z_hi)) throw RangeError("perception range needs lo < hi per axis");
}

Point3 normalize(const Point3& p, const PerceptionRange& r) {
    r.validate();
    return {clamp01((p.x - r.x_lo) / (r.x_hi - r.x_lo)), clamp01((p.y - r.y_lo) / (r.y_hi - r.y_lo)),
            clamp01((p.z - r.z_lo) / (r.z_hi - r.z_lo))};
}

double inverse_sigmoid(double v, double eps) {
    if (!(eps >= 0.0 && eps < 0.5)) throw RangeError("inverse_sigmoid eps must be in [0, 0.5)");
    double c = std::clamp(v, eps, 1.0 - eps);
    return std::log(c / (1.0 - c));
}

Tensor inverse_sigmoid(const Tensor& v, double eps) {
    Tensor out = v;
    for (double& x : out.data()) x = inverse_sigmoid(x, eps);
    return out;
}

double eta_max(double eps) { return std::max(std::abs(inverse_sigmoid(0.0, eps)), std::abs(inverse_sigmoid(1.0, eps))); }

MlpSpec::MlpSpec(Tensor w1, Tensor b1, Tensor w2, Tensor b2)
    : w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(std::move(b2)) {
    if (w1_.rank() != 2 || w2_.rank() != 2) throw ShapeError("MLP weights must be matrices");
    if (b1_.size() != w1_.shape()[1]) throw ShapeError("first bias does not match the hidden width");
    if (w2_.shape()[0] != w1_.shape()[1]) throw ShapeError("second layer input does not match the hidden width");
    if (b2_.size() != w2_.shape()[1]) throw ShapeError("second bias does not match the output width");
    if (!all_finite(w1_) || !all_finite(w2_) || !all_finite(b1_) || !all_finite(b2_))
        throw RangeError("MLP parameters must be finite");
    max_weight_ = std::max(max_abs(w1_), max_abs(w2_));
    max_bias1_ = max_abs(b1_);
    max_bias2_ = max_abs(b2_);
}

MlpSpec MlpSpec::random(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, double weight_bound,
                        double bias_bound, std::uint64_t seed) {
    if (!(weight_bound >= 0.0) || !(bias_bound >= 0.0)) throw RangeError("MLP bounds must be non-negative");
    Rng rng(seed);
    Tensor w1 = uniform_tensor({d_in, d_hidden}, weight_bound, rng);
    Tensor b1 = uniform_tensor({d_hidden}, bias_bound, rng);
    Tensor w2 = uniform_tensor({d_hidden, d_out}, weight_bound, rng);
    Tensor b2 = uniform_tensor({d_out}, bias_bound, rng);
    return MlpSpec(std::move(w1), std::move(b1), std::move(w2), std::move(b2));
}

MlpSpec MlpSpec::zeros(std::size_t d_in, std::size_t d_hidden, std::size_t d_out) {
    return MlpSpec(Tensor({d_in, d_hidden}), Tensor({d_hidden}), Tensor({d_hidden, d_out}), Tensor({d_out}));
}

Tensor MlpSpec::forward(const Tensor& x) const {
    if (x.rank() != 2 || x.shape()[1] != d_in()) throw ShapeError("MLP input width mismatch");
    const std::size_t rows = x.shape()[0];
    const std::size_t nh = d_hidden(), no = d_out(), ni = d_in();
    Tensor out({rows, no});
    parallel_for(rows, 16, [&](std::size_t b, std::size_t e) {
        std::vector<double> h(nh);
        for (std::size_t r = b; r < e; ++r) {
            std::copy(b1_.values().begin(), b1_.values().end(), h.begin());
            for (std::size_t i = 0; i < ni; ++i) {
                double xi = x.at(r, i);
                if (xi == 0.0) continue;
                const double* w = &w1_[i * nh];
                for (std::size_t j = 0; j < nh; ++j) h[j] += xi * w[j];
            }
            double* o = &out.at(r, 0);
            std::copy(b2_.values().begin(), b2_.values().end(), o);
            for (std::size_t j = 0; j < nh; ++j) {
                double hj = std::max(h[j], 0.0);
                if (hj == 0.0) continue;
                const double* w = &w2_[j * no];
                for (std::size_t k = 0; k < no; ++k) o[k] += hj * w[k];
            }
        }
    });
    return out;
}

Tensor camera_ray_inputs(std::span<const std::vector<Point3>> pixels, const PerceptionRange& r, double eps) {
    if (pixels.empty()) return Tensor({0, 0});
    const std::size_t samples = pixels.front().size();
    Tensor in({pixels.size(), 3 * samples});
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        if (pixels[p].size() != samples) throw ShapeError("every pixel needs the same number of depth samples");
        for (std::size_t s = 0; s < samples; ++s) {
            Point3 v = normalize(pixels[p][s], r);
            for (int a = 0; a < 3; ++a) in.at(p, 3 * s + a) = inverse_sigmoid(v[a], eps);
        }
    }
    return in;
}

Tensor camera_ray_pe(std::span<const std::vector<Point3>> pixels, const MlpSpec& mlp, const PerceptionRange& r,
                     double eps) {
    Tensor in = camera_ray_inputs(pixels, r, eps);
    if (pixels.empty()) return Tensor({0, mlp.d_out()});
    if (in.shape()[1] != mlp.d_in())
        throw ShapeError("camera-ray input width " + std::to_string(in.shape()[1]) + " does not match MLP input " +
                         std::to_string(mlp.d_in()));
    return mlp.forward(in);
}

Point3 lidar_ray_sample(const Point3& origin, const Point3& dir, double depth) {
    double norm = std::sqrt(dir.x * dir.x + dir.y * dir.y + dir.z * dir.z);
    if (!(std::abs(norm - 1.0) <= 1e-6)) throw RangeError("ray direction must be a unit vector");
    return {origin.x + depth * dir.x, origin.y + depth * dir.y, origin.z + depth * dir.z};
}

AnchorAxisSet::AnchorAxisSet(std::array<AxisAnchors, 3> axes, double gamma) : axes_(std::move(axes)), gamma_(gamma) {
    if (!(gamma_ >= 0.0)) throw RangeError("anchor gamma must be non-negative");
    for (int a = 0; a < 3; ++a) {
        const auto& ax = axes_[static_cast<std::size_t>(a)];
        std::string name = kAxisNames[a];
        if (ax.locations.size() < 2) throw ConfigError("axis " + name + " needs at least two anchors");
        if (ax.locations.size() != ax.embeddings.size())
            throw ConfigError("axis " + name + " has " + std::to_string(ax.locations.size()) + " locations but " +
                              std::to_string(ax.embeddings.size()) + " embeddings");
        for (std::size_t i = 1; i < ax.locations.size(); ++i)
            if (!(ax.locations[i] > ax.locations[i - 1]))
                throw ConfigError("anchor locations on axis " + name + " must be strictly increasing");
        if (a == 0) dim_ = ax.embeddings.front().size();
        for (const auto& e : ax.embeddings) {
            if (e.size() != dim_ || dim_ == 0) throw ShapeError("anchor embeddings must share one non-zero dimension");
            for (double v : e)
                if (!(std::abs(v) <= gamma_)) throw RangeError("anchor embedding entry exceeds gamma on axis " + name);
        }
    }
}

AnchorAxisSet AnchorAxisSet::random(int count, std::size_t dim, double gamma, std::uint64_t seed) {
    if (count < 2 || count > 8) throw ConfigError("anchor count must be in [2, 8]");
    Rng rng(seed);
    std::array<AxisAnchors, 3> axes;
    for (auto& ax : axes) {
        for (int i = 0; i < count; ++i) {
            ax.locations.push_back(static_cast<double>(i) / (count - 1));
            std::vector<double> e(dim);
            for (double& v : e) v = rng.uniform(-gamma, gamma);
            ax.embeddings.push_back(std::move(e));
        }
    }
    return AnchorAxisSet(std::move(axes), gamma);
}

std::vector<double> AnchorAxisSet::interpolate(int a, double t) const {
    const auto& ax = axis(a);
    const auto& loc = ax.locations;
    t = std::clamp(t, loc.front(), loc.back());
    auto it = std::upper_bound(loc.begin(), loc.end(), t);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - loc.begin()), loc.size() - 1) - 1;
    double lambda = (t - loc[i]) / (loc[i + 1] - loc[i]);
    const auto& lo = ax.embeddings[i];
    const auto& hi = ax.embeddings[i + 1];
    std::vector<double> e(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
        double v = lambda * hi[k] + (1.0 - lambda) * lo[k];
        // rounding may land one ulp outside the two endpoints; the exact
        // convex combination cannot
        e[k] = std::clamp(v, std::min(lo[k], hi[k]), std::max(lo[k], hi[k]));
    }
    return e;
}

std::string AnchorAxisSet::to_json() const {
    json arr = json::array();
    for (int a = 0; a < 3; ++a)
        arr.push_back(json{{"axis", kAxisNames[a]},
                           {"locations", axis(a).locations},
                           {"embeddings", axis(a).embeddings},
                           {"gamma", gamma_}});
    return arr.dump();
}

AnchorAxisSet AnchorAxisSet::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad anchor json: ") + e.what());
    }
    if (j.is_object() && j.contains("axes")) j = j.at("axes");
    if (!j.is_array() || j.size() != 3) throw ConfigError("anchor json must list the x, y and z axes");
    std::array<AxisAnchors, 3> axes;
    std::array<bool, 3> seen{};
    double gamma = 0.0;
    try {
        for (const auto& ax : j) {
            auto name = ax.at("axis").get<std::string>();
            int a = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : -1;
            if (a < 0 || seen[static_cast<std::size_t>(a)]) throw ConfigError("bad or repeated axis '" + name + "'");
            seen[static_cast<std::size_t>(a)] = true;
            axes[static_cast<std::size_t>(a)].locations = ax.at("locations").get<std::vector<double>>();
            axes[static_cast<std::size_t>(a)].embeddings = ax.at("embeddings").get<std::vector<std::vector<double>>>();
            gamma = std::max(gamma, ax.at("gamma").get<double>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad anchor json: ") + e.what());
    }
    return AnchorAxisSet(std::move(axes), gamma);
}

Tensor qfpe_features(std::span<const Point3> points, const AnchorAxisSet& anchors, const PerceptionRange& r) {
    const std::size_t d = anchors.dim();
    Tensor f({points.size(), 3 * d});
    for (std::size_t p = 0; p < points.size(); ++p) {
        Point3 v = normalize(points[p], r);
        for (int a = 0; a < 3; ++a) {
            auto e = anchors.interpolate(a, v[a]);
            std::copy(e.begin(), e.end(), &f.at(p, static_cast<std::size_t>(a) * d));
        }
    }
    return f;
}

Tensor qfpe_embed(std::span<const Point3> points, const AnchorAxisSet& anchors, const PerceptionRange& r,
                  const MlpSpec& mlp) {
    if (3 * anchors.dim() != mlp.d_in())
        throw ShapeError("anchor width " + std::to_string(3 * anchors.dim()) + " does not match MLP input " +
                         std::to_string(mlp.d_in()));
    if (points.empty()) return Tensor({0, mlp.d_out()});
    return mlp.forward(qfpe_features(points, anchors, r));
}

std::vector<double> qfpe_embed(const Point3& p, const AnchorAxisSet& anchors, const PerceptionRange& r,
                               const MlpSpec& mlp) {
    return qfpe_embed(std::span(&p, 1), anchors, r, mlp).values();
}

PeKind parse_pe_kind(std::string_view name) {
    if (name == "camera-ray" || name == "camera_ray") return PeKind::camera_ray;
    if (name == "qfpe") return PeKind::qfpe;
    throw UsageError("unknown PE kind '" + std::string(name) + "'");
}

std::string_view pe_kind_name(PeKind k) { return k == PeKind::camera_ray ? "camera-ray" : "qfpe"; }

std::vector<Point3> RayGrid::directions() const {
    if (rows < 1 || cols < 1) throw ConfigError("ray grid needs at least one row and column");
    std::vector<Point3> dirs;
    const double deg = std::numbers::pi / 180.0;
    for (int i = 0; i < rows; ++i) {
        double el = rows == 1 ? 0.0 : (-0.5 + static_cast<double>(i) / (rows - 1)) * elevation_deg * deg;
        for (int j = 0; j < cols; ++j) {
            double az = (-0.5 + (j + 0.5) / cols) * fov_deg * deg;
            dirs.push_back({std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)});
        }
    }
    return dirs;
}

std::vector<std::vector<Point3>> RayGrid::camera_samples() const {
    if (depth_samples < 1) throw ConfigError("need at least one depth sample");
    std::vector<std::vector<Point3>> out;
    for (const Point3& d : directions()) {
        std::vector<Point3> px;
        for (int k = 0; k < depth_samples; ++k) {
            double t = depth_samples == 1 ? 0.0 : static_cast<double>(k) / (depth_samples - 1);
            double depth = depth_min + t * (depth_max - depth_min);
            px.push_back({depth * d.x, depth * d.y, depth * d.z});
        }
        out.push_back(std::move(px));
    }
    return out;
}

std::vector<Point3> RayGrid::lidar_points() const {
    std::vector<Point3> out;
    for (const Point3& d : directions()) out.push_back(lidar_ray_sample({}, d, lidar_depth));
    return out;
}

MagnitudeReport magnitude_report(const MlpSpec& mlp, PeKind kind, const RayGrid& grid, const PerceptionRange& r,
                                 const AnchorAxisSet* anchors, double eps) {
    MagnitudeReport rep;
    rep.kind = kind;
    rep.eps = eps;
    rep.eta_max = eta_max(eps);
    rep.printed_ratio = 11.5 / 2.6;
    rep.weight_gamma = mlp.max_weight();
    rep.d_in = mlp.d_in();
    rep.d_hidden = mlp.d_hidden();
    Tensor out;
    if (kind == PeKind::camera_ray) {
        rep.stage1 = rep.eta_max;
        rep.printed_stage1 = 11.5;
        auto pixels = grid.camera_samples();
        out = camera_ray_pe(pixels, mlp, r, eps);
        rep.grid_points = pixels.size();
    } else {
        if (anchors == nullptr) throw ConfigError("QFPE magnitude report needs an anchor set");
        rep.stage1 = anchors->gamma();
        rep.printed_stage1 = 2.6;
        auto pts = grid.lidar_points();
        out = qfpe_embed(pts, *anchors, r, mlp);
        rep.grid_points = pts.size();
    }
    const double g = rep.weight_gamma;
    const auto din = static_cast<double>(rep.d_in);
    const auto dh = static_cast<double>(rep.d_hidden);
    rep.weight_bound = dh * din * g * g * rep.stage1;
    rep.full_bound = dh * g * (din * g * rep.stage1 + mlp.max_bias1()) + mlp.max_bias2();
    rep.measured_max_abs = max_abs(out);
    return rep;
}

}  // namespace fqkit::pe
