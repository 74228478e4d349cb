// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Per-vertex Gaussian parameterization and the vertex scaffold: every Gaussian mean is a
// body vertex plus a learned offset.
//
#pragma once

#include "core.hpp"
#include "rotation.hpp"

#include <filesystem>
#include <fstream>
#include <random>

namespace bodysplat {

/// Raw (unconstrained) per-Gaussian parameters, 14 per Gaussian.
struct GaussianAttributes {
    static constexpr int kParamsPerGaussian = 14;

    std::vector<Vec3> offsets;
    std::vector<Vec4> rotations; // (w, x, y, z), not necessarily unit
    std::vector<Vec3> log_scales;
    std::vector<double> opacity_logits;
    std::vector<Vec3> colors_raw;

    std::size_t size() const { return offsets.size(); }

    void
    resize(std::size_t n) {
        offsets.resize(n);
        rotations.resize(n);
        log_scales.resize(n);
        opacity_logits.resize(n);
        colors_raw.resize(n);
    }

    static GaussianAttributes
    zeros(std::size_t n) {
        GaussianAttributes a;
        a.offsets.assign(n, Vec3::Zero());
        a.rotations.assign(n, Vec4::Zero());
        a.log_scales.assign(n, Vec3::Zero());
        a.opacity_logits.assign(n, 0.0);
        a.colors_raw.assign(n, Vec3::Zero());
        return a;
    }

    void
    validate() const {
        const std::size_t n = offsets.size();
        require(rotations.size() == n && log_scales.size() == n && opacity_logits.size() == n &&
                    colors_raw.size() == n,
                "gaussian attributes: field lengths differ");
        for (std::size_t i = 0; i < n; ++i) {
            require(offsets[i].allFinite() && rotations[i].allFinite() &&
                        log_scales[i].allFinite() && std::isfinite(opacity_logits[i]) &&
                        colors_raw[i].allFinite(),
                    "gaussian attributes: non-finite value at row " + std::to_string(i));
        }
    }

    /// Flat view in the fixed order offset(3) rotation(4) log_scale(3) opacity(1) color(3).
    double &
    param(std::size_t gaussian, int k) {
        if (k < 3) return offsets[gaussian][k];
        if (k < 7) return rotations[gaussian][k - 3];
        if (k < 10) return log_scales[gaussian][k - 7];
        if (k < 11) return opacity_logits[gaussian];
        return colors_raw[gaussian][k - 11];
    }
    double param(std::size_t gaussian, int k) const {
        return const_cast<GaussianAttributes *>(this)->param(gaussian, k);
    }
};

/// Activated world-space Gaussians ready for rendering.
struct GaussianSet {
    std::vector<Vec3> means;
    std::vector<Mat3> covariances;
    std::vector<double> opacities;
    std::vector<Vec3> colors;

    std::size_t size() const { return means.size(); }
};

struct GaussianSetGrad {
    std::vector<Vec3> means;
    std::vector<Mat3> covariances;
    std::vector<double> opacities;
    std::vector<Vec3> colors;

    static GaussianSetGrad
    zeros(std::size_t n) {
        return {std::vector<Vec3>(n, Vec3::Zero()), std::vector<Mat3>(n, Mat3::Zero()),
                std::vector<double>(n, 0.0), std::vector<Vec3>(n, Vec3::Zero())};
    }
};

struct ScaffoldConfig {
    int gaussians_per_vertex = 1;
    bool fixed_opacity_one   = false;
    double min_scale         = 1e-4;
    double max_scale         = 0.5;
};

inline void
validate_scaffold_config(const ScaffoldConfig &cfg) {
    require(cfg.gaussians_per_vertex >= 1 && cfg.gaussians_per_vertex <= 3,
            "scaffold: gaussians_per_vertex must be 1, 2 or 3");
}

namespace detail {

inline constexpr double kMinQuaternionNorm = 1e-8;

inline Vec3
clamped_scales(const Vec3 &log_scales, const ScaffoldConfig &cfg) {
    return log_scales.unaryExpr(
        [&](double s) { return std::clamp(std::exp(s), cfg.min_scale, cfg.max_scale); });
}

} // namespace detail

inline GaussianSet
scaffold(const std::vector<Vec3> &vertices,
         const GaussianAttributes &attrs,
         const ScaffoldConfig &cfg = {}) {
    validate_scaffold_config(cfg);
    const std::size_t g = static_cast<std::size_t>(cfg.gaussians_per_vertex);
    require(attrs.size() == vertices.size() * g,
            "scaffold: expected " + std::to_string(vertices.size() * g) + " attribute rows, got " +
                std::to_string(attrs.size()));
    require(all_finite(vertices), "scaffold: non-finite vertex");
    attrs.validate();

    const std::size_t n = attrs.size();
    GaussianSet set;
    set.means.resize(n);
    set.covariances.resize(n);
    set.opacities.resize(n);
    set.colors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        set.means[i]      = vertices[i / g] + attrs.offsets[i];
        const double norm = attrs.rotations[i].norm();
        require(norm >= detail::kMinQuaternionNorm,
                "scaffold: zero-norm quaternion at row " + std::to_string(i));
        const Mat3 r = matrix_from_unit_quaternion(attrs.rotations[i] / norm);
        const Vec3 s = detail::clamped_scales(attrs.log_scales[i], cfg);
        const Mat3 m = r * s.asDiagonal();
        const Mat3 cov     = m * m.transpose();
        set.covariances[i] = 0.5 * (cov + cov.transpose());
        set.opacities[i]   = cfg.fixed_opacity_one ? 1.0 : sigmoid(attrs.opacity_logits[i]);
        set.colors[i]      = attrs.colors_raw[i].unaryExpr([](double c) { return sigmoid(c); });
    }
    return set;
}

struct ScaffoldGrad {
    std::vector<Vec3> vertices;
    GaussianAttributes attrs;
};

/// Adjoint of scaffold(). Covariance gradients are taken as full 3x3 matrices.
inline ScaffoldGrad
scaffold_backward(std::size_t num_vertices,
                  const GaussianAttributes &attrs,
                  const GaussianSetGrad &grad,
                  const ScaffoldConfig &cfg = {}) {
    const std::size_t g = static_cast<std::size_t>(cfg.gaussians_per_vertex);
    const std::size_t n = attrs.size();
    require(grad.means.size() == n && grad.covariances.size() == n && grad.opacities.size() == n &&
                grad.colors.size() == n,
            "scaffold_backward: gradient size mismatch");
    ScaffoldGrad out;
    out.vertices.assign(num_vertices, Vec3::Zero());
    out.attrs = GaussianAttributes::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.vertices[i / g] += grad.means[i];
        out.attrs.offsets[i] = grad.means[i];

        const double norm = attrs.rotations[i].norm();
        const Vec4 q      = attrs.rotations[i] / norm;
        const Mat3 r      = matrix_from_unit_quaternion(q);
        const Vec3 s      = detail::clamped_scales(attrs.log_scales[i], cfg);
        const Mat3 m      = r * s.asDiagonal();
        const Mat3 dm     = (grad.covariances[i] + grad.covariances[i].transpose()) * m;
        const Mat3 dr     = dm * s.asDiagonal();
        const Vec3 ds     = (r.transpose() * dm).diagonal();
        for (int k = 0; k < 3; ++k) {
            const double raw = std::exp(attrs.log_scales[i][k]);
            const bool inside = raw > cfg.min_scale && raw < cfg.max_scale;
            out.attrs.log_scales[i][k] = inside ? ds[k] * raw : 0.0;
        }
        const Vec4 dq            = matrix_from_unit_quaternion_backward(q, dr);
        out.attrs.rotations[i]   = (dq - q * q.dot(dq)) / norm;

        if (!cfg.fixed_opacity_one) {
            const double a             = sigmoid(attrs.opacity_logits[i]);
            out.attrs.opacity_logits[i] = grad.opacities[i] * a * (1.0 - a);
        }
        for (int k = 0; k < 3; ++k) {
            const double c           = sigmoid(attrs.colors_raw[i][k]);
            out.attrs.colors_raw[i][k] = grad.colors[i][k] * c * (1.0 - c);
        }
    }
    return out;
}

/// Mean offset norm (not squared), 1/N sum ||delta_n||.
inline double
tightness(const GaussianAttributes &attrs) {
    if (attrs.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto &d : attrs.offsets) {
        sum += d.norm();
    }
    return sum / static_cast<double>(attrs.size());
}

inline std::vector<Vec3>
tightness_grad(const GaussianAttributes &attrs, double eps = 1e-8) {
    const double n = static_cast<double>(attrs.size());
    std::vector<Vec3> out(attrs.size());
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        out[i] = attrs.offsets[i] / (n * std::max(attrs.offsets[i].norm(), eps));
    }
    return out;
}

/// Mean distance from each vertex to its nearest neighbour (brute force, O(V^2)).
inline double
mean_nearest_vertex_distance(const std::vector<Vec3> &vertices) {
    if (vertices.size() < 2) {
        return 0.01;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < vertices.size(); ++j) {
            if (i != j) {
                best = std::min(best, (vertices[i] - vertices[j]).squaredNorm());
            }
        }
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(vertices.size());
}

/// Default starting point: zero offsets, identity rotations, opacity 0.9, grey colour,
/// isotropic scale of half the mean nearest-vertex spacing. With more than one Gaussian per
/// vertex the copies get a small seeded offset jitter so they can separate.
inline GaussianAttributes
initial_attributes(const std::vector<Vec3> &rest_vertices,
                   const ScaffoldConfig &cfg = {},
                   std::uint64_t seed        = 0) {
    validate_scaffold_config(cfg);
    const std::size_t n = rest_vertices.size() * cfg.gaussians_per_vertex;
    const double scale  = std::max(mean_nearest_vertex_distance(rest_vertices) / 2.0, 1e-3);
    GaussianAttributes a;
    a.offsets.assign(n, Vec3::Zero());
    a.rotations.assign(n, Vec4(1.0, 0.0, 0.0, 0.0));
    a.log_scales.assign(n, Vec3::Constant(std::log(scale)));
    a.opacity_logits.assign(n, logit(0.9));
    a.colors_raw.assign(n, Vec3::Zero());
    if (cfg.gaussians_per_vertex > 1) {
        std::mt19937_64 rng(mix_seed(seed, 11));
        std::normal_distribution<double> normal(0.0, 1e-3);
        for (auto &d : a.offsets) {
            d = Vec3(normal(rng), normal(rng), normal(rng));
        }
    }
    return a;
}

/// ASCII PLY in the community 3DGS layout (x y z, f_dc_0..2, opacity, scale_0..2, rot_0..3).
/// f_dc stores the degree-0 SH coefficient (c - 0.5) / 0.28209479177387814, opacity the logit,
/// scale the log scale.
inline void
export_ply(const GaussianSet &set, const std::filesystem::path &path) {
    std::ofstream out(path);
    require(out.good(), "export_ply: cannot open " + path.string());
    out << "ply\nformat ascii 1.0\nelement vertex " << set.size() << "\n";
    for (const char *name : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2",
                             "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                             "rot_3"}) {
        out << "property float " << name << "\n";
    }
    out << "end_header\n";
    constexpr double kSh0 = 0.28209479177387814;
    for (std::size_t i = 0; i < set.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Mat3> eig(set.covariances[i]);
        Mat3 r = eig.eigenvectors();
        if (r.determinant() < 0.0) {
            r.col(2) *= -1.0;
        }
        const Eigen::Quaterniond q(r);
        const Vec3 scale = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
        const double a   = std::clamp(set.opacities[i], 1e-6, 1.0 - 1e-6);
        const Vec3 &m    = set.means[i];
        const Vec3 &c    = set.colors[i];
        out << m.x() << ' ' << m.y() << ' ' << m.z() << " 0 0 0 " << (c.x() - 0.5) / kSh0 << ' '
            << (c.y() - 0.5) / kSh0 << ' ' << (c.z() - 0.5) / kSh0 << ' ' << logit(a) << ' '
            << std::log(scale.x()) << ' ' << std::log(scale.y()) << ' ' << std::log(scale.z())
            << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << '\n';
    }
    require(out.good(), "export_ply: write failed for " + path.string());
}

} // namespace bodysplat
