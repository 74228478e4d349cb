// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Parametric skinned body: template mesh + shape blendshapes + linear blend skinning
// over a 24-joint kinematic tree.
//
#pragma once

#include "binary_io.hpp"
#include "core.hpp"
#include "rotation.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace bodysplat {

using RowMatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BodyModel {
    std::vector<Vec3> template_vertices; // V, rest pose, meters
    RowMatX shape_blendshapes;           // V x (3*B): entry (v, 3*b + k) is coordinate k of mode b
    RowMatX skinning_weights;            // V x J
    RowMatX joint_regressor;             // J x V
    std::vector<int> parents;            // J, parents[0] == -1, parents[j] < j

    int num_vertices() const { return static_cast<int>(template_vertices.size()); }
    int num_joints() const { return static_cast<int>(parents.size()); }
    int num_betas() const { return static_cast<int>(shape_blendshapes.cols() / 3); }

    Vec3
    blendshape(int vertex, int beta) const {
        return shape_blendshapes.row(vertex).segment<3>(3 * beta).transpose();
    }

    /// Throws ValidationError when any structural invariant is violated.
    void
    validate() const {
        const int V = num_vertices();
        const int J = num_joints();
        require(V > 0 && J > 0, "body model: empty");
        require(shape_blendshapes.rows() == V && shape_blendshapes.cols() % 3 == 0,
                "body model: shape_blendshapes must be V x 3B");
        require(skinning_weights.rows() == V && skinning_weights.cols() == J,
                "body model: skinning_weights must be V x J");
        require(joint_regressor.rows() == J && joint_regressor.cols() == V,
                "body model: joint_regressor must be J x V");
        require(parents[0] == -1, "body model: joint 0 must be the root");
        for (int j = 1; j < J; ++j) {
            require(parents[j] >= 0 && parents[j] < j,
                    "body model: parents must form a tree with parents[j] < j (joint " +
                        std::to_string(j) + ")");
        }
        for (int v = 0; v < V; ++v) {
            require((skinning_weights.row(v).array() >= 0.0).all(),
                    "body model: negative skinning weight at vertex " + std::to_string(v));
            require(std::abs(skinning_weights.row(v).sum() - 1.0) <= 1e-6,
                    "body model: skinning row " + std::to_string(v) + " does not sum to 1");
        }
        for (int j = 0; j < J; ++j) {
            require(std::abs(joint_regressor.row(j).sum() - 1.0) <= 1e-6,
                    "body model: regressor row " + std::to_string(j) + " does not sum to 1");
        }
    }
};

struct PoseParams {
    std::vector<Mat3> joint_rotations; // J; joint 0 is the global orientation
    Vec3 root_translation = Vec3::Zero();

    static PoseParams
    identity(int num_joints) {
        return PoseParams{std::vector<Mat3>(num_joints, Mat3::Identity()), Vec3::Zero()};
    }
};

class ShapeParams {
  public:
    static constexpr double kMaxAbsBeta = 10.0;

    ShapeParams() = default;
    explicit ShapeParams(VecX betas) : betas_(std::move(betas)) {
        require(betas_.allFinite(), "shape params: non-finite beta");
        require(betas_.size() == 0 || betas_.cwiseAbs().maxCoeff() <= kMaxAbsBeta,
                "shape params: |beta| exceeds 10");
    }
    static ShapeParams zeros(int num_betas) { return ShapeParams(VecX::Zero(num_betas)); }

    const VecX &betas() const { return betas_; }
    int size() const { return static_cast<int>(betas_.size()); }

  private:
    VecX betas_;
};

/// Intermediate quantities kept from the forward pass for the adjoint.
struct LbsCache {
    std::vector<Vec3> shaped_vertices;
    std::vector<Vec3> rest_joints;
    std::vector<Mat3> global_rotations;
    std::vector<Vec3> global_positions;
};

struct LbsResult {
    std::vector<Vec3> vertices;
    std::vector<Vec3> joints;
    LbsCache cache;
};

struct LbsGrad {
    std::vector<Mat3> joint_rotations;
    VecX betas;
    Vec3 root_translation = Vec3::Zero();
};

namespace detail {

/// LBS without input validation; rotation blocks may be arbitrary 3x3 matrices.
inline LbsResult
forward_lbs_unchecked(const BodyModel &model,
                      const std::vector<Mat3> &rotations,
                      const Vec3 &translation,
                      const VecX &betas) {
    const int V = model.num_vertices();
    const int J = model.num_joints();
    const int B = model.num_betas();
    LbsResult out;
    auto &c = out.cache;

    c.shaped_vertices = model.template_vertices;
    for (int v = 0; v < V; ++v) {
        for (int b = 0; b < B; ++b) {
            c.shaped_vertices[v] += betas[b] * model.blendshape(v, b);
        }
    }

    c.rest_joints.assign(J, Vec3::Zero());
    for (int j = 0; j < J; ++j) {
        for (int v = 0; v < V; ++v) {
            c.rest_joints[j] += model.joint_regressor(j, v) * c.shaped_vertices[v];
        }
    }

    c.global_rotations.resize(J);
    c.global_positions.resize(J);
    for (int j = 0; j < J; ++j) {
        const int p = model.parents[j];
        if (p < 0) {
            c.global_rotations[j] = rotations[j];
            c.global_positions[j] = c.rest_joints[j];
        } else {
            c.global_rotations[j] = c.global_rotations[p] * rotations[j];
            c.global_positions[j] =
                c.global_rotations[p] * (c.rest_joints[j] - c.rest_joints[p]) +
                c.global_positions[p];
        }
    }

    out.vertices.resize(V);
    for (int v = 0; v < V; ++v) {
        Vec3 acc = Vec3::Zero();
        for (int j = 0; j < J; ++j) {
            const double w = model.skinning_weights(v, j);
            if (w != 0.0) {
                acc += w * (c.global_rotations[j] * (c.shaped_vertices[v] - c.rest_joints[j]) +
                            c.global_positions[j]);
            }
        }
        out.vertices[v] = acc + translation;
    }
    out.joints.resize(J);
    for (int j = 0; j < J; ++j) {
        out.joints[j] = c.global_positions[j] + translation;
    }
    return out;
}

} // namespace detail

inline void
validate_pose(const BodyModel &model, const PoseParams &pose) {
    require(static_cast<int>(pose.joint_rotations.size()) == model.num_joints(),
            "forward_lbs: expected " + std::to_string(model.num_joints()) + " joint rotations, got " +
                std::to_string(pose.joint_rotations.size()));
    require(pose.root_translation.allFinite(), "forward_lbs: non-finite root translation");
    for (std::size_t j = 0; j < pose.joint_rotations.size(); ++j) {
        require(is_rotation(pose.joint_rotations[j]),
                "forward_lbs: joint " + std::to_string(j) + " is not a rotation matrix");
    }
}

/// Posed vertices and joints for (pose, shape). Joints are the posed kinematic-tree joint
/// positions, i.e. the regressed rest joints carried through the chain.
inline LbsResult
forward_lbs(const BodyModel &model, const PoseParams &pose, const ShapeParams &shape) {
    validate_pose(model, pose);
    require(shape.size() == model.num_betas(),
            "forward_lbs: expected " + std::to_string(model.num_betas()) + " betas, got " +
                std::to_string(shape.size()));
    return detail::forward_lbs_unchecked(model, pose.joint_rotations, pose.root_translation,
                                         shape.betas());
}

/// Adjoint of forward_lbs. Either gradient span may be empty (treated as zero).
inline LbsGrad
forward_lbs_backward(const BodyModel &model,
                     const std::vector<Mat3> &rotations,
                     const LbsCache &c,
                     const std::vector<Vec3> &grad_vertices,
                     const std::vector<Vec3> &grad_joints) {
    const int V = model.num_vertices();
    const int J = model.num_joints();
    const int B = model.num_betas();
    require(grad_vertices.empty() || static_cast<int>(grad_vertices.size()) == V,
            "forward_lbs_backward: vertex gradient size mismatch");
    require(grad_joints.empty() || static_cast<int>(grad_joints.size()) == J,
            "forward_lbs_backward: joint gradient size mismatch");

    LbsGrad g;
    g.joint_rotations.assign(J, Mat3::Zero());
    g.betas = VecX::Zero(B);

    std::vector<Mat3> d_global_rot(J, Mat3::Zero());
    std::vector<Vec3> d_global_pos(J, Vec3::Zero());
    std::vector<Vec3> d_rest_joints(J, Vec3::Zero());
    std::vector<Vec3> d_shaped(V, Vec3::Zero());

    if (!grad_vertices.empty()) {
        for (int v = 0; v < V; ++v) {
            const Vec3 &gv = grad_vertices[v];
            g.root_translation += gv;
            for (int j = 0; j < J; ++j) {
                const double w = model.skinning_weights(v, j);
                if (w == 0.0) {
                    continue;
                }
                const Vec3 wg = w * gv;
                d_global_rot[j] += wg * (c.shaped_vertices[v] - c.rest_joints[j]).transpose();
                d_global_pos[j] += wg;
                const Vec3 back = c.global_rotations[j].transpose() * wg;
                d_shaped[v] += back;
                d_rest_joints[j] -= back;
            }
        }
    }
    if (!grad_joints.empty()) {
        for (int j = 0; j < J; ++j) {
            d_global_pos[j] += grad_joints[j];
            g.root_translation += grad_joints[j];
        }
    }

    for (int j = J - 1; j >= 0; --j) {
        const int p = model.parents[j];
        if (p < 0) {
            g.joint_rotations[j] += d_global_rot[j];
            d_rest_joints[j] += d_global_pos[j];
            continue;
        }
        g.joint_rotations[j] += c.global_rotations[p].transpose() * d_global_rot[j];
        d_global_rot[p] += d_global_rot[j] * rotations[j].transpose();
        d_global_rot[p] += d_global_pos[j] * (c.rest_joints[j] - c.rest_joints[p]).transpose();
        d_global_pos[p] += d_global_pos[j];
        const Vec3 back = c.global_rotations[p].transpose() * d_global_pos[j];
        d_rest_joints[j] += back;
        d_rest_joints[p] -= back;
    }

    for (int j = 0; j < J; ++j) {
        for (int v = 0; v < V; ++v) {
            d_shaped[v] += model.joint_regressor(j, v) * d_rest_joints[j];
        }
    }
    for (int v = 0; v < V; ++v) {
        for (int b = 0; b < B; ++b) {
            g.betas[b] += model.blendshape(v, b).dot(d_shaped[v]);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------------------------
// Procedural capsule-limb humanoid with the SMPL joint ordering.

struct SyntheticBodyConfig {
    int num_vertices      = 6890;
    int num_betas         = 10;
    std::uint64_t seed    = 7;
    double skin_softness  = 0.015; // meters, temperature of the two-segment softmax
    double regressor_sigma = 0.04; // meters
    double blendshape_amplitude = 0.005; // meters of radial inflation per unit beta
    double radius_scale   = 1.0;
    double length_scale   = 1.0;
};

namespace detail {

inline constexpr int kSmplJoints = 24;

inline constexpr std::array<int, kSmplJoints> kSmplParents = {
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

// Rest (T-pose) joint positions: x to the subject's left, y up, z forward.
inline const std::array<Vec3, kSmplJoints> &
smpl_like_rest_joints() {
    static const std::array<Vec3, kSmplJoints> joints = {
        Vec3(0.0, 0.0, 0.0),     Vec3(0.09, -0.08, 0.0),  Vec3(-0.09, -0.08, 0.0),
        Vec3(0.0, 0.11, -0.01),  Vec3(0.10, -0.46, 0.0),  Vec3(-0.10, -0.46, 0.0),
        Vec3(0.0, 0.24, -0.01),  Vec3(0.10, -0.86, -0.02), Vec3(-0.10, -0.86, -0.02),
        Vec3(0.0, 0.30, 0.0),    Vec3(0.10, -0.92, 0.10), Vec3(-0.10, -0.92, 0.10),
        Vec3(0.0, 0.52, -0.01),  Vec3(0.07, 0.44, 0.0),   Vec3(-0.07, 0.44, 0.0),
        Vec3(0.0, 0.62, 0.02),   Vec3(0.18, 0.45, 0.0),   Vec3(-0.18, 0.45, 0.0),
        Vec3(0.44, 0.45, 0.0),   Vec3(-0.44, 0.45, 0.0),  Vec3(0.68, 0.45, 0.0),
        Vec3(-0.68, 0.45, 0.0),  Vec3(0.76, 0.45, 0.0),   Vec3(-0.76, 0.45, 0.0)};
    return joints;
}

struct Capsule {
    Vec3 a;
    Vec3 b;
    double radius;
};

// One capsule per joint: the body part rigidly carried by that joint's rotation.
inline std::array<Capsule, kSmplJoints>
smpl_like_capsules(double radius_scale, double length_scale) {
    const auto &jt = smpl_like_rest_joints();
    auto p         = [&](int j) { return Vec3(jt[j] * length_scale); };
    auto s         = [&](const Vec3 &v) { return Vec3(v * length_scale); };
    const double r = radius_scale;
    return {{
        {s(Vec3(0.09, -0.04, 0.0)), s(Vec3(-0.09, -0.04, 0.0)), 0.10 * r}, // pelvis
        {p(1), p(4), 0.070 * r},                                          // left thigh
        {p(2), p(5), 0.070 * r},                                          // right thigh
        {p(3), p(6), 0.105 * r},                                          // lower torso
        {p(4), p(7), 0.050 * r},                                          // left shin
        {p(5), p(8), 0.050 * r},                                          // right shin
        {p(6), p(9), 0.110 * r},                                          // mid torso
        {p(7), p(10), 0.040 * r},                                         // left ankle
        {p(8), p(11), 0.040 * r},                                         // right ankle
        {p(9), p(12), 0.115 * r},                                         // chest
        {p(10), s(Vec3(0.10, -0.93, 0.20)), 0.035 * r},                   // left toes
        {p(11), s(Vec3(-0.10, -0.93, 0.20)), 0.035 * r},                  // right toes
        {p(12), p(15), 0.050 * r},                                        // neck
        {p(13), p(16), 0.055 * r},                                        // left collar
        {p(14), p(17), 0.055 * r},                                        // right collar
        {p(15), s(Vec3(0.0, 0.76, 0.02)), 0.095 * r},                     // head
        {p(16), p(18), 0.048 * r},                                        // left upper arm
        {p(17), p(19), 0.048 * r},                                        // right upper arm
        {p(18), p(20), 0.038 * r},                                        // left forearm
        {p(19), p(21), 0.038 * r},                                        // right forearm
        {p(20), p(22), 0.032 * r},                                        // left wrist
        {p(21), p(23), 0.032 * r},                                        // right wrist
        {p(22), s(Vec3(0.86, 0.45, 0.0)), 0.028 * r},                     // left hand
        {p(23), s(Vec3(-0.86, 0.45, 0.0)), 0.028 * r},                    // right hand
    }};
}

inline double
distance_to_segment(const Vec3 &x, const Vec3 &a, const Vec3 &b, Vec3 *closest = nullptr) {
    const Vec3 ab  = b - a;
    const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec3 c   = a + t * ab;
    if (closest != nullptr) {
        *closest = c;
    }
    return (x - c).norm();
}

inline double
round_to_float(double x) {
    // Explicit 24-bit mantissa rounding (ties to even). GCC 11's SLP vectorizer can drop a
    // plain double->float->double cast pair inside loops.
    if (x == 0.0 || !std::isfinite(x) || std::abs(x) < 1.1754943508222875e-38) {
        return static_cast<double>(static_cast<float>(x));
    }
    int e          = 0;
    const double m = std::frexp(x, &e);
    return std::ldexp(std::nearbyint(std::ldexp(m, 24)), e - 24);
}

} // namespace detail

/// Deterministic (seeded) stand-in for a licensed body model. All arrays are rounded to
/// float precision so that a save/load round trip through the binary container is exact.
inline BodyModel
build_synthetic_model(const SyntheticBodyConfig &config) {
    using namespace detail;
    const int V = config.num_vertices;
    const int J = kSmplJoints;
    const int B = config.num_betas;
    require(V >= J, "build_synthetic_model: V = " + std::to_string(V) +
                        " is not representable by the 24-segment layout (need V >= 24)");
    require(B >= 0, "build_synthetic_model: negative beta count");
    require(config.skin_softness > 0.0 && config.regressor_sigma > 0.0,
            "build_synthetic_model: softness and sigma must be positive");

    const auto capsules = smpl_like_capsules(config.radius_scale, config.length_scale);
    std::mt19937_64 rng(mix_seed(config.seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Vertices per capsule proportional to surface area, at least one each.
    std::array<double, kSmplJoints> area{};
    double total_area = 0.0;
    for (int s = 0; s < J; ++s) {
        const auto &c   = capsules[s];
        const double L  = (c.b - c.a).norm();
        area[s]         = 2.0 * std::numbers::pi * c.radius * (L + 2.0 * c.radius);
        total_area     += area[s];
    }
    std::array<int, kSmplJoints> counts{};
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int s = 0; s < J; ++s) {
        const double share = (V - J) * area[s] / total_area;
        counts[s]          = 1 + static_cast<int>(std::floor(share));
        assigned          += counts[s];
        remainders.emplace_back(share - std::floor(share), s);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &x, const auto &y) { return x.first > y.first; });
    for (int i = 0; assigned < V; ++i, ++assigned) {
        ++counts[remainders[i % J].second];
    }

    BodyModel model;
    model.parents.assign(kSmplParents.begin(), kSmplParents.end());
    model.template_vertices.reserve(V);
    std::vector<int> owner;
    std::vector<Vec3> radial_dir;
    owner.reserve(V);
    radial_dir.reserve(V);

    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int s = 0; s < J; ++s) {
        const auto &c   = capsules[s];
        const Vec3 axis = (c.b - c.a).normalized();
        const double L  = (c.b - c.a).norm();
        Vec3 e1 = axis.cross(std::abs(axis.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX()).normalized();
        Vec3 e2 = axis.cross(e1);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        for (int i = 0; i < counts[s]; ++i) {
            // Uniform in the axial coordinate over [-r, L + r] is uniform in area on a capsule.
            const double u   = (i + unit(rng)) / counts[s];
            const double h   = -c.radius + u * (L + 2.0 * c.radius);
            double rho       = c.radius;
            if (h < 0.0) {
                rho = std::sqrt(std::max(c.radius * c.radius - h * h, 0.0));
            } else if (h > L) {
                rho = std::sqrt(std::max(c.radius * c.radius - (h - L) * (h - L), 0.0));
            }
            const double phi = phase + golden * i;
            const Vec3 dir   = std::cos(phi) * e1 + std::sin(phi) * e2;
            model.template_vertices.push_back(c.a + axis * h + rho * dir);
            owner.push_back(s);
            Vec3 closest;
            distance_to_segment(model.template_vertices.back(), c.a, c.b, &closest);
            const Vec3 radial = model.template_vertices.back() - closest;
            radial_dir.push_back(radial.norm() > 1e-9 ? Vec3(radial.normalized()) : dir);
        }
    }

    // Skinning: softmax of negative distance over the two nearest capsule axes.
    model.skinning_weights = RowMatX::Zero(V, J);
    for (int v = 0; v < V; ++v) {
        std::array<std::pair<double, int>, kSmplJoints> d{};
        for (int s = 0; s < J; ++s) {
            d[s] = {distance_to_segment(model.template_vertices[v], capsules[s].a, capsules[s].b),
                    s};
        }
        std::partial_sort(d.begin(), d.begin() + 2, d.end());
        const double w0 = 1.0;
        const double w1 = std::exp(-(d[1].first - d[0].first) / config.skin_softness);
        // The dominant weight lies in [0.5, 1], so 1 - w is exact and float-representable:
        // rows sum to exactly 1 in double and survive the f32 round trip.
        const double dominant = round_to_float(w0 / (w0 + w1));
        model.skinning_weights(v, d[0].second) = dominant;
        model.skinning_weights(v, d[1].second) = 1.0 - dominant;
    }

    // Joint regressor: Gaussian-weighted average of vertices around each designed joint.
    const auto &design = smpl_like_rest_joints();
    model.joint_regressor = RowMatX::Zero(J, V);
    for (int j = 0; j < J; ++j) {
        const Vec3 target = design[j] * config.length_scale;
        double sum        = 0.0;
        for (int v = 0; v < V; ++v) {
            const double d2 = (model.template_vertices[v] - target).squaredNorm();
            const double w  = std::exp(-0.5 * d2 / (config.regressor_sigma * config.regressor_sigma));
            model.joint_regressor(j, v) = w;
            sum += w;
        }
        if (sum < 1e-300) {
            // Degenerate tiny layouts: fall back to the nearest vertex.
            int best = 0;
            for (int v = 1; v < V; ++v) {
                if ((model.template_vertices[v] - target).squaredNorm() <
                    (model.template_vertices[best] - target).squaredNorm()) {
                    best = v;
                }
            }
            model.joint_regressor.row(j).setZero();
            model.joint_regressor(j, best) = 1.0;
            continue;
        }
        for (int v = 0; v < V; ++v) {
            model.joint_regressor(j, v) = round_to_float(model.joint_regressor(j, v) / sum);
        }
    }

    // Shape modes: smooth radial inflation, modulated along body height.
    double y_min = std::numeric_limits<double>::max();
    double y_max = std::numeric_limits<double>::lowest();
    for (const auto &v : model.template_vertices) {
        y_min = std::min(y_min, v.y());
        y_max = std::max(y_max, v.y());
    }
    model.shape_blendshapes = RowMatX::Zero(V, 3 * B);
    for (int b = 0; b < B; ++b) {
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        for (int v = 0; v < V; ++v) {
            const double height = (model.template_vertices[v].y() - y_min) / (y_max - y_min);
            const double gain   = b == 0 ? 1.0 : std::cos(b * std::numbers::pi * height + phase);
            const Vec3 disp     = config.blendshape_amplitude * gain * radial_dir[v];
            for (int k = 0; k < 3; ++k) {
                model.shape_blendshapes(v, 3 * b + k) = round_to_float(disp[k]);
            }
        }
    }
    for (auto &v : model.template_vertices) {
        v = v.unaryExpr([](double x) { return round_to_float(x); });
    }
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------------------------
// Binary container: "GSTB", u32 version, V, J, B, then little-endian f32 arrays: template
// (V x 3), blendshapes (V x 3 x B), skinning weights (V x J), regressor (J x V), parents
// (J, -1 for the root). Layout details in FORMATS.md.

inline constexpr std::uint32_t kBodyModelVersion = 1;

inline void
save_body_model(const BodyModel &model, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_body_model: cannot open " + path.string());
    binio::write_magic(out, "GSTB");
    binio::write_u32(out, kBodyModelVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(model.num_vertices()));
    binio::write_u32(out, static_cast<std::uint32_t>(model.num_joints()));
    binio::write_u32(out, static_cast<std::uint32_t>(model.num_betas()));
    for (const auto &v : model.template_vertices) {
        binio::write_f32s(out, {v.x(), v.y(), v.z()});
    }
    // On disk the blendshapes are V x 3 x B (coordinate-major per vertex).
    const int B = model.num_betas();
    for (int v = 0; v < model.num_vertices(); ++v) {
        for (int k = 0; k < 3; ++k) {
            for (int b = 0; b < B; ++b) {
                binio::write_f32(out, static_cast<float>(model.shape_blendshapes(v, 3 * b + k)));
            }
        }
    }
    binio::write_matrix_f32(out, model.skinning_weights);
    binio::write_matrix_f32(out, model.joint_regressor);
    for (int p : model.parents) {
        binio::write_f32s(out, {static_cast<double>(p)});
    }
    require(out.good(), "save_body_model: write failed for " + path.string());
}

inline BodyModel
load_body_model(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_body_model: cannot open " + path.string());
    const std::string where = "load_body_model(" + path.string() + ")";
    binio::expect_magic(in, "GSTB", where);
    const std::uint32_t version = binio::read_u32(in, where);
    require(version == kBodyModelVersion, where + ": unsupported version " + std::to_string(version));
    const int V = static_cast<int>(binio::read_u32(in, where));
    const int J = static_cast<int>(binio::read_u32(in, where));
    const int B = static_cast<int>(binio::read_u32(in, where));
    require(V > 0 && J > 0 && V < (1 << 24) && J < 4096 && B < 4096, where + ": implausible header");

    BodyModel model;
    model.template_vertices.resize(V);
    for (auto &v : model.template_vertices) {
        const auto xyz = binio::read_f32s(in, 3, where);
        v              = Vec3(xyz[0], xyz[1], xyz[2]);
    }
    const auto modes        = binio::read_matrix_f32(in, V, 3 * B, where); // V x 3 x B
    model.shape_blendshapes = RowMatX(V, 3 * B);
    for (int v = 0; v < V; ++v) {
        for (int k = 0; k < 3; ++k) {
            for (int b = 0; b < B; ++b) {
                model.shape_blendshapes(v, 3 * b + k) = modes(v, k * B + b);
            }
        }
    }
    model.skinning_weights  = binio::read_matrix_f32(in, V, J, where);
    model.joint_regressor   = binio::read_matrix_f32(in, J, V, where);
    const auto parents      = binio::read_f32s(in, J, where);
    model.parents.resize(J);
    for (int j = 0; j < J; ++j) {
        model.parents[j] = static_cast<int>(parents[j]);
    }
    model.validate();
    return model;
}

} // namespace bodysplat
