// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Per-scene inverse rendering: Adam on pose (6D), shape, root translation and all Gaussian
// attributes against the multi-view image loss.
//
#pragma once

#include "adam.hpp"
#include "dataio.hpp"
#include "losses.hpp"
#include "metrics.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace bodysplat {

enum class InitKind { ground_truth, perturbed, tpose };
enum class AttributeInit { ground_truth, fresh };

struct FitInit {
    InitKind kind            = InitKind::ground_truth;
    double perturb_degrees   = 10.0;
    std::uint64_t seed       = 0;
    AttributeInit attributes = AttributeInit::ground_truth;

    /// "gt", "tpose" or "perturbed:<degrees>".
    static FitInit
    parse(const std::string &text) {
        FitInit f;
        if (text == "gt") {
            f.kind = InitKind::ground_truth;
        } else if (text == "tpose") {
            f.kind       = InitKind::tpose;
            f.attributes = AttributeInit::fresh;
        } else if (text.rfind("perturbed:", 0) == 0) {
            f.kind = InitKind::perturbed;
            const std::string num = text.substr(10);
            std::size_t used      = 0;
            try {
                f.perturb_degrees = std::stod(num, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            require(used == num.size() && !num.empty() && std::isfinite(f.perturb_degrees) &&
                        f.perturb_degrees >= 0.0 && f.perturb_degrees <= 180.0,
                    "init: bad perturbation angle in '" + text + "'");
        } else {
            throw ValidationError("init: expected gt, tpose or perturbed:<deg>, got '" + text + "'");
        }
        return f;
    }
};

struct FitOptions {
    int steps         = 2000;
    double lr_attrs   = 1e-2;
    double lr_pose    = 1e-3; // 6D rotations, root translation and betas
    LossWeights weights;
    int threads       = 1;
    bool fit_attributes = true;
    bool fit_shape      = true;

    void
    validate() const {
        require(steps >= 0, "fit: steps must be non-negative");
        require(lr_attrs > 0.0 && lr_pose > 0.0, "fit: learning rates must be positive");
        require(threads >= 1, "fit: threads must be at least 1");
        weights.validate();
    }
};

struct FitResult {
    SceneParams params;            // best-total-loss iterate
    std::vector<LossReport> trace; // one entry per evaluated iterate, step 0 = init
    int best_step = 0;
    SceneParams initial;
};

/// Every joint rotation (global orientation included) composed with a rotation of exactly
/// `degrees` about a uniformly random axis.
inline PoseParams
perturb_pose(const PoseParams &pose, double degrees, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 303));
    PoseParams out = pose;
    for (auto &r : out.joint_rotations) {
        r = r * random_rotation_with_angle(rng, degrees * std::numbers::pi / 180.0);
    }
    return out;
}

/// Starting parameters for a fit. Perturbed and ground-truth inits need dataset ground truth.
inline SceneParams
initial_params(const SceneDataset &ds, const BodyModel &model, const FitInit &init,
               const ScaffoldConfig &scaffold_cfg = {}) {
    SceneParams p;
    const bool needs_gt = init.kind != InitKind::tpose || init.attributes == AttributeInit::ground_truth;
    require(!needs_gt || ds.gt.has_value(), "fit: this init needs ground-truth params (params.json)");
    if (init.kind == InitKind::tpose) {
        p.pose  = PoseParams::identity(model.num_joints());
        p.shape = ShapeParams::zeros(model.num_betas());
        // Root joint at the origin, matching how generated scenes are framed.
        p.pose.root_translation = -forward_lbs(model, p.pose, p.shape).joints[0];
    } else {
        p.pose  = ds.gt->pose;
        p.shape = ds.gt->shape;
        if (init.kind == InitKind::perturbed) {
            p.pose = perturb_pose(p.pose, init.perturb_degrees, init.seed);
        }
    }
    if (init.attributes == AttributeInit::ground_truth) {
        p.attrs    = ds.gt->attrs;
        p.scaffold = ds.gt->scaffold;
    } else {
        p.scaffold = ds.gt ? ds.gt->scaffold : scaffold_cfg;
        p.attrs    = initial_attributes(model.template_vertices, p.scaffold, init.seed);
    }
    validate_params(model, p, "fit init");
    return p;
}

/// Mean over views of IoU between (rendered alpha > 0.5) and the target mask.
inline double
mask_iou(const std::vector<ImageBuffer> &renders, const std::vector<ViewTarget> &targets) {
    require(renders.size() == targets.size() && !renders.empty(), "mask_iou: view count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < renders.size(); ++i) {
        double inter = 0.0, uni = 0.0;
        for (std::size_t p = 0; p < targets[i].mask.size(); ++p) {
            const bool a = renders[i].alpha.data[p] > 0.5;
            const bool b = targets[i].mask.data[p] > 0.5;
            inter += (a && b) ? 1.0 : 0.0;
            uni   += (a || b) ? 1.0 : 0.0;
        }
        sum += uni > 0.0 ? inter / uni : 1.0;
    }
    return sum / static_cast<double>(renders.size());
}

/// Flat parameter blocks shared by fitting and the predictor:
///   pose block = [rot6 per joint (6J), root translation (3), betas (B)]
///   attribute block = 14 values per Gaussian in GaussianAttributes::param order.
inline VecX
pack_pose_block(const PoseParams &pose, const ShapeParams &shape) {
    const int J = static_cast<int>(pose.joint_rotations.size());
    VecX x(6 * J + 3 + shape.size());
    for (int j = 0; j < J; ++j) x.segment<6>(6 * j) = rot6_from_matrix(pose.joint_rotations[j]);
    x.segment<3>(6 * J) = pose.root_translation;
    x.tail(shape.size()) = shape.betas();
    return x;
}

inline VecX
pack_attr_block(const GaussianAttributes &a) {
    constexpr int K = GaussianAttributes::kParamsPerGaussian;
    VecX x(static_cast<Eigen::Index>(a.size() * K));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int k = 0; k < K; ++k) x[static_cast<Eigen::Index>(i * K + k)] = a.param(i, k);
    }
    return x;
}

inline SceneParams
unpack_blocks(const BodyModel &model, const VecX &pose_block, const VecX &attr_block,
              const ScaffoldConfig &cfg) {
    const int J = model.num_joints(), B = model.num_betas();
    constexpr int K = GaussianAttributes::kParamsPerGaussian;
    require(pose_block.size() == 6 * J + 3 + B, "unpack: pose block size mismatch");
    require(attr_block.size() % K == 0, "unpack: attribute block size is not a multiple of 14");
    SceneParams out;
    out.pose.joint_rotations.resize(J);
    for (int j = 0; j < J; ++j) out.pose.joint_rotations[j] = matrix_from_rot6(pose_block.segment<6>(6 * j));
    out.pose.root_translation = pose_block.segment<3>(6 * J);
    out.shape                 = ShapeParams(pose_block.tail(B));
    out.attrs.resize(static_cast<std::size_t>(attr_block.size() / K));
    for (std::size_t i = 0; i < out.attrs.size(); ++i) {
        for (int k = 0; k < K; ++k) out.attrs.param(i, k) = attr_block[static_cast<Eigen::Index>(i * K + k)];
    }
    out.scaffold = cfg;
    return out;
}

/// Loss and gradient of the full objective over flat parameter blocks (see pack_pose_block).
class FitObjective {
  public:
    struct Evaluation {
        LossReport report;
        VecX grad_pose;
        VecX grad_attrs;
        std::vector<ImageBuffer> renders;
    };

    FitObjective(const BodyModel &model, const SceneDataset &ds, const LossWeights &w,
                 const ScaffoldConfig &cfg, int threads = 1)
        : model_(model), ds_(ds), w_(w), cfg_(cfg), threads_(threads) {
        ds.validate();
        w.validate();
        validate_scaffold_config(cfg);
        for (const auto &v : ds.views) targets_.push_back({v.image, v.mask});
    }

    int pose_block_size() const { return 6 * model_.num_joints() + 3 + model_.num_betas(); }
    const std::vector<ViewTarget> &targets() const { return targets_; }

    VecX
    pack_pose(const PoseParams &pose, const ShapeParams &shape) const {
        return pack_pose_block(pose, shape);
    }

    static VecX pack_attrs(const GaussianAttributes &a) { return pack_attr_block(a); }

    void
    unpack(const VecX &pose_block, const VecX &attr_block, SceneParams &out) const {
        out = unpack_blocks(model_, pose_block, attr_block, cfg_);
    }

    Evaluation
    evaluate(const VecX &pose_block, const VecX &attr_block, bool with_grad = true) const {
        const int J = model_.num_joints();
        SceneParams p;
        unpack(pose_block, attr_block, p);
        const auto lbs = detail::forward_lbs_unchecked(model_, p.pose.joint_rotations,
                                                       p.pose.root_translation, p.shape.betas());
        const auto set = scaffold(lbs.vertices, p.attrs, cfg_);
        const RenderOptions ro{threads_};

        Evaluation e;
        for (const auto &v : ds_.views) e.renders.push_back(render(set, v.camera, ds_.background, ro));
        auto img = image_loss(e.renders, targets_, w_, default_perceptual_metric(), with_grad);
        e.report = total_loss(img.report, p.attrs, p.shape, w_);
        if (!std::isfinite(e.report.total)) {
            throw NumericalError("fit: non-finite loss (mse " + std::to_string(e.report.mse) +
                                 ", alpha " + std::to_string(e.report.alpha_mask) + ")");
        }
        if (!with_grad) return e;

        auto set_grad = GaussianSetGrad::zeros(set.size());
        for (std::size_t i = 0; i < ds_.views.size(); ++i) {
            const auto g = render_backward(set, ds_.views[i].camera, ds_.background, img.grad_rgb[i],
                                           img.grad_alpha[i], ro);
            for (std::size_t k = 0; k < set.size(); ++k) {
                set_grad.means[k]       += g.means[k];
                set_grad.covariances[k] += g.covariances[k];
                set_grad.opacities[k]   += g.opacities[k];
                set_grad.colors[k]      += g.colors[k];
            }
        }
        auto sg = scaffold_backward(lbs.vertices.size(), p.attrs, set_grad, cfg_);
        if (w_.lambda_tight > 0.0) {
            const auto tg = tightness_grad(p.attrs);
            for (std::size_t k = 0; k < tg.size(); ++k) sg.attrs.offsets[k] += w_.lambda_tight * tg[k];
        }
        const auto lg = forward_lbs_backward(model_, p.pose.joint_rotations, lbs.cache, sg.vertices, {});

        e.grad_pose.resize(pose_block_size());
        for (int j = 0; j < J; ++j) {
            e.grad_pose.segment<6>(6 * j) =
                matrix_from_rot6_backward(pose_block.segment<6>(6 * j), lg.joint_rotations[j]);
        }
        e.grad_pose.segment<3>(6 * J)      = lg.root_translation;
        e.grad_pose.tail(model_.num_betas()) = lg.betas + beta_reg_grad(p.shape, w_);
        e.grad_attrs = pack_attrs(sg.attrs);
        if (!e.grad_pose.allFinite() || !e.grad_attrs.allFinite()) {
            throw NumericalError("fit: non-finite gradient");
        }
        return e;
    }

  private:
    const BodyModel &model_;
    const SceneDataset &ds_;
    LossWeights w_;
    ScaffoldConfig cfg_;
    int threads_;
    std::vector<ViewTarget> targets_;
};

using FitCallback = std::function<void(int step, const LossReport &)>;

/// Runs opts.steps Adam updates. The trace holds steps + 1 reports (the last iterate is
/// evaluated but not updated); the returned parameters are the best-total-loss iterate.
inline FitResult
fit_scene(const SceneDataset &ds,
          const BodyModel &model,
          const SceneParams &start,
          const FitOptions &opts,
          const FitCallback &on_step = {}) {
    opts.validate();
    require(!ds.views.empty(), "fit: empty dataset");
    validate_params(model, start, "fit init");
    FitObjective objective(model, ds, opts.weights, start.scaffold, opts.threads);

    VecX pose  = objective.pack_pose(start.pose, start.shape);
    VecX attrs = FitObjective::pack_attrs(start.attrs);
    Adam pose_opt(static_cast<std::size_t>(pose.size()), AdamConfig{opts.lr_pose});
    Adam attr_opt(static_cast<std::size_t>(attrs.size()), AdamConfig{opts.lr_attrs});
    const int J = model.num_joints();
    const int B = model.num_betas();

    FitResult result;
    result.initial  = start;
    double best     = std::numeric_limits<double>::infinity();
    VecX best_pose  = pose, best_attrs = attrs;
    for (int step = 0; step <= opts.steps; ++step) {
        const bool update = step < opts.steps;
        auto e            = objective.evaluate(pose, attrs, update);
        result.trace.push_back(e.report);
        if (on_step) on_step(step, e.report);
        if (e.report.total < best) {
            best             = e.report.total;
            best_pose        = pose;
            best_attrs       = attrs;
            result.best_step = step;
        }
        if (!update) break;
        if (!opts.fit_shape) e.grad_pose.tail(B).setZero();
        pose_opt.step(pose, e.grad_pose);
        if (opts.fit_attributes) attr_opt.step(attrs, e.grad_attrs);
        pose.tail(B) = pose.tail(B).cwiseMax(-ShapeParams::kMaxAbsBeta).cwiseMin(ShapeParams::kMaxAbsBeta);
        for (int j = 0; j < J; ++j) {
            // Keep the 6D columns well conditioned; the represented rotation is unchanged.
            pose.segment<6>(6 * j) = rot6_from_matrix(matrix_from_rot6(pose.segment<6>(6 * j)));
        }
    }
    objective.unpack(best_pose, best_attrs, result.params);
    return result;
}

/// Posed joints for a parameter set.
inline std::vector<Vec3>
posed_joints(const BodyModel &model, const SceneParams &p) {
    return forward_lbs(model, p.pose, p.shape).joints;
}

/// Mean PSNR of the renders of `p` against the dataset images.
inline double
mean_psnr(const BodyModel &model, const SceneDataset &ds, const SceneParams &p, int threads = 1) {
    const auto set = scaffold(forward_lbs(model, p.pose, p.shape).vertices, p.attrs, p.scaffold);
    double s       = 0.0;
    for (const auto &v : ds.views) {
        s += psnr_for_table(psnr(render(set, v.camera, ds.background, RenderOptions{threads}).rgb, v.image));
    }
    return s / ds.num_views();
}

} // namespace bodysplat
