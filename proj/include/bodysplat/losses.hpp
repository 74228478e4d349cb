// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Training objective: per-view image loss (MSE + perceptual + opacity-vs-mask), offset
// tightness, and the optional shape regularizer.
//
#pragma once

#include "body_model.hpp"
#include "gaussian_scene.hpp"
#include "image.hpp"
#include "perceptual.hpp"

#include <iomanip>
#include <sstream>

namespace bodysplat {

struct LossWeights {
    double lambda_perceptual = 0.01;
    double lambda_alpha      = 0.1;
    double lambda_tight      = 0.1;
    double lambda_beta       = 0.0;

    void
    validate() const {
        require(lambda_perceptual >= 0.0 && lambda_alpha >= 0.0 && lambda_tight >= 0.0 &&
                    lambda_beta >= 0.0,
                "loss weights must be non-negative");
    }
};

struct ViewLoss {
    double mse        = 0.0;
    double perceptual = 0.0;
    double alpha_mask = 0.0;
};

struct LossReport {
    double mse        = 0.0;
    double perceptual = 0.0;
    double alpha_mask = 0.0;
    double tight      = 0.0;
    double beta_reg   = 0.0;
    double total      = 0.0;
    std::vector<ViewLoss> per_view;

    /// total = mse + l_p perceptual + l_a alpha_mask + l_t tight + l_b beta_reg.
    void
    recompute_total(const LossWeights &w) {
        total = mse + w.lambda_perceptual * perceptual + w.lambda_alpha * alpha_mask +
                w.lambda_tight * tight + w.lambda_beta * beta_reg;
    }

    std::string
    to_json_line(long step) const {
        std::ostringstream os;
        os << std::setprecision(17) << "{\"step\":" << step << ",\"mse\":" << mse
           << ",\"perceptual\":" << perceptual << ",\"alpha_mask\":" << alpha_mask
           << ",\"tight\":" << tight << ",\"beta_reg\":" << beta_reg << ",\"total\":" << total
           << "}";
        return os.str();
    }

    static std::string csv_header() { return "step,mse,perceptual,alpha_mask,tight,beta_reg,total"; }

    std::string
    to_csv_row(long step) const {
        std::ostringstream os;
        os << std::setprecision(17) << step << ',' << mse << ',' << perceptual << ',' << alpha_mask
           << ',' << tight << ',' << beta_reg << ',' << total;
        return os.str();
    }
};

/// Ground-truth image (RGB) and binary foreground mask for one view.
struct ViewTarget {
    Image image;
    Image mask;
};

struct ImageLossResult {
    LossReport report; // image terms only; tight/beta_reg zero
    std::vector<Image> grad_rgb;
    std::vector<Image> grad_alpha;
};

inline void
validate_mask(const Image &mask, const std::string &what) {
    require(mask.channels == 1, what + ": mask must have one channel");
    for (double m : mask.data) {
        require(m == 0.0 || m == 1.0, what + ": mask values must be exactly 0 or 1");
    }
}

/// Averages the per-view terms over views. Gradients are w.r.t. the rendered rgb and alpha.
/// The perceptual gradient is skipped when its weight is zero.
inline ImageLossResult
image_loss(const std::vector<ImageBuffer> &renders,
           const std::vector<ViewTarget> &targets,
           const LossWeights &w,
           const PerceptualMetric &perceptual = default_perceptual_metric(),
           bool with_grad                      = true) {
    w.validate();
    require(!renders.empty(), "image_loss: no views");
    require(renders.size() == targets.size(), "image_loss: render/target count mismatch");
    const double M = static_cast<double>(renders.size());

    ImageLossResult out;
    for (std::size_t i = 0; i < renders.size(); ++i) {
        const auto &r   = renders[i];
        const auto &t   = targets[i];
        const std::string what = "image_loss(view " + std::to_string(i) + ")";
        require_same_shape(r.rgb, t.image, what);
        require(t.mask.width == r.alpha.width && t.mask.height == r.alpha.height, what + ": mask size mismatch");
        validate_mask(t.mask, what);

        ViewLoss v;
        const double n_rgb = static_cast<double>(r.rgb.size());
        const double n_pix = static_cast<double>(r.alpha.size());
        Image g_rgb(r.rgb.width, r.rgb.height, r.rgb.channels);
        Image g_alpha(r.alpha.width, r.alpha.height, 1);
        for (std::size_t k = 0; k < r.rgb.size(); ++k) {
            const double d = r.rgb.data[k] - t.image.data[k];
            v.mse         += d * d;
            g_rgb.data[k]  = 2.0 * d / (n_rgb * M);
        }
        v.mse /= n_rgb;
        for (std::size_t k = 0; k < r.alpha.size(); ++k) {
            const double d  = r.alpha.data[k] - t.mask.data[k];
            v.alpha_mask   += d * d;
            g_alpha.data[k] = w.lambda_alpha * 2.0 * d / (n_pix * M);
        }
        v.alpha_mask /= n_pix;
        if (with_grad && w.lambda_perceptual > 0.0) {
            Image gp;
            v.perceptual = perceptual.value_and_grad(r.rgb, t.image, gp);
            for (std::size_t k = 0; k < g_rgb.size(); ++k) {
                g_rgb.data[k] += w.lambda_perceptual * gp.data[k] / M;
            }
        } else {
            v.perceptual = perceptual.value(r.rgb, t.image);
        }
        out.report.mse        += v.mse / M;
        out.report.perceptual += v.perceptual / M;
        out.report.alpha_mask += v.alpha_mask / M;
        out.report.per_view.push_back(v);
        if (with_grad) {
            out.grad_rgb.push_back(std::move(g_rgb));
            out.grad_alpha.push_back(std::move(g_alpha));
        }
    }
    out.report.recompute_total(w);
    return out;
}

/// Adds the offset-tightness and shape terms to an image-only report.
inline LossReport
total_loss(const LossReport &image_part,
           const GaussianAttributes &attrs,
           const ShapeParams &shape,
           const LossWeights &w) {
    w.validate();
    LossReport r = image_part;
    r.tight      = tightness(attrs);
    r.beta_reg   = shape.betas().squaredNorm();
    r.recompute_total(w);
    return r;
}

inline VecX
beta_reg_grad(const ShapeParams &shape, const LossWeights &w) {
    return 2.0 * w.lambda_beta * shape.betas();
}

} // namespace bodysplat
