// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "camera.hpp"
#include "filters.hpp"
#include "image.hpp"

#include <limits>

namespace bodysplat {

inline constexpr double kPsnrTableCap = 99.0;

/// 10 log10(1 / MSE) for images in [0, 1]; +inf when the images are identical.
inline double
psnr(const Image &a, const Image &b) {
    require_same_shape(a, b, "psnr");
    require(a.size() > 0, "psnr: empty image");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse           += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

inline double
psnr_for_table(double value) {
    return std::min(value, kPsnrTableCap);
}

struct SsimOptions {
    int window   = 11;
    double sigma = 1.5;
    double k1    = 0.01;
    double k2    = 0.03;
    double range = 1.0;
};

/// Windowed SSIM on the channel-mean grayscale images, averaged over all window positions
/// that fit entirely inside the image.
inline double
ssim(const Image &a, const Image &b, const SsimOptions &o = {}) {
    require_same_shape(a, b, "ssim");
    require(a.width >= o.window && a.height >= o.window,
            "ssim: image smaller than the " + std::to_string(o.window) + "x" +
                std::to_string(o.window) + " window");
    const Image ga   = a.grayscale();
    const Image gb   = b.grayscale();
    const auto taps  = filters::gaussian_taps(o.window, o.sigma);
    const double c1  = (o.k1 * o.range) * (o.k1 * o.range);
    const double c2  = (o.k2 * o.range) * (o.k2 * o.range);
    Image aa(ga.width, ga.height, 1), bb(ga.width, ga.height, 1), ab(ga.width, ga.height, 1);
    for (std::size_t i = 0; i < ga.size(); ++i) {
        aa.data[i] = ga.data[i] * ga.data[i];
        bb.data[i] = gb.data[i] * gb.data[i];
        ab.data[i] = ga.data[i] * gb.data[i];
    }
    const Image mu_a = filters::separable_valid(ga, taps);
    const Image mu_b = filters::separable_valid(gb, taps);
    const Image s_aa = filters::separable_valid(aa, taps);
    const Image s_bb = filters::separable_valid(bb, taps);
    const Image s_ab = filters::separable_valid(ab, taps);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a.data[i], mb = mu_b.data[i];
        const double va = s_aa.data[i] - ma * ma;
        const double vb = s_bb.data[i] - mb * mb;
        const double cab = s_ab.data[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cab + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

/// Mean per-joint position error in millimetres after translating both skeletons so the
/// root (joint 0) is at the origin. No rotational alignment.
inline double
mpjpe(const std::vector<Vec3> &pred_joints, const std::vector<Vec3> &gt_joints) {
    require(pred_joints.size() == gt_joints.size(),
            "mpjpe: joint count mismatch (" + std::to_string(pred_joints.size()) + " vs " +
                std::to_string(gt_joints.size()) + ")");
    require(!pred_joints.empty(), "mpjpe: no joints");
    const Vec3 pr = pred_joints[0];
    const Vec3 gr = gt_joints[0];
    double sum    = 0.0;
    for (std::size_t j = 0; j < pred_joints.size(); ++j) {
        sum += ((pred_joints[j] - pr) - (gt_joints[j] - gr)).norm();
    }
    return 1000.0 * sum / static_cast<double>(pred_joints.size());
}

struct PixelBox {
    int x0 = 0, y0 = 0, width = 0, height = 0;
    bool empty() const { return width <= 0 || height <= 0; }
};

/// 2D box covering the projection of the axis-aligned 3D bounding box of `points`,
/// clipped to the image. Corners behind the near plane are ignored.
inline PixelBox
projected_bbox(const std::vector<Vec3> &points, const Camera &cam) {
    require(!points.empty(), "projected_bbox: no points");
    Vec3 lo = points[0], hi = points[0];
    for (const auto &p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double x0 = std::numeric_limits<double>::max(), y0 = x0;
    double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
    bool any  = false;
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 p((corner & 1) ? hi.x() : lo.x(), (corner & 2) ? hi.y() : lo.y(),
                     (corner & 4) ? hi.z() : lo.z());
        const Vec3 t = cam.to_camera(p);
        if (t.z() <= cam.near) {
            continue;
        }
        const double u = cam.fx * t.x() / t.z() + cam.cx;
        const double v = cam.fy * t.y() / t.z() + cam.cy;
        x0 = std::min(x0, u), x1 = std::max(x1, u);
        y0 = std::min(y0, v), y1 = std::max(y1, v);
        any = true;
    }
    PixelBox box;
    if (!any) {
        return box;
    }
    box.x0          = std::clamp(static_cast<int>(std::floor(x0)), 0, cam.width);
    box.y0          = std::clamp(static_cast<int>(std::floor(y0)), 0, cam.height);
    const int bx1   = std::clamp(static_cast<int>(std::ceil(x1)) + 1, 0, cam.width);
    const int by1   = std::clamp(static_cast<int>(std::ceil(y1)) + 1, 0, cam.height);
    box.width       = bx1 - box.x0;
    box.height      = by1 - box.y0;
    return box;
}

} // namespace bodysplat
