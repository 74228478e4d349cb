// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Tile-based Gaussian splatting: EWA projection, per-tile depth sorting, front-to-back
// compositing, and the analytic adjoint of all of it.
//
#pragma once

#include "camera.hpp"
#include "core.hpp"
#include "gaussian_scene.hpp"
#include "image.hpp"

#include <array>

#include <numeric>

namespace bodysplat {

inline constexpr int kTileSize             = 16;
inline constexpr double kLowPass           = 0.3;
inline constexpr double kMinWeight         = 1.0 / 255.0;
inline constexpr double kMinTransmittance  = 1e-4;
inline constexpr double kMaxMahalanobisSq  = 9.0; // 3 sigma
inline constexpr double kMinCov2dDet       = 1e-12;

struct RenderOptions {
    int threads = 1;
};

struct ProjectedGaussian {
    Vec2 mean2d   = Vec2::Zero();
    Mat2 cov2d    = Mat2::Zero();
    double depth  = 0.0;
    bool visible  = false;
};

namespace detail {

struct ProjectionJacobian {
    Vec3 t;                 // camera-space mean
    Eigen::Matrix<double, 2, 3> jac;
    Mat3 cov_cam;
};

inline ProjectionJacobian
projection_terms(const Vec3 &mean, const Mat3 &cov, const Camera &cam) {
    ProjectionJacobian p;
    const Mat3 w = cam.rotation();
    p.t          = w * mean + cam.translation();
    const double iz  = 1.0 / p.t.z();
    const double iz2 = iz * iz;
    p.jac << cam.fx * iz, 0.0, -cam.fx * p.t.x() * iz2, 0.0, cam.fy * iz, -cam.fy * p.t.y() * iz2;
    p.cov_cam = w * cov * w.transpose();
    return p;
}

} // namespace detail

inline ProjectedGaussian
project_one(const Vec3 &mean, const Mat3 &cov, const Camera &cam) {
    ProjectedGaussian out;
    const auto p = detail::projection_terms(mean, cov, cam);
    out.depth    = p.t.z();
    if (!(p.t.z() > cam.near) || !p.t.allFinite()) {
        return out;
    }
    out.mean2d  = Vec2(cam.fx * p.t.x() / p.t.z() + cam.cx, cam.fy * p.t.y() / p.t.z() + cam.cy);
    out.cov2d   = p.jac * p.cov_cam * p.jac.transpose() + kLowPass * Mat2::Identity();
    out.visible = true;
    return out;
}

inline std::vector<ProjectedGaussian>
project(const GaussianSet &set, const Camera &cam) {
    cam.validate();
    std::vector<ProjectedGaussian> out(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        out[i] = project_one(set.means[i], set.covariances[i], cam);
    }
    return out;
}

namespace detail {

struct Splat {
    Vec2 mean;
    double con_a, con_b, con_c; // inverse 2D covariance [[a, b], [b, c]]
    double opacity;
    Vec3 color;
    double rx, ry; // 3-sigma half extents
};

struct TileBins {
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<Splat> splats;                 // per Gaussian (valid only when binned)
    std::vector<ProjectedGaussian> projected;  // per Gaussian
    std::vector<std::vector<int>> lists;       // per tile, Gaussian indices by (depth, index)
};

inline TileBins
bin_gaussians(const GaussianSet &set, const Camera &cam) {
    require(set.covariances.size() == set.size() && set.opacities.size() == set.size() &&
                set.colors.size() == set.size(),
            "render: gaussian set field lengths differ");
    TileBins bins;
    bins.tiles_x   = (cam.width + kTileSize - 1) / kTileSize;
    bins.tiles_y   = (cam.height + kTileSize - 1) / kTileSize;
    bins.projected = project(set, cam);
    bins.splats.resize(set.size());
    bins.lists.assign(static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y, {});
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto &p = bins.projected[i];
        if (!p.visible) {
            continue;
        }
        const double det = p.cov2d.determinant();
        if (!(det >= kMinCov2dDet) || !p.cov2d.allFinite()) {
            continue;
        }
        Splat s;
        s.mean    = p.mean2d;
        s.con_a   = p.cov2d(1, 1) / det;
        s.con_b   = -p.cov2d(0, 1) / det;
        s.con_c   = p.cov2d(0, 0) / det;
        s.opacity = set.opacities[i];
        s.color   = set.colors[i];

        // Every pixel within 3 sigma lies inside +-3 sqrt(cov_xx) horizontally (resp. yy),
        // since maha >= dx^2 / cov_xx. Slightly padded so rounding never culls a survivor.
        const double rx = 3.0 * std::sqrt(p.cov2d(0, 0)) * (1.0 + 1e-9) + 1e-9;
        const double ry = 3.0 * std::sqrt(p.cov2d(1, 1)) * (1.0 + 1e-9) + 1e-9;
        s.rx           = rx;
        s.ry           = ry;
        bins.splats[i] = s;
        const double x0 = p.mean2d.x() - rx, x1 = p.mean2d.x() + rx;
        const double y0 = p.mean2d.y() - ry, y1 = p.mean2d.y() + ry;
        if (x1 < 0.0 || y1 < 0.0 || x0 > cam.width - 1 || y0 > cam.height - 1) {
            continue;
        }
        const int tx0 = std::max(0, static_cast<int>(std::floor(x0 / kTileSize)));
        const int ty0 = std::max(0, static_cast<int>(std::floor(y0 / kTileSize)));
        const int tx1 = std::min(bins.tiles_x - 1, static_cast<int>(std::floor(x1 / kTileSize)));
        const int ty1 = std::min(bins.tiles_y - 1, static_cast<int>(std::floor(y1 / kTileSize)));
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int tx = tx0; tx <= tx1; ++tx) {
                bins.lists[static_cast<std::size_t>(ty) * bins.tiles_x + tx].push_back(
                    static_cast<int>(i));
            }
        }
    }
    std::vector<std::pair<double, int>> keyed;
    for (auto &list : bins.lists) {
        keyed.clear();
        for (const int i : list) keyed.emplace_back(bins.projected[i].depth, i);
        std::sort(keyed.begin(), keyed.end()); // (depth, index)
        for (std::size_t k = 0; k < list.size(); ++k) list[k] = keyed[k].second;
    }
    return bins;
}

struct Contribution {
    int slot;      // position in the tile list
    double weight; // alpha * gaussian
    double gauss;
    double transmittance; // before this contribution
    Vec2 d;               // pixel - mean
};

inline constexpr int kBlockSize     = 4;
inline constexpr int kBlocksPerSide = kTileSize / kBlockSize;

/// One tile's splats copied contiguously in list order, plus for every 4x4 pixel block the
/// ordered slots whose 3-sigma box touches it. Culled slots could never pass the per-pixel
/// Mahalanobis test, so traversal results are unchanged.
struct TileWork {
    std::vector<Splat> splats;
    std::array<std::vector<int>, kBlocksPerSide * kBlocksPerSide> blocks;
    int x0 = 0, y0 = 0;

    void
    build(const TileBins &bins, std::size_t tile) {
        const auto &list = bins.lists[tile];
        x0 = static_cast<int>(tile % bins.tiles_x) * kTileSize;
        y0 = static_cast<int>(tile / bins.tiles_x) * kTileSize;
        splats.resize(list.size());
        for (auto &b : blocks) b.clear();
        for (std::size_t k = 0; k < list.size(); ++k) {
            const Splat &s = bins.splats[list[k]];
            splats[k]      = s;
            const int bx0  = std::max(0, static_cast<int>(std::floor((s.mean.x() - s.rx - x0) / kBlockSize)));
            const int by0  = std::max(0, static_cast<int>(std::floor((s.mean.y() - s.ry - y0) / kBlockSize)));
            const int bx1  = std::min(kBlocksPerSide - 1,
                                      static_cast<int>(std::floor((s.mean.x() + s.rx - x0) / kBlockSize)));
            const int by1  = std::min(kBlocksPerSide - 1,
                                      static_cast<int>(std::floor((s.mean.y() + s.ry - y0) / kBlockSize)));
            for (int by = by0; by <= by1; ++by) {
                for (int bx = bx0; bx <= bx1; ++bx) {
                    blocks[by * kBlocksPerSide + bx].push_back(static_cast<int>(k));
                }
            }
        }
    }

    const std::vector<int> &
    block_at(int x, int y) const {
        return blocks[((y - y0) / kBlockSize) * kBlocksPerSide + (x - x0) / kBlockSize];
    }
};

/// Front-to-back traversal for one pixel. Calls visit(contribution) for every contribution
/// that is composited, returns the final transmittance.
template <typename Visit>
double
composite_pixel(const TileWork &work, int px, int py, Visit &&visit) {
    double T = 1.0;
    for (const int k : work.block_at(px, py)) {
        const Splat &s  = work.splats[k];
        const double dx = px - s.mean.x();
        const double dy = py - s.mean.y();
        const double maha = s.con_a * dx * dx + 2.0 * s.con_b * dx * dy + s.con_c * dy * dy;
        if (maha > kMaxMahalanobisSq) {
            continue;
        }
        const double g = std::exp(-0.5 * maha);
        const double w = s.opacity * g;
        if (w < kMinWeight) {
            continue;
        }
        visit(Contribution{k, w, g, T, Vec2(dx, dy)});
        T *= 1.0 - w;
        if (T < kMinTransmittance) {
            break;
        }
    }
    return T;
}

inline std::uint64_t
hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix_seed(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)), 0);
}

} // namespace detail

/// Forward render. When `structure_hash` is non-null it receives a hash of every pixel's
/// ordered contributor list, which identifies the smooth piece of the (piecewise smooth)
/// render function; finite-difference oracles use it to detect straddled cutoffs.
inline ImageBuffer
render(const GaussianSet &set,
       const Camera &cam,
       const Vec3 &background,
       const RenderOptions &opts       = {},
       std::uint64_t *structure_hash   = nullptr) {
    const auto bins = detail::bin_gaussians(set, cam);
    ImageBuffer out(cam.width, cam.height);
    std::vector<std::uint64_t> tile_hash(bins.lists.size(), 0);

    parallel_for(bins.lists.size(), opts.threads, [&](std::size_t tile) {
        const auto &list = bins.lists[tile];
        const int tx     = static_cast<int>(tile % bins.tiles_x);
        const int ty     = static_cast<int>(tile / bins.tiles_x);
        std::uint64_t h  = tile;
        detail::TileWork work;
        work.build(bins, tile);
        for (int y = ty * kTileSize; y < std::min((ty + 1) * kTileSize, cam.height); ++y) {
            for (int x = tx * kTileSize; x < std::min((tx + 1) * kTileSize, cam.width); ++x) {
                Vec3 color = Vec3::Zero();
                const double T =
                    detail::composite_pixel(work, x, y, [&](const detail::Contribution &c) {
                        color += c.weight * c.transmittance * work.splats[c.slot].color;
                        if (structure_hash != nullptr) {
                            h = detail::hash_combine(h, static_cast<std::uint64_t>(list[c.slot]));
                        }
                    });
                if (structure_hash != nullptr) {
                    h = detail::hash_combine(h, 0xFFFFFFFFull);
                }
                color += T * background;
                for (int c = 0; c < 3; ++c) {
                    out.rgb.at(x, y, c) = color[c];
                }
                out.alpha.at(x, y) = 1.0 - T;
            }
        }
        tile_hash[tile] = h;
    });
    if (structure_hash != nullptr) {
        std::uint64_t h = 0;
        for (auto t : tile_hash) {
            h = detail::hash_combine(h, t);
        }
        *structure_hash = h;
    }
    return out;
}

/// Analytic adjoint of render(). Gradients of Gaussians that are invisible, degenerate, or
/// never composited are exactly zero.
inline GaussianSetGrad
render_backward(const GaussianSet &set,
                const Camera &cam,
                const Vec3 &background,
                const Image &grad_rgb,
                const Image &grad_alpha,
                const RenderOptions &opts = {}) {
    require(grad_rgb.width == cam.width && grad_rgb.height == cam.height && grad_rgb.channels == 3,
            "render_backward: grad_rgb shape does not match the camera");
    require(grad_alpha.width == cam.width && grad_alpha.height == cam.height &&
                grad_alpha.channels == 1,
            "render_backward: grad_alpha shape does not match the camera");
    const auto bins = detail::bin_gaussians(set, cam);

    // Per tile: d mean2d (2), d conic (a, b, c), d opacity, d color (3).
    struct SlotGrad {
        Vec2 mean = Vec2::Zero();
        double con_a = 0.0, con_b = 0.0, con_c = 0.0;
        double opacity = 0.0;
        Vec3 color     = Vec3::Zero();
    };
    std::vector<std::vector<SlotGrad>> tile_grads(bins.lists.size());

    parallel_for(bins.lists.size(), opts.threads, [&](std::size_t tile) {
        const auto &list = bins.lists[tile];
        if (list.empty()) {
            return;
        }
        auto &grads = tile_grads[tile];
        grads.assign(list.size(), SlotGrad{});
        const int tx = static_cast<int>(tile % bins.tiles_x);
        const int ty = static_cast<int>(tile / bins.tiles_x);
        std::vector<detail::Contribution> contribs;
        detail::TileWork work;
        work.build(bins, tile);
        for (int y = ty * kTileSize; y < std::min((ty + 1) * kTileSize, cam.height); ++y) {
            for (int x = tx * kTileSize; x < std::min((tx + 1) * kTileSize, cam.width); ++x) {
                const Vec3 d_color(grad_rgb.at(x, y, 0), grad_rgb.at(x, y, 1), grad_rgb.at(x, y, 2));
                const double d_alpha = grad_alpha.at(x, y);
                if (d_color.isZero(0.0) && d_alpha == 0.0) {
                    continue;
                }
                contribs.clear();
                detail::composite_pixel(work, x, y, [&](const detail::Contribution &c) {
                    contribs.push_back(c);
                });
                Vec3 behind         = background; // colour composited behind the current layer
                double behind_alpha = 0.0;
                for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
                    const auto &c     = *it;
                    const auto &s     = work.splats[c.slot];
                    auto &g           = grads[c.slot];
                    const double T    = c.transmittance;
                    const double w    = c.weight;
                    g.color          += T * w * d_color;
                    const double d_w  = T * d_color.dot(s.color - behind) + T * (1.0 - behind_alpha) * d_alpha;
                    behind            = w * s.color + (1.0 - w) * behind;
                    behind_alpha      = w + (1.0 - w) * behind_alpha;
                    g.opacity        += d_w * c.gauss;
                    const double d_maha = -0.5 * d_w * s.opacity * c.gauss;
                    const double dx = c.d.x(), dy = c.d.y();
                    // maha = a dx^2 + 2 b dx dy + c dy^2 with d = pixel - mean.
                    g.mean.x() -= d_maha * 2.0 * (s.con_a * dx + s.con_b * dy);
                    g.mean.y() -= d_maha * 2.0 * (s.con_b * dx + s.con_c * dy);
                    g.con_a    += d_maha * dx * dx;
                    g.con_b    += d_maha * 2.0 * dx * dy;
                    g.con_c    += d_maha * dy * dy;
                }
            }
        }
    });

    // Deterministic reduction in tile order.
    const std::size_t n = set.size();
    std::vector<SlotGrad> per_gaussian(n);
    std::vector<char> touched(n, 0);
    for (std::size_t tile = 0; tile < bins.lists.size(); ++tile) {
        const auto &list = bins.lists[tile];
        for (std::size_t k = 0; k < tile_grads[tile].size(); ++k) {
            auto &dst = per_gaussian[list[k]];
            const auto &src = tile_grads[tile][k];
            dst.mean    += src.mean;
            dst.con_a   += src.con_a;
            dst.con_b   += src.con_b;
            dst.con_c   += src.con_c;
            dst.opacity += src.opacity;
            dst.color   += src.color;
            touched[list[k]] = 1;
        }
    }

    GaussianSetGrad out = GaussianSetGrad::zeros(n);
    const Mat3 w        = cam.rotation();
    for (std::size_t i = 0; i < n; ++i) {
        if (!touched[i]) {
            continue;
        }
        const auto &sg = per_gaussian[i];
        out.opacities[i] = sg.opacity;
        out.colors[i]    = sg.color;

        // conic = cov2d^-1  =>  d cov2d = -conic^T d conic conic^T (conic symmetric).
        const auto &s = bins.splats[i];
        Mat2 conic;
        conic << s.con_a, s.con_b, s.con_b, s.con_c;
        Mat2 d_conic;
        d_conic << sg.con_a, 0.5 * sg.con_b, 0.5 * sg.con_b, sg.con_c;
        const Mat2 d_cov2d = -conic * d_conic * conic;

        const auto p     = detail::projection_terms(set.means[i], set.covariances[i], cam);
        const Mat3 d_cov_cam = p.jac.transpose() * d_cov2d * p.jac;
        out.covariances[i]   = w.transpose() * d_cov_cam * w;
        const Eigen::Matrix<double, 2, 3> d_jac = (d_cov2d + d_cov2d.transpose()) * p.jac * p.cov_cam;

        const double tx = p.t.x(), ty = p.t.y(), tz = p.t.z();
        const double iz = 1.0 / tz, iz2 = iz * iz, iz3 = iz2 * iz;
        const Vec2 &dm  = sg.mean;
        Vec3 dt;
        dt.x() = d_jac(0, 2) * (-cam.fx * iz2) + dm.x() * cam.fx * iz;
        dt.y() = d_jac(1, 2) * (-cam.fy * iz2) + dm.y() * cam.fy * iz;
        dt.z() = d_jac(0, 0) * (-cam.fx * iz2) + d_jac(0, 2) * (2.0 * cam.fx * tx * iz3) +
                 d_jac(1, 1) * (-cam.fy * iz2) + d_jac(1, 2) * (2.0 * cam.fy * ty * iz3) -
                 dm.x() * cam.fx * tx * iz2 - dm.y() * cam.fy * ty * iz2;
        out.means[i] = w.transpose() * dt;
    }
    return out;
}

} // namespace bodysplat
