// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Pluggable perceptual term. The default is a structural proxy (multi-scale SSIM
// dissimilarity plus Sobel edge-magnitude difference); a learned metric can be plugged in
// by implementing PerceptualMetric.
//
#pragma once

#include "filters.hpp"
#include "image.hpp"

#include <memory>

namespace bodysplat {

class PerceptualMetric {
  public:
    virtual ~PerceptualMetric() = default;
    virtual std::string name() const = 0;
    virtual double value(const Image &a, const Image &b) const = 0;
    /// d value / d a.
    virtual Image grad_first(const Image &a, const Image &b) const = 0;
    /// Both at once; override when they share work.
    virtual double
    value_and_grad(const Image &a, const Image &b, Image &grad) const {
        grad = grad_first(a, b);
        return value(a, b);
    }
};

struct ProxyOptions {
    int scales          = 3;
    int window          = 11;
    double sigma        = 1.5;
    double k1           = 0.01;
    double k2           = 0.03;
    double sobel_eps    = 1e-8; // inside the edge-magnitude square root
};

namespace detail {

struct SsimPlanes {
    Image mu_a, mu_b, s_aa, s_bb, s_ab; // local moments (filtered a, b, a^2, b^2, ab)
};

inline Image
pointwise(const Image &a, const Image &b, double (*op)(double, double)) {
    Image out(a.width, a.height, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.data[i] = op(a.data[i], b.data[i]);
    }
    return out;
}

inline double mul_op(double x, double y) { return x * y; }

/// Mean SSIM over one plane pair with replicated borders; optionally accumulates the
/// gradient w.r.t. `a` scaled by `grad_scale` into `grad_a`.
inline double
ssim_same(const Image &a, const Image &b, const std::vector<double> &taps, const ProxyOptions &o,
          Image *grad_a, double grad_scale) {
    const double c1 = o.k1 * o.k1;
    const double c2 = o.k2 * o.k2;
    SsimPlanes p{filters::separable_same(a, taps), filters::separable_same(b, taps),
                 filters::separable_same(pointwise(a, a, mul_op), taps),
                 filters::separable_same(pointwise(b, b, mul_op), taps),
                 filters::separable_same(pointwise(a, b, mul_op), taps)};
    const std::size_t n = a.size();
    double total        = 0.0;
    Image d_mu(a.width, a.height, 1), d_saa(a.width, a.height, 1), d_sab(a.width, a.height, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double ma = p.mu_a.data[i], mb = p.mu_b.data[i];
        const double va = p.s_aa.data[i] - ma * ma;
        const double vb = p.s_bb.data[i] - mb * mb;
        const double cab = p.s_ab.data[i] - ma * mb;
        const double A1 = 2.0 * ma * mb + c1, A2 = 2.0 * cab + c2;
        const double B1 = ma * ma + mb * mb + c1, B2 = va + vb + c2;
        const double s  = (A1 * A2) / (B1 * B2);
        total += s;
        if (grad_a != nullptr) {
            const double g     = grad_scale / static_cast<double>(n);
            const double ds_dma  = 2.0 * mb * A2 / (B1 * B2) - s * 2.0 * ma / B1;
            const double ds_dva  = -s / B2;
            const double ds_dcab = 2.0 * A1 / (B1 * B2);
            // va = s_aa - ma^2, cab = s_ab - ma mb.
            d_mu.data[i]  = g * (ds_dma - 2.0 * ma * ds_dva - mb * ds_dcab);
            d_saa.data[i] = g * ds_dva;
            d_sab.data[i] = g * ds_dcab;
        }
    }
    if (grad_a != nullptr) {
        const Image g_mu  = filters::separable_same_adjoint(d_mu, taps);
        const Image g_saa = filters::separable_same_adjoint(d_saa, taps);
        const Image g_sab = filters::separable_same_adjoint(d_sab, taps);
        for (std::size_t i = 0; i < n; ++i) {
            grad_a->data[i] += g_mu.data[i] + 2.0 * a.data[i] * g_saa.data[i] + b.data[i] * g_sab.data[i];
        }
    }
    return total / static_cast<double>(n);
}

} // namespace detail

/// value(a, b) = mean_s (1 - SSIM(a_s, b_s)) / 2 + mean |sobel_mag(a) - sobel_mag(b)|.
/// Symmetric and zero iff a == b; images in [0, 1] with any channel count.
class PerceptualProxy final : public PerceptualMetric {
  public:
    explicit PerceptualProxy(ProxyOptions opts = {})
        : opts_(opts), taps_(filters::gaussian_taps(opts.window, opts.sigma)) {}

    std::string name() const override { return "proxy-perceptual"; }

    double value(const Image &a, const Image &b) const override { return evaluate(a, b, nullptr); }

    Image
    grad_first(const Image &a, const Image &b) const override {
        Image g(a.width, a.height, a.channels);
        evaluate(a, b, &g);
        return g;
    }

    double
    value_and_grad(const Image &a, const Image &b, Image &grad) const override {
        grad = Image(a.width, a.height, a.channels);
        return evaluate(a, b, &grad);
    }

  private:
    double
    evaluate(const Image &a, const Image &b, Image *grad) const {
        require_same_shape(a, b, "perceptual_proxy");
        require(a.width > 0 && a.height > 0 && a.channels > 0, "perceptual_proxy: empty image");
        const int C = a.channels;

        int scales = 0;
        for (int w = a.width, h = a.height; scales < opts_.scales && w >= 1 && h >= 1;
             w /= 2, h /= 2) {
            ++scales;
        }
        double ssim_term  = 0.0;
        double sobel_term = 0.0;
        const double n_pix = static_cast<double>(a.pixel_count()) * C;

        for (int c = 0; c < C; ++c) {
            Image pa = a.channel(c), pb = b.channel(c);
            std::vector<Image> levels_a{pa}, levels_b{pb};
            for (int s = 1; s < scales; ++s) {
                levels_a.push_back(filters::downsample2(levels_a.back()));
                levels_b.push_back(filters::downsample2(levels_b.back()));
            }
            // Gradients flow back from the coarsest level to the finest.
            std::vector<Image> level_grads;
            for (int s = 0; s < scales; ++s) {
                level_grads.emplace_back(levels_a[s].width, levels_a[s].height, 1);
            }
            for (int s = 0; s < scales; ++s) {
                // d/d ssim of (1 - ssim)/2 averaged over scales and channels.
                const double scale = -0.5 / (scales * C);
                const double v = detail::ssim_same(levels_a[s], levels_b[s], taps_, opts_,
                                                   grad ? &level_grads[s] : nullptr, scale);
                ssim_term += 0.5 * (1.0 - v) / (scales * C);
            }

            // Sobel edge magnitudes at full resolution.
            const Image gxa = filters::conv3x3_same(pa, filters::kSobelX);
            const Image gya = filters::conv3x3_same(pa, filters::kSobelY);
            const Image gxb = filters::conv3x3_same(pb, filters::kSobelX);
            const Image gyb = filters::conv3x3_same(pb, filters::kSobelY);
            Image d_gx(pa.width, pa.height, 1), d_gy(pa.width, pa.height, 1);
            for (std::size_t i = 0; i < pa.size(); ++i) {
                const double ma = std::sqrt(gxa.data[i] * gxa.data[i] + gya.data[i] * gya.data[i] + opts_.sobel_eps);
                const double mb = std::sqrt(gxb.data[i] * gxb.data[i] + gyb.data[i] * gyb.data[i] + opts_.sobel_eps);
                const double diff = ma - mb;
                sobel_term += std::abs(diff) / n_pix;
                if (grad != nullptr) {
                    const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                    d_gx.data[i] = sgn / n_pix * gxa.data[i] / ma;
                    d_gy.data[i] = sgn / n_pix * gya.data[i] / ma;
                }
            }

            if (grad != nullptr) {
                for (int s = scales - 1; s > 0; --s) {
                    const Image up = filters::downsample2_adjoint(level_grads[s], levels_a[s - 1].width,
                                                                  levels_a[s - 1].height);
                    for (std::size_t i = 0; i < up.size(); ++i) {
                        level_grads[s - 1].data[i] += up.data[i];
                    }
                }
                const Image sx = filters::conv3x3_same_adjoint(d_gx, filters::kSobelX);
                const Image sy = filters::conv3x3_same_adjoint(d_gy, filters::kSobelY);
                for (std::size_t p = 0; p < pa.size(); ++p) {
                    grad->data[p * C + c] = level_grads[0].data[p] + sx.data[p] + sy.data[p];
                }
            }
        }
        return ssim_term + sobel_term;
    }

    ProxyOptions opts_;
    std::vector<double> taps_;
};

inline double
perceptual_proxy(const Image &a, const Image &b) {
    return PerceptualProxy().value(a, b);
}

inline const PerceptualMetric &
default_perceptual_metric() {
    static const PerceptualProxy proxy;
    return proxy;
}

} // namespace bodysplat
