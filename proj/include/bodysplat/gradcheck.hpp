// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference suites for the hand-written adjoints. Each suite draws a number of seeded
// random configurations and compares analytic gradients against central differences of a
// random linear functional of the forward output.
//
#pragma once

#include "body_model.hpp"
#include "losses.hpp"
#include "rasterizer.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <random>
#include <string>

namespace bodysplat {

struct GradcheckEntry {
    std::string module;
    std::string param;
    double max_rel_err = 0.0;
    int checked        = 0;
    int skipped        = 0; // probes that straddled a compositing cutoff
    double tolerance   = 0.0;

    bool pass() const { return checked > 0 && max_rel_err < tolerance && skipped * 10 <= checked; }
};

struct GradcheckReport {
    std::uint64_t seed = 0;
    int configurations = 0;
    std::vector<GradcheckEntry> entries;

    bool
    pass() const {
        if (entries.empty()) return false;
        for (const auto &e : entries) {
            if (!e.pass()) return false;
        }
        return true;
    }

    nlohmann::json
    to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto &e : entries) {
            rows.push_back({{"module", e.module}, {"param", e.param}, {"max_rel_err", e.max_rel_err},
                            {"checked", e.checked}, {"skipped", e.skipped}, {"tolerance", e.tolerance},
                            {"pass", e.pass()}});
        }
        return {{"seed", seed}, {"configurations", configurations}, {"results", rows}, {"pass", pass()}};
    }
};

inline const std::vector<std::string> &
gradcheck_modules() {
    static const std::vector<std::string> names = {"rasterizer", "scaffold", "lbs", "losses"};
    return names;
}

namespace detail {

inline double
gc_relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Accumulates per-parameter results across configurations.
class GradcheckSink {
  public:
    GradcheckSink(std::string module, double tolerance) : module_(std::move(module)), tol_(tolerance) {}

    /// f returns (value, piece fingerprint). The step shrinks until both probes land on the
    /// base point's piece; probes that never do are counted as skipped.
    void
    check(const std::string &param, double &x, double analytic,
          const std::function<std::pair<double, std::uint64_t>()> &f, double h) {
        auto &e         = entry(param);
        const double x0 = x;
        const auto base = f().second;
        for (int attempt = 0; attempt < 4; ++attempt, h *= 0.1) {
            x             = x0 + h;
            const auto fp = f();
            x             = x0 - h;
            const auto fm = f();
            x             = x0;
            if (fp.second == base && fm.second == base) {
                e.max_rel_err = std::max(e.max_rel_err, gc_relative_error(analytic, (fp.first - fm.first) / (2.0 * h)));
                ++e.checked;
                return;
            }
        }
        ++e.skipped;
    }

    void
    check_smooth(const std::string &param, double &x, double analytic, const std::function<double()> &f,
                 double h = 1e-5) {
        check(param, x, analytic, [&] { return std::make_pair(f(), std::uint64_t{0}); }, h);
    }

    void
    append_to(std::vector<GradcheckEntry> &out) const {
        for (const auto &name : order_) out.push_back(entries_.at(name));
    }

  private:
    GradcheckEntry &
    entry(const std::string &param) {
        auto it = entries_.find(param);
        if (it == entries_.end()) {
            order_.push_back(param);
            it = entries_.emplace(param, GradcheckEntry{module_, param, 0.0, 0, 0, tol_}).first;
        }
        return it->second;
    }

    std::string module_;
    double tol_;
    std::vector<std::string> order_;
    std::map<std::string, GradcheckEntry> entries_;
};

inline Image
gc_random_image(std::mt19937_64 &rng, int w, int h, int c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Image img(w, h, c);
    for (auto &v : img.data) v = u(rng);
    return img;
}

inline double
gc_dot(const Image &a, const Image &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

inline GaussianAttributes
gc_random_attributes(std::mt19937_64 &rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GaussianAttributes a;
    a.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a.offsets[i]        = 0.02 * Vec3(normal(rng), normal(rng), normal(rng));
        a.rotations[i]      = Vec4(normal(rng), normal(rng), normal(rng), normal(rng));
        for (int k = 0; k < 3; ++k) a.log_scales[i][k] = std::log(0.04 + 0.12 * unit(rng));
        a.opacity_logits[i] = normal(rng);
        a.colors_raw[i]     = Vec3(normal(rng), normal(rng), normal(rng));
    }
    return a;
}

// Rasterizer: gradients w.r.t. means, covariances, opacities and colors of a random set.
inline void
gradcheck_rasterizer(std::uint64_t seed, int configs, std::vector<GradcheckEntry> &out) {
    GradcheckSink sink("rasterizer", 1e-2);
    for (int c = 0; c < configs; ++c) {
        std::mt19937_64 rng(mix_seed(seed, 1000 + c));
        std::normal_distribution<double> normal(0.0, 1.0);
        const int size = 24;
        Camera cam;
        cam.width = cam.height = size;
        cam.fx = cam.fy = 1.4 * size;
        cam.cx = cam.cy = 0.5 * (size - 1);
        std::vector<Vec3> verts(16);
        for (auto &v : verts) v = Vec3(0.18 * normal(rng), 0.18 * normal(rng), 2.0 + 0.3 * normal(rng));
        GaussianSet set = scaffold(verts, gc_random_attributes(rng, verts.size()));
        const Vec3 bg   = c % 2 ? Vec3(0.3, 0.1, 0.7) : Vec3::Zero();
        const Image wr  = gc_random_image(rng, size, size, 3);
        const Image wa  = gc_random_image(rng, size, size, 1);

        auto f = [&]() {
            std::uint64_t h = 0;
            const auto img  = render(set, cam, bg, {}, &h);
            return std::make_pair(gc_dot(wr, img.rgb) + gc_dot(wa, img.alpha), h);
        };
        const auto g = render_backward(set, cam, bg, wr, wa);
        for (std::size_t i = 0; i < set.size(); ++i) {
            for (int k = 0; k < 3; ++k) {
                sink.check("mean", set.means[i][k], g.means[i][k], f, 1e-5);
                sink.check("color", set.colors[i][k], g.colors[i][k], f, 1e-5);
            }
            sink.check("opacity", set.opacities[i], g.opacities[i], f, 1e-5);
            for (int a = 0; a < 3; ++a) {
                for (int b = a; b < 3; ++b) {
                    // Symmetric perturbation: both (a, b) and (b, a) move together.
                    Mat3 &cov          = set.covariances[i];
                    const double saved = cov(a, b);
                    double probe       = saved;
                    const double analytic = a == b ? g.covariances[i](a, a)
                                                   : g.covariances[i](a, b) + g.covariances[i](b, a);
                    auto fs = [&]() {
                        cov(a, b) = cov(b, a) = probe;
                        const auto r = f();
                        cov(a, b) = cov(b, a) = saved;
                        return r;
                    };
                    sink.check("covariance", probe, analytic, fs, 1e-7);
                }
            }
        }
    }
    sink.append_to(out);
}

// Scaffold: raw attributes and vertices to Gaussian parameters.
inline void
gradcheck_scaffold(std::uint64_t seed, int configs, std::vector<GradcheckEntry> &out) {
    GradcheckSink sink("scaffold", 1e-3);
    static const char *names[] = {"offset", "offset", "offset", "rotation", "rotation", "rotation", "rotation",
                                  "log_scale", "log_scale", "log_scale", "opacity_logit",
                                  "color_raw", "color_raw", "color_raw"};
    for (int c = 0; c < configs; ++c) {
        std::mt19937_64 rng(mix_seed(seed, 2000 + c));
        std::normal_distribution<double> normal(0.0, 1.0);
        ScaffoldConfig cfg;
        cfg.gaussians_per_vertex = 1 + c % 3;
        const std::size_t nv     = 4;
        std::vector<Vec3> verts(nv);
        for (auto &v : verts) v = Vec3(normal(rng), normal(rng), normal(rng));
        auto attrs = gc_random_attributes(rng, nv * cfg.gaussians_per_vertex);
        const std::size_t n = attrs.size();

        GaussianSetGrad w = GaussianSetGrad::zeros(n);
        for (std::size_t i = 0; i < n; ++i) {
            w.means[i]       = Vec3(normal(rng), normal(rng), normal(rng));
            w.colors[i]      = Vec3(normal(rng), normal(rng), normal(rng));
            w.opacities[i]   = normal(rng);
            for (int k = 0; k < 9; ++k) w.covariances[i].data()[k] = normal(rng);
        }
        auto f = [&]() {
            const auto s = scaffold(verts, attrs, cfg);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                total += w.means[i].dot(s.means[i]) + w.colors[i].dot(s.colors[i]) +
                         w.opacities[i] * s.opacities[i] + (w.covariances[i].array() * s.covariances[i].array()).sum();
            }
            return total;
        };
        const auto g = scaffold_backward(nv, attrs, w, cfg);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < GaussianAttributes::kParamsPerGaussian; ++k) {
                sink.check_smooth(names[k], attrs.param(i, k), g.attrs.param(i, k), f);
            }
        }
        for (std::size_t v = 0; v < nv; ++v) {
            for (int k = 0; k < 3; ++k) sink.check_smooth("vertex", verts[v][k], g.vertices[v][k], f);
        }
    }
    sink.append_to(out);
}

// Linear blend skinning: rotations (as free 3x3 blocks), root translation and betas.
inline void
gradcheck_lbs(std::uint64_t seed, int configs, std::vector<GradcheckEntry> &out) {
    GradcheckSink sink("lbs", 1e-3);
    SyntheticBodyConfig mc;
    mc.num_vertices = 260;
    mc.num_betas    = 4;
    const BodyModel model = build_synthetic_model(mc);
    const int J = model.num_joints(), V = model.num_vertices(), B = model.num_betas();
    for (int c = 0; c < configs; ++c) {
        std::mt19937_64 rng(mix_seed(seed, 3000 + c));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> angle(0.0, 0.8);
        std::vector<Mat3> rot(J);
        for (auto &r : rot) r = random_rotation_with_angle(rng, angle(rng));
        Vec3 trans(normal(rng), normal(rng), normal(rng));
        VecX betas(B);
        for (int b = 0; b < B; ++b) betas[b] = normal(rng);
        std::vector<Vec3> wv(V), wj(J);
        for (auto &v : wv) v = Vec3(normal(rng), normal(rng), normal(rng));
        for (auto &v : wj) v = Vec3(normal(rng), normal(rng), normal(rng));

        auto f = [&]() {
            const auto r = forward_lbs_unchecked(model, rot, trans, betas);
            double total = 0.0;
            for (int v = 0; v < V; ++v) total += wv[v].dot(r.vertices[v]);
            for (int j = 0; j < J; ++j) total += wj[j].dot(r.joints[j]);
            return total;
        };
        const auto fwd = forward_lbs_unchecked(model, rot, trans, betas);
        const auto g   = forward_lbs_backward(model, rot, fwd.cache, wv, wj);
        for (int j = 0; j < J; ++j) {
            for (int k = 0; k < 9; ++k) sink.check_smooth("rotation", rot[j].data()[k], g.joint_rotations[j].data()[k], f);
        }
        for (int k = 0; k < 3; ++k) sink.check_smooth("root_translation", trans[k], g.root_translation[k], f);
        for (int b = 0; b < B; ++b) sink.check_smooth("betas", betas[b], g.betas[b], f);
    }
    sink.append_to(out);
}

// Loss terms: MSE, perceptual proxy and alpha-mask w.r.t. rendered pixels; tightness w.r.t.
// offsets; the beta prior w.r.t. betas.
inline void
gradcheck_losses(std::uint64_t seed, int configs, std::vector<GradcheckEntry> &out) {
    GradcheckSink sink("losses", 1e-3);
    for (int c = 0; c < configs; ++c) {
        std::mt19937_64 rng(mix_seed(seed, 4000 + c));
        std::uniform_int_distribution<int> coin(0, 1);
        const int size = 24, views = 2;
        std::vector<ImageBuffer> renders;
        std::vector<ViewTarget> targets;
        for (int v = 0; v < views; ++v) {
            ImageBuffer r(size, size);
            r.rgb   = gc_random_image(rng, size, size, 3, 0.0, 1.0);
            r.alpha = gc_random_image(rng, size, size, 1, 0.0, 1.0);
            renders.push_back(r);
            ViewTarget t{gc_random_image(rng, size, size, 3, 0.0, 1.0), Image(size, size, 1)};
            for (auto &m : t.mask.data) m = coin(rng);
            targets.push_back(t);
        }
        struct Term {
            const char *name;
            LossWeights w;
        };
        LossWeights only_mse{0.0, 0.0, 0.0, 0.0}, only_perc{1.0, 0.0, 0.0, 0.0}, only_alpha{0.0, 1.0, 0.0, 0.0};
        for (const auto &[name, w] : {Term{"mse", only_mse}, Term{"perceptual", only_perc}, Term{"alpha_mask", only_alpha}}) {
            const auto res = image_loss(renders, targets, w);
            // The MSE term has unit weight in every total; the other terms come on top of it.
            auto f = [&, w = w]() { return image_loss(renders, targets, w, default_perceptual_metric(), false).report.total; };
            std::uniform_int_distribution<std::size_t> pick_rgb(0, renders[0].rgb.size() - 1);
            std::uniform_int_distribution<std::size_t> pick_a(0, renders[0].alpha.size() - 1);
            for (int s = 0; s < 6; ++s) {
                const int v = s % views;
                const std::size_t k = pick_rgb(rng);
                if (std::string(name) != "alpha_mask") {
                    sink.check_smooth(name, renders[v].rgb.data[k], res.grad_rgb[v].data[k], f);
                } else {
                    const std::size_t a = pick_a(rng);
                    sink.check_smooth(name, renders[v].alpha.data[a], res.grad_alpha[v].data[a], f);
                }
            }
        }

        std::normal_distribution<double> normal(0.0, 1.0);
        GaussianAttributes attrs = gc_random_attributes(rng, 8);
        const auto tg = tightness_grad(attrs);
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            for (int k = 0; k < 3; ++k) {
                sink.check_smooth("tightness", attrs.offsets[i][k], tg[i][k], [&] { return tightness(attrs); });
            }
        }
        VecX b(4);
        for (int k = 0; k < 4; ++k) b[k] = normal(rng);
        LossWeights wb{0.0, 0.0, 0.0, 0.5};
        const VecX bg = beta_reg_grad(ShapeParams(b), wb);
        for (int k = 0; k < 4; ++k) {
            sink.check_smooth("beta_prior", b[k], bg[k], [&] {
                return total_loss(LossReport{}, GaussianAttributes::zeros(1), ShapeParams(b), wb).total;
            });
        }
    }
    sink.append_to(out);
}

} // namespace detail

/// Runs one suite ("rasterizer", "scaffold", "lbs", "losses") or all of them ("all").
inline GradcheckReport
gradcheck(const std::string &module, std::uint64_t seed, int configurations = 20) {
    require(configurations >= 1, "gradcheck: need at least one configuration");
    GradcheckReport r;
    r.seed           = seed;
    r.configurations = configurations;
    bool known       = module == "all";
    for (const auto &name : gradcheck_modules()) {
        if (module != "all" && module != name) continue;
        known = true;
        if (name == "rasterizer") detail::gradcheck_rasterizer(seed, configurations, r.entries);
        if (name == "scaffold") detail::gradcheck_scaffold(seed, configurations, r.entries);
        if (name == "lbs") detail::gradcheck_lbs(seed, configurations, r.entries);
        if (name == "losses") detail::gradcheck_losses(seed, configurations, r.entries);
    }
    require(known, "gradcheck: unknown module '" + module + "' (rasterizer, scaffold, lbs, losses, all)");
    return r;
}

} // namespace bodysplat
