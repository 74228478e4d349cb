// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference oracles and small scene builders shared by the test suites.
//
#pragma once

#include <bodysplat/core.hpp>
#include <bodysplat/gaussian_scene.hpp>

#include <cstdint>
#include <functional>
#include <utility>
#include <random>

namespace bodysplat::oracle {

/// Central difference of f along a single scalar parameter.
inline double
central_difference(const std::function<double()> &f, double &param, double h) {
    const double saved = param;
    param              = saved + h;
    const double fp    = f();
    param              = saved - h;
    const double fm    = f();
    param              = saved;
    return (fp - fm) / (2.0 * h);
}

inline double
relative_error(double analytic, double numeric, double floor = 1e-8) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central difference that refuses to straddle a discontinuity. `f` returns the value and a
/// fingerprint of the smooth piece it was evaluated on; the step is shrunk until the two
/// probes and the base point share a piece. Returns false when no step works.
inline bool
guarded_difference(const std::function<std::pair<double, std::uint64_t>()> &f,
                   double &param,
                   double h,
                   double &out,
                   int attempts = 4) {
    const double saved    = param;
    const auto base_piece = f().second;
    for (int a = 0; a < attempts; ++a, h *= 0.1) {
        param         = saved + h;
        const auto fp = f();
        param         = saved - h;
        const auto fm = f();
        param         = saved;
        if (fp.second == base_piece && fm.second == base_piece) {
            out = (fp.first - fm.first) / (2.0 * h);
            return true;
        }
    }
    return false;
}

/// Random Gaussians in front of an identity camera looking down +z.
inline GaussianAttributes
random_raw_attributes(std::mt19937_64 &rng, std::size_t n, double offset_scale = 0.05) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GaussianAttributes a;
    a.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a.offsets[i]        = offset_scale * Vec3(normal(rng), normal(rng), normal(rng));
        a.rotations[i]      = Vec4(normal(rng), normal(rng), normal(rng), normal(rng));
        a.log_scales[i]     = Vec3(std::log(0.02 + 0.06 * unit(rng)), std::log(0.02 + 0.06 * unit(rng)),
                                   std::log(0.02 + 0.06 * unit(rng)));
        a.opacity_logits[i] = normal(rng);
        a.colors_raw[i]     = Vec3(normal(rng), normal(rng), normal(rng));
    }
    return a;
}

} // namespace bodysplat::oracle
