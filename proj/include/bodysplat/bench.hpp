// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Rasterizer throughput on a full-body scene.
//
#pragma once

#include "dataio.hpp"

#include <chrono>
#include <thread>

namespace bodysplat {

/// Reference point quoted for the original GPU implementation; printed for context only.
inline constexpr double kReferenceFps = 47.0;

struct BenchRow {
    int threads        = 1;
    double forward_ms  = 0.0; // median over frames
    double backward_ms = 0.0;
    bool bitwise_equal = true; // render matches the single-threaded image exactly
};

struct BenchReport {
    int gaussians = 0;
    int width     = 0;
    int height    = 0;
    int frames    = 0;
    std::vector<BenchRow> rows;

    bool
    invariants_hold() const {
        for (const auto &r : rows) {
            if (!r.bitwise_equal) return false;
        }
        return !rows.empty();
    }

    nlohmann::json
    to_json() const {
        nlohmann::json rs = nlohmann::json::array();
        for (const auto &r : rows) {
            rs.push_back({{"threads", r.threads}, {"forward_ms", r.forward_ms}, {"forward_fps", 1000.0 / r.forward_ms},
                          {"backward_ms", r.backward_ms}, {"bitwise_equal", r.bitwise_equal}});
        }
        return {{"gaussians", gaussians}, {"width", width}, {"height", height}, {"frames", frames},
                {"reference_fps", kReferenceFps}, {"rows", rs}, {"invariants_hold", invariants_hold()}};
    }

    std::string
    table() const {
        std::ostringstream os;
        os << "gaussians " << gaussians << ", " << width << "x" << height << ", median of " << frames << " frames\n";
        os << "threads  forward_ms  fps     backward_ms  bitwise\n";
        for (const auto &r : rows) {
            char line[128];
            std::snprintf(line, sizeof(line), "%7d  %10.2f  %6.1f  %11.2f  %s\n", r.threads, r.forward_ms,
                          1000.0 / r.forward_ms, r.backward_ms, r.bitwise_equal ? "yes" : "NO");
            os << line;
        }
        os << "reference: " << kReferenceFps << " fps reported for the original GPU implementation\n";
        return os.str();
    }
};

inline int
default_thread_count() {
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Times render and render_backward of a generated subject for each thread count.
inline BenchReport
run_bench(const BodyModel &model, int size, std::vector<int> thread_counts, int frames, std::uint64_t seed) {
    require(size > 0 && frames >= 1, "bench: size and frames must be positive");
    require(!thread_counts.empty(), "bench: no thread counts");
    RigConfig rig;
    rig.num_views   = 1;
    rig.image_width = rig.image_height = size;
    const auto ds   = generate_scene(model, seed, rig, seed + 1);
    const auto &gt  = *ds.gt;
    const auto set  = scaffold(forward_lbs(model, gt.pose, gt.shape).vertices, gt.attrs, gt.scaffold);
    const auto &cam = ds.views[0].camera;
    const Image grad_rgb(size, size, 3, 1.0 / (3.0 * size * size)), grad_alpha(size, size, 1, 0.0);

    BenchReport rep{static_cast<int>(set.size()), size, size, frames, {}};
    const auto reference = render(set, cam, ds.background, RenderOptions{1});
    using clock          = std::chrono::steady_clock;
    auto median_ms = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (int t : thread_counts) {
        require(t >= 1, "bench: thread counts must be positive");
        BenchRow row;
        row.threads = t;
        std::vector<double> fwd, bwd;
        for (int f = 0; f < frames; ++f) {
            auto t0        = clock::now();
            const auto img = render(set, cam, ds.background, RenderOptions{t});
            fwd.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
            row.bitwise_equal = row.bitwise_equal && img.rgb.data == reference.rgb.data &&
                                img.alpha.data == reference.alpha.data;
            t0 = clock::now();
            render_backward(set, cam, ds.background, grad_rgb, grad_alpha, RenderOptions{t});
            bwd.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
        }
        row.forward_ms  = median_ms(fwd);
        row.backward_ms = median_ms(bwd);
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace bodysplat
