// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Builds the synthetic body, poses a few random subjects and renders each from the front,
// straight through the library (no scene files): LBS -> scaffold -> rasterize.
//
// usage: render_subjects [out.png] [count]
//
#include "montage.hpp"

#include <bodysplat/bodysplat.hpp>

#include <cstdio>

using namespace bodysplat;

int
main(int argc, char **argv) {
    const std::string out = argc > 1 ? argv[1] : "subjects.png";
    const int count       = argc > 2 ? std::max(1, std::atoi(argv[2])) : 4;
    try {
        const auto model = build_synthetic_model({});
        std::printf("body model: %d vertices, %d joints, %d shape coefficients\n", model.num_vertices(),
                    model.num_joints(), model.num_betas());

        RigConfig rig;
        rig.num_views = 1;
        std::vector<Image> tiles;
        for (int s = 0; s < count; ++s) {
            const auto ds  = generate_scene(model, s, rig, 100 + s);
            const auto &gt = *ds.gt;
            const auto mesh = forward_lbs(model, gt.pose, gt.shape);
            const auto set  = scaffold(mesh.vertices, gt.attrs, gt.scaffold);
            const auto img  = render(set, ds.views[0].camera, ds.background);
            double cover = 0.0;
            for (double a : img.alpha.data) cover += a;
            std::printf("subject %d: %zu Gaussians, %.1f%% of the frame covered\n", s, set.size(),
                        100.0 * cover / img.alpha.data.size());
            tiles.push_back(img.rgb);
        }
        write_png(out, demo::hstack(tiles));
        std::printf("wrote %s\n", out.c_str());
    } catch (const std::exception &e) {
        std::fprintf(stderr, "render_subjects: %s\n", e.what());
        return 1;
    }
    return 0;
}
