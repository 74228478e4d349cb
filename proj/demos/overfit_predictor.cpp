// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Trains the toy image-to-Gaussians predictor on a single 64x64 sample until it reproduces it,
// then saves the checkpoint and a (input | prediction) strip.
//
// usage: overfit_predictor [out_dir] [target_psnr]
//
#include "montage.hpp"

#include <bodysplat/bodysplat.hpp>

#include <cstdio>

using namespace bodysplat;
namespace fs = std::filesystem;

int
main(int argc, char **argv) {
    const fs::path dir = argc > 1 ? argv[1] : "overfit_out";
    const double goal  = argc > 2 ? std::atof(argv[2]) : 30.0;
    try {
        fs::create_directories(dir);
        const auto model = build_synthetic_model({});
        TrainToyConfig cfg;
        cfg.stop_at_psnr = goal;
        cfg.log_every    = 25;
        const auto r     = train_toy(model, cfg, [](const TrainLogEntry &e) {
            std::printf("step %4d  loss %.5f  PSNR %.2f dB\n", e.step, e.loss.total, e.psnr);
        });
        std::printf("%zu parameters, %d steps\n", r.predictor.parameter_count(), r.steps_run);

        r.predictor.save(dir / "toy.gstp");
        const auto p    = r.predictor.predict_params(r.sample.input);
        const auto &cam = r.scene.views[cfg.input_view].camera;
        const auto img  = render(scaffold(forward_lbs(model, p.pose, p.shape).vertices, p.attrs, p.scaffold), cam,
                                 r.scene.background);
        write_png(dir / "input_vs_prediction.png", demo::hstack({r.sample.input, img.rgb}));
        std::printf("wrote %s\n", dir.c_str());
    } catch (const std::exception &e) {
        std::fprintf(stderr, "overfit_predictor: %s\n", e.what());
        return 1;
    }
    return 0;
}
