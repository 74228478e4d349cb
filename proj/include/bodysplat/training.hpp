// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Single-sample training loop for the toy predictor.
//
#pragma once

#include "config.hpp"

namespace bodysplat {

struct TrainLogEntry {
    int step = 0;
    LossReport loss;
    double psnr = 0.0; // mean over supervised views, capped like the tables
};

struct TrainToyResult {
    Predictor predictor;
    TrainSample sample;
    SceneDataset scene;
    std::vector<TrainLogEntry> log;
    int steps_run = 0;
};

/// PSNR of the predictor's render against the sample's supervision images.
inline double
predictor_psnr(const Predictor &p, const BodyModel &model, const TrainSample &s, int threads = 1) {
    return mean_psnr(model, s.supervision, p.predict_params(s.input), threads);
}

/// Completes a predictor config from the body model (group size, joint and beta counts).
inline PredictorConfig
resolve_predictor_config(PredictorConfig c, const BodyModel &model) {
    require(c.groups >= 1 && model.num_vertices() % c.groups == 0,
            "predictor: vertex count " + std::to_string(model.num_vertices()) + " is not divisible by groups = " +
                std::to_string(c.groups));
    c.group_size = model.num_vertices() / c.groups;
    c.num_joints = model.num_joints();
    c.num_betas  = model.num_betas();
    c.validate();
    return c;
}

using TrainCallback = std::function<void(const TrainLogEntry &)>;

/// Overfits the predictor to one sample: the given scene, or else the synthetic one the config
/// describes. Logs at step 0, every log_every steps and after the last step; stops early once
/// stop_at_psnr is reached.
inline TrainToyResult
train_toy(const BodyModel &model, const TrainToyConfig &cfg, const TrainCallback &on_log = {},
          const SceneDataset *given = nullptr) {
    cfg.validate();
    const auto pc = resolve_predictor_config(cfg.predictor, model);
    auto scene    = given ? *given
                          : generate_scene(model, cfg.pose_seed, cfg.rig, cfg.appearance_seed, cfg.subject,
                                           Vec3::Zero(), RenderOptions{cfg.threads});
    scene.validate();
    require(scene.views[0].image.width == pc.image_size && scene.views[0].image.height == pc.image_size,
            "train: scene images must be " + std::to_string(pc.image_size) + " pixels square");
    auto sample = make_train_sample(scene, cfg.input_view, cfg.supervise_views);
    TrainToyResult r{Predictor(pc, model), sample, std::move(scene), {}, 0};
    const std::vector<TrainSample> batch{r.sample};

    auto record = [&](int step, const LossReport &loss) {
        TrainLogEntry e{step, loss, predictor_psnr(r.predictor, model, r.sample, cfg.threads)};
        r.log.push_back(e);
        if (on_log) on_log(e);
        return e.psnr;
    };

    int step = 0;
    for (; step < cfg.steps; ++step) {
        if (step % cfg.log_every == 0) {
            const double psnr = record(step, r.predictor.loss(r.sample, cfg.weights));
            if (cfg.stop_at_psnr > 0.0 && psnr >= cfg.stop_at_psnr) break;
        }
        r.predictor.train_step(batch, cfg.weights, cfg.threads);
    }
    r.steps_run = step;
    if (r.log.empty() || r.log.back().step != step) record(step, r.predictor.loss(r.sample, cfg.weights));
    return r;
}

} // namespace bodysplat
