// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: generate-data, fit, train-toy, render, evaluate, gradcheck, bench.
// Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure.
//
#include <bodysplat/bench.hpp>
#include <bodysplat/config.hpp>
#include <bodysplat/gradcheck.hpp>
#include <bodysplat/plots.hpp>
#include <bodysplat/training.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace fs = std::filesystem;
using namespace bodysplat;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    int threads        = 1;
    bool emit_plots    = false;
};

double
seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BodyModel
scene_model(const SceneDataset &ds, const fs::path &scene_dir, const std::string &override_path) {
    if (!override_path.empty()) return load_body_model(override_path);
    if (!ds.body_model_ref.empty()) return load_body_model(resolve_body_model(ds, scene_dir));
    return build_synthetic_model({});
}

/// n cameras on a horizontal circle around `target`, at the distance, height and intrinsics of `ref`.
std::vector<Camera>
orbit_cameras(const Camera &ref, const Vec3 &target, int n) {
    require(n >= 1, "orbit: need at least one frame");
    const Vec3 offset    = ref.center() - target;
    const double radius  = std::max(std::hypot(offset.x(), offset.z()), 1e-3);
    const double start   = std::atan2(offset.x(), offset.z());
    std::vector<Camera> cams;
    for (int i = 0; i < n; ++i) {
        const double a = start + 2.0 * std::numbers::pi * i / n;
        const Vec3 eye = target + Vec3(radius * std::sin(a), offset.y(), radius * std::cos(a));
        Camera c       = Camera::look_at(eye, target, Vec3::UnitY(), ref.fx, ref.width, ref.height, ref.near);
        c.fy = ref.fy, c.cx = ref.cx, c.cy = ref.cy;
        cams.push_back(c);
    }
    return cams;
}

GaussianSet
gaussians_of(const BodyModel &model, const SceneParams &p) {
    return scaffold(forward_lbs(model, p.pose, p.shape).vertices, p.attrs, p.scaffold);
}

void
write_turntable(const BodyModel &model, const SceneParams &p, const SceneDataset &ds, int frames, int threads,
                const fs::path &dir) {
    fs::create_directories(dir);
    const auto set  = gaussians_of(model, p);
    const auto root = forward_lbs(model, p.pose, p.shape).joints[0];
    const auto cams = orbit_cameras(ds.views[0].camera, root, frames);
    for (int i = 0; i < frames; ++i) {
        write_png(dir / view_file_name("frame", i), render(set, cams[i], ds.background, RenderOptions{threads}).rgb);
    }
}

// -- generate-data ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string out, config, model;
    std::optional<std::uint64_t> pose_seed, appearance_seed;
    std::optional<int> views, size;
};

int
run_generate(const GenerateArgs &a, const Globals &g) {
    DataConfig c = a.config.empty() ? DataConfig{} : load_data_config(a.config);
    if (a.views) c.rig.num_views = *a.views;
    if (a.size) c.rig.image_width = c.rig.image_height = *a.size;
    const BodyModel model = a.model.empty() ? build_synthetic_model({}) : load_body_model(a.model);
    const std::uint64_t ps = a.pose_seed.value_or(g.seed);
    const std::uint64_t as = a.appearance_seed.value_or(g.seed + 1);
    const auto t0          = std::chrono::steady_clock::now();
    const auto ds = generate_scene(model, ps, c.rig, as, c.subject, Vec3::Zero(), RenderOptions{g.threads});
    save_scene(ds, a.out, &model);
    std::cout << "wrote " << ds.num_views() << " views (" << c.rig.image_width << "x" << c.rig.image_height
              << ", pose seed " << ps << ", appearance seed " << as << ") to " << a.out << " in "
              << std::setprecision(3) << seconds_since(t0) << " s\n";
    return 0;
}

// -- fit -------------------------------------------------------------------------------------

struct FitArgs {
    std::string scene, init = "gt", weights, out, model, init_attributes;
    std::string trace_format = "jsonl";
    std::optional<int> steps;
    std::optional<double> lambda_perceptual, lambda_alpha, lambda_tight, lambda_beta, lr_attrs, lr_pose;
    int turntable_frames = 12;
    int log_every        = 50;
};

int
run_fit(const FitArgs &a, const Globals &g) {
    const auto ds    = load_scene(a.scene);
    const auto model = scene_model(ds, a.scene, a.model);
    FitOptions o     = a.weights.empty() ? FitOptions{} : load_fit_options(a.weights);
    if (a.steps) o.steps = *a.steps;
    if (a.lambda_perceptual) o.weights.lambda_perceptual = *a.lambda_perceptual;
    if (a.lambda_alpha) o.weights.lambda_alpha = *a.lambda_alpha;
    if (a.lambda_tight) o.weights.lambda_tight = *a.lambda_tight;
    if (a.lambda_beta) o.weights.lambda_beta = *a.lambda_beta;
    if (a.lr_attrs) o.lr_attrs = *a.lr_attrs;
    if (a.lr_pose) o.lr_pose = *a.lr_pose;
    o.threads = g.threads;
    o.validate();

    FitInit init = FitInit::parse(a.init);
    init.seed    = g.seed;
    // Only a ground-truth init keeps the true appearance; the others start from scratch.
    init.attributes = init.kind == InitKind::ground_truth ? AttributeInit::ground_truth : AttributeInit::fresh;
    if (a.init_attributes == "gt") init.attributes = AttributeInit::ground_truth;
    if (a.init_attributes == "fresh") init.attributes = AttributeInit::fresh;
    const auto start = initial_params(ds, model, init);

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = fit_scene(ds, model, start, o, [&](int step, const LossReport &r) {
        if (step % a.log_every == 0 || step == o.steps) {
            std::cerr << "step " << step << " total " << std::setprecision(6) << r.total << " mse " << r.mse
                      << " alpha " << r.alpha_mask << " tight " << r.tight << "\n";
        }
    });
    const double runtime = seconds_since(t0);

    fs::create_directories(a.out);
    save_params(res.params, fs::path(a.out) / "params.json");
    {
        const bool csv = a.trace_format == "csv";
        std::ofstream tr(fs::path(a.out) / (csv ? "trace.csv" : "trace.jsonl"));
        if (csv) tr << LossReport::csv_header() << "\n";
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            const long step = static_cast<long>(i);
            tr << (csv ? res.trace[i].to_csv_row(step) : res.trace[i].to_json_line(step)) << "\n";
        }
        require(tr.good(), "fit: cannot write the loss trace");
    }
    {
        std::ofstream cfg(fs::path(a.out) / "config.toml");
        cfg << fit_options_to_toml(o) << "\n";
    }

    nlohmann::json summary = {{"init", a.init},
                              {"seed", g.seed},
                              {"steps", o.steps},
                              {"best_step", res.best_step},
                              {"initial_total", res.trace.front().total},
                              {"best_total", res.trace[res.best_step].total},
                              {"last_total", res.trace.back().total},
                              {"initial_psnr", mean_psnr(model, ds, res.initial, g.threads)},
                              {"best_psnr", mean_psnr(model, ds, res.params, g.threads)},
                              {"runtime_seconds", runtime}};
    if (ds.gt) {
        const auto gtj = posed_joints(model, *ds.gt);
        FitObjective objective(model, ds, o.weights, ds.gt->scaffold, g.threads);
        summary["quantization_floor_total"] =
            objective.evaluate(pack_pose_block(ds.gt->pose, ds.gt->shape), pack_attr_block(ds.gt->attrs), false)
                .report.total;
        summary["initial_mpjpe_mm"] = mpjpe(posed_joints(model, res.initial), gtj);
        summary["best_mpjpe_mm"]    = mpjpe(posed_joints(model, res.params), gtj);
    }
    detail::write_json_file(fs::path(a.out) / "summary.json", summary);
    if (a.turntable_frames > 0) {
        write_turntable(model, res.params, ds, a.turntable_frames, g.threads, fs::path(a.out) / "turntable");
    }
    if (g.emit_plots) {
        PlotSeries total{"total", {}, {}}, mse{"mse", {}, {}}, alpha{"alpha_mask", {}, {}};
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            total.x.push_back(static_cast<double>(i)), total.y.push_back(res.trace[i].total);
            mse.x.push_back(static_cast<double>(i)), mse.y.push_back(res.trace[i].mse);
            alpha.x.push_back(static_cast<double>(i)), alpha.y.push_back(res.trace[i].alpha_mask);
        }
        write_line_plot_svg(fs::path(a.out) / "loss_curve.svg", "fit loss", "step", "loss", {total, mse, alpha}, true);
        write_series_csv(fs::path(a.out) / "loss_curve.csv", {total, mse, alpha});
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// -- train-toy -------------------------------------------------------------------------------

struct TrainArgs {
    std::string config, out, scene, model;
    std::optional<int> steps;
    std::optional<double> stop_at_psnr;
};

int
run_train(const TrainArgs &a, const Globals &g, bool seed_given) {
    TrainToyConfig c = a.config.empty() ? TrainToyConfig{} : load_train_toy_config(a.config);
    if (a.steps) c.steps = *a.steps;
    if (a.stop_at_psnr) c.stop_at_psnr = *a.stop_at_psnr;
    if (seed_given) c.predictor.seed = g.seed;
    c.threads = g.threads;

    std::optional<SceneDataset> scene;
    BodyModel model;
    if (!a.scene.empty()) {
        scene = load_scene(a.scene);
        model = scene_model(*scene, a.scene, a.model);
        c.rig.num_views = scene->num_views();
        c.rig.image_width = c.rig.image_height = scene->views[0].image.width;
    } else {
        model = a.model.empty() ? build_synthetic_model({}) : load_body_model(a.model);
    }

    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream log(out.string() + ".log.csv");
    require(log.good(), "train-toy: cannot write " + out.string() + ".log.csv");
    log << "step,total,mse,perceptual,alpha_mask,tight,psnr\n" << std::setprecision(10);
    PlotSeries loss{"total", {}, {}}, psnr{"psnr", {}, {}};
    const auto t0 = std::chrono::steady_clock::now();
    const auto r  = train_toy(model, c, [&](const TrainLogEntry &e) {
        log << e.step << ',' << e.loss.total << ',' << e.loss.mse << ',' << e.loss.perceptual << ','
            << e.loss.alpha_mask << ',' << e.loss.tight << ',' << e.psnr << '\n';
        loss.x.push_back(e.step), loss.y.push_back(e.loss.total);
        psnr.x.push_back(e.step), psnr.y.push_back(e.psnr);
        std::cerr << "step " << e.step << " loss " << std::setprecision(6) << e.loss.total << " psnr " << e.psnr
                  << " dB (" << std::setprecision(4) << seconds_since(t0) << " s)\n";
    }, scene ? &*scene : nullptr);
    r.predictor.save(out);
    {
        std::ofstream cfg(out.string() + ".toml");
        cfg << train_toy_config_to_toml(c) << "\n";
    }
    if (g.emit_plots) {
        write_line_plot_svg(out.string() + ".loss.svg", "train-toy loss", "step", "total loss", {loss}, true);
        write_line_plot_svg(out.string() + ".psnr.svg", "train-toy PSNR", "step", "PSNR (dB)", {psnr});
        write_series_csv(out.string() + ".curves.csv", {loss, psnr});
    }
    std::cout << nlohmann::json{{"checkpoint", out.string()},
                                {"parameters", r.predictor.parameter_count()},
                                {"steps_run", r.steps_run},
                                {"initial_psnr", r.log.front().psnr},
                                {"final_psnr", r.log.back().psnr},
                                {"runtime_seconds", seconds_since(t0)}}
                     .dump(2)
              << "\n";
    return 0;
}

// -- render ----------------------------------------------------------------------------------

struct RenderArgs {
    std::string scene, params, ckpt, camera = "0", out, model;
    int input_view = 0;
};

int
run_render(const RenderArgs &a, const Globals &g) {
    require(!a.scene.empty(), "render: --scene is required (it provides the cameras)");
    require(a.params.empty() != a.ckpt.empty(), "render: give exactly one of --params or --ckpt");
    require(!a.out.empty(), "render: --out is required");
    const auto ds    = load_scene(a.scene);
    const auto model = scene_model(ds, a.scene, a.model);
    SceneParams p;
    if (!a.params.empty()) {
        p = load_params(a.params);
    } else {
        require(a.input_view >= 0 && a.input_view < ds.num_views(), "render: --input-view out of range");
        p = Predictor::load(a.ckpt, model).predict_params(ds.views[a.input_view].image);
    }
    validate_params(model, p, "render params");
    const auto set = gaussians_of(model, p);

    if (a.camera.rfind("orbit:", 0) == 0) {
        int n = 0;
        try {
            n = std::stoi(a.camera.substr(6));
        } catch (const std::exception &) {
            throw ValidationError("render: bad --camera '" + a.camera + "'");
        }
        require(n >= 1 && n <= 3600, "render: orbit frame count must be in [1, 3600]");
        write_turntable(model, p, ds, n, g.threads, a.out);
        std::cout << "wrote " << n << " orbit frames to " << a.out << "\n";
        return 0;
    }
    std::string idx = a.camera.rfind("index:", 0) == 0 ? a.camera.substr(6) : a.camera;
    std::size_t used = 0;
    int i            = -1;
    try {
        i = std::stoi(idx, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    require(used == idx.size() && !idx.empty(), "render: --camera must be <index>, index:<i> or orbit:<n>");
    require(i >= 0 && i < ds.num_views(), "render: camera index " + idx + " out of range");
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_png(out, render(set, ds.views[i].camera, ds.background, RenderOptions{g.threads}).rgb);
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

// -- evaluate --------------------------------------------------------------------------------

struct EvalArgs {
    std::string scene, params, out, model;
};

struct MetricRow {
    double psnr = 0.0, ssim = 0.0, perceptual = 0.0;
    bool valid  = true;
};

MetricRow
image_metrics(const Image &pred, const Image &target) {
    MetricRow m;
    if (pred.width < 11 || pred.height < 11) {
        m.valid = false; // smaller than the SSIM window
        return m;
    }
    m.psnr       = psnr_for_table(psnr(pred, target));
    m.ssim       = ssim(pred, target);
    m.perceptual = perceptual_proxy(pred, target);
    return m;
}

int
run_evaluate(const EvalArgs &a, const Globals &g) {
    require(!a.scene.empty() && !a.params.empty(), "evaluate: --scene and --params are required");
    const auto ds    = load_scene(a.scene);
    const auto model = scene_model(ds, a.scene, a.model);
    const auto p     = load_params(a.params);
    validate_params(model, p, a.params);
    const auto set = gaussians_of(model, p);
    // Box from the ground-truth body when known, so every method is scored on the same pixels.
    const auto box_body = forward_lbs(model, ds.gt ? ds.gt->pose : p.pose, ds.gt ? ds.gt->shape : p.shape).vertices;

    std::vector<MetricRow> full, boxed;
    std::vector<PixelBox> boxes;
    for (const auto &v : ds.views) {
        const auto r = render(set, v.camera, ds.background, RenderOptions{g.threads});
        full.push_back(image_metrics(r.rgb, v.image));
        const auto b = projected_bbox(box_body, v.camera);
        boxes.push_back(b);
        boxed.push_back(b.empty() ? MetricRow{0, 0, 0, false}
                                  : image_metrics(r.rgb.crop(b.x0, b.y0, b.width, b.height),
                                                  v.image.crop(b.x0, b.y0, b.width, b.height)));
    }
    auto mean = [](const std::vector<MetricRow> &rows) {
        MetricRow m;
        int n = 0;
        for (const auto &r : rows) {
            if (!r.valid) continue;
            m.psnr += r.psnr, m.ssim += r.ssim, m.perceptual += r.perceptual, ++n;
        }
        m.valid = n > 0;
        if (n > 0) m.psnr /= n, m.ssim /= n, m.perceptual /= n;
        return m;
    };
    const MetricRow mf = mean(full), mb = mean(boxed);
    std::optional<double> joint_err;
    if (ds.gt) joint_err = mpjpe(posed_joints(model, p), posed_joints(model, *ds.gt));

    auto row_json = [](const MetricRow &m) -> nlohmann::json {
        if (!m.valid) return nullptr;
        return {{"PSNR", m.psnr}, {"SSIM", m.ssim}, {"proxy-perceptual", m.perceptual}};
    };
    nlohmann::json views = nlohmann::json::array();
    for (std::size_t i = 0; i < full.size(); ++i) {
        views.push_back({{"view", i},
                         {"full", row_json(full[i])},
                         {"bbox", row_json(boxed[i])},
                         {"bbox_pixels", {boxes[i].x0, boxes[i].y0, boxes[i].width, boxes[i].height}}});
    }
    nlohmann::json j = {{"scene", a.scene}, {"params", a.params}, {"full", row_json(mf)}, {"bbox", row_json(mb)},
                        {"views", views}};
    j["MPJPE_mm"] = joint_err ? nlohmann::json(*joint_err) : nlohmann::json(nullptr);

    fs::create_directories(a.out);
    detail::write_json_file(fs::path(a.out) / "metrics.json", j);
    {
        std::ofstream csv(fs::path(a.out) / "metrics.csv");
        csv << std::setprecision(10) << "view,region,PSNR,SSIM,proxy-perceptual,MPJPE\n";
        auto line = [&](const std::string &view, const char *region, const MetricRow &m, bool with_mpjpe) {
            csv << view << ',' << region << ',';
            if (m.valid) csv << m.psnr << ',' << m.ssim << ',' << m.perceptual;
            else csv << ",,";
            csv << ',';
            if (with_mpjpe && joint_err) csv << *joint_err;
            csv << '\n';
        };
        line("mean", "full", mf, true);
        line("mean", "bbox", mb, true);
        for (std::size_t i = 0; i < full.size(); ++i) {
            line(std::to_string(i), "full", full[i], false);
            line(std::to_string(i), "bbox", boxed[i], false);
        }
        require(csv.good(), "evaluate: cannot write metrics.csv");
    }
    if (g.emit_plots) {
        std::vector<std::pair<std::string, double>> bars = {{"PSNR full", mf.psnr}, {"PSNR bbox", mb.psnr}};
        write_bar_plot_svg(fs::path(a.out) / "psnr.svg", "PSNR (dB)", bars);
        write_bar_plot_svg(fs::path(a.out) / "ssim.svg", "SSIM and proxy-perceptual",
                           {{"SSIM full", mf.ssim}, {"SSIM bbox", mb.ssim}, {"proxy full", mf.perceptual},
                            {"proxy bbox", mb.perceptual}});
    }
    std::cout << std::fixed << std::setprecision(3) << "PSNR " << mf.psnr << " dB (bbox " << mb.psnr << "), SSIM "
              << mf.ssim << " (bbox " << mb.ssim << "), proxy-perceptual " << mf.perceptual << " (bbox "
              << mb.perceptual << ")";
    if (joint_err) std::cout << ", MPJPE " << *joint_err << " mm";
    std::cout << "\n";
    return 0;
}

// -- gradcheck / bench -----------------------------------------------------------------------

struct GradArgs {
    std::string module = "all", out;
    int configs        = 20;
};

int
run_gradcheck(const GradArgs &a, const Globals &g) {
    const auto rep = gradcheck(a.module, g.seed, a.configs);
    const auto j   = rep.to_json();
    if (!a.out.empty()) detail::write_json_file(a.out, j);
    std::cout << j.dump(2) << "\n";
    if (!rep.pass()) {
        std::cerr << "gradcheck: analytic and numerical gradients disagree\n";
        return 2;
    }
    return 0;
}

struct BenchArgs {
    int size = 256, frames = 5;
    std::string out, model;
};

int
run_bench_cmd(const BenchArgs &a, const Globals &g, bool threads_given) {
    const BodyModel model = a.model.empty() ? build_synthetic_model({}) : load_body_model(a.model);
    const int multi       = std::max(2, threads_given ? g.threads : default_thread_count());
    const auto rep        = run_bench(model, a.size, {1, multi}, a.frames, g.seed);
    std::cout << rep.table();
    if (default_thread_count() < multi) {
        std::cout << "note: " << default_thread_count() << " hardware thread(s) available\n";
    }
    if (!a.out.empty()) detail::write_json_file(a.out, rep.to_json());
    if (g.emit_plots && !a.out.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (const auto &r : rep.rows) bars.push_back({std::to_string(r.threads) + " thr", r.forward_ms});
        write_bar_plot_svg(fs::path(a.out).replace_extension(".svg"), "render ms/frame", bars);
    }
    return rep.invariants_hold() ? 0 : 2;
}

} // namespace

int
main(int argc, char **argv) {
    CLI::App app{"bodysplat: body-anchored Gaussian splatting toolkit"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Globals g;
    auto *seed_opt    = app.add_option("--seed", g.seed, "Seed for every random choice (default 0)");
    auto *threads_opt = app.add_option("--threads", g.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
    app.add_flag("--emit-plots", g.emit_plots, "Also write SVG/CSV figures next to the outputs");

    GenerateArgs ga;
    auto *gen = app.add_subcommand("generate-data", "Render a synthetic multi-view scene directory");
    gen->add_option("--out", ga.out, "Output scene directory")->required();
    gen->add_option("--config", ga.config, "TOML with [rig] and [subject] tables");
    gen->add_option("--body-model,--model", ga.model, "Body model file (default: built-in synthetic body)");
    gen->add_option("--pose-seed", ga.pose_seed, "Pose seed (default --seed)");
    gen->add_option("--appearance-seed", ga.appearance_seed, "Appearance seed (default --seed + 1)");
    gen->add_option("--views", ga.views, "Number of ring cameras")->check(CLI::PositiveNumber);
    gen->add_option("--size", ga.size, "Square image size in pixels")->check(CLI::PositiveNumber);

    FitArgs fa;
    auto *fit = app.add_subcommand("fit", "Fit pose, shape and Gaussians to a scene");
    fit->add_option("--scene", fa.scene, "Scene directory")->required();
    fit->add_option("--init", fa.init, "gt | perturbed:<deg> | tpose");
    fit->add_option("--weights", fa.weights, "TOML with [loss] and [fit] tables");
    fit->add_option("--out", fa.out, "Output directory")->required();
    fit->add_option("--steps", fa.steps, "Adam steps (overrides the file)")->check(CLI::NonNegativeNumber);
    fit->add_option("--lambda-perceptual", fa.lambda_perceptual);
    fit->add_option("--lambda-alpha", fa.lambda_alpha);
    fit->add_option("--lambda-tight", fa.lambda_tight);
    fit->add_option("--lambda-beta", fa.lambda_beta);
    fit->add_option("--lr-attrs", fa.lr_attrs);
    fit->add_option("--lr-pose", fa.lr_pose);
    fit->add_option("--init-attributes", fa.init_attributes, "gt | fresh (default: gt for --init gt, else fresh)")
        ->check(CLI::IsMember({"gt", "fresh"}));
    fit->add_option("--turntable-frames", fa.turntable_frames, "Orbit renders of the result (0 = none)")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--log-every", fa.log_every)->check(CLI::PositiveNumber);
    fit->add_option("--trace-format", fa.trace_format, "Per-step loss trace: jsonl (default) or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    fit->add_option("--body-model,--model", fa.model, "Body model override");

    TrainArgs ta;
    auto *train = app.add_subcommand("train-toy", "Overfit the toy predictor to one sample");
    train->add_option("--config", ta.config, "TOML with [predictor], [loss], [rig], [subject], [train]");
    train->add_option("--out", ta.out, "Checkpoint path (.gstp)")->required();
    train->add_option("--steps", ta.steps)->check(CLI::NonNegativeNumber);
    train->add_option("--stop-at-psnr", ta.stop_at_psnr, "Stop once the supervised PSNR reaches this");
    train->add_option("--scene", ta.scene, "Train on this scene instead of generating one");
    train->add_option("--body-model,--model", ta.model, "Body model override");

    RenderArgs ra;
    auto *rend = app.add_subcommand("render", "Render params or a predictor checkpoint");
    rend->add_option("--scene", ra.scene, "Scene directory providing cameras (and the input image for --ckpt)");
    rend->add_option("--params", ra.params, "params.json to render");
    rend->add_option("--ckpt", ra.ckpt, "Predictor checkpoint to run on the scene's input view");
    rend->add_option("--input-view", ra.input_view, "View fed to the predictor");
    rend->add_option("--camera", ra.camera, "<index>, index:<i> or orbit:<frames>");
    rend->add_option("--out", ra.out, "PNG file (index) or directory (orbit)");
    rend->add_option("--body-model,--model", ra.model, "Body model override");

    EvalArgs ea;
    auto *eval = app.add_subcommand("evaluate", "PSNR, SSIM, proxy-perceptual and MPJPE of params on a scene");
    eval->add_option("--scene", ea.scene)->required();
    eval->add_option("--params", ea.params)->required();
    eval->add_option("--out", ea.out, "Directory for metrics.json and metrics.csv")->required();
    eval->add_option("--body-model,--model", ea.model, "Body model override");

    GradArgs gra;
    auto *grad = app.add_subcommand("gradcheck", "Finite-difference check of the analytic gradients");
    grad->add_option("--module", gra.module, "rasterizer | scaffold | lbs | losses | all")
        ->check(CLI::IsMember({"rasterizer", "scaffold", "lbs", "losses", "all"}));
    grad->add_option("--configs", gra.configs, "Random configurations per module")->check(CLI::PositiveNumber);
    grad->add_option("--out", gra.out, "Also write the JSON report here");

    BenchArgs ba;
    auto *bench = app.add_subcommand("bench", "Rasterizer throughput");
    bench->add_option("--size", ba.size)->check(CLI::PositiveNumber);
    bench->add_option("--frames", ba.frames)->check(CLI::PositiveNumber);
    bench->add_option("--out", ba.out, "Also write the JSON report here");
    bench->add_option("--body-model,--model", ba.model, "Body model override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*gen) return run_generate(ga, g);
        if (*fit) return run_fit(fa, g);
        if (*train) return run_train(ta, g, seed_opt->count() > 0);
        if (*rend) return run_render(ra, g);
        if (*eval) return run_evaluate(ea, g);
        if (*grad) return run_gradcheck(gra, g);
        if (*bench) return run_bench_cmd(ba, g, threads_opt->count() > 0);
    } catch (const NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        if (*rend) std::cerr << "\n" << rend->help();
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
