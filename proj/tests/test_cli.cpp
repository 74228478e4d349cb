// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Drives the bodysplat executable end to end: exit codes, files written, JSON outputs.
//
#include <bodysplat/config.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

using namespace bodysplat;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out; // stdout only
};

RunResult
run(const std::string &args) {
    const std::string cmd = std::string("\"") + BODYSPLAT_CLI_PATH + "\" " + args + " 2>/dev/null";
    RunResult r;
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code           = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json
read_json(const fs::path &p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

void
write_text(const fs::path &p, const std::string &text) {
    std::ofstream(p) << text;
}

class Cli : public ::testing::Test {
protected:
    static fs::path dir;

    static void
    SetUpTestSuite() {
        dir = fs::temp_directory_path() / ("bodysplat_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        // One small scene shared by the tests below.
        const auto r = run("--seed 4 generate-data --out \"" + (dir / "scene").string() + "\" --views 2 --size 32");
        ASSERT_EQ(r.code, 0);
    }

    static void
    TearDownTestSuite() {
        fs::remove_all(dir);
    }

    static std::string
    q(const fs::path &p) {
        return "\"" + p.string() + "\"";
    }
};

fs::path Cli::dir;

} // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("fit --help").code, 0);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("--no-such-flag").code, 1);
    EXPECT_EQ(run("no-such-command").code, 1);
    EXPECT_EQ(run("render").code, 1);
    EXPECT_EQ(run("fit --out x").code, 1); // --scene missing
    EXPECT_EQ(run("--threads 0 bench").code, 1);
}

TEST_F(Cli, GenerateDataWritesTheSceneLayout) {
    const auto s = dir / "scene";
    for (const char *f : {"cameras.json", "params.json", "body_model.gstb", "view_000.png", "view_001.png",
                          "mask_000.png", "mask_001.png"}) {
        EXPECT_TRUE(fs::is_regular_file(s / f)) << f;
    }
    EXPECT_FALSE(fs::exists(s / "view_002.png"));
    const auto ds = load_scene(s);
    EXPECT_EQ(ds.num_views(), 2);
    EXPECT_EQ(ds.views[0].image.width, 32);
    ASSERT_TRUE(ds.gt.has_value());
}

TEST_F(Cli, GenerateDataIsDeterministicInTheSeed) {
    const auto other = dir / "scene_again";
    ASSERT_EQ(run("--seed 4 generate-data --out " + q(other) + " --views 2 --size 32").code, 0);
    const auto a = load_scene(dir / "scene"), b = load_scene(other);
    EXPECT_EQ(a.views[1].image.data, b.views[1].image.data);
    EXPECT_EQ(read_json(dir / "scene" / "params.json"), read_json(other / "params.json"));
}

TEST_F(Cli, GenerateDataRejectsUnknownConfigKeys) {
    write_text(dir / "bad.toml", "[rig]\nnum_views = 2\nwidth = 32\n");
    EXPECT_EQ(run("generate-data --out " + q(dir / "unused") + " --config " + q(dir / "bad.toml")).code, 1);
    write_text(dir / "good.toml", "[rig]\nnum_views = 1\nimage_width = 24\nimage_height = 16\n");
    ASSERT_EQ(run("generate-data --out " + q(dir / "from_cfg") + " --config " + q(dir / "good.toml")).code, 0);
    const auto ds = load_scene(dir / "from_cfg");
    EXPECT_EQ(ds.num_views(), 1);
    EXPECT_EQ(ds.views[0].image.width, 24);
    EXPECT_EQ(ds.views[0].image.height, 16);
}

TEST_F(Cli, EvaluateGroundTruthAgainstItself) {
    const auto out = dir / "eval_gt";
    const auto r   = run("evaluate --scene " + q(dir / "scene") + " --params " + q(dir / "scene" / "params.json") +
                         " --out " + q(out));
    ASSERT_EQ(r.code, 0);
    const auto j = read_json(out / "metrics.json");
    EXPECT_EQ(j["MPJPE_mm"].get<double>(), 0.0);
    EXPECT_GE(j["full"]["PSNR"].get<double>(), 50.0); // only 8-bit rounding separates them
    EXPECT_GT(j["full"]["SSIM"].get<double>(), 0.999);
    EXPECT_GE(j["bbox"]["PSNR"].get<double>(), 45.0);
    std::ifstream csv(out / "metrics.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "view,region,PSNR,SSIM,proxy-perceptual,MPJPE");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) rows += !line.empty();
    EXPECT_GE(rows, 4); // two regions per view, plus means
}

TEST_F(Cli, FitFromGroundTruthWritesItsOutputs) {
    const auto out = dir / "fit_gt";
    const auto r   = run("fit --scene " + q(dir / "scene") + " --init gt --steps 3 --turntable-frames 2 --out " + q(out));
    ASSERT_EQ(r.code, 0);
    const auto s = read_json(out / "summary.json");
    EXPECT_EQ(s["steps"].get<int>(), 3);
    EXPECT_LE(s["best_total"].get<double>(), s["initial_total"].get<double>());
    EXPECT_DOUBLE_EQ(s["initial_total"].get<double>(), s["quantization_floor_total"].get<double>());
    EXPECT_EQ(s["initial_mpjpe_mm"].get<double>(), 0.0);
    EXPECT_NO_THROW(load_params(out / "params.json"));
    EXPECT_TRUE(fs::is_regular_file(out / "config.toml"));
    EXPECT_TRUE(fs::is_regular_file(out / "turntable" / "frame_000.png"));
    EXPECT_TRUE(fs::is_regular_file(out / "turntable" / "frame_001.png"));
    std::ifstream trace(out / "trace.jsonl");
    int lines = 0;
    for (std::string line; std::getline(trace, line);) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["step"].get<int>(), lines);
        EXPECT_TRUE(j.contains("total"));
        ++lines;
    }
    EXPECT_EQ(lines, 4); // steps 0..3
    EXPECT_FALSE(fs::exists(out / "trace.csv"));
}

TEST_F(Cli, FitFromPerturbedInitWithEmittedPlots) {
    const auto out = dir / "fit_pert";
    const auto r   = run("--seed 2 --emit-plots fit --scene " + q(dir / "scene") +
                         " --init perturbed:10 --steps 2 --turntable-frames 0 --lambda-tight 0 --trace-format csv --out " +
                         q(out));
    ASSERT_EQ(r.code, 0);
    const auto s = read_json(out / "summary.json");
    EXPECT_GT(s["initial_mpjpe_mm"].get<double>(), 1.0);
    EXPECT_TRUE(fs::is_regular_file(out / "loss_curve.svg"));
    std::ifstream trace(out / "trace.csv");
    std::string header;
    std::getline(trace, header);
    EXPECT_EQ(header, LossReport::csv_header());
    EXPECT_FALSE(fs::exists(out / "turntable"));
    const auto cfg = detail::parse_toml_file(out / "config.toml");
    EXPECT_EQ(cfg["loss"]["lambda_tight"].value<double>(), 0.0);
}

TEST_F(Cli, FitRejectsBadArguments) {
    const auto scene = q(dir / "scene");
    EXPECT_EQ(run("fit --scene " + scene + " --init perturbed:abc --out " + q(dir / "x")).code, 1);
    EXPECT_EQ(run("fit --scene " + scene + " --init sideways --out " + q(dir / "x")).code, 1);
    EXPECT_EQ(run("fit --scene " + q(dir / "missing") + " --out " + q(dir / "x")).code, 1);
    write_text(dir / "w.toml", "[loss]\nlambda_alpha = -0.5\n");
    EXPECT_EQ(run("fit --scene " + scene + " --weights " + q(dir / "w.toml") + " --out " + q(dir / "x")).code, 1);
    EXPECT_EQ(run("fit --scene " + scene + " --lambda-tight -1 --out " + q(dir / "x")).code, 1);
}

TEST_F(Cli, RenderParamsToOneViewAndAnOrbit) {
    const auto scene  = q(dir / "scene");
    const auto params = q(dir / "scene" / "params.json");
    ASSERT_EQ(run("render --scene " + scene + " --params " + params + " --camera 1 --out " + q(dir / "v1.png")).code,
              0);
    const auto img = read_png(dir / "v1.png");
    EXPECT_EQ(img.width, 32);
    // Same camera and params as the stored view, so the images agree up to rounding.
    const auto ds = load_scene(dir / "scene");
    double worst  = 0.0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(img.at(x, y, c) - ds.views[1].image.at(x, y, c)));
    EXPECT_LE(worst, 1.0 / 255.0 + 1e-12);

    ASSERT_EQ(run("render --scene " + scene + " --params " + params + " --camera orbit:3 --out " + q(dir / "orbit")).code,
              0);
    EXPECT_TRUE(fs::is_regular_file(dir / "orbit" / "frame_002.png"));
    EXPECT_FALSE(fs::exists(dir / "orbit" / "frame_003.png"));

    EXPECT_EQ(run("render --scene " + scene + " --params " + params + " --camera 7 --out " + q(dir / "x.png")).code, 1);
    EXPECT_EQ(run("render --scene " + scene + " --params " + params + " --ckpt a.gstp --out " + q(dir / "x.png")).code,
              1);
    EXPECT_EQ(run("render --scene " + scene + " --camera 0 --out " + q(dir / "x.png")).code, 1);
}

TEST_F(Cli, GradcheckReportsJson) {
    const auto r = run("--seed 3 gradcheck --module rasterizer --configs 2");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["seed"].get<int>(), 3);
    EXPECT_FALSE(j["results"].empty());
    EXPECT_EQ(run("gradcheck --module nothing").code, 1);
}

TEST_F(Cli, BenchReportsTheInvariant) {
    const auto r = run("bench --size 32 --frames 1 --out " + q(dir / "bench.json"));
    ASSERT_EQ(r.code, 0);
    const auto j = read_json(dir / "bench.json");
    EXPECT_TRUE(j["invariants_hold"].get<bool>());
    EXPECT_EQ(j["gaussians"].get<int>(), 6890);
    EXPECT_EQ(j["rows"].size(), 2u);
}

TEST_F(Cli, TrainToyWritesCheckpointThatRenders) {
    const auto ck = dir / "toy.gstp";
    write_text(dir / "toy.toml", "[predictor]\nimage_size = 32\nembed_dim = 32\nheads = 2\nencoder_layers = 1\n"
                                 "decoder_layers = 1\nmlp_ratio = 2\n[train]\nlog_every = 1\n");
    const auto r = run("train-toy --config " + q(dir / "toy.toml") + " --steps 2 --out " + q(ck));
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["steps_run"].get<int>(), 2);
    EXPECT_TRUE(fs::is_regular_file(ck));
    EXPECT_TRUE(fs::is_regular_file(dir / "toy.gstp.log.csv"));
    EXPECT_TRUE(fs::is_regular_file(dir / "toy.gstp.toml"));

    // The written config reproduces the run.
    ASSERT_EQ(run("train-toy --config " + q(dir / "toy.gstp.toml") + " --steps 0 --out " + q(dir / "toy2.gstp")).code,
              0);

    // Rendering needs a scene at the predictor resolution (32 here, like the shared scene).
    ASSERT_EQ(run("render --scene " + q(dir / "scene") + " --ckpt " + q(ck) + " --camera 0 --out " +
                  q(dir / "toy.png"))
                  .code,
              0);
    EXPECT_EQ(read_png(dir / "toy.png").width, 32);

    write_text(dir / "bad_toy.toml", "[train]\nsupervise_views = [42]\n");
    EXPECT_EQ(run("train-toy --config " + q(dir / "bad_toy.toml") + " --out " + q(dir / "x.gstp")).code, 1);
}

TEST_F(Cli, CorruptCheckpointIsAValidationError) {
    write_text(dir / "junk.gstp", "not a checkpoint");
    EXPECT_EQ(run("render --scene " + q(dir / "scene") + " --ckpt " + q(dir / "junk.gstp") + " --camera 0 --out " +
                  q(dir / "x.png"))
                  .code,
              1);
}

TEST_F(Cli, BodyModelFlagLoadsAGstbFile) {
    const auto model = dir / "scene" / "body_model.gstb";
    ASSERT_EQ(run("generate-data --out " + q(dir / "with_model") + " --views 1 --size 16 --body-model " + q(model)).code,
              0);
    EXPECT_EQ(run("generate-data --out " + q(dir / "with_alias") + " --views 1 --size 16 --model " + q(model)).code, 0);
    write_text(dir / "junk.gstb", "GSTB");
    EXPECT_EQ(run("generate-data --out " + q(dir / "x") + " --body-model " + q(dir / "junk.gstb")).code, 1);
}
