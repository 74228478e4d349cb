// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include <bodysplat/dataio.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace bodysplat;
namespace fs = std::filesystem;

namespace {

const BodyModel &
model() {
    static const BodyModel m = build_synthetic_model({});
    return m;
}

RigConfig
small_rig() {
    RigConfig rig;
    rig.image_width  = 48;
    rig.image_height = 48;
    return rig;
}

fs::path
fresh_dir(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("bodysplat_dataio_" + name);
    fs::remove_all(dir);
    return dir;
}

bool
images_equal(const Image &a, const Image &b) {
    return a.same_shape(b) && a.data == b.data;
}

} // namespace

TEST(GenerateScene, SameSeedsAreBitIdentical) {
    const auto a = generate_scene(model(), 3, small_rig(), 4);
    const auto b = generate_scene(model(), 3, small_rig(), 4);
    ASSERT_EQ(a.num_views(), b.num_views());
    for (int i = 0; i < a.num_views(); ++i) {
        EXPECT_TRUE(images_equal(a.views[i].image, b.views[i].image));
        EXPECT_TRUE(images_equal(a.views[i].mask, b.views[i].mask));
    }
    EXPECT_EQ(params_to_json(*a.gt).dump(), params_to_json(*b.gt).dump());
    const auto c = generate_scene(model(), 5, small_rig(), 4);
    EXPECT_NE(params_to_json(*a.gt).dump(), params_to_json(*c.gt).dump());
}

TEST(GenerateScene, ThreadCountDoesNotChangeOutput) {
    const auto a = generate_scene(model(), 8, small_rig(), 9, {}, Vec3::Zero(), RenderOptions{1});
    const auto b = generate_scene(model(), 8, small_rig(), 9, {}, Vec3::Zero(), RenderOptions{4});
    for (int i = 0; i < a.num_views(); ++i) {
        EXPECT_TRUE(images_equal(a.views[i].image, b.views[i].image));
    }
}

TEST(GenerateScene, RingCamerasAreEquidistantFromRoot) {
    const auto ds = generate_scene(model(), 1, small_rig(), 2);
    ASSERT_EQ(ds.num_views(), 8);
    const Vec3 root = forward_lbs(model(), ds.gt->pose, ds.gt->shape).joints[0];
    EXPECT_LT(root.norm(), 1e-9);
    for (const auto &v : ds.views) {
        EXPECT_NEAR((v.camera.center() - root).norm(), 3.0, 1e-9);
        // Root projects to the image centre.
        const Vec3 pc = v.camera.to_camera(root);
        EXPECT_NEAR(v.camera.fx * pc.x() / pc.z() + v.camera.cx, 23.5, 1e-9);
        EXPECT_NEAR(v.camera.fy * pc.y() / pc.z() + v.camera.cy, 23.5, 1e-9);
    }
}

TEST(GenerateScene, SubjectIsVisibleAndOffsetsBounded) {
    const auto ds = generate_scene(model(), 11, small_rig(), 12);
    for (const auto &v : ds.views) {
        double covered = 0.0;
        for (double m : v.mask.data) covered += m;
        EXPECT_GT(covered, 0.03 * v.mask.size());
        EXPECT_LT(covered, 0.6 * v.mask.size());
    }
    double largest = 0.0;
    for (const auto &d : ds.gt->attrs.offsets) largest = std::max(largest, d.norm());
    EXPECT_LE(largest, 0.02 + 1e-12);
    EXPECT_GT(largest, 0.001);
}

TEST(GenerateScene, RerenderReproducesStoredImagesBitwise) {
    const auto ds = generate_scene(model(), 21, small_rig(), 22);
    for (const auto &v : ds.views) {
        const auto r = render_params(model(), *ds.gt, v.camera, ds.background);
        const Image q = quantize_image(r.rgb);
        ASSERT_EQ(q.data.size(), v.image.data.size());
        for (std::size_t i = 0; i < q.data.size(); ++i) {
            ASSERT_EQ(quantize_u8(r.rgb.data[i]), quantize_u8(v.image.data[i]));
        }
        for (std::size_t p = 0; p < v.mask.size(); ++p) {
            ASSERT_EQ(v.mask.data[p], quantize_u8(r.alpha.data[p]) >= 128 ? 1.0 : 0.0);
        }
    }
}

TEST(GenerateScene, RejectsInvalidRig) {
    RigConfig rig = small_rig();
    rig.num_views = 0;
    EXPECT_THROW(generate_scene(model(), 1, rig, 1), ValidationError);
    rig = small_rig();
    rig.radius = 0.01;
    EXPECT_THROW(generate_scene(model(), 1, rig, 1), ValidationError);
    rig = small_rig();
    rig.fov_y_degrees = 0.0;
    EXPECT_THROW(generate_scene(model(), 1, rig, 1), ValidationError);
}

TEST(SceneIo, RoundTrip) {
    RigConfig rig = small_rig();
    rig.num_views = 3;
    auto ds       = generate_scene(model(), 31, rig, 32, {}, Vec3(0.1, 0.2, 0.3));
    const auto dir = fresh_dir("roundtrip");
    save_scene(ds, dir, &model());
    for (const char *f : {"cameras.json", "params.json", "body_model.gstb", "view_000.png", "mask_002.png"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto back = load_scene(dir);
    ASSERT_EQ(back.num_views(), 3);
    EXPECT_EQ(back.body_model_ref, "body_model.gstb");
    EXPECT_EQ(resolve_body_model(back, dir), dir / "body_model.gstb");
    EXPECT_EQ(back.background, ds.background);
    for (int i = 0; i < 3; ++i) {
        EXPECT_TRUE(images_equal(back.views[i].image, ds.views[i].image));
        EXPECT_TRUE(images_equal(back.views[i].mask, ds.views[i].mask));
        EXPECT_TRUE(images_equal(back.views[i].alpha, ds.views[i].alpha));
        EXPECT_LT((back.views[i].camera.world_to_camera - ds.views[i].camera.world_to_camera).cwiseAbs().maxCoeff(), 1e-7);
        EXPECT_NEAR(back.views[i].camera.fx, ds.views[i].camera.fx, 1e-7);
    }
    ASSERT_TRUE(back.gt.has_value());
    EXPECT_EQ(params_to_json(*back.gt).dump(), params_to_json(*ds.gt).dump());
    const auto loaded_model = load_body_model(resolve_body_model(back, dir));
    EXPECT_EQ(loaded_model.num_vertices(), model().num_vertices());
}

TEST(SceneIo, MaskEqualsThresholdedStoredAlpha) {
    RigConfig rig = small_rig();
    rig.num_views = 2;
    const auto ds  = generate_scene(model(), 41, rig, 42);
    const auto dir = fresh_dir("mask_alpha");
    save_scene(ds, dir);
    for (int i = 0; i < 2; ++i) {
        const Image rgba = read_png(dir / view_file_name("view", i));
        const Image mask = read_png(dir / view_file_name("mask", i));
        ASSERT_EQ(rgba.channels, 4);
        for (std::size_t p = 0; p < mask.size(); ++p) {
            ASSERT_EQ(mask.data[p], rgba.data[4 * p + 3] > 0.5 ? 1.0 : 0.0);
        }
    }
}

TEST(SceneIo, MissingMaskNamesTheView) {
    RigConfig rig = small_rig();
    rig.num_views = 3;
    const auto dir = fresh_dir("missing_mask");
    save_scene(generate_scene(model(), 1, rig, 1), dir);
    fs::remove(dir / "mask_001.png");
    try {
        load_scene(dir);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("view 1"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("mask_001.png"), std::string::npos) << e.what();
    }
}

TEST(SceneIo, CorruptFilesAreReported) {
    RigConfig rig = small_rig();
    rig.num_views = 1;
    const auto dir = fresh_dir("corrupt");
    save_scene(generate_scene(model(), 1, rig, 1), dir);
    { std::ofstream(dir / "view_000.png") << "not a png"; }
    try {
        load_scene(dir);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("view_000.png"), std::string::npos) << e.what();
    }
    { std::ofstream(dir / "cameras.json") << "{ nope"; }
    EXPECT_THROW(load_scene(dir), ValidationError);
    fs::remove(dir / "cameras.json");
    EXPECT_THROW(load_scene(dir), ValidationError);
}

TEST(SceneIo, GoldenMinimalCamerasJson) {
    const auto dir = fresh_dir("golden");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "cameras.json");
        out << R"({
  "format": "bodysplat-scene",
  "version": 1,
  "body_model": "model.gstb",
  "cameras": [
    {
      "index": 0,
      "width": 4,
      "height": 2,
      "fx": 10.0, "fy": 12.0, "cx": 1.5, "cy": 0.5,
      "world_to_camera": [1, 0, 0, 0,
                          0, 1, 0, 0,
                          0, 0, 1, 0,
                          0, 0, 0, 1],
      "image": "view_000.png",
      "mask": "mask_000.png"
    }
  ]
})";
    }
    Image rgb(4, 2, 3, 0.0);
    rgb.at(3, 1, 0) = 1.0;
    write_png(dir / "view_000.png", rgb);
    Image mask(4, 2, 1, 0.0);
    mask.at(3, 1) = 1.0;
    write_png(dir / "mask_000.png", mask);

    const auto ds = load_scene(dir);
    ASSERT_EQ(ds.num_views(), 1);
    const Camera &cam = ds.views[0].camera;
    EXPECT_EQ(cam.world_to_camera, Mat4::Identity());
    EXPECT_EQ(cam.fx, 10.0);
    EXPECT_EQ(cam.fy, 12.0);
    EXPECT_EQ(cam.cx, 1.5);
    EXPECT_EQ(cam.cy, 0.5);
    EXPECT_EQ(cam.width, 4);
    EXPECT_EQ(cam.height, 2);
    EXPECT_EQ(cam.near, Camera{}.near);
    EXPECT_EQ(ds.background, Vec3::Zero());
    EXPECT_EQ(ds.body_model_ref, "model.gstb");
    EXPECT_FALSE(ds.gt.has_value());
    EXPECT_EQ(ds.views[0].image.at(3, 1, 0), 1.0);
    EXPECT_EQ(ds.views[0].mask.at(3, 1), 1.0);
    EXPECT_TRUE(ds.views[0].alpha.data.empty());
    // Row-major: element 3 is the x translation.
    Camera shifted = cam;
    shifted.world_to_camera(0, 3) = 2.0;
    EXPECT_EQ(camera_to_json(shifted)["world_to_camera"][3].get<double>(), 2.0);
}

TEST(SceneIo, ParamsRejectWrongShapes) {
    SceneParams p;
    p.pose  = PoseParams::identity(24);
    p.shape = ShapeParams::zeros(10);
    p.attrs = GaussianAttributes::zeros(5);
    auto j  = params_to_json(p);
    EXPECT_NO_THROW(params_from_json(j, "p"));
    EXPECT_THROW(validate_params(model(), params_from_json(j, "p"), "p"), ValidationError);
    j["gaussians"]["offsets"][2] = {1.0, 2.0};
    EXPECT_THROW(params_from_json(j, "p"), ValidationError);
    auto k = params_to_json(p);
    k.erase("betas");
    EXPECT_THROW(params_from_json(k, "p"), ValidationError);
}
