// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multi-view scenes and the on-disk scene directory (see FORMATS.md).
//
#pragma once

#include "body_model.hpp"
#include "camera.hpp"
#include "gaussian_scene.hpp"
#include "png_io.hpp"
#include "rasterizer.hpp"
#include "rotation.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

namespace bodysplat {

/// Ring of M cameras around the root joint, all looking at it.
struct RigConfig {
    int num_views        = 8;
    double radius        = 3.0;  // meters from the root joint, in the horizontal plane
    double height        = 0.0;  // meters above the root joint
    int image_width      = 64;
    int image_height     = 64;
    double fov_y_degrees = 40.0;
    double near          = 0.05;

    void
    validate() const {
        require(num_views >= 1, "rig: num_views must be at least 1");
        require(radius > near && std::isfinite(radius), "rig: radius must exceed the near plane");
        require(std::isfinite(height), "rig: non-finite height");
        require(image_width > 0 && image_height > 0, "rig: image size must be positive");
        require(fov_y_degrees > 0.0 && fov_y_degrees < 170.0, "rig: fov_y_degrees out of range");
        require(near > 0.0, "rig: near must be positive");
    }

    double focal() const {
        return 0.5 * image_height / std::tan(0.5 * fov_y_degrees * std::numbers::pi / 180.0);
    }
};

/// Random pose and appearance ranges for generated subjects.
struct SubjectConfig {
    double max_joint_angle_degrees = 25.0; // per non-root joint, uniform in [0, max]
    double max_tilt_degrees        = 10.0; // root tilt
    double max_heading_degrees     = 180.0; // heading uniform in [-max, max] about +y
    double beta_std                = 1.0;
    double max_offset              = 0.02; // meters, bound on |delta|
    double opacity                 = 0.95;
    double scale_factor            = 1.3;  // scales relative to the default initialization
    ScaffoldConfig scaffold;

    void
    validate() const {
        auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
        require(in(max_joint_angle_degrees, 0.0, 180.0) && in(max_tilt_degrees, 0.0, 180.0) &&
                    in(max_heading_degrees, 0.0, 180.0),
                "subject: angle bounds must lie in [0, 180] degrees");
        require(in(beta_std, 0.0, 10.0), "subject: beta_std must lie in [0, 10]");
        require(in(max_offset, 0.0, 0.5), "subject: max_offset must lie in [0, 0.5] m");
        require(opacity > 0.0 && opacity < 1.0, "subject: opacity must lie in (0, 1)");
        require(scale_factor > 0.0 && std::isfinite(scale_factor), "subject: scale_factor must be positive");
        validate_scaffold_config(scaffold);
    }
};

struct SceneParams {
    PoseParams pose;
    ShapeParams shape;
    GaussianAttributes attrs;
    ScaffoldConfig scaffold;
};

struct SceneView {
    Camera camera;
    Image image; // RGB, values k / 255
    Image mask;  // 1 channel, exactly 0 or 1
    Image alpha; // optional quantized coverage; when empty the mask stands in
    std::string image_file;
    std::string mask_file;
};

struct SceneDataset {
    std::vector<SceneView> views;
    std::optional<SceneParams> gt;
    std::string body_model_ref;
    Vec3 background = Vec3::Zero();

    int num_views() const { return static_cast<int>(views.size()); }

    void
    validate() const {
        require(!views.empty(), "scene: no views");
        for (std::size_t i = 0; i < views.size(); ++i) {
            const auto &v = views[i];
            const std::string what = "scene view " + std::to_string(i);
            v.camera.validate();
            require(v.image.width == views[0].image.width && v.image.height == views[0].image.height,
                    what + ": resolution differs from view 0");
            require(v.image.channels == 3, what + ": image must be RGB");
            require(v.image.width == v.camera.width && v.image.height == v.camera.height,
                    what + ": image size does not match its camera");
            require(v.mask.width == v.image.width && v.mask.height == v.image.height && v.mask.channels == 1,
                    what + ": mask size does not match the image");
            require(v.alpha.data.empty() || (v.alpha.width == v.image.width &&
                                             v.alpha.height == v.image.height && v.alpha.channels == 1),
                    what + ": alpha size does not match the image");
        }
    }
};

inline std::vector<Camera>
ring_cameras(const RigConfig &rig, const Vec3 &target) {
    rig.validate();
    std::vector<Camera> cams;
    for (int i = 0; i < rig.num_views; ++i) {
        const double a = 2.0 * std::numbers::pi * i / rig.num_views;
        const Vec3 eye = target + Vec3(rig.radius * std::sin(a), rig.height, rig.radius * std::cos(a));
        cams.push_back(Camera::look_at(eye, target, Vec3::UnitY(), rig.focal(), rig.image_width,
                                       rig.image_height, rig.near));
    }
    return cams;
}

inline std::string
view_file_name(const char *prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d.png", prefix, index);
    return buf;
}

/// Random valid pose: bounded heading and tilt, per-joint rotations about random axes
/// with angles uniform in [0, max]. Root translation is zero.
template <typename Rng>
PoseParams
sample_pose(const BodyModel &model, const SubjectConfig &cfg, Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double deg = std::numbers::pi / 180.0;
    auto pose        = PoseParams::identity(model.num_joints());
    const Mat3 heading = matrix_from_axis_angle(Vec3::UnitY() * (2.0 * unit(rng) - 1.0) * cfg.max_heading_degrees * deg);
    pose.joint_rotations[0] = heading * random_rotation_with_angle(rng, unit(rng) * cfg.max_tilt_degrees * deg);
    for (int j = 1; j < model.num_joints(); ++j) {
        pose.joint_rotations[j] = random_rotation_with_angle(rng, unit(rng) * cfg.max_joint_angle_degrees * deg);
    }
    return pose;
}

/// Smooth random field over rest-pose positions: a few random plane waves per component.
template <typename Rng>
std::vector<Vec3>
smooth_field(const std::vector<Vec3> &points, Rng &rng, double frequency, int waves = 4) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec3> out(points.size(), Vec3::Zero());
    for (int k = 0; k < 3; ++k) {
        for (int w = 0; w < waves; ++w) {
            const Vec3 dir     = Vec3(normal(rng), normal(rng), normal(rng)).normalized() * frequency;
            const double phase = 2.0 * std::numbers::pi * unit(rng);
            const double amp   = normal(rng) / std::sqrt(static_cast<double>(waves));
            for (std::size_t i = 0; i < points.size(); ++i) {
                out[i][k] += amp * std::cos(dir.dot(points[i]) + phase);
            }
        }
    }
    return out;
}

/// Ground-truth appearance: smooth colours, smooth offsets bounded by cfg.max_offset, mildly
/// anisotropic scales and random orientations.
template <typename Rng>
GaussianAttributes
sample_appearance(const BodyModel &model, const SubjectConfig &cfg, Rng &rng) {
    const auto &rest = model.template_vertices;
    const int g      = cfg.scaffold.gaussians_per_vertex;
    GaussianAttributes a = initial_attributes(rest, cfg.scaffold, rng());
    std::vector<Vec3> rest_g;
    for (const auto &v : rest) {
        for (int k = 0; k < g; ++k) rest_g.push_back(v);
    }
    const auto colour = smooth_field(rest_g, rng, 6.0);
    const auto offset = smooth_field(rest_g, rng, 8.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.colors_raw[i] = 1.5 * colour[i];
        const Vec3 d    = offset[i] * 0.5;
        a.offsets[i]    = cfg.max_offset * d / std::max(1.0, d.norm());
        a.rotations[i]  = Vec4(normal(rng), normal(rng), normal(rng), normal(rng)).normalized();
        for (int k = 0; k < 3; ++k) {
            a.log_scales[i][k] += std::log(cfg.scale_factor) + 0.3 * (unit(rng) - 0.5);
        }
        a.opacity_logits[i] = logit(cfg.opacity);
    }
    return a;
}

inline ImageBuffer
render_params(const BodyModel &model,
              const SceneParams &params,
              const Camera &cam,
              const Vec3 &background,
              const RenderOptions &opts = {}) {
    const auto lbs = forward_lbs(model, params.pose, params.shape);
    return render(scaffold(lbs.vertices, params.attrs, params.scaffold), cam, background, opts);
}

/// Quantizes a render to what a PNG stores: RGB to k/255, mask = (quantized alpha > 0.5).
inline SceneView
view_from_render(const ImageBuffer &r, const Camera &cam, int index) {
    SceneView v;
    v.camera     = cam;
    v.image      = quantize_image(r.rgb);
    v.alpha      = quantize_image(r.alpha);
    v.mask       = Image(r.alpha.width, r.alpha.height, 1);
    for (std::size_t p = 0; p < r.alpha.size(); ++p) {
        v.mask.data[p] = v.alpha.data[p] > 0.5 ? 1.0 : 0.0;
    }
    v.image_file = view_file_name("view", index);
    v.mask_file  = view_file_name("mask", index);
    return v;
}

/// Deterministic for a given (pose_seed, appearance_seed). The root joint sits at the world
/// origin; cameras ring around it.
inline SceneDataset
generate_scene(const BodyModel &model,
               std::uint64_t pose_seed,
               const RigConfig &rig,
               std::uint64_t appearance_seed,
               const SubjectConfig &subject = {},
               const Vec3 &background       = Vec3::Zero(),
               const RenderOptions &opts    = {}) {
    rig.validate();
    subject.validate();
    std::mt19937_64 pose_rng(mix_seed(pose_seed, 101));
    std::mt19937_64 look_rng(mix_seed(appearance_seed, 202));

    SceneParams gt;
    gt.scaffold = subject.scaffold;
    gt.pose     = sample_pose(model, subject, pose_rng);
    std::normal_distribution<double> normal(0.0, std::max(subject.beta_std, 1e-300));
    VecX betas = VecX::Zero(model.num_betas());
    for (int b = 0; b < model.num_betas() && subject.beta_std > 0.0; ++b) {
        betas[b] = std::clamp(normal(pose_rng), -3.0, 3.0);
    }
    gt.shape = ShapeParams(betas);
    gt.attrs = sample_appearance(model, subject, look_rng);

    // Place the posed root joint at the origin.
    const auto at_zero       = forward_lbs(model, gt.pose, gt.shape);
    gt.pose.root_translation = -at_zero.joints[0];

    SceneDataset ds;
    ds.background = background;
    const auto cams = ring_cameras(rig, Vec3::Zero());
    const auto set  = scaffold(forward_lbs(model, gt.pose, gt.shape).vertices, gt.attrs, gt.scaffold);
    ds.views.resize(cams.size());
    // One worker per view; each render is single-threaded and bitwise independent of the split.
    parallel_for(cams.size(), opts.threads, [&](std::size_t i) {
        ds.views[i] = view_from_render(render(set, cams[i], background, RenderOptions{1}), cams[i],
                                       static_cast<int>(i));
    });
    ds.gt = std::move(gt);
    return ds;
}

// ---------------------------------------------------------------------------------------------
// JSON encoding

namespace detail {

using json = nlohmann::json;

inline json
to_json_vec(const Eigen::Ref<const VecX> &v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline VecX
vec_from_json(const json &j, std::size_t n, const std::string &what) {
    require(j.is_array() && j.size() == n,
            what + ": expected an array of " + std::to_string(n) + " numbers");
    VecX v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        require(j[i].is_number(), what + ": element " + std::to_string(i) + " is not a number");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        require(std::isfinite(v[static_cast<Eigen::Index>(i)]), what + ": non-finite value");
    }
    return v;
}

template <typename V>
json
rows_to_json(const std::vector<V> &rows) {
    json a = json::array();
    for (const auto &r : rows) a.push_back(to_json_vec(r));
    return a;
}

template <int N>
std::vector<Eigen::Matrix<double, N, 1>>
rows_from_json(const json &j, const std::string &what) {
    require(j.is_array(), what + ": expected an array");
    std::vector<Eigen::Matrix<double, N, 1>> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(vec_from_json(j[i], N, what + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline json
read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline void
write_json_file(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path.string());
    out << j.dump(2) << "\n";
    require(out.good(), "write failed for " + path.string());
}

inline const json &
field(const json &obj, const char *name, const std::string &what) {
    require(obj.is_object() && obj.contains(name), what + ": missing field '" + name + "'");
    return obj.at(name);
}

} // namespace detail

inline nlohmann::json
camera_to_json(const Camera &cam) {
    nlohmann::json j;
    j["width"]  = cam.width;
    j["height"] = cam.height;
    j["fx"]     = cam.fx;
    j["fy"]     = cam.fy;
    j["cx"]     = cam.cx;
    j["cy"]     = cam.cy;
    j["near"]   = cam.near;
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m.push_back(cam.world_to_camera(r, c));
    }
    j["world_to_camera"] = m;
    return j;
}

inline Camera
camera_from_json(const nlohmann::json &j, const std::string &what) {
    using detail::field;
    Camera cam;
    require(field(j, "width", what).is_number_integer() && field(j, "height", what).is_number_integer(),
            what + ": width and height must be integers");
    cam.width  = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.fx     = detail::vec_from_json(nlohmann::json::array({field(j, "fx", what)}), 1, what + ".fx")[0];
    cam.fy     = detail::vec_from_json(nlohmann::json::array({field(j, "fy", what)}), 1, what + ".fy")[0];
    cam.cx     = detail::vec_from_json(nlohmann::json::array({field(j, "cx", what)}), 1, what + ".cx")[0];
    cam.cy     = detail::vec_from_json(nlohmann::json::array({field(j, "cy", what)}), 1, what + ".cy")[0];
    if (j.contains("near")) {
        cam.near = detail::vec_from_json(nlohmann::json::array({j.at("near")}), 1, what + ".near")[0];
    }
    const VecX m = detail::vec_from_json(field(j, "world_to_camera", what), 16, what + ".world_to_camera");
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) cam.world_to_camera(r, c) = m[4 * r + c];
    }
    cam.validate();
    return cam;
}

inline nlohmann::json
params_to_json(const SceneParams &p) {
    nlohmann::json j;
    nlohmann::json rots = nlohmann::json::array();
    for (const auto &r : p.pose.joint_rotations) {
        nlohmann::json m = nlohmann::json::array();
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) m.push_back(r(a, b));
        }
        rots.push_back(m);
    }
    j["pose"]["joint_rotations"]  = rots;
    j["pose"]["root_translation"] = detail::to_json_vec(p.pose.root_translation);
    j["betas"]                    = detail::to_json_vec(p.shape.betas());
    j["scaffold"]["gaussians_per_vertex"] = p.scaffold.gaussians_per_vertex;
    j["scaffold"]["fixed_opacity_one"]    = p.scaffold.fixed_opacity_one;
    auto &g              = j["gaussians"];
    g["offsets"]         = detail::rows_to_json(p.attrs.offsets);
    g["rotations"]       = detail::rows_to_json(p.attrs.rotations);
    g["log_scales"]      = detail::rows_to_json(p.attrs.log_scales);
    g["opacity_logits"]  = p.attrs.opacity_logits;
    g["colors_raw"]      = detail::rows_to_json(p.attrs.colors_raw);
    return j;
}

inline SceneParams
params_from_json(const nlohmann::json &j, const std::string &what) {
    using detail::field;
    SceneParams p;
    const auto &pose = field(j, "pose", what);
    const auto &rots = field(pose, "joint_rotations", what + ".pose");
    require(rots.is_array(), what + ".pose.joint_rotations: expected an array");
    for (std::size_t k = 0; k < rots.size(); ++k) {
        const VecX m = detail::vec_from_json(rots[k], 9, what + ".pose.joint_rotations[" + std::to_string(k) + "]");
        Mat3 r;
        for (int a = 0; a < 9; ++a) r(a / 3, a % 3) = m[a];
        p.pose.joint_rotations.push_back(r);
    }
    p.pose.root_translation = detail::vec_from_json(field(pose, "root_translation", what + ".pose"), 3,
                                                    what + ".pose.root_translation");
    const auto &betas = field(j, "betas", what);
    require(betas.is_array(), what + ".betas: expected an array");
    p.shape = ShapeParams(detail::vec_from_json(betas, betas.size(), what + ".betas"));
    if (j.contains("scaffold")) {
        const auto &s = j.at("scaffold");
        p.scaffold.gaussians_per_vertex = s.value("gaussians_per_vertex", 1);
        p.scaffold.fixed_opacity_one    = s.value("fixed_opacity_one", false);
    }
    validate_scaffold_config(p.scaffold);
    const auto &g = field(j, "gaussians", what);
    const std::string gw = what + ".gaussians";
    p.attrs.offsets    = detail::rows_from_json<3>(field(g, "offsets", gw), gw + ".offsets");
    p.attrs.rotations  = detail::rows_from_json<4>(field(g, "rotations", gw), gw + ".rotations");
    p.attrs.log_scales = detail::rows_from_json<3>(field(g, "log_scales", gw), gw + ".log_scales");
    const auto &op     = field(g, "opacity_logits", gw);
    require(op.is_array(), gw + ".opacity_logits: expected an array");
    const VecX o = detail::vec_from_json(op, op.size(), gw + ".opacity_logits");
    p.attrs.opacity_logits.assign(o.data(), o.data() + o.size());
    p.attrs.colors_raw = detail::rows_from_json<3>(field(g, "colors_raw", gw), gw + ".colors_raw");
    p.attrs.validate();
    return p;
}

inline void
save_params(const SceneParams &p, const std::filesystem::path &path) {
    detail::write_json_file(path, params_to_json(p));
}

inline SceneParams
load_params(const std::filesystem::path &path) {
    return params_from_json(detail::read_json_file(path), path.string());
}

/// Checks parameter dimensions against a body model.
inline void
validate_params(const BodyModel &model, const SceneParams &p, const std::string &what) {
    require(static_cast<int>(p.pose.joint_rotations.size()) == model.num_joints(),
            what + ": expected " + std::to_string(model.num_joints()) + " joint rotations");
    require(p.shape.size() == model.num_betas(),
            what + ": expected " + std::to_string(model.num_betas()) + " betas");
    require(p.attrs.size() ==
                static_cast<std::size_t>(model.num_vertices() * p.scaffold.gaussians_per_vertex),
            what + ": gaussian count does not match the body model");
}

// ---------------------------------------------------------------------------------------------
// Scene directory

inline constexpr const char *kCamerasFile   = "cameras.json";
inline constexpr const char *kParamsFile    = "params.json";
inline constexpr const char *kBodyModelFile = "body_model.gstb";

/// Writes cameras.json, view_NNN.png (RGBA: colour + coverage), mask_NNN.png and, when
/// present, params.json. `model` (optional) is copied into the directory as body_model.gstb.
inline void
save_scene(const SceneDataset &ds, const std::filesystem::path &dir, const BodyModel *model = nullptr) {
    ds.validate();
    std::filesystem::create_directories(dir);
    nlohmann::json cams = nlohmann::json::array();
    for (int i = 0; i < ds.num_views(); ++i) {
        const auto &v = ds.views[i];
        Image rgba(v.image.width, v.image.height, 4);
        for (std::size_t p = 0; p < v.image.pixel_count(); ++p) {
            for (int c = 0; c < 3; ++c) rgba.data[4 * p + c] = v.image.data[3 * p + c];
            rgba.data[4 * p + 3] = v.alpha.data.empty() ? v.mask.data[p] : v.alpha.data[p];
        }
        const std::string image_file = v.image_file.empty() ? view_file_name("view", i) : v.image_file;
        const std::string mask_file  = v.mask_file.empty() ? view_file_name("mask", i) : v.mask_file;
        write_png(dir / image_file, rgba);
        write_png(dir / mask_file, v.mask);
        auto j     = camera_to_json(v.camera);
        j["index"] = i;
        j["image"] = image_file;
        j["mask"]  = mask_file;
        cams.push_back(j);
    }
    nlohmann::json root;
    root["format"]     = "bodysplat-scene";
    root["version"]    = 1;
    root["background"] = detail::to_json_vec(ds.background);
    std::string model_ref = ds.body_model_ref;
    if (model != nullptr) {
        save_body_model(*model, dir / kBodyModelFile);
        model_ref = kBodyModelFile;
    }
    root["body_model"] = model_ref;
    root["cameras"]    = cams;
    detail::write_json_file(dir / kCamerasFile, root);
    if (ds.gt) {
        save_params(*ds.gt, dir / kParamsFile);
    } else {
        std::filesystem::remove(dir / kParamsFile);
    }
}

inline std::filesystem::path
resolve_body_model(const SceneDataset &ds, const std::filesystem::path &dir) {
    require(!ds.body_model_ref.empty(), "scene " + dir.string() + ": no body_model reference in cameras.json");
    const std::filesystem::path ref(ds.body_model_ref);
    return ref.is_absolute() ? ref : dir / ref;
}

inline SceneDataset
load_scene(const std::filesystem::path &dir) {
    const auto cams_path = dir / kCamerasFile;
    require(std::filesystem::exists(cams_path), "scene " + dir.string() + ": missing " + kCamerasFile);
    const auto root = detail::read_json_file(cams_path);
    const std::string what = cams_path.string();
    SceneDataset ds;
    if (root.contains("background")) {
        ds.background = detail::vec_from_json(root.at("background"), 3, what + ".background");
    }
    if (root.contains("body_model")) {
        require(root.at("body_model").is_string(), what + ".body_model: expected a string");
        ds.body_model_ref = root.at("body_model").get<std::string>();
    }
    const auto &cams = detail::field(root, "cameras", what);
    require(cams.is_array() && !cams.empty(), what + ": 'cameras' must be a non-empty array");
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const std::string vw = "view " + std::to_string(i);
        SceneView v;
        v.camera     = camera_from_json(cams[i], what + " camera " + std::to_string(i));
        v.image_file = cams[i].value("image", view_file_name("view", static_cast<int>(i)));
        v.mask_file  = cams[i].value("mask", view_file_name("mask", static_cast<int>(i)));
        const auto image_path = dir / v.image_file;
        const auto mask_path  = dir / v.mask_file;
        require(std::filesystem::exists(image_path), vw + ": missing image file " + image_path.string());
        require(std::filesystem::exists(mask_path), vw + ": missing mask file " + mask_path.string());
        const Image img = read_png(image_path);
        require(img.channels == 3 || img.channels == 4, vw + ": image must be RGB or RGBA");
        v.image = Image(img.width, img.height, 3);
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            for (int c = 0; c < 3; ++c) v.image.data[3 * p + c] = img.data[p * img.channels + c];
        }
        if (img.channels == 4) v.alpha = img.channel(3);
        const Image mask = read_png(mask_path);
        require(mask.channels == 1, vw + ": mask must be single-channel");
        for (double m : mask.data) {
            require(m == 0.0 || m == 1.0, vw + ": mask " + mask_path.string() + " has values other than 0 and 255");
        }
        v.mask = mask;
        ds.views.push_back(std::move(v));
    }
    if (std::filesystem::exists(dir / kParamsFile)) {
        ds.gt = load_params(dir / kParamsFile);
    }
    ds.validate();
    return ds;
}

} // namespace bodysplat
