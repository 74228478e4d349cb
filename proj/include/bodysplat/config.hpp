// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// TOML configuration for the command-line tools. Every FitOptions, LossWeights, RigConfig,
// SubjectConfig and PredictorConfig field has a key of the same name; unknown keys are errors
// so typos do not silently fall back to defaults.
//
//   [loss]       lambda_perceptual, lambda_alpha, lambda_tight, lambda_beta
//   [fit]        steps, lr_attrs, lr_pose, threads, fit_attributes, fit_shape
//   [rig]        num_views, radius, height, image_width, image_height, fov_y_degrees, near
//   [subject]    max_joint_angle_degrees, max_tilt_degrees, max_heading_degrees, beta_std,
//                max_offset, opacity, scale_factor
//   [predictor]  image_size, patch_size, embed_dim, encoder_layers, decoder_layers, heads,
//                mlp_ratio, groups, lr, seed
//   [train]      steps, log_every, stop_at_psnr, threads, pose_seed, appearance_seed,
//                input_view, supervise_views
//
#pragma once

#include "fitting.hpp"
#include "predictor.hpp"

#include <toml.hpp>

#include <set>

namespace bodysplat {

namespace detail {

/// Typed reads from one TOML table with unknown-key detection.
class TomlSection {
  public:
    TomlSection(const toml::table *table, std::string where) : table_(table), where_(std::move(where)) {}

    template <typename T>
    void
    get(const std::string &key, T &out) {
        used_.insert(key);
        if (!table_) return;
        const toml::node *node = table_->get(key);
        if (!node) return;
        const std::string what = where_ + "." + key;
        if constexpr (std::is_same_v<T, bool>) {
            require(node->is_boolean(), what + ": expected a boolean");
            out = node->as_boolean()->get();
        } else if constexpr (std::is_integral_v<T>) {
            require(node->is_integer(), what + ": expected an integer");
            const auto v = node->as_integer()->get();
            require(v >= static_cast<std::int64_t>(std::numeric_limits<T>::min()) &&
                        (v < 0 || static_cast<std::uint64_t>(v) <= static_cast<std::uint64_t>(std::numeric_limits<T>::max())),
                    what + ": value out of range");
            out = static_cast<T>(v);
        } else if constexpr (std::is_floating_point_v<T>) {
            require(node->is_number(), what + ": expected a number");
            out = node->is_integer() ? static_cast<T>(node->as_integer()->get())
                                     : static_cast<T>(node->as_floating_point()->get());
        } else if constexpr (std::is_same_v<T, std::string>) {
            require(node->is_string(), what + ": expected a string");
            out = node->as_string()->get();
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            require(node->is_array(), what + ": expected an array of integers");
            out.clear();
            for (const auto &e : *node->as_array()) {
                require(e.is_integer(), what + ": expected an array of integers");
                out.push_back(static_cast<int>(e.as_integer()->get()));
            }
        } else {
            static_assert(sizeof(T) == 0, "unsupported TOML field type");
        }
    }

    void
    finish() const {
        if (!table_) return;
        for (const auto &[key, node] : *table_) {
            require(used_.count(std::string(key.str())) > 0,
                    where_ + ": unknown key '" + std::string(key.str()) + "'");
        }
    }

  private:
    const toml::table *table_;
    std::string where_;
    std::set<std::string> used_;
};

inline toml::table
parse_toml_file(const std::filesystem::path &path) {
    require(std::filesystem::is_regular_file(path), "config: cannot read " + path.string());
    try {
        return toml::parse_file(path.string());
    } catch (const toml::parse_error &e) {
        std::ostringstream os;
        os << "config " << path.string() << ":" << e.source().begin.line << ": " << e.description();
        throw ValidationError(os.str());
    }
}

inline toml::table
parse_toml_text(const std::string &text, const std::string &where) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error &e) {
        std::ostringstream os;
        os << where << ":" << e.source().begin.line << ": " << e.description();
        throw ValidationError(os.str());
    }
}

inline const toml::table *
toml_table(const toml::table &root, const std::string &name) {
    const toml::node *n = root.get(name);
    if (!n) return nullptr;
    require(n->is_table(), "config: [" + name + "] must be a table");
    return n->as_table();
}

inline void
check_top_level(const toml::table &root, const std::set<std::string> &allowed, const std::string &where) {
    for (const auto &[key, node] : root) {
        require(allowed.count(std::string(key.str())) > 0,
                where + ": unexpected top-level key or table '" + std::string(key.str()) + "'");
    }
}

inline void
read_loss(const toml::table &root, LossWeights &w) {
    TomlSection s(toml_table(root, "loss"), "loss");
    s.get("lambda_perceptual", w.lambda_perceptual);
    s.get("lambda_alpha", w.lambda_alpha);
    s.get("lambda_tight", w.lambda_tight);
    s.get("lambda_beta", w.lambda_beta);
    s.finish();
    w.validate();
}

inline void
read_rig(const toml::table &root, RigConfig &r) {
    TomlSection s(toml_table(root, "rig"), "rig");
    s.get("num_views", r.num_views);
    s.get("radius", r.radius);
    s.get("height", r.height);
    s.get("image_width", r.image_width);
    s.get("image_height", r.image_height);
    s.get("fov_y_degrees", r.fov_y_degrees);
    s.get("near", r.near);
    s.finish();
    r.validate();
}

inline void
read_subject(const toml::table &root, SubjectConfig &c) {
    TomlSection s(toml_table(root, "subject"), "subject");
    s.get("max_joint_angle_degrees", c.max_joint_angle_degrees);
    s.get("max_tilt_degrees", c.max_tilt_degrees);
    s.get("max_heading_degrees", c.max_heading_degrees);
    s.get("beta_std", c.beta_std);
    s.get("max_offset", c.max_offset);
    s.get("opacity", c.opacity);
    s.get("scale_factor", c.scale_factor);
    s.finish();
    c.validate();
}

} // namespace detail

// -- fit -------------------------------------------------------------------------------------

inline FitOptions
fit_options_from_toml(const toml::table &root, FitOptions o = {}, const std::string &where = "fit config") {
    detail::check_top_level(root, {"loss", "fit"}, where);
    detail::read_loss(root, o.weights);
    detail::TomlSection s(detail::toml_table(root, "fit"), "fit");
    s.get("steps", o.steps);
    s.get("lr_attrs", o.lr_attrs);
    s.get("lr_pose", o.lr_pose);
    s.get("threads", o.threads);
    s.get("fit_attributes", o.fit_attributes);
    s.get("fit_shape", o.fit_shape);
    s.finish();
    o.validate();
    return o;
}

inline FitOptions
load_fit_options(const std::filesystem::path &path, const FitOptions &defaults = {}) {
    return fit_options_from_toml(detail::parse_toml_file(path), defaults, path.string());
}

inline toml::table
loss_to_toml(const LossWeights &w) {
    return toml::table{{"lambda_perceptual", w.lambda_perceptual}, {"lambda_alpha", w.lambda_alpha},
                       {"lambda_tight", w.lambda_tight}, {"lambda_beta", w.lambda_beta}};
}

inline toml::table
fit_options_to_toml(const FitOptions &o) {
    return toml::table{{"loss", loss_to_toml(o.weights)},
                       {"fit", toml::table{{"steps", o.steps}, {"lr_attrs", o.lr_attrs}, {"lr_pose", o.lr_pose},
                                           {"threads", o.threads}, {"fit_attributes", o.fit_attributes},
                                           {"fit_shape", o.fit_shape}}}};
}

// -- generate-data ---------------------------------------------------------------------------

struct DataConfig {
    RigConfig rig;
    SubjectConfig subject;
};

inline DataConfig
data_config_from_toml(const toml::table &root, DataConfig c = {}, const std::string &where = "data config") {
    detail::check_top_level(root, {"rig", "subject"}, where);
    detail::read_rig(root, c.rig);
    detail::read_subject(root, c.subject);
    return c;
}

inline DataConfig
load_data_config(const std::filesystem::path &path) {
    return data_config_from_toml(detail::parse_toml_file(path), {}, path.string());
}

// -- train-toy -------------------------------------------------------------------------------

struct TrainToyConfig {
    PredictorConfig predictor;
    LossWeights weights;
    RigConfig rig;
    SubjectConfig subject;
    int steps                      = 5000;
    int log_every                  = 50;
    double stop_at_psnr            = 0.0; // stop once the supervised-view PSNR reaches this (0 = never)
    int threads                    = 1;
    std::uint64_t pose_seed        = 0;
    std::uint64_t appearance_seed  = 1;
    int input_view                 = 0;
    std::vector<int> supervise_views = {0};

    TrainToyConfig() {
        // A frontal, upright subject: the toy network sees one image and has no way to learn
        // arbitrary headings from a single sample anyway.
        subject.max_heading_degrees = 0.0;
        subject.max_tilt_degrees    = 0.0;
    }

    void
    validate() const {
        predictor.validate();
        weights.validate();
        rig.validate();
        subject.validate();
        require(steps >= 0 && log_every >= 1 && threads >= 1, "train: steps, log_every and threads must be valid");
        require(stop_at_psnr >= 0.0, "train: stop_at_psnr must be non-negative");
        require(rig.image_width == predictor.image_size && rig.image_height == predictor.image_size,
                "train: rig resolution must equal predictor.image_size");
        require(input_view >= 0 && input_view < rig.num_views, "train: input_view out of range");
        require(!supervise_views.empty(), "train: supervise_views must not be empty");
        for (int v : supervise_views) require(v >= 0 && v < rig.num_views, "train: supervise view out of range");
    }
};

inline TrainToyConfig
train_toy_config_from_toml(const toml::table &root, TrainToyConfig c = {}, const std::string &where = "train config") {
    detail::check_top_level(root, {"predictor", "loss", "rig", "subject", "train"}, where);
    detail::read_loss(root, c.weights);
    detail::read_subject(root, c.subject);
    {
        detail::TomlSection s(detail::toml_table(root, "predictor"), "predictor");
        auto &p = c.predictor;
        s.get("image_size", p.image_size);
        s.get("patch_size", p.patch_size);
        s.get("embed_dim", p.embed_dim);
        s.get("encoder_layers", p.encoder_layers);
        s.get("decoder_layers", p.decoder_layers);
        s.get("heads", p.heads);
        s.get("mlp_ratio", p.mlp_ratio);
        s.get("groups", p.groups);
        s.get("lr", p.lr);
        s.get("seed", p.seed);
        s.finish();
    }
    // The rig follows the predictor resolution unless given explicitly.
    c.rig.image_width = c.rig.image_height = c.predictor.image_size;
    detail::read_rig(root, c.rig);
    {
        detail::TomlSection s(detail::toml_table(root, "train"), "train");
        s.get("steps", c.steps);
        s.get("log_every", c.log_every);
        s.get("stop_at_psnr", c.stop_at_psnr);
        s.get("threads", c.threads);
        s.get("pose_seed", c.pose_seed);
        s.get("appearance_seed", c.appearance_seed);
        s.get("input_view", c.input_view);
        s.get("supervise_views", c.supervise_views);
        s.finish();
    }
    return c;
}

inline TrainToyConfig
load_train_toy_config(const std::filesystem::path &path) {
    return train_toy_config_from_toml(detail::parse_toml_file(path), {}, path.string());
}

inline toml::table
train_toy_config_to_toml(const TrainToyConfig &c) {
    const auto &p = c.predictor;
    toml::array views;
    for (int v : c.supervise_views) views.push_back(v);
    return toml::table{
        {"predictor", toml::table{{"image_size", p.image_size}, {"patch_size", p.patch_size},
                                  {"embed_dim", p.embed_dim}, {"encoder_layers", p.encoder_layers},
                                  {"decoder_layers", p.decoder_layers}, {"heads", p.heads},
                                  {"mlp_ratio", p.mlp_ratio}, {"groups", p.groups}, {"lr", p.lr},
                                  {"seed", static_cast<std::int64_t>(p.seed)}}},
        {"loss", loss_to_toml(c.weights)},
        {"rig", toml::table{{"num_views", c.rig.num_views}, {"radius", c.rig.radius}, {"height", c.rig.height},
                            {"image_width", c.rig.image_width}, {"image_height", c.rig.image_height},
                            {"fov_y_degrees", c.rig.fov_y_degrees}, {"near", c.rig.near}}},
        {"subject", toml::table{{"max_joint_angle_degrees", c.subject.max_joint_angle_degrees},
                                {"max_tilt_degrees", c.subject.max_tilt_degrees},
                                {"max_heading_degrees", c.subject.max_heading_degrees},
                                {"beta_std", c.subject.beta_std}, {"max_offset", c.subject.max_offset},
                                {"opacity", c.subject.opacity}, {"scale_factor", c.subject.scale_factor}}},
        {"train", toml::table{{"steps", c.steps}, {"log_every", c.log_every}, {"stop_at_psnr", c.stop_at_psnr},
                              {"threads", c.threads}, {"pose_seed", static_cast<std::int64_t>(c.pose_seed)},
                              {"appearance_seed", static_cast<std::int64_t>(c.appearance_seed)},
                              {"input_view", c.input_view}, {"supervise_views", views}}}};
}

} // namespace bodysplat
