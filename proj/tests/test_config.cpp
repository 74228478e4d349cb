// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include <bodysplat/config.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace bodysplat;

namespace {

std::string
to_text(const toml::table &t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace

TEST(FitConfig, RoundTripsThroughText) {
    FitOptions o;
    o.steps                   = 123;
    o.lr_attrs                = 3e-3;
    o.lr_pose                 = 7e-4;
    o.threads                 = 3;
    o.fit_shape               = false;
    o.weights.lambda_tight    = 0.25;
    o.weights.lambda_beta     = 1e-3;
    const auto back           = fit_options_from_toml(detail::parse_toml_text(to_text(fit_options_to_toml(o)), "t"));
    EXPECT_EQ(back.steps, 123);
    EXPECT_EQ(back.lr_attrs, 3e-3);
    EXPECT_EQ(back.lr_pose, 7e-4);
    EXPECT_EQ(back.threads, 3);
    EXPECT_TRUE(back.fit_attributes);
    EXPECT_FALSE(back.fit_shape);
    EXPECT_EQ(back.weights.lambda_tight, 0.25);
    EXPECT_EQ(back.weights.lambda_beta, 1e-3);
    EXPECT_EQ(back.weights.lambda_alpha, LossWeights{}.lambda_alpha);
}

TEST(FitConfig, MissingKeysKeepDefaults) {
    const auto o = fit_options_from_toml(detail::parse_toml_text("[loss]\nlambda_tight = 0.0\n", "t"));
    EXPECT_EQ(o.weights.lambda_tight, 0.0);
    EXPECT_EQ(o.steps, FitOptions{}.steps);
    EXPECT_EQ(o.weights.lambda_perceptual, LossWeights{}.lambda_perceptual);
}

TEST(FitConfig, IntegersAreAcceptedForFloats) {
    const auto o = fit_options_from_toml(detail::parse_toml_text("[loss]\nlambda_alpha = 1\n", "t"));
    EXPECT_EQ(o.weights.lambda_alpha, 1.0);
}

TEST(FitConfig, RejectsBadInput) {
    auto parse = [](const std::string &text) { return fit_options_from_toml(detail::parse_toml_text(text, "t")); };
    EXPECT_THROW(parse("[loss]\nlambda_tigth = 0.1\n"), ValidationError);  // typo
    EXPECT_THROW(parse("[optimizer]\nlr = 1\n"), ValidationError);         // unknown table
    EXPECT_THROW(parse("[fit]\nsteps = \"ten\"\n"), ValidationError);      // wrong type
    EXPECT_THROW(parse("[fit]\nsteps = 1.5\n"), ValidationError);
    EXPECT_THROW(parse("[loss]\nlambda_alpha = -1.0\n"), ValidationError);
    EXPECT_THROW(parse("[fit]\nlr_pose = 0.0\n"), ValidationError);
    EXPECT_THROW(parse("loss = 3\n"), ValidationError);
    EXPECT_THROW(parse("[fit\n"), ValidationError); // syntax
    EXPECT_THROW(load_fit_options("/nonexistent/weights.toml"), ValidationError);
}

TEST(DataConfig, ReadsRigAndSubject) {
    const auto c = data_config_from_toml(detail::parse_toml_text(
        "[rig]\nnum_views = 3\nimage_width = 40\nimage_height = 30\n[subject]\nbeta_std = 0.0\n", "t"));
    EXPECT_EQ(c.rig.num_views, 3);
    EXPECT_EQ(c.rig.image_width, 40);
    EXPECT_EQ(c.rig.image_height, 30);
    EXPECT_EQ(c.subject.beta_std, 0.0);
    EXPECT_EQ(c.rig.radius, RigConfig{}.radius);
}

TEST(DataConfig, RejectsOutOfRangeValues) {
    auto parse = [](const std::string &text) { return data_config_from_toml(detail::parse_toml_text(text, "t")); };
    EXPECT_THROW(parse("[rig]\nnum_views = 0\n"), ValidationError);
    EXPECT_THROW(parse("[subject]\nopacity = 1.0\n"), ValidationError);
    EXPECT_THROW(parse("[subject]\nmax_joint_angle_degrees = 400.0\n"), ValidationError);
    EXPECT_THROW(parse("[subject]\ncolour = 1\n"), ValidationError);
    EXPECT_THROW(parse("[fit]\nsteps = 1\n"), ValidationError);
}

TEST(TrainToyConfig, DefaultsAreValidAndRoundTrip) {
    TrainToyConfig c;
    EXPECT_NO_THROW(c.validate());
    c.predictor.embed_dim = 48;
    c.predictor.heads     = 3;
    c.predictor.seed      = 11;
    c.steps               = 77;
    c.stop_at_psnr        = 31.5;
    c.rig.num_views       = 4;
    c.supervise_views     = {0, 2, 3};
    c.appearance_seed     = 9;
    const auto back = train_toy_config_from_toml(detail::parse_toml_text(to_text(train_toy_config_to_toml(c)), "t"));
    EXPECT_EQ(back.predictor.embed_dim, 48);
    EXPECT_EQ(back.predictor.heads, 3);
    EXPECT_EQ(back.predictor.seed, 11u);
    EXPECT_EQ(back.steps, 77);
    EXPECT_EQ(back.stop_at_psnr, 31.5);
    EXPECT_EQ(back.rig.num_views, 4);
    EXPECT_EQ(back.supervise_views, (std::vector<int>{0, 2, 3}));
    EXPECT_EQ(back.appearance_seed, 9u);
    EXPECT_EQ(back.subject.max_heading_degrees, 0.0);
    EXPECT_NO_THROW(back.validate());
}

TEST(TrainToyConfig, RigFollowsPredictorResolution) {
    const auto c = train_toy_config_from_toml(
        detail::parse_toml_text("[predictor]\nimage_size = 32\npatch_size = 8\n", "t"));
    EXPECT_EQ(c.rig.image_width, 32);
    EXPECT_EQ(c.rig.image_height, 32);
    EXPECT_NO_THROW(c.validate());

    const auto bad = train_toy_config_from_toml(
        detail::parse_toml_text("[predictor]\nimage_size = 32\n[rig]\nimage_width = 64\n", "t"));
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(TrainToyConfig, RejectsBadViewsAndKeys) {
    auto parse = [](const std::string &text) {
        return train_toy_config_from_toml(detail::parse_toml_text(text, "t"));
    };
    EXPECT_THROW(parse("[train]\nsupervise_views = [0, 99]\n").validate(), ValidationError);
    EXPECT_THROW(parse("[train]\nsupervise_views = []\n").validate(), ValidationError);
    EXPECT_THROW(parse("[train]\nsupervise_views = [0.5]\n"), ValidationError);
    EXPECT_THROW(parse("[predictor]\ndepth = 3\n"), ValidationError);
    EXPECT_THROW(parse("[train]\nlog_every = 0\n").validate(), ValidationError);
}
