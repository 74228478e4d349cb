// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "reference_metrics.hpp"
#include "test_support.hpp"

#include <bodysplat/losses.hpp>

#include <gtest/gtest.h>

using namespace bodysplat;
using bodysplat::oracle::relative_error;

namespace {

Image
random_image(std::mt19937_64 &rng, int w, int h, int c) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(w, h, c);
    for (auto &v : img.data) v = u(rng);
    return img;
}

Image
binary_mask(std::mt19937_64 &rng, int w, int h) {
    std::bernoulli_distribution b(0.5);
    Image m(w, h, 1);
    for (auto &v : m.data) v = b(rng) ? 1.0 : 0.0;
    return m;
}

LossWeights
only_mse() {
    LossWeights w;
    w.lambda_perceptual = 0.0;
    w.lambda_alpha      = 0.0;
    w.lambda_tight      = 0.0;
    return w;
}

} // namespace

TEST(LossWeights, PaperDefaults) {
    const LossWeights w;
    EXPECT_EQ(w.lambda_perceptual, 0.01);
    EXPECT_EQ(w.lambda_alpha, 0.1);
    EXPECT_EQ(w.lambda_tight, 0.1);
    EXPECT_EQ(w.lambda_beta, 0.0);
    LossWeights bad;
    bad.lambda_alpha = -1.0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(ImageLoss, IdenticalRenderIsZero) {
    std::mt19937_64 rng(1);
    ImageBuffer r(24, 20);
    r.rgb          = random_image(rng, 24, 20, 3);
    r.alpha        = binary_mask(rng, 24, 20);
    const auto res = image_loss({r}, {{r.rgb, r.alpha}}, LossWeights{});
    EXPECT_EQ(res.report.mse, 0.0);
    EXPECT_EQ(res.report.alpha_mask, 0.0);
    EXPECT_NEAR(res.report.perceptual, 0.0, 1e-15);
    EXPECT_NEAR(res.report.total, 0.0, 1e-15);
}

TEST(ImageLoss, TwoByTwoMseExample) {
    ImageBuffer r;
    r.rgb   = Image(2, 2, 1, 0.5);
    r.alpha = Image(2, 2, 1, 1.0);
    Image target(2, 2, 1, 0.5);
    target.at(1, 0) = 0.6;
    const auto res  = image_loss({r}, {{target, Image(2, 2, 1, 1.0)}}, only_mse());
    EXPECT_NEAR(res.report.mse, 0.0025, 1e-15);
    EXPECT_NEAR(res.report.total, 0.0025, 1e-15);
}

TEST(ImageLoss, AlphaTermExample) {
    ImageBuffer r(8, 8);
    LossWeights w       = only_mse();
    w.lambda_alpha      = 0.1;
    const auto res      = image_loss({r}, {{Image(8, 8, 3), Image(8, 8, 1, 1.0)}}, w);
    EXPECT_DOUBLE_EQ(res.report.alpha_mask, 1.0);
    EXPECT_DOUBLE_EQ(res.report.total, 0.1);
}

TEST(ImageLoss, AveragesOverViews) {
    ImageBuffer a(4, 4), b(4, 4);
    b.rgb = Image(4, 4, 3, 1.0);
    const auto res = image_loss({a, b}, {{Image(4, 4, 3), Image(4, 4, 1)}, {Image(4, 4, 3), Image(4, 4, 1)}}, only_mse());
    EXPECT_DOUBLE_EQ(res.report.mse, 0.5);
    ASSERT_EQ(res.report.per_view.size(), 2u);
    EXPECT_DOUBLE_EQ(res.report.per_view[1].mse, 1.0);
}

TEST(ImageLoss, RejectsBadInputs) {
    ImageBuffer r(4, 4);
    EXPECT_THROW(image_loss({r}, {{Image(5, 4, 3), Image(4, 4, 1)}}, LossWeights{}), ValidationError);
    Image mask(4, 4, 1, 0.5);
    EXPECT_THROW(image_loss({r}, {{Image(4, 4, 3), mask}}, LossWeights{}), ValidationError);
    EXPECT_THROW(image_loss({}, {}, LossWeights{}), ValidationError);
    EXPECT_THROW(image_loss({r, r}, {{Image(4, 4, 3), Image(4, 4, 1)}}, LossWeights{}), ValidationError);
}

TEST(TotalLoss, Examples) {
    LossReport zero;
    EXPECT_EQ(total_loss(zero, GaussianAttributes::zeros(3), ShapeParams::zeros(10), LossWeights{}).total, 0.0);

    auto attrs       = GaussianAttributes::zeros(2);
    attrs.offsets[0] = Vec3(3, 0, 0);
    attrs.offsets[1] = Vec3(0, 4, 0);
    LossWeights w    = only_mse();
    w.lambda_tight   = 0.1;
    const auto r     = total_loss(zero, attrs, ShapeParams::zeros(2), w);
    EXPECT_DOUBLE_EQ(r.tight, 3.5);
    EXPECT_DOUBLE_EQ(r.total, 0.35);

    LossReport img;
    img.mse        = 0.2;
    img.perceptual = 0.3;
    img.alpha_mask = 0.4;
    LossWeights w2 = LossWeights{};
    const auto base = total_loss(img, attrs, ShapeParams(Eigen::Vector2d(1.0, 2.0)), w2);
    w2.lambda_tight *= 2.0;
    const auto doubled = total_loss(img, attrs, ShapeParams(Eigen::Vector2d(1.0, 2.0)), w2);
    EXPECT_NEAR(doubled.total - base.total, 0.1 * 3.5, 1e-12);
    EXPECT_DOUBLE_EQ(base.beta_reg, 5.0);
}

TEST(TotalLoss, ReportInvariantAndZeroWeights) {
    LossReport img;
    img.mse        = 0.125;
    img.perceptual = 0.7;
    img.alpha_mask = 0.33;
    auto attrs     = GaussianAttributes::zeros(1);
    attrs.offsets[0] = Vec3(0.1, 0.2, 0.3);
    LossWeights w;
    w.lambda_beta = 0.05;
    const ShapeParams beta(Eigen::Vector3d(0.5, -1.0, 0.25));
    const auto r  = total_loss(img, attrs, beta, w);
    EXPECT_NEAR(r.total,
                r.mse + w.lambda_perceptual * r.perceptual + w.lambda_alpha * r.alpha_mask +
                    w.lambda_tight * r.tight + w.lambda_beta * r.beta_reg,
                1e-9);
    // Zeroing one weight equals the sum of the others, bitwise.
    LossWeights z = w;
    z.lambda_perceptual = 0.0;
    const auto rz = total_loss(img, attrs, beta, z);
    const double expected = r.mse + 0.0 * r.perceptual + w.lambda_alpha * r.alpha_mask +
                            w.lambda_tight * r.tight + w.lambda_beta * r.beta_reg;
    EXPECT_EQ(rz.total, expected);
    const VecX g = beta_reg_grad(beta, w);
    EXPECT_NEAR(g[1], 2.0 * 0.05 * -1.0, 1e-15);
}

TEST(LossReport, Serialization) {
    LossReport r;
    r.mse   = 0.5;
    r.total = 0.75;
    const std::string line = r.to_json_line(12);
    EXPECT_NE(line.find("\"step\":12"), std::string::npos);
    EXPECT_NE(line.find("\"total\":0.75"), std::string::npos);
    EXPECT_EQ(LossReport::csv_header(), "step,mse,perceptual,alpha_mask,tight,beta_reg,total");
    EXPECT_EQ(r.to_csv_row(3).substr(0, 6), "3,0.5,");
}

TEST(Perceptual, IdentityAndSymmetry) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const Image a = random_image(rng, 30, 26, 3);
        const Image b = random_image(rng, 30, 26, 3);
        EXPECT_EQ(perceptual_proxy(a, a), 0.0);
        EXPECT_NEAR(perceptual_proxy(a, b), perceptual_proxy(b, a), 1e-15);
        EXPECT_GT(perceptual_proxy(a, b), 0.0);
    }
    EXPECT_THROW(perceptual_proxy(Image(3, 3, 3), Image(3, 4, 3)), ValidationError);
    EXPECT_EQ(default_perceptual_metric().name(), "proxy-perceptual");
}

TEST(Perceptual, ConstantVersusCheckerboardMatchesReference) {
    Image flat(32, 32, 3, 0.5), checker(32, 32, 3);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            for (int c = 0; c < 3; ++c) checker.at(x, y, c) = ((x + y) % 2) ? 0.8 : 0.2;
        }
    }
    EXPECT_NEAR(perceptual_proxy(flat, checker), oracle::perceptual_reference(flat, checker), 1e-6);
}

TEST(Perceptual, RandomImagesMatchReference) {
    std::mt19937_64 rng(3);
    for (auto [w, h] : {std::pair{17, 23}, std::pair{40, 12}, std::pair{5, 5}}) {
        const Image a = random_image(rng, w, h, 3);
        const Image b = random_image(rng, w, h, 3);
        EXPECT_NEAR(perceptual_proxy(a, b), oracle::perceptual_reference(a, b), 1e-6) << w << "x" << h;
    }
}

TEST(Perceptual, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(4);
    Image a       = random_image(rng, 14, 11, 3);
    const Image b = random_image(rng, 14, 11, 3);
    const PerceptualProxy proxy;
    const Image g = proxy.grad_first(a, b);
    auto f        = [&]() { return proxy.value(a, b); };
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double fd = oracle::central_difference(f, a.data[i], 1e-6);
        EXPECT_LT(relative_error(g.data[i], fd, 1e-7), 1e-3) << i;
    }
}

TEST(ImageLoss, RenderGradientMatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::mt19937_64 rng(10 + seed);
        std::vector<ImageBuffer> renders(2);
        std::vector<ViewTarget> targets;
        for (auto &r : renders) {
            r.rgb   = random_image(rng, 12, 10, 3);
            r.alpha = random_image(rng, 12, 10, 1);
            targets.push_back({random_image(rng, 12, 10, 3), binary_mask(rng, 12, 10)});
        }
        const LossWeights w;
        const auto res = image_loss(renders, targets, w);
        auto f         = [&]() { return image_loss(renders, targets, w, default_perceptual_metric(), false).report.total; };
        for (int v = 0; v < 2; ++v) {
            for (std::size_t i = 0; i < renders[v].rgb.size(); ++i) {
                const double fd = oracle::central_difference(f, renders[v].rgb.data[i], 1e-6);
                EXPECT_LT(relative_error(res.grad_rgb[v].data[i], fd, 1e-7), 1e-3);
            }
            for (std::size_t i = 0; i < renders[v].alpha.size(); ++i) {
                const double fd = oracle::central_difference(f, renders[v].alpha.data[i], 1e-6);
                EXPECT_LT(relative_error(res.grad_alpha[v].data[i], fd, 1e-7), 1e-3);
            }
        }
    }
}

TEST(ImageLoss, TermsAreNonNegative) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        ImageBuffer r;
        r.rgb   = random_image(rng, 9, 9, 3);
        r.alpha = random_image(rng, 9, 9, 1);
        const auto rep = image_loss({r}, {{random_image(rng, 9, 9, 3), binary_mask(rng, 9, 9)}}, LossWeights{}).report;
        EXPECT_GE(rep.mse, 0.0);
        EXPECT_GE(rep.perceptual, 0.0);
        EXPECT_GE(rep.alpha_mask, 0.0);
    }
}
