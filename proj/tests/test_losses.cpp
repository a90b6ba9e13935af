// Training objectives: style diversity, KL divergence, GAN pair, weighted total.
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cogs/common.hpp"
#include "cogs/grad_check.hpp"
#include "cogs/losses.hpp"
#include "cogs/ops.hpp"
#include "cogs/rng.hpp"
#include "cogs/tensor.hpp"

using namespace cogs;

namespace {

Tensor latent(std::vector<double> v) {
    return Tensor::from_vector({static_cast<std::int64_t>(v.size())}, v);
}

}  // namespace

// ---------------------------------------------------------------- style loss

TEST(StyleLoss, IdenticalGenerationsScoreZero) {
    auto g = Tensor::from_vector({2, 3}, {1, 2, 3, 4, 5, 6});
    auto loss = style_diversity_loss(g, g, latent({0.0, 1.0}), latent({1.0, 0.0}));
    EXPECT_DOUBLE_EQ(loss.values()[0], 0.0);
}

TEST(StyleLoss, LargeDifferenceIsClippedAtMargin) {
    auto g_a = Tensor::zeros({2, 3});
    auto g_b = Tensor::full({2, 3}, 100.0);
    auto loss = style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), 1.0);
    EXPECT_DOUBLE_EQ(loss.values()[0], -1.0);
}

TEST(StyleLoss, QuadraticRegionMatchesHandValue) {
    // residual 0.5 everywhere, delta 1: elementwise 0.5*0.25 = 0.125, below margin.
    auto g_a = Tensor::zeros({4});
    auto g_b = Tensor::full({4}, 0.5);
    auto loss = style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), 1.0, 1.0);
    EXPECT_NEAR(loss.values()[0], -0.125, 1e-12);
}

TEST(StyleLoss, DeltaRescalesTheQuadraticRegion) {
    // |r| = 1 >= delta = 0.5: elementwise |r| - delta/2 = 0.75.
    auto g_a = Tensor::zeros({3});
    auto g_b = Tensor::full({3}, 1.0);
    auto loss = style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), 2.0, 0.5);
    EXPECT_NEAR(loss.values()[0], -0.75, 1e-12);
}

TEST(StyleLoss, IdenticalLatentsAreRejected) {
    auto g_a = Tensor::zeros({2});
    auto g_b = Tensor::full({2}, 1.0);
    auto z = latent({0.3, -0.7});
    auto z_same = latent({0.3, -0.7});
    EXPECT_THROW(style_diversity_loss(g_a, g_b, z, z_same), value_error);
}

TEST(StyleLoss, UndefinedLatentIsRejected) {
    auto g = Tensor::zeros({2});
    EXPECT_THROW(style_diversity_loss(g, g, Tensor(), latent({1.0})), value_error);
    EXPECT_THROW(style_diversity_loss(g, g, latent({1.0}), Tensor()), value_error);
}

TEST(StyleLoss, NonPositiveMarginIsRejected) {
    auto g_a = Tensor::zeros({2});
    auto g_b = Tensor::full({2}, 1.0);
    EXPECT_THROW(style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), 0.0), value_error);
    EXPECT_THROW(style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), -1.0), value_error);
}

TEST(StyleLoss, GradientPushesGenerationsApart) {
    // Below the margin the loss is -huber(g_a, g_b); moving g_b away from g_a
    // must decrease the loss, so d(loss)/d(g_b) has sign -(g_b - g_a).
    auto g_a = Tensor::zeros({3});
    auto g_b = Tensor::from_vector({3}, {0.2, -0.3, 0.1}, true);
    auto loss = style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}));
    loss.backward();
    const auto& grad = g_b.grad();
    EXPECT_LT(grad[0], 0.0);
    EXPECT_GT(grad[1], 0.0);
    EXPECT_LT(grad[2], 0.0);
}

TEST(StyleLoss, MarginClipBlocksGradient) {
    auto g_a = Tensor::zeros({3});
    auto g_b = Tensor::full({3}, 50.0, true);
    auto loss = style_diversity_loss(g_a, g_b, latent({0.0}), latent({1.0}), 1.0);
    loss.backward();
    for (double g : g_b.grad()) EXPECT_DOUBLE_EQ(g, 0.0);
}

TEST(StyleLoss, GradientMatchesFiniteDifferences) {
    Rng rng(91);
    auto g_a = Tensor::randn({2, 3}, rng, 0.3);
    auto z_a = latent({0.0});
    auto z_b = latent({1.0});
    auto report = grad_check(
        [&](const Tensor& g_b) { return style_diversity_loss(g_a, g_b, z_a, z_b); },
        Tensor::randn({2, 3}, rng, 0.3, true));
    EXPECT_LT(report.max_rel_error, 1e-6);
    EXPECT_GT(report.checked, 0);
}

// ----------------------------------------------------------------------- KLD

TEST(KldLoss, StandardNormalScoresZero) {
    auto loss = kld_loss(Tensor::zeros({1, 4}), Tensor::zeros({1, 4}));
    EXPECT_DOUBLE_EQ(loss.values()[0], 0.0);
}

TEST(KldLoss, UnitMeanSingleDim) {
    // 0.5 * (1 + 1 - 1 - 0) = 0.5
    auto loss = kld_loss(Tensor::full({1, 1}, 1.0), Tensor::zeros({1, 1}));
    EXPECT_DOUBLE_EQ(loss.values()[0], 0.5);
}

TEST(KldLoss, DoubledVarianceSingleDim) {
    // 0.5 * (0 + 2 - 1 - ln 2)
    auto loss = kld_loss(Tensor::zeros({1, 1}), Tensor::full({1, 1}, std::log(2.0)));
    EXPECT_NEAR(loss.values()[0], 0.5 * (1.0 - std::log(2.0)), 1e-12);
}

TEST(KldLoss, AveragesOverSpeakers) {
    // Two speakers, two dims, zero logvar: 0.5/2 * sum(mu^2) = 0.25 * 2 = 0.5.
    auto mu = Tensor::from_vector({2, 2}, {1, 0, 0, 1});
    auto loss = kld_loss(mu, Tensor::zeros({2, 2}));
    EXPECT_DOUBLE_EQ(loss.values()[0], 0.5);
}

TEST(KldLoss, NonNegativeOverRandomDraws) {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        auto mu = Tensor::randn({3, 4}, rng, 2.0);
        auto lv = Tensor::randn({3, 4}, rng, 2.0);
        EXPECT_GE(kld_loss(mu, lv).values()[0], 0.0);
    }
}

TEST(KldLoss, ZeroOnlyAtTheStandardNormal) {
    auto base = kld_loss(Tensor::zeros({1, 2}), Tensor::zeros({1, 2}));
    EXPECT_DOUBLE_EQ(base.values()[0], 0.0);
    auto bumped_mu = kld_loss(Tensor::full({1, 2}, 1e-3), Tensor::zeros({1, 2}));
    EXPECT_GT(bumped_mu.values()[0], 0.0);
    auto bumped_lv = kld_loss(Tensor::zeros({1, 2}), Tensor::full({1, 2}, 1e-3));
    EXPECT_GT(bumped_lv.values()[0], 0.0);
}

TEST(KldLoss, ShapeMismatchIsRejected) {
    EXPECT_THROW(kld_loss(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), shape_error);
}

TEST(KldLoss, GradientMatchesFiniteDifferences) {
    Rng rng(17);
    auto lv = Tensor::randn({2, 3}, rng, 0.5);
    auto report_mu = grad_check([&](const Tensor& mu) { return kld_loss(mu, lv); },
                                Tensor::randn({2, 3}, rng, 0.5, true));
    EXPECT_LT(report_mu.max_rel_error, 1e-6);

    auto mu = Tensor::randn({2, 3}, rng, 0.5);
    auto report_lv = grad_check([&](const Tensor& l) { return kld_loss(mu, l); },
                                Tensor::randn({2, 3}, rng, 0.5, true));
    EXPECT_LT(report_lv.max_rel_error, 1e-6);
}

// ----------------------------------------------------------------------- GAN

TEST(GanLoss, CoinFlipDiscriminator) {
    auto half = Tensor::scalar(0.5);
    auto pair = gan_losses(half, half);
    EXPECT_NEAR(pair.d_loss.values()[0], 2.0 * std::log(2.0), 1e-12);
    EXPECT_NEAR(pair.g_loss.values()[0], std::log(2.0), 1e-12);
}

TEST(GanLoss, PerfectDiscriminatorStaysFinite) {
    auto pair = gan_losses(Tensor::scalar(1.0), Tensor::scalar(0.0));
    EXPECT_NEAR(pair.d_loss.values()[0], 0.0, 1e-6);
    EXPECT_NEAR(pair.g_loss.values()[0], -std::log(1e-7), 1e-9);
    EXPECT_TRUE(std::isfinite(pair.d_loss.values()[0]));
    EXPECT_TRUE(std::isfinite(pair.g_loss.values()[0]));
}

TEST(GanLoss, FooledDiscriminatorStaysFinite) {
    auto pair = gan_losses(Tensor::scalar(0.0), Tensor::scalar(1.0));
    EXPECT_TRUE(std::isfinite(pair.d_loss.values()[0]));
    EXPECT_NEAR(pair.g_loss.values()[0], -std::log(1.0 - 1e-7), 1e-9);
}

TEST(GanLoss, DiscriminatorLossFallsAsRealScoreRises) {
    auto fake = Tensor::scalar(0.2);
    double prev = gan_losses(Tensor::scalar(0.3), fake).d_loss.values()[0];
    for (double r : {0.5, 0.7, 0.9}) {
        double cur = gan_losses(Tensor::scalar(r), fake).d_loss.values()[0];
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(GanLoss, GeneratorLossFallsAsFakeScoreRises) {
    double prev = gan_losses(Tensor::scalar(0.5), Tensor::scalar(0.1)).g_loss.values()[0];
    for (double f : {0.4, 0.7, 0.95}) {
        double cur = gan_losses(Tensor::scalar(0.5), Tensor::scalar(f)).g_loss.values()[0];
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(GanLoss, ScoresOutsideUnitIntervalAreRejected) {
    auto ok = Tensor::scalar(0.5);
    EXPECT_THROW(gan_losses(Tensor::scalar(-0.1), ok), value_error);
    EXPECT_THROW(gan_losses(Tensor::scalar(1.1), ok), value_error);
    EXPECT_THROW(gan_losses(ok, Tensor::scalar(-0.1)), value_error);
    EXPECT_THROW(gan_losses(ok, Tensor::scalar(1.1)), value_error);
}

TEST(GanLoss, NonScalarScoresAreRejected) {
    EXPECT_THROW(gan_losses(Tensor::full({2}, 0.5), Tensor::scalar(0.5)), shape_error);
    EXPECT_THROW(gan_losses(Tensor::scalar(0.5), Tensor::full({2}, 0.5)), shape_error);
}

TEST(GanLoss, GradientsMatchFiniteDifferences) {
    auto fake = Tensor::scalar(0.3);
    auto report_d = grad_check(
        [&](const Tensor& real) { return gan_losses(real, fake).d_loss; },
        Tensor::from_vector({}, {0.6}, true));
    EXPECT_LT(report_d.max_rel_error, 1e-6);

    auto real = Tensor::scalar(0.6);
    auto report_g = grad_check(
        [&](const Tensor& f) { return gan_losses(real, f).g_loss; },
        Tensor::from_vector({}, {0.3}, true));
    EXPECT_LT(report_g.max_rel_error, 1e-6);
}

// --------------------------------------------------------------------- total

TEST(TotalLoss, DefaultWeightsPinnedExample) {
    // 1.0*0.5 + 0.1*0.2 + 0.01*0.16 + 0.05*0.04 = 0.5236
    auto total = total_loss(Tensor::scalar(0.5), Tensor::scalar(0.2), Tensor::scalar(0.16),
                            Tensor::scalar(0.04), LossWeights{});
    EXPECT_NEAR(total.values()[0], 0.5236, 1e-12);
}

TEST(TotalLoss, UnitWeightsSumParts) {
    LossWeights w{1.0, 1.0, 1.0, 1.0};
    auto total = total_loss(Tensor::scalar(1.0), Tensor::scalar(1.0), Tensor::scalar(1.0),
                            Tensor::scalar(1.0), w);
    EXPECT_DOUBLE_EQ(total.values()[0], 4.0);
}

TEST(TotalLoss, ZeroWeightAblatesTerm) {
    LossWeights w{1.0, 0.0, 0.0, 0.0};
    auto total = total_loss(Tensor::scalar(0.7), Tensor::scalar(9.0), Tensor::scalar(9.0),
                            Tensor::scalar(9.0), w);
    EXPECT_DOUBLE_EQ(total.values()[0], 0.7);
}

TEST(TotalLoss, NegativeWeightsAreRejected) {
    auto s = Tensor::scalar(1.0);
    EXPECT_THROW(total_loss(s, s, s, s, LossWeights{-1.0, 0.1, 0.01, 0.05}), value_error);
    EXPECT_THROW(total_loss(s, s, s, s, LossWeights{1.0, -0.1, 0.01, 0.05}), value_error);
    EXPECT_THROW(total_loss(s, s, s, s, LossWeights{1.0, 0.1, -0.01, 0.05}), value_error);
    EXPECT_THROW(total_loss(s, s, s, s, LossWeights{1.0, 0.1, 0.01, -0.05}), value_error);
}

TEST(TotalLoss, GradientIsWeightedSumOfPartGradients) {
    // Parts x^2, x, 2x, 3x of one leaf: d(total)/dx = a*2x + b + 2c + 3d.
    auto x = Tensor::from_vector({}, {0.8}, true);
    LossWeights w{1.0, 0.1, 0.01, 0.05};
    auto total = total_loss(mul(x, x), x, scale(x, 2.0), scale(x, 3.0), w);
    total.backward();
    double expected = w.huber * 2.0 * 0.8 + w.style + w.kld * 2.0 + w.gan * 3.0;
    EXPECT_NEAR(x.grad()[0], expected, 1e-12);
}

TEST(TotalLoss, EndToEndCompositionBackpropagates) {
    // Wire every objective to real tensors and check the combined gradient.
    Rng rng(23);
    auto target = Tensor::randn({2, 3}, rng);
    auto alt = Tensor::randn({2, 3}, rng);
    auto mu_fixed = Tensor::randn({1, 2}, rng, 0.3);
    auto lv_fixed = Tensor::randn({1, 2}, rng, 0.3);
    auto z_a = latent({0.0});
    auto z_b = latent({1.0});

    auto loss_of = [&]() {
        return [&](const Tensor& pred) {
            auto h = huber_mean(pred, target, 1.0);
            auto s = style_diversity_loss(pred, alt, z_a, z_b);
            auto k = kld_loss(mu_fixed, lv_fixed);
            auto g = gan_losses(Tensor::scalar(0.6), sigmoid(mean_all(pred))).g_loss;
            return total_loss(h, s, k, g, LossWeights{});
        };
    }();
    auto report = grad_check(loss_of, Tensor::randn({2, 3}, rng, 0.5, true));
    EXPECT_LT(report.max_rel_error, 1e-5);
    EXPECT_GT(report.checked, 0);
}
