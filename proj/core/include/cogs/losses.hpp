// losses.hpp - the four training objectives and their weighted combination.
#pragma once

#include <utility>

#include "cogs/tensor.hpp"

namespace cogs {

/// Pose regression uses huber_mean from ops.hpp directly (delta = 1 default).

/// Rewards divergence between two generations of the same content under
/// different style latents: -min(huber(g_a, g_b), margin). The latents are
/// only inspected to reject the undefined identical-style case.
Tensor style_diversity_loss(const Tensor& g_a, const Tensor& g_b, const Tensor& z_a,
                            const Tensor& z_b, double margin = 1.0, double delta = 1.0);

/// KL divergence of per-speaker style Gaussians from the standard normal:
/// mean over speakers of 0.5 * sum_dims(mu^2 + exp(logvar) - 1 - logvar).
Tensor kld_loss(const Tensor& mu, const Tensor& logvar);

struct GanLossPair {
    Tensor d_loss;  // -[ln d_real + ln(1 - d_fake)]
    Tensor g_loss;  // -ln d_fake (non-saturating)
};

/// Scores must lie in [0, 1]; they are clamped to [1e-7, 1 - 1e-7] before the
/// logarithms so saturated discriminators cannot produce infinities.
GanLossPair gan_losses(const Tensor& d_real, const Tensor& d_fake);

struct LossWeights {
    double huber = 1.0;   // alpha
    double style = 0.1;   // beta
    double kld = 0.01;    // gamma
    double gan = 0.05;    // lambda
};

/// alpha * huber + beta * style + gamma * kld + lambda * gan_g.
Tensor total_loss(const Tensor& huber, const Tensor& style, const Tensor& kld,
                  const Tensor& gan_g, const LossWeights& w);

}  // namespace cogs
