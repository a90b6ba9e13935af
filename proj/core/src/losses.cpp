// losses.cpp
#include "cogs/losses.hpp"

#include <cmath>

#include "cogs/ops.hpp"

namespace cogs {

Tensor style_diversity_loss(const Tensor& g_a, const Tensor& g_b, const Tensor& z_a,
                            const Tensor& z_b, double margin, double delta) {
    if (!z_a.defined() || !z_b.defined()) {
        throw value_error("style loss: both style latents are required");
    }
    if (z_a.shape() == z_b.shape() && z_a.values() == z_b.values()) {
        throw value_error("style loss: undefined for identical style latents");
    }
    if (margin <= 0.0) throw value_error("style loss: margin must be positive");
    return neg(min_scalar(huber_mean(g_a, g_b, delta), margin));
}

Tensor kld_loss(const Tensor& mu, const Tensor& logvar) {
    if (mu.shape() != logvar.shape()) {
        throw shape_error("kld: mu is " + shape_str(mu.shape()) + ", logvar is " +
                          shape_str(logvar.shape()));
    }
    const auto speakers = mu.rank() >= 1 ? mu.dim(0) : 1;
    auto per_entry = sub(add_scalar(add(mul(mu, mu), exp_op(logvar)), -1.0), logvar);
    return scale(sum_all(per_entry), 0.5 / static_cast<double>(speakers));
}

GanLossPair gan_losses(const Tensor& d_real, const Tensor& d_fake) {
    if (d_real.numel() != 1 || d_fake.numel() != 1) {
        throw shape_error("gan losses: scores must be scalars");
    }
    for (double v : {d_real.item(), d_fake.item()}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw value_error("gan losses: score " + std::to_string(v) + " outside [0, 1]");
        }
    }
    const double lo = 1e-7, hi = 1.0 - 1e-7;
    auto real = clamp(d_real, lo, hi);
    auto fake = clamp(d_fake, lo, hi);
    GanLossPair out;
    out.d_loss = neg(add(log_op(real), log_op(clamp(add_scalar(neg(fake), 1.0), lo, hi))));
    out.g_loss = neg(log_op(fake));
    return out;
}

Tensor total_loss(const Tensor& huber, const Tensor& style, const Tensor& kld,
                  const Tensor& gan_g, const LossWeights& w) {
    if (w.huber < 0.0 || w.style < 0.0 || w.kld < 0.0 || w.gan < 0.0) {
        throw value_error("total loss: weights must be non-negative");
    }
    return add(add(scale(huber, w.huber), scale(style, w.style)),
               add(scale(kld, w.kld), scale(gan_g, w.gan)));
}

}  // namespace cogs
