// adam.hpp - Adam optimizer with bias correction
#pragma once

#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Owns first/second-moment buffers for a fixed parameter list. Parameters
/// must be leaf tensors; step() consumes their accumulated grads and writes
/// updated values in place, then clears the grads.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg);

    void step();
    std::int64_t steps_taken() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& params() const { return params_; }

    // Checkpoint access: moments are stored flat, parallel to params().
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }
    void restore(std::int64_t t, std::vector<std::vector<double>> m,
                 std::vector<std::vector<double>> v);

private:
    std::vector<Tensor> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::int64_t t_ = 0;
};

}  // namespace cogs
