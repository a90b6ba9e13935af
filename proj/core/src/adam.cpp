// adam.cpp
#include "cogs/adam.hpp"

#include <cmath>

namespace cogs {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (!(cfg_.lr > 0.0) || !(cfg_.eps > 0.0)) throw value_error("adam: lr and eps must be positive");
    if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0) {
        throw value_error("adam: betas must lie in [0, 1)");
    }
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& p : params_) {
        if (!p.is_leaf()) throw graph_error("adam: parameters must be leaf tensors");
        m_.emplace_back(p.values().size(), 0.0);
        v_.emplace_back(p.values().size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params_.size(); ++p) {
        if (!params_[p].has_grad()) continue;  // parameter untouched by this graph
        const auto& g = params_[p].grad();
        auto& val = params_[p].values_mut();
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < val.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            val[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        params_[p].zero_grad();
    }
}

void Adam::restore(std::int64_t t, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
    if (m.size() != params_.size() || v.size() != params_.size()) {
        throw value_error("adam: restore moment count does not match parameter count");
    }
    for (std::size_t p = 0; p < params_.size(); ++p) {
        if (m[p].size() != params_[p].values().size() || v[p].size() != params_[p].values().size()) {
            throw value_error("adam: restore moment shape mismatch at parameter " + std::to_string(p));
        }
    }
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace cogs
