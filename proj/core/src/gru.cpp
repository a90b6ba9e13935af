// gru.cpp
#include "cogs/gru.hpp"

#include <cmath>

#include "cogs/ops.hpp"

namespace cogs {

GruLayerWeights GruLayerWeights::init(std::int64_t input, std::int64_t hidden, Rng& rng) {
    if (input < 1 || hidden < 1) throw value_error("gru: input and hidden dims must be >= 1");
    const double si = 1.0 / std::sqrt(static_cast<double>(input));
    const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
    GruLayerWeights w;
    w.w_ih = Tensor::randn({input, 3 * hidden}, rng, si, true);
    w.w_hh = Tensor::randn({hidden, 3 * hidden}, rng, sh, true);
    w.b_ih = Tensor::zeros({3 * hidden}, true);
    w.b_hh = Tensor::zeros({3 * hidden}, true);
    return w;
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const GruLayerWeights& w) {
    const auto H = w.hidden();
    if (x.rank() != 2 || x.dim(0) != 1 || x.dim(1) != w.w_ih.dim(0)) {
        throw shape_error("gru_cell: expected x [1, " + std::to_string(w.w_ih.dim(0)) + "], got " +
                          shape_str(x.shape()));
    }
    if (h.rank() != 2 || h.dim(0) != 1 || h.dim(1) != H) {
        throw shape_error("gru_cell: expected h [1, " + std::to_string(H) + "], got " +
                          shape_str(h.shape()));
    }
    auto gx = add_rowvec(matmul(x, w.w_ih), w.b_ih);  // [1, 3H]
    auto gh = add_rowvec(matmul(h, w.w_hh), w.b_hh);
    auto r = sigmoid(add(slice(gx, 1, 0, H), slice(gh, 1, 0, H)));
    auto z = sigmoid(add(slice(gx, 1, H, H), slice(gh, 1, H, H)));
    auto n = tanh_op(add(slice(gx, 1, 2 * H, H), mul(r, slice(gh, 1, 2 * H, H))));
    auto one_minus_z = sub(Tensor::full({1, H}, 1.0, false), z);
    return add(mul(one_minus_z, n), mul(z, h));
}

Tensor gru_layer(const Tensor& xs, const GruLayerWeights& w, bool reverse) {
    if (xs.rank() != 2) {
        throw shape_error("gru_layer: expected [T, I] sequence, got " + shape_str(xs.shape()));
    }
    const auto T = xs.dim(0);
    const auto H = w.hidden();
    auto h = Tensor::zeros({1, H}, false);
    std::vector<Tensor> steps(static_cast<std::size_t>(T));
    for (std::int64_t i = 0; i < T; ++i) {
        const auto t = reverse ? T - 1 - i : i;
        h = gru_cell(slice(xs, 0, t, 1), h, w);
        steps[static_cast<std::size_t>(t)] = h;
    }
    return concat(steps, 0);  // [T, H], original time order
}

GruStack GruStack::init(std::int64_t input, std::int64_t hidden, std::int64_t layers,
                        bool bidirectional, Rng& rng) {
    if (layers < 1) throw value_error("gru: need at least one layer");
    GruStack s;
    s.hidden_dim = hidden;
    std::int64_t in = input;
    for (std::int64_t l = 0; l < layers; ++l) {
        s.fwd.push_back(GruLayerWeights::init(in, hidden, rng));
        if (bidirectional) s.bwd.push_back(GruLayerWeights::init(in, hidden, rng));
        in = bidirectional ? 2 * hidden : hidden;
    }
    return s;
}

Tensor GruStack::run(const Tensor& xs) const {
    if (fwd.empty()) throw value_error("gru: stack has no layers");
    auto x = xs;
    for (std::size_t l = 0; l < fwd.size(); ++l) {
        auto out = gru_layer(x, fwd[l], /*reverse=*/false);
        if (bidirectional()) out = concat({out, gru_layer(x, bwd[l], /*reverse=*/true)}, 1);
        x = out;
    }
    return x;
}

std::vector<Tensor> GruStack::params() {
    std::vector<Tensor> p;
    auto push = [&](GruLayerWeights& w) {
        p.push_back(w.w_ih);
        p.push_back(w.w_hh);
        p.push_back(w.b_ih);
        p.push_back(w.b_hh);
    };
    for (auto& w : fwd) push(w);
    for (auto& w : bwd) push(w);
    return p;
}

}  // namespace cogs
