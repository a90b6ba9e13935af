// gru.hpp - gated recurrent unit cell, layer, and bidirectional stack.
#pragma once

#include <vector>

#include "cogs/rng.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

/// One GRU layer. Input-to-hidden and hidden-to-hidden weights hold the
/// reset / update / candidate blocks side by side along the column axis:
/// w_ih is [I, 3H] = [W_r | W_z | W_n], w_hh is [H, 3H], biases are [3H].
struct GruLayerWeights {
    Tensor w_ih;
    Tensor w_hh;
    Tensor b_ih;
    Tensor b_hh;

    static GruLayerWeights init(std::int64_t input, std::int64_t hidden, Rng& rng);
    std::int64_t hidden() const { return w_hh.dim(0); }
};

/// Single step: r = sig(W_r x + U_r h + b), z = sig(W_z x + U_z h + b),
/// n = tanh(W_n x + b_in + r * (U_n h + b_hn)), h' = (1 - z) * n + z * h.
/// x is [1, I], h is [1, H]; returns [1, H].
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruLayerWeights& w);

/// Runs the layer over a [T, I] sequence from a zero initial state and
/// returns the per-step hidden states [T, H] in original time order.
/// With reverse = true the recurrence scans right-to-left instead.
Tensor gru_layer(const Tensor& xs, const GruLayerWeights& w, bool reverse);

/// Stacked (optionally bidirectional) GRU. Each layer runs a forward scan
/// and, when bidirectional, an independent backward scan; their per-step
/// states are concatenated, so layer outputs are [T, H] or [T, 2H].
struct GruStack {
    std::vector<GruLayerWeights> fwd;
    std::vector<GruLayerWeights> bwd;  // empty when unidirectional
    std::int64_t hidden_dim = 0;

    static GruStack init(std::int64_t input, std::int64_t hidden, std::int64_t layers,
                         bool bidirectional, Rng& rng);
    bool bidirectional() const { return !bwd.empty(); }
    std::int64_t out_dim() const { return bidirectional() ? 2 * hidden_dim : hidden_dim; }
    Tensor run(const Tensor& xs) const;
    std::vector<Tensor> params();
};

}  // namespace cogs
