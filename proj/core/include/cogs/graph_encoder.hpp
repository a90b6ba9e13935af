// graph_encoder.hpp - audio/action graph encoding: adaptive adjacency,
// diffusion graph convolution, gated dilated-causal temporal blocks.
#pragma once

#include <vector>

#include "cogs/rng.hpp"
#include "cogs/skeleton.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

/// Stride-samples a pose window [T, J, 3] down to T_g steps (stride =
/// floor(T / T_g), first T_g kept) and returns [T_g, J, 3] node features.
std::vector<double> pose_to_graph(const std::vector<double>& poses, std::int64_t T,
                                  std::int64_t J, std::int64_t T_g);

/// A_adapt = row-wise softmax(relu(E1 E2^T)), [J, J] and row-stochastic.
Tensor adaptive_adjacency(const Tensor& e1, const Tensor& e2);

/// Z = sum_{j=0}^{J_diff} P_f^j X W_{j,f} + P_b^j X W_{j,b} + A^j X W_{j,a}
/// over a single time step X [J, C_in]. weights holds 3*(J_diff+1) matrices
/// ordered (forward, backward, adaptive) per power; bias may be undefined.
Tensor diffusion_graph_conv(const Tensor& x, const TransitionMatrices& tm, const Tensor& a_adapt,
                            const std::vector<Tensor>& weights, const Tensor& bias,
                            std::int64_t j_diff);

/// Gated temporal block on [T, J, C]: per joint, tanh(conv_a) * sigmoid(conv_b)
/// with causal dilation. Weights are shared across joints.
struct TcnWeights {
    Tensor w_filter;  // [K, C_in, C_out]
    Tensor b_filter;  // [C_out]
    Tensor w_gate;    // [K, C_in, C_out]
    Tensor b_gate;    // [C_out]
};
Tensor tcn_block(const Tensor& x, const TcnWeights& w, std::int64_t dilation);

/// Keeps rows at block-end positions stride-1, 2*stride-1, ... along time.
Tensor subsample_time(const Tensor& x, std::int64_t stride);

struct EncoderBlockConfig {
    std::int64_t dilation = 1;
    std::int64_t stride = 1;  // temporal subsampling after the gated conv
};

struct GraphEncoderConfig {
    std::int64_t joints = 9;
    std::int64_t audio_feat = 170;       // F_a per node
    std::int64_t node_embed_dim = 10;    // e
    std::int64_t diffusion_order = 2;    // J_diff
    std::int64_t kernel = 2;             // temporal filter length K
    std::vector<EncoderBlockConfig> blocks{{1, 2}, {2, 2}};

    std::int64_t channels() const { return audio_feat + 3; }
};

/// Parameter bundle + forward pass. Channel count is fixed at F_a + 3
/// throughout so Table-6-style shapes are preserved.
class GraphEncoder {
public:
    GraphEncoder(GraphEncoderConfig cfg, const SkeletonTopology& topo, Rng& rng);

    /// audio_nodes [T_g, J, F_a], action_nodes [T_g, J, 3] (both constants);
    /// returns [T_out, J, C] with T_out = T_g / prod(strides).
    Tensor encode(const Tensor& audio_nodes, const Tensor& action_nodes) const;

    Tensor adjacency() const;  // current adaptive adjacency [J, J]
    std::vector<Tensor> params();
    const GraphEncoderConfig& config() const { return cfg_; }

private:
    GraphEncoderConfig cfg_;
    TransitionMatrices tm_;
    Tensor e1_, e2_;  // node embeddings
    struct Block {
        TcnWeights tcn;
        std::vector<Tensor> diff_w;
        Tensor diff_b;
    };
    std::vector<Block> blocks_;
};

}  // namespace cogs
