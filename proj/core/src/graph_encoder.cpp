// graph_encoder.cpp
#include "cogs/graph_encoder.hpp"

#include <cmath>

#include "cogs/ops.hpp"

namespace cogs {

std::vector<double> pose_to_graph(const std::vector<double>& poses, std::int64_t T,
                                  std::int64_t J, std::int64_t T_g) {
    if (static_cast<std::int64_t>(poses.size()) != T * J * 3) {
        throw shape_error("pose_to_graph: pose buffer does not match T*J*3");
    }
    if (T < T_g) {
        throw value_error("pose_to_graph: cannot sample " + std::to_string(T_g) + " steps from " +
                          std::to_string(T) + " frames");
    }
    const auto stride = T / T_g;
    std::vector<double> out(static_cast<std::size_t>(T_g * J * 3));
    for (std::int64_t i = 0; i < T_g; ++i) {
        std::copy_n(poses.begin() + i * stride * J * 3, J * 3, out.begin() + i * J * 3);
    }
    return out;
}

Tensor adaptive_adjacency(const Tensor& e1, const Tensor& e2) {
    if (e1.shape() != e2.shape() || e1.rank() != 2) {
        throw shape_error("adaptive_adjacency: embeddings must share shape [J, e]");
    }
    return softmax_lastdim(relu(matmul(e1, transpose(e2))));
}

Tensor diffusion_graph_conv(const Tensor& x, const TransitionMatrices& tm, const Tensor& a_adapt,
                            const std::vector<Tensor>& weights, const Tensor& bias,
                            std::int64_t j_diff) {
    if (j_diff < 0) throw value_error("diffusion_graph_conv: order must be >= 0");
    if (static_cast<std::int64_t>(weights.size()) != 3 * (j_diff + 1)) {
        throw shape_error("diffusion_graph_conv: expected " + std::to_string(3 * (j_diff + 1)) +
                          " weight matrices, got " + std::to_string(weights.size()));
    }
    const auto J = x.dim(0);
    Tensor pf = Tensor::identity(J);
    Tensor pb = Tensor::identity(J);
    Tensor pa = Tensor::identity(J);
    Tensor z;
    for (std::int64_t j = 0; j <= j_diff; ++j) {
        if (j > 0) {
            pf = matmul(pf, tm.forward);
            pb = matmul(pb, tm.backward);
            pa = matmul(pa, a_adapt);
        }
        auto term = add(add(matmul(matmul(pf, x), weights[static_cast<std::size_t>(3 * j)]),
                            matmul(matmul(pb, x), weights[static_cast<std::size_t>(3 * j + 1)])),
                        matmul(matmul(pa, x), weights[static_cast<std::size_t>(3 * j + 2)]));
        z = j == 0 ? term : add(z, term);
    }
    if (bias.defined()) z = add_rowvec(z, bias);
    return z;
}

Tensor tcn_block(const Tensor& x, const TcnWeights& w, std::int64_t dilation) {
    if (x.rank() != 3) {
        throw shape_error("tcn_block: expected [T, J, C], got " + shape_str(x.shape()));
    }
    const auto T = x.dim(0), J = x.dim(1), C = x.dim(2);
    const auto Cout = w.w_filter.dim(2);
    std::vector<Tensor> per_joint;
    per_joint.reserve(static_cast<std::size_t>(J));
    for (std::int64_t j = 0; j < J; ++j) {
        auto xj = reshape(slice(x, 1, j, 1), {T, C});
        auto filt = tanh_op(dilated_causal_conv1d(xj, w.w_filter, w.b_filter, dilation));
        auto gate = sigmoid(dilated_causal_conv1d(xj, w.w_gate, w.b_gate, dilation));
        per_joint.push_back(reshape(mul(filt, gate), {T, 1, Cout}));
    }
    return concat(per_joint, 1);  // [T, J, Cout]
}

Tensor subsample_time(const Tensor& x, std::int64_t stride) {
    if (stride < 1) throw value_error("subsample_time: stride must be >= 1");
    if (stride == 1) return x;
    const auto T = x.dim(0);
    const auto keep = T / stride;
    if (keep < 1) throw shape_error("subsample_time: stride exceeds sequence length");
    const auto J = x.dim(1), C = x.dim(2);
    std::vector<std::int64_t> idx;
    idx.reserve(static_cast<std::size_t>(keep));
    for (std::int64_t i = 0; i < keep; ++i) idx.push_back((i + 1) * stride - 1);  // block ends
    auto flat = reshape(x, {T, J * C});
    return reshape(gather_rows(flat, idx), {keep, J, C});
}

GraphEncoder::GraphEncoder(GraphEncoderConfig cfg, const SkeletonTopology& topo, Rng& rng)
    : cfg_(std::move(cfg)), tm_(transition_matrices(topo.static_adjacency())) {
    if (topo.joints() != cfg_.joints) {
        throw shape_error("graph encoder configured for " + std::to_string(cfg_.joints) +
                          " joints, topology has " + std::to_string(topo.joints()));
    }
    const auto J = cfg_.joints, e = cfg_.node_embed_dim, C = cfg_.channels();
    e1_ = Tensor::randn({J, e}, rng, 1.0 / std::sqrt(static_cast<double>(e)), true);
    e2_ = Tensor::randn({J, e}, rng, 1.0 / std::sqrt(static_cast<double>(e)), true);
    const double sc = 1.0 / std::sqrt(static_cast<double>(C * cfg_.kernel));
    const double sd = 1.0 / std::sqrt(static_cast<double>(C * 3 * (cfg_.diffusion_order + 1)));
    for (const auto& bc : cfg_.blocks) {
        (void)bc;
        Block b;
        b.tcn.w_filter = Tensor::randn({cfg_.kernel, C, C}, rng, sc, true);
        b.tcn.b_filter = Tensor::zeros({C}, true);
        b.tcn.w_gate = Tensor::randn({cfg_.kernel, C, C}, rng, sc, true);
        b.tcn.b_gate = Tensor::zeros({C}, true);
        for (std::int64_t j = 0; j < 3 * (cfg_.diffusion_order + 1); ++j) {
            b.diff_w.push_back(Tensor::randn({C, C}, rng, sd, true));
        }
        b.diff_b = Tensor::zeros({C}, true);
        blocks_.push_back(std::move(b));
    }
}

Tensor GraphEncoder::adjacency() const { return adaptive_adjacency(e1_, e2_); }

Tensor GraphEncoder::encode(const Tensor& audio_nodes, const Tensor& action_nodes) const {
    if (audio_nodes.rank() != 3 || action_nodes.rank() != 3) {
        throw shape_error("encode: node features must be rank 3 [T_g, J, F]");
    }
    if (audio_nodes.dim(1) != action_nodes.dim(1)) {
        throw shape_error("encode: audio graph has " + std::to_string(audio_nodes.dim(1)) +
                          " nodes, action graph has " + std::to_string(action_nodes.dim(1)));
    }
    if (audio_nodes.dim(0) != action_nodes.dim(0)) {
        throw shape_error("encode: audio/action time steps differ");
    }
    if (audio_nodes.dim(1) != cfg_.joints || audio_nodes.dim(2) != cfg_.audio_feat ||
        action_nodes.dim(2) != 3) {
        throw shape_error("encode: features do not match configuration");
    }
    auto x = concat({audio_nodes, action_nodes}, 2);  // [T_g, J, F_a + 3]
    auto a_adapt = adaptive_adjacency(e1_, e2_);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
        const auto& blk = blocks_[bi];
        const auto& bc = cfg_.blocks[bi];
        x = tcn_block(x, blk.tcn, bc.dilation);
        x = subsample_time(x, bc.stride);
        // graph mixing per time step
        const auto T = x.dim(0), J = x.dim(1), C = x.dim(2);
        std::vector<Tensor> steps;
        steps.reserve(static_cast<std::size_t>(T));
        for (std::int64_t t = 0; t < T; ++t) {
            auto xt = reshape(slice(x, 0, t, 1), {J, C});
            auto zt = diffusion_graph_conv(xt, tm_, a_adapt, blk.diff_w, blk.diff_b,
                                           cfg_.diffusion_order);
            steps.push_back(reshape(zt, {1, J, C}));
        }
        x = concat(steps, 0);
    }
    return x;
}

std::vector<Tensor> GraphEncoder::params() {
    std::vector<Tensor> p{e1_, e2_};
    for (auto& b : blocks_) {
        p.push_back(b.tcn.w_filter);
        p.push_back(b.tcn.b_filter);
        p.push_back(b.tcn.w_gate);
        p.push_back(b.tcn.b_gate);
        for (auto& w : b.diff_w) p.push_back(w);
        p.push_back(b.diff_b);
    }
    return p;
}

}  // namespace cogs
