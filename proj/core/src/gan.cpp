// gan.cpp
#include "cogs/gan.hpp"

#include <cmath>

#include "cogs/ops.hpp"

namespace cogs {

SpeakerStyleTable SpeakerStyleTable::init(std::int64_t num_speakers, std::int64_t style_dim,
                                          Rng& rng) {
    if (num_speakers < 1 || style_dim < 1) {
        throw value_error("speaker styles: need at least one speaker and one style dim");
    }
    SpeakerStyleTable t;
    t.mu = Tensor::randn({num_speakers, style_dim}, rng, 0.1, true);
    t.logvar = Tensor::zeros({num_speakers, style_dim}, true);
    return t;
}

Tensor SpeakerStyleTable::sample(std::int64_t speaker_id, const Tensor& noise) const {
    if (speaker_id < 0 || speaker_id >= speakers()) {
        throw value_error("unknown speaker id " + std::to_string(speaker_id) + " (have " +
                          std::to_string(speakers()) + ")");
    }
    const auto S = style_dim();
    if (noise.numel() != S) {
        throw shape_error("style noise must have " + std::to_string(S) + " entries, got " +
                          std::to_string(noise.numel()));
    }
    auto n = noise.rank() == 2 ? noise : reshape(noise, {1, S});
    auto m = slice(mu, 0, speaker_id, 1);
    auto lv = slice(logvar, 0, speaker_id, 1);
    return add(m, mul(exp_op(scale(lv, 0.5)), n));
}

Generator::Generator(GeneratorConfig cfg, Rng& rng) : cfg_(cfg) {
    if (cfg_.frames < 1 || cfg_.joints < 1) {
        throw value_error("generator: frames and joints must be >= 1");
    }
    if (cfg_.seed_frames < 0 || cfg_.seed_frames > cfg_.frames) {
        throw value_error("generator: seed frame count out of range");
    }
    gru_ = GruStack::init(cfg_.input_dim(), cfg_.hidden, cfg_.layers, cfg_.bidirectional, rng);
    const auto out = gru_.out_dim();
    w_head_ = Tensor::randn({out, cfg_.joints * 3}, rng, 1.0 / std::sqrt(static_cast<double>(out)),
                            true);
    b_head_ = Tensor::zeros({cfg_.joints * 3}, true);
    std::vector<double> rest(static_cast<std::size_t>(cfg_.joints * 3), 0.0);
    for (std::int64_t j = 0; j < cfg_.joints; ++j) rest[static_cast<std::size_t>(j * 3 + 2)] = 1.0;
    rest_ = Tensor::from_vector({cfg_.joints, 3}, rest, false);
}

void Generator::set_rest_pose(const Tensor& rest) {
    if (rest.rank() != 2 || rest.dim(0) != cfg_.joints || rest.dim(1) != 3) {
        throw shape_error("rest pose must be [" + std::to_string(cfg_.joints) + ", 3], got " +
                          shape_str(rest.shape()));
    }
    if (rest.requires_grad()) throw value_error("rest pose must not be trainable");
    rest_ = rest;
}

Tensor Generator::generate(const Tensor& fused, const Tensor& graph_code, const Tensor& style,
                           const Tensor& seed_poses) const {
    const auto T = cfg_.frames, J = cfg_.joints;
    if (fused.rank() != 2 || fused.dim(0) != T || fused.dim(1) != cfg_.fused_dim) {
        throw shape_error("generate: fused features must be [" + std::to_string(T) + ", " +
                          std::to_string(cfg_.fused_dim) + "], got " + shape_str(fused.shape()));
    }
    if (graph_code.rank() != 3 || graph_code.dim(1) * graph_code.dim(2) != cfg_.graph_feat) {
        throw shape_error("generate: graph code must flatten to " +
                          std::to_string(cfg_.graph_feat) + " features per step");
    }
    if (style.numel() != cfg_.style_dim) {
        throw shape_error("generate: style latent must have " + std::to_string(cfg_.style_dim) +
                          " entries");
    }
    if (!seed_poses.defined()) throw value_error("generate: missing seed frames");
    if (seed_poses.rank() != 3 || seed_poses.dim(0) != cfg_.seed_frames ||
        seed_poses.dim(1) != J || seed_poses.dim(2) != 3) {
        throw shape_error("generate: seed poses must be [" + std::to_string(cfg_.seed_frames) +
                          ", " + std::to_string(J) + ", 3], got " + shape_str(seed_poses.shape()));
    }

    // Per-frame input: fused features, graph code stretched to T steps, the
    // style latent on every frame, and a flag marking the seeded prefix.
    auto zrg = linear_resample_rows(
        reshape(graph_code, {graph_code.dim(0), cfg_.graph_feat}), T);
    auto z = style.rank() == 2 ? style : reshape(style, {1, cfg_.style_dim});
    auto style_rows = linear_resample_rows(z, T);  // single row repeated
    std::vector<double> flag(static_cast<std::size_t>(T), 0.0);
    for (std::int64_t t = 0; t < cfg_.seed_frames; ++t) flag[static_cast<std::size_t>(t)] = 1.0;
    auto seed_flag = Tensor::from_vector({T, 1}, flag, false);

    auto inputs = concat({fused, zrg, style_rows, seed_flag}, 1);  // [T, input_dim]
    auto hidden = gru_.run(inputs);
    auto vecs = add_rowvec(matmul(hidden, w_head_), b_head_);  // [T, J*3]

    std::vector<double> rest_tile(static_cast<std::size_t>(T * J * 3));
    for (std::int64_t t = 0; t < T; ++t) {
        std::copy(rest_.values().begin(), rest_.values().end(),
                  rest_tile.begin() + t * J * 3);
    }
    auto rest_rows = Tensor::from_vector({T * J, 3}, rest_tile, false);
    return reshape(normalize_rows3(reshape(vecs, {T * J, 3}), rest_rows), {T, J, 3});
}

std::vector<Tensor> Generator::params() {
    auto p = gru_.params();
    p.push_back(w_head_);
    p.push_back(b_head_);
    return p;
}

Discriminator::Discriminator(DiscriminatorConfig cfg, Rng& rng) : cfg_(cfg) {
    gru_ = GruStack::init(cfg_.joints * 3, cfg_.hidden, cfg_.layers, cfg_.bidirectional, rng);
    const auto out = gru_.out_dim();
    w_out_ = Tensor::randn({out, 1}, rng, 1.0 / std::sqrt(static_cast<double>(out)), true);
    b_out_ = Tensor::zeros({1}, true);
}

Tensor Discriminator::score(const Tensor& poses) const {
    if (poses.rank() != 3 || poses.dim(1) != cfg_.joints || poses.dim(2) != 3) {
        throw shape_error("discriminator: expected [T, " + std::to_string(cfg_.joints) +
                          ", 3], got " + shape_str(poses.shape()));
    }
    const auto T = poses.dim(0);
    if (T < 2) throw value_error("discriminator: need at least 2 frames, got " + std::to_string(T));
    auto flat = reshape(poses, {T, cfg_.joints * 3});
    auto diffs = sub(slice(flat, 0, 1, T - 1), slice(flat, 0, 0, T - 1));  // motion features
    auto hidden = gru_.run(diffs);
    auto logits = add_rowvec(matmul(hidden, w_out_), b_out_);  // [T-1, 1]
    return sigmoid(mean_all(logits));
}

std::vector<Tensor> Discriminator::params() {
    auto p = gru_.params();
    p.push_back(w_out_);
    p.push_back(b_out_);
    return p;
}

}  // namespace cogs
