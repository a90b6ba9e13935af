// gan.hpp - speaker style sampling, the recurrent gesture generator, and the
// motion discriminator.
#pragma once

#include <vector>

#include "cogs/gru.hpp"
#include "cogs/rng.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

/// Per-speaker style distribution parameters; latents are drawn with the
/// reparameterization z = mu + exp(logvar / 2) * noise.
struct SpeakerStyleTable {
    Tensor mu;      // [num_speakers, S], trainable
    Tensor logvar;  // [num_speakers, S], trainable

    static SpeakerStyleTable init(std::int64_t num_speakers, std::int64_t style_dim, Rng& rng);
    std::int64_t speakers() const { return mu.dim(0); }
    std::int64_t style_dim() const { return mu.dim(1); }
    /// noise is [1, S] (or [S]); unknown speaker ids are rejected.
    Tensor sample(std::int64_t speaker_id, const Tensor& noise) const;
};

struct GeneratorConfig {
    std::int64_t frames = 34;       // output frames T
    std::int64_t joints = 9;        // J
    std::int64_t seed_frames = 4;   // leading frames tied to seed poses by the loss
    std::int64_t fused_dim = 256;   // per-frame text/audio feature width
    std::int64_t graph_feat = 0;    // flattened per-step graph code width (J * C)
    std::int64_t style_dim = 8;     // S
    std::int64_t hidden = 64;       // H per direction
    std::int64_t layers = 2;
    bool bidirectional = true;

    std::int64_t input_dim() const { return fused_dim + graph_feat + style_dim + 1; }
};

/// Bidirectional GRU stack over per-frame features assembled as
/// concat(fused_t, graph-code resampled to T, style, seed-flag channel),
/// followed by a linear head to J direction vectors per frame, each scaled
/// to unit length (degenerate vectors fall back to the rest pose).
class Generator {
public:
    Generator(GeneratorConfig cfg, Rng& rng);

    /// fused [T, D_f]; graph_code [T_g, J, C] with J*C == cfg.graph_feat;
    /// style [1, S]; seed_poses [seed_frames, J, 3]. Returns [T, J, 3].
    Tensor generate(const Tensor& fused, const Tensor& graph_code, const Tensor& style,
                    const Tensor& seed_poses) const;

    const GeneratorConfig& config() const { return cfg_; }
    const Tensor& rest_pose() const { return rest_; }
    void set_rest_pose(const Tensor& rest);
    std::vector<Tensor> params();

private:
    GeneratorConfig cfg_;
    GruStack gru_;
    Tensor w_head_, b_head_;
    Tensor rest_;  // [J, 3] unit fallback directions, not trained
};

struct DiscriminatorConfig {
    std::int64_t joints = 9;
    std::int64_t hidden = 32;
    std::int64_t layers = 1;
    bool bidirectional = true;
};

/// Scores motion realism in (0, 1): frame differences -> GRU stack -> mean
/// time pooling -> logistic. Constant offsets to all frames cancel in the
/// differences, so the score depends on motion only.
class Discriminator {
public:
    Discriminator(DiscriminatorConfig cfg, Rng& rng);

    /// poses [T, J, 3] with T >= 2; returns a scalar in (0, 1).
    Tensor score(const Tensor& poses) const;

    const DiscriminatorConfig& config() const { return cfg_; }
    std::vector<Tensor> params();

private:
    DiscriminatorConfig cfg_;
    GruStack gru_;
    Tensor w_out_, b_out_;
};

}  // namespace cogs
