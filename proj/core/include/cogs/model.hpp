// model.hpp - the assembled gesture model: mel frontend, vocabulary
// reprogramming, text/audio fusion, the audio/action graph encoder, the
// recurrent generator, the motion discriminator, and speaker styles.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/audio.hpp"
#include "cogs/checkpoint.hpp"
#include "cogs/corpus.hpp"
#include "cogs/embeddings.hpp"
#include "cogs/gan.hpp"
#include "cogs/graph_encoder.hpp"
#include "cogs/reprogram.hpp"
#include "cogs/skeleton.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

struct ModelConfig {
    MelConfig mel;                      // mel.target_frames = reprogram rows P
    std::int64_t window_len = 3400;     // raw-audio window for the graph stream
    std::int64_t window_stride = 2191;
    std::int64_t vocab_size = 30522;    // frozen vocabulary rows V
    std::int64_t embed_dim = 768;       // D
    std::int64_t proto_count = 1500;    // V'
    std::int64_t attn_width = 1024;     // total Q/K/V width d_h
    std::int64_t heads = 8;
    std::int64_t fused_dim = 256;       // D_f
    std::uint64_t vocab_seed = 99;      // deterministic frozen table
    GraphEncoderConfig graph;
    GeneratorConfig gen;
    DiscriminatorConfig disc;
    std::int64_t speakers = 4;
    std::int64_t style_dim = 8;

    /// Cross-checks widths that must agree across modules.
    void validate() const;

    /// Dimensions from the published architecture tables (J=9, T=34).
    static ModelConfig published();
    /// Small dimensions for fast verification: J=3, T=8, d_m=4, D=6,
    /// V'=5, heads=2.
    static ModelConfig toy();
};

/// Chain skeleton a - b - c ... used by reduced-size configurations.
SkeletonTopology chain_topology(std::int64_t joints);

/// Matching synthetic-corpus shape for a model config (frame count, joint
/// count, fps, sample rate, speaker count are copied over).
SyntheticCorpusSpec corpus_spec_for(const ModelConfig& cfg);

class Model {
public:
    Model(const ModelConfig& cfg, const SkeletonTopology& topo, std::uint64_t seed);

    struct Forward {
        Tensor poses;       // [T, J, 3]
        Tensor fused;       // [T, D_f]
        Tensor graph_code;  // [T_out, J, C]
        Tensor reprogrammed;  // [P, D]
        Tensor style;       // [1, S]
    };

    /// Full differentiable pass for one clip. style_noise is [1, S] (or [S]).
    /// With teacher_forcing the action stream reads the clip's ground-truth
    /// poses; otherwise only its seed frames, resampled across the window.
    Forward forward(const ClipRecord& clip, const Tensor& style_noise,
                    bool teacher_forcing) const;

    Tensor discriminate(const Tensor& poses) const { return disc_.score(poses); }

    /// Mean pairwise cosine similarity between reprogrammed audio tokens and
    /// the clip's text embedding rows; 0 when the transcript is empty.
    double alignment(const ClipRecord& clip) const;

    /// Head-0 attention rows over prototypes for a clip, [P, V'].
    Tensor attention(const ClipRecord& clip, std::int64_t head = 0) const;

    Tensor adjacency() const { return graph_.adjacency(); }
    const SpeakerStyleTable& style_table() const { return style_; }
    const VocabEmbeddings& vocab() const { return vocab_; }
    const Generator& generator() const { return gen_; }
    const ModelConfig& config() const { return cfg_; }

    /// All trainable tensors on the generator side (everything but the
    /// discriminator), in a stable order.
    std::vector<Tensor> generator_params();
    std::vector<Tensor> discriminator_params();
    /// Stable names for checkpointing; covers both sides. The frozen
    /// vocabulary is referenced by content hash only.
    std::vector<NamedTensor> named_params();
    std::uint64_t vocab_hash() const;

private:
    Tensor mel_tensor(const ClipRecord& clip) const;       // [P, d_m]
    Tensor audio_nodes(const ClipRecord& clip) const;      // [T_g, J, F_a]
    Tensor action_nodes(const ClipRecord& clip, bool teacher_forcing) const;
    Tensor seed_tensor(const ClipRecord& clip) const;      // [seed, J, 3]
    Tensor text_rows(const ClipRecord& clip) const;        // [n, D] or empty

    ModelConfig cfg_;
    VocabEmbeddings vocab_;  // frozen
    PrototypeTable proto_;
    ReprogramWeights rep_;
    FuseWeights fuse_;
    GraphEncoder graph_;
    Generator gen_;
    Discriminator disc_;
    SpeakerStyleTable style_;
};

}  // namespace cogs
