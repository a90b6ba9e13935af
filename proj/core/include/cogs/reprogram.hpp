// reprogram.hpp - audio-to-text adaptation: prototype compression of the
// vocabulary, multi-head cross-attention over mel patches, and fusion of
// reprogrammed audio tokens with text embeddings.
#pragma once

#include "cogs/embeddings.hpp"
#include "cogs/rng.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

/// Learned compression of the frozen vocabulary: prototypes = W_map . E.
struct PrototypeTable {
    Tensor w_map;  // [V', V], trainable

    static PrototypeTable init(std::int64_t v_proto, std::int64_t vocab, Rng& rng);
    /// [V', D]; rebuilt per forward pass so W_map gradients flow.
    Tensor prototypes(const VocabEmbeddings& vocab) const;
};

/// Cross-attention projections. d_h must divide evenly into `heads`.
struct ReprogramWeights {
    Tensor w_q;    // [d_m, d_h]
    Tensor w_k;    // [D, d_h]
    Tensor w_v;    // [D, d_h]
    Tensor w_out;  // [d_h, D]
    Tensor b_out;  // [D]
    std::int64_t heads = 1;

    static ReprogramWeights init(std::int64_t d_m, std::int64_t D, std::int64_t d_h,
                                 std::int64_t heads, Rng& rng);
    std::int64_t head_dim() const { return w_q.dim(1) / heads; }
};

/// Per head n: Q_n = mel W_n^Q, K_n = proto W_n^K, V_n = proto W_n^V,
/// A_n = softmax(Q_n K_n^T / sqrt(d)); concat head outputs, then ReLU, then
/// the output projection. mel is [P, d_m]; result [P, D].
Tensor reprogram(const Tensor& mel, const Tensor& prototypes, const ReprogramWeights& w);

/// Attention rows of head 0 for inspection dumps: [P, V'].
Tensor reprogram_attention(const Tensor& mel, const Tensor& prototypes,
                           const ReprogramWeights& w, std::int64_t head);

/// Fusion head: concat [reprogrammed; text] along the sequence axis, apply a
/// per-position linear D -> D_f, then linearly resample the sequence to T.
struct FuseWeights {
    Tensor w;  // [D, D_f]
    Tensor b;  // [D_f]

    static FuseWeights init(std::int64_t D, std::int64_t d_f, Rng& rng);
};

/// text may be an empty handle (no transcript): the audio-only fallback uses
/// just the reprogrammed sequence. Output [T, D_f].
Tensor fuse_text_audio(const Tensor& reprogrammed, const Tensor& text, const FuseWeights& w,
                       std::int64_t T);

}  // namespace cogs
