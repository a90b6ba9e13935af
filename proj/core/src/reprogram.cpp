// reprogram.cpp
#include "cogs/reprogram.hpp"

#include <cmath>

#include "cogs/ops.hpp"

namespace cogs {

PrototypeTable PrototypeTable::init(std::int64_t v_proto, std::int64_t vocab, Rng& rng) {
    if (v_proto < 1 || v_proto >= vocab) {
        throw value_error("prototype count must satisfy 1 <= V' < V, got V'=" +
                          std::to_string(v_proto) + " V=" + std::to_string(vocab));
    }
    PrototypeTable t;
    // small uniform noise; scale keeps prototype magnitudes near the
    // vocabulary row scale for any V
    const double s = 1.0 / std::sqrt(static_cast<double>(vocab));
    t.w_map = Tensor::rand_uniform({v_proto, vocab}, rng, -s, s, /*requires_grad=*/true);
    return t;
}

Tensor PrototypeTable::prototypes(const VocabEmbeddings& vocab) const {
    if (w_map.dim(1) != vocab.vocab_size()) {
        throw shape_error("prototype map expects vocabulary of " + std::to_string(w_map.dim(1)) +
                          ", table has " + std::to_string(vocab.vocab_size()));
    }
    return matmul(w_map, vocab.table);
}

ReprogramWeights ReprogramWeights::init(std::int64_t d_m, std::int64_t D, std::int64_t d_h,
                                        std::int64_t heads, Rng& rng) {
    if (heads < 1 || d_h % heads != 0) {
        throw value_error("head count " + std::to_string(heads) + " must divide d_h " +
                          std::to_string(d_h));
    }
    ReprogramWeights w;
    w.heads = heads;
    const double sq = 1.0 / std::sqrt(static_cast<double>(d_m));
    const double sk = 1.0 / std::sqrt(static_cast<double>(D));
    const double so = 1.0 / std::sqrt(static_cast<double>(d_h));
    w.w_q = Tensor::randn({d_m, d_h}, rng, sq, true);
    w.w_k = Tensor::randn({D, d_h}, rng, sk, true);
    w.w_v = Tensor::randn({D, d_h}, rng, sk, true);
    w.w_out = Tensor::randn({d_h, D}, rng, so, true);
    w.b_out = Tensor::zeros({D}, true);
    return w;
}

namespace {

void check_reprogram_dims(const Tensor& mel, const Tensor& prototypes, const ReprogramWeights& w) {
    if (mel.rank() != 2 || mel.dim(1) != w.w_q.dim(0)) {
        throw shape_error("reprogram: mel patches " + shape_str(mel.shape()) + " do not match W^Q " +
                          shape_str(w.w_q.shape()));
    }
    if (prototypes.rank() != 2 || prototypes.dim(1) != w.w_k.dim(0)) {
        throw shape_error("reprogram: prototypes " + shape_str(prototypes.shape()) +
                          " do not match W^K " + shape_str(w.w_k.shape()));
    }
    if (w.w_q.dim(1) % w.heads != 0) {
        throw value_error("reprogram: head count must divide d_h");
    }
}

// softmax(Q_n K_n^T / sqrt(d)) for one head.
Tensor head_attention(const Tensor& q, const Tensor& k, const ReprogramWeights& w,
                      std::int64_t head) {
    const auto d = w.head_dim();
    auto qn = slice(q, 1, head * d, d);
    auto kn = slice(k, 1, head * d, d);
    auto scores = scale(matmul(qn, transpose(kn)), 1.0 / std::sqrt(static_cast<double>(d)));
    return softmax_lastdim(scores);
}

}  // namespace

Tensor reprogram(const Tensor& mel, const Tensor& prototypes, const ReprogramWeights& w) {
    check_reprogram_dims(mel, prototypes, w);
    auto q = matmul(mel, w.w_q);         // [P, d_h]
    auto k = matmul(prototypes, w.w_k);  // [V', d_h]
    auto v = matmul(prototypes, w.w_v);  // [V', d_h]
    const auto d = w.head_dim();
    std::vector<Tensor> head_outs;
    head_outs.reserve(static_cast<std::size_t>(w.heads));
    for (std::int64_t n = 0; n < w.heads; ++n) {
        auto attn = head_attention(q, k, w, n);     // [P, V']
        auto vn = slice(v, 1, n * d, d);               // [V', d]
        head_outs.push_back(matmul(attn, vn));         // [P, d]
    }
    auto merged = w.heads == 1 ? head_outs[0] : concat(head_outs, 1);  // [P, d_h]
    // reshape -> ReLU -> output projection
    return add_rowvec(matmul(relu(merged), w.w_out), w.b_out);  // [P, D]
}

Tensor reprogram_attention(const Tensor& mel, const Tensor& prototypes,
                           const ReprogramWeights& w, std::int64_t head) {
    check_reprogram_dims(mel, prototypes, w);
    if (head < 0 || head >= w.heads) throw value_error("reprogram_attention: head out of range");
    auto q = matmul(mel, w.w_q);
    auto k = matmul(prototypes, w.w_k);
    return head_attention(q, k, w, head);
}

FuseWeights FuseWeights::init(std::int64_t D, std::int64_t d_f, Rng& rng) {
    FuseWeights f;
    const double s = 1.0 / std::sqrt(static_cast<double>(D));
    f.w = Tensor::randn({D, d_f}, rng, s, true);
    f.b = Tensor::zeros({d_f}, true);
    return f;
}

Tensor fuse_text_audio(const Tensor& reprogrammed, const Tensor& text, const FuseWeights& w,
                       std::int64_t T) {
    if (T <= 0) throw value_error("fuse_text_audio: target length must be positive");
    Tensor seq = reprogrammed;
    if (text.defined() && text.dim(0) > 0) {
        if (text.dim(1) != reprogrammed.dim(1)) {
            throw shape_error("fuse_text_audio: text dim " + shape_str(text.shape()) +
                              " does not match reprogrammed dim " +
                              shape_str(reprogrammed.shape()));
        }
        seq = concat({reprogrammed, text}, 0);
    }
    auto projected = add_rowvec(matmul(seq, w.w), w.b);  // [P+Tk, D_f]
    return linear_resample_rows(projected, T);
}

}  // namespace cogs
