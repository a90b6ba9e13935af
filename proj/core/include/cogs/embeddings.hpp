// embeddings.hpp - frozen vocabulary embeddings and the deterministic hashed
// provider that stands in for a pre-trained language model.
#pragma once

#include <string>
#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

/// Frozen V x D table plus the token -> row mapping. The on-disk format
/// carries no token strings, so rows are addressed by seeded token hash.
struct VocabEmbeddings {
    Tensor table;  // [V, D], requires_grad = false

    std::int64_t vocab_size() const { return table.dim(0); }
    std::int64_t dim() const { return table.dim(1); }
    /// Stable row index for a token (hash modulo V).
    std::int64_t row_of(const std::string& token) const;
    /// Embedding rows for a token sequence, shape [n, D].
    Tensor lookup(const std::vector<std::string>& tokens) const;
    /// Row gather without autograd history (the table is frozen).
    Tensor gather_rows_frozen(const std::vector<std::int64_t>& idx) const;
};

/// Plain-text table: line 1 "V D", then V lines of D space-separated
/// decimals. Round-trips bit-exactly through save/load.
VocabEmbeddings load_embedding_table(const std::string& path);
void save_embedding_table(const std::string& path, const VocabEmbeddings& emb);

/// Deterministic unit-norm D-vector per distinct token, independent of
/// position and vocabulary size. Output [tokens.size(), D].
Tensor hashed_embeddings(const std::vector<std::string>& tokens, std::int64_t D,
                         std::uint64_t seed);

/// Deterministic frozen vocabulary table with unit-norm rows; row i is the
/// hashed embedding of its index under the given seed.
VocabEmbeddings make_hashed_vocab(std::int64_t V, std::int64_t D, std::uint64_t seed);

/// Whitespace tokenizer (lowercases ASCII); empty transcript -> no tokens.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace cogs
