// embeddings.cpp
#include "cogs/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cogs/rng.hpp"

namespace cogs {

namespace {

// One unit-norm row from a seeded stream keyed by (seed, token hash).
std::vector<double> hashed_row(std::uint64_t token_hash, std::int64_t D, std::uint64_t seed) {
    Rng rng(token_hash ^ (seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
    std::vector<double> v(static_cast<std::size_t>(D));
    double norm2 = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm2 += x * x;
    }
    // a D-dim standard normal is never numerically zero-length for D >= 1
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
}

}  // namespace

std::int64_t VocabEmbeddings::row_of(const std::string& token) const {
    const auto h = fnv1a64(token.data(), token.size());
    return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(vocab_size()));
}

Tensor VocabEmbeddings::lookup(const std::vector<std::string>& tokens) const {
    std::vector<std::int64_t> idx;
    idx.reserve(tokens.size());
    for (const auto& t : tokens) idx.push_back(row_of(t));
    return gather_rows_frozen(idx);
}

// Row gather on the frozen table without building autograd history: the
// vocabulary is never trained ("frozen language model").
Tensor VocabEmbeddings::gather_rows_frozen(const std::vector<std::int64_t>& idx) const {
    const auto D = dim();
    std::vector<double> out(idx.size() * static_cast<std::size_t>(D));
    const auto& tv = table.values();
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(tv.begin() + idx[i] * D, D, out.begin() + static_cast<std::int64_t>(i) * D);
    return Tensor::from_vector({static_cast<std::int64_t>(idx.size()), D}, std::move(out));
}

VocabEmbeddings load_embedding_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open embedding table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("embedding table is empty: " + path);
    std::int64_t V = 0, D = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> V >> D) || V < 1 || D < 1) {
            throw parse_error("embedding table header must be 'V D' (line 1): " + path);
        }
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(V * D));
    std::int64_t row = 0;
    while (row < V) {
        if (!std::getline(in, line)) {
            throw parse_error("embedding table declares " + std::to_string(V) + " rows but ends at line " +
                              std::to_string(row + 1) + ": " + path);
        }
        const char* p = line.data();
        const char* end = p + line.size();
        std::int64_t col = 0;
        while (col < D) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            double x = 0.0;
            auto [next, ec] = std::from_chars(p, end, x);
            if (ec != std::errc{}) {
                throw parse_error("non-numeric embedding entry at line " + std::to_string(row + 2) +
                                  ", column " + std::to_string(col + 1) + ": " + path);
            }
            values.push_back(x);
            p = next;
            ++col;
        }
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p != end) {
            throw parse_error("embedding row has extra entries at line " + std::to_string(row + 2) +
                              ": " + path);
        }
        ++row;
    }
    VocabEmbeddings emb;
    emb.table = Tensor::from_vector({V, D}, std::move(values));
    return emb;
}

void save_embedding_table(const std::string& path, const VocabEmbeddings& emb) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write embedding table: " + path);
    const auto V = emb.vocab_size(), D = emb.dim();
    out << V << ' ' << D << '\n';
    out.precision(17);
    const auto& tv = emb.table.values();
    for (std::int64_t r = 0; r < V; ++r) {
        for (std::int64_t c = 0; c < D; ++c) {
            if (c) out << ' ';
            out << tv[static_cast<std::size_t>(r * D + c)];
        }
        out << '\n';
    }
    if (!out) throw io_error("short write to embedding table: " + path);
}

Tensor hashed_embeddings(const std::vector<std::string>& tokens, std::int64_t D,
                         std::uint64_t seed) {
    if (D < 1) throw value_error("hashed_embeddings: dimension must be >= 1");
    std::vector<double> out;
    out.reserve(tokens.size() * static_cast<std::size_t>(D));
    for (const auto& t : tokens) {
        auto row = hashed_row(fnv1a64(t.data(), t.size()), D, seed);
        out.insert(out.end(), row.begin(), row.end());
    }
    return Tensor::from_vector({static_cast<std::int64_t>(tokens.size()), D}, std::move(out));
}

VocabEmbeddings make_hashed_vocab(std::int64_t V, std::int64_t D, std::uint64_t seed) {
    if (V < 1 || D < 1) throw value_error("make_hashed_vocab: V and D must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(V * D));
    for (std::int64_t r = 0; r < V; ++r) {
        auto row = hashed_row(static_cast<std::uint64_t>(r) * 0x100000001b3ull + 0x9e3779b9ull, D,
                              seed);
        out.insert(out.end(), row.begin(), row.end());
    }
    VocabEmbeddings emb;
    emb.table = Tensor::from_vector({V, D}, std::move(out));
    return emb;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

}  // namespace cogs
