// ops.cpp - forward kernels and backprop closures
#include "cogs/ops.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace cogs {

namespace {

using detail::Node;
using detail::NodePtr;

NodePtr out_node(const char* op, Shape shape, std::vector<double> value,
                 std::vector<NodePtr> parents, std::function<void(Node&)> backprop) {
    check_finite(op, value);
    bool needs_grad = false;
    for (const auto& p : parents)
        if (p->requires_grad) needs_grad = true;
    auto node = detail::make_node(std::move(shape), std::move(value), needs_grad);
    node->op = op;
    node->parents = std::move(parents);
    if (needs_grad) node->backprop = std::move(backprop);
    return node;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw shape_error(std::string(op) + ": shapes differ, " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
    }
}

void require_rank(const char* op, const Tensor& a, std::int64_t rank) {
    if (a.rank() != rank) {
        throw shape_error(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                          shape_str(a.shape()));
    }
}

void accum(Node& parent, const std::vector<double>& g) {
    parent.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) parent.grad[i] += g[i];
}

void trace_branch(std::uint64_t code) {
    if (auto* t = active_branch_trace()) t->feed(code);
}

}  // namespace

// ---------------------------------------------------------------------------
// structural

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    const auto M = a.dim(0), K = a.dim(1), K2 = b.dim(0), N = b.dim(1);
    if (K != K2) {
        throw shape_error("matmul: inner dims differ, " + shape_str(a.shape()) + " x " +
                          shape_str(b.shape()));
    }
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(M * N), 0.0);
    for (std::int64_t m = 0; m < M; ++m) {
        for (std::int64_t k = 0; k < K; ++k) {
            const double x = av[static_cast<std::size_t>(m * K + k)];
            if (x == 0.0) continue;
            const double* brow = &bv[static_cast<std::size_t>(k * N)];
            double* orow = &out[static_cast<std::size_t>(m * N)];
            for (std::int64_t n = 0; n < N; ++n) orow[n] += x * brow[n];
        }
    }
    auto an = a.node();
    auto bn = b.node();
    return Tensor(out_node(
        "matmul", Shape{M, N}, std::move(out), {an, bn}, [an, bn, M, K, N](Node& self) {
            const auto& g = self.grad;
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::int64_t m = 0; m < M; ++m)
                    for (std::int64_t k = 0; k < K; ++k) {
                        const double* grow = &g[static_cast<std::size_t>(m * N)];
                        const double* brow = &bn->value[static_cast<std::size_t>(k * N)];
                        double acc = 0.0;
                        for (std::int64_t n = 0; n < N; ++n) acc += grow[n] * brow[n];
                        an->grad[static_cast<std::size_t>(m * K + k)] += acc;
                    }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::int64_t m = 0; m < M; ++m)
                    for (std::int64_t k = 0; k < K; ++k) {
                        const double x = an->value[static_cast<std::size_t>(m * K + k)];
                        if (x == 0.0) continue;
                        const double* grow = &g[static_cast<std::size_t>(m * N)];
                        double* brow = &bn->grad[static_cast<std::size_t>(k * N)];
                        for (std::int64_t n = 0; n < N; ++n) brow[n] += x * grow[n];
                    }
            }
        }));
}

Tensor transpose(const Tensor& a) {
    require_rank("transpose", a, 2);
    const auto R = a.dim(0), C = a.dim(1);
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::int64_t r = 0; r < R; ++r)
        for (std::int64_t c = 0; c < C; ++c)
            out[static_cast<std::size_t>(c * R + r)] = av[static_cast<std::size_t>(r * C + c)];
    auto an = a.node();
    return Tensor(out_node("transpose", Shape{C, R}, std::move(out), {an}, [an, R, C](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t r = 0; r < R; ++r)
            for (std::int64_t c = 0; c < C; ++c)
                an->grad[static_cast<std::size_t>(r * C + c)] +=
                    self.grad[static_cast<std::size_t>(c * R + r)];
    }));
}

Tensor reshape(const Tensor& a, Shape s) {
    if (numel_of(s) != a.numel()) {
        throw shape_error("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(s));
    }
    auto an = a.node();
    return Tensor(out_node("reshape", std::move(s), a.values(), {an}, [an](Node& self) {
        if (an->requires_grad) accum(*an, self.grad);
    }));
}

Tensor concat(const std::vector<Tensor>& parts, std::int64_t axis) {
    if (parts.empty()) throw value_error("concat: no inputs");
    const auto& s0 = parts[0].shape();
    const auto rank = static_cast<std::int64_t>(s0.size());
    if (axis < 0 || axis >= rank) throw shape_error("concat: axis out of range");
    std::int64_t axis_total = 0;
    for (const auto& p : parts) {
        if (p.rank() != rank) throw shape_error("concat: rank mismatch");
        for (std::int64_t d = 0; d < rank; ++d) {
            if (d != axis && p.shape()[static_cast<std::size_t>(d)] != s0[static_cast<std::size_t>(d)]) {
                throw shape_error("concat: dim " + std::to_string(d) + " mismatch, " +
                                  shape_str(p.shape()) + " vs " + shape_str(s0));
            }
        }
        axis_total += p.dim(axis);
    }
    Shape out_shape = s0;
    out_shape[static_cast<std::size_t>(axis)] = axis_total;

    std::int64_t outer = 1, inner = 1;
    for (std::int64_t d = 0; d < axis; ++d) outer *= s0[static_cast<std::size_t>(d)];
    for (std::int64_t d = axis + 1; d < rank; ++d) inner *= s0[static_cast<std::size_t>(d)];

    std::vector<double> out(static_cast<std::size_t>(outer * axis_total * inner));
    std::vector<NodePtr> parents;
    std::vector<std::int64_t> lens;
    parents.reserve(parts.size());
    std::int64_t off = 0;
    for (const auto& p : parts) {
        const auto L = p.dim(axis);
        const auto& pv = p.values();
        for (std::int64_t o = 0; o < outer; ++o) {
            std::copy_n(pv.begin() + o * L * inner, L * inner,
                        out.begin() + (o * axis_total + off) * inner);
        }
        parents.push_back(p.node());
        lens.push_back(L);
        off += L;
    }
    return Tensor(out_node("concat", std::move(out_shape), std::move(out), std::move(parents),
                           [outer, inner, axis_total, lens](Node& self) {
                               std::int64_t off = 0;
                               for (std::size_t i = 0; i < self.parents.size(); ++i) {
                                   auto& p = *self.parents[i];
                                   const auto L = lens[i];
                                   if (p.requires_grad) {
                                       p.ensure_grad();
                                       for (std::int64_t o = 0; o < outer; ++o)
                                           for (std::int64_t j = 0; j < L * inner; ++j)
                                               p.grad[static_cast<std::size_t>(o * L * inner + j)] +=
                                                   self.grad[static_cast<std::size_t>(
                                                       (o * axis_total + off) * inner + j)];
                                   }
                                   off += L;
                               }
                           }));
}

Tensor slice(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t len) {
    const auto& s = a.shape();
    const auto rank = static_cast<std::int64_t>(s.size());
    if (axis < 0 || axis >= rank) throw shape_error("slice: axis out of range");
    const auto L = s[static_cast<std::size_t>(axis)];
    if (start < 0 || len < 1 || start + len > L) {
        throw shape_error("slice: range [" + std::to_string(start) + ", " +
                          std::to_string(start + len) + ") out of bounds for axis length " +
                          std::to_string(L));
    }
    std::int64_t outer = 1, inner = 1;
    for (std::int64_t d = 0; d < axis; ++d) outer *= s[static_cast<std::size_t>(d)];
    for (std::int64_t d = axis + 1; d < rank; ++d) inner *= s[static_cast<std::size_t>(d)];

    Shape out_shape = s;
    out_shape[static_cast<std::size_t>(axis)] = len;
    std::vector<double> out(static_cast<std::size_t>(outer * len * inner));
    const auto& av = a.values();
    for (std::int64_t o = 0; o < outer; ++o) {
        std::copy_n(av.begin() + (o * L + start) * inner, len * inner, out.begin() + o * len * inner);
    }
    auto an = a.node();
    return Tensor(out_node("slice", std::move(out_shape), std::move(out), {an},
                           [an, outer, inner, L, start, len](Node& self) {
                               if (!an->requires_grad) return;
                               an->ensure_grad();
                               for (std::int64_t o = 0; o < outer; ++o)
                                   for (std::int64_t j = 0; j < len * inner; ++j)
                                       an->grad[static_cast<std::size_t>((o * L + start) * inner + j)] +=
                                           self.grad[static_cast<std::size_t>(o * len * inner + j)];
                           }));
}

Tensor gather_rows(const Tensor& a, const std::vector<std::int64_t>& idx) {
    require_rank("gather_rows", a, 2);
    const auto R = a.dim(0), C = a.dim(1);
    for (auto i : idx) {
        if (i < 0 || i >= R) {
            throw shape_error("gather_rows: index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(R) + ")");
        }
    }
    const auto& av = a.values();
    std::vector<double> out(idx.size() * static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(av.begin() + idx[i] * C, C, out.begin() + static_cast<std::int64_t>(i) * C);
    }
    auto an = a.node();
    auto idx_copy = idx;
    return Tensor(out_node("gather_rows", Shape{static_cast<std::int64_t>(idx.size()), C},
                           std::move(out), {an}, [an, idx_copy, C](Node& self) {
                               if (!an->requires_grad) return;
                               an->ensure_grad();
                               for (std::size_t i = 0; i < idx_copy.size(); ++i)
                                   for (std::int64_t c = 0; c < C; ++c)
                                       an->grad[static_cast<std::size_t>(idx_copy[i] * C + c)] +=
                                           self.grad[i * static_cast<std::size_t>(C) +
                                                     static_cast<std::size_t>(c)];
                           }));
}

Tensor linear_resample_rows(const Tensor& a, std::int64_t new_rows) {
    require_rank("linear_resample_rows", a, 2);
    if (new_rows < 1) throw value_error("linear_resample_rows: new_rows must be >= 1");
    const auto R = a.dim(0), C = a.dim(1);
    // Per output row: source rows lo/hi and the hi-side weight.
    std::vector<std::int64_t> lo(static_cast<std::size_t>(new_rows));
    std::vector<std::int64_t> hi(static_cast<std::size_t>(new_rows));
    std::vector<double> w(static_cast<std::size_t>(new_rows));
    for (std::int64_t i = 0; i < new_rows; ++i) {
        double pos = 0.0;
        if (new_rows > 1 && R > 1)
            pos = static_cast<double>(i) * static_cast<double>(R - 1) / static_cast<double>(new_rows - 1);
        auto l = static_cast<std::int64_t>(pos);
        if (l >= R - 1) l = R - 1;
        auto h = (l < R - 1) ? l + 1 : l;
        lo[static_cast<std::size_t>(i)] = l;
        hi[static_cast<std::size_t>(i)] = h;
        w[static_cast<std::size_t>(i)] = pos - static_cast<double>(l);
    }
    const auto& av = a.values();
    std::vector<double> out(static_cast<std::size_t>(new_rows * C));
    for (std::int64_t i = 0; i < new_rows; ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        const double* rl = &av[static_cast<std::size_t>(lo[static_cast<std::size_t>(i)] * C)];
        const double* rh = &av[static_cast<std::size_t>(hi[static_cast<std::size_t>(i)] * C)];
        double* ro = &out[static_cast<std::size_t>(i * C)];
        for (std::int64_t c = 0; c < C; ++c) ro[c] = (1.0 - wi) * rl[c] + wi * rh[c];
    }
    auto an = a.node();
    return Tensor(out_node("linear_resample_rows", Shape{new_rows, C}, std::move(out), {an},
                           [an, lo, hi, w, C, new_rows](Node& self) {
                               if (!an->requires_grad) return;
                               an->ensure_grad();
                               for (std::int64_t i = 0; i < new_rows; ++i) {
                                   const double wi = w[static_cast<std::size_t>(i)];
                                   const double* gi = &self.grad[static_cast<std::size_t>(i * C)];
                                   double* gl =
                                       &an->grad[static_cast<std::size_t>(lo[static_cast<std::size_t>(i)] * C)];
                                   double* gh =
                                       &an->grad[static_cast<std::size_t>(hi[static_cast<std::size_t>(i)] * C)];
                                   for (std::int64_t c = 0; c < C; ++c) {
                                       gl[c] += (1.0 - wi) * gi[c];
                                       gh[c] += wi * gi[c];
                                   }
                               }
                           }));
}

// ---------------------------------------------------------------------------
// arithmetic

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    auto an = a.node();
    auto bn = b.node();
    return Tensor(out_node("add", a.shape(), std::move(out), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad) accum(*an, self.grad);
        if (bn->requires_grad) accum(*bn, self.grad);
    }));
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    auto an = a.node();
    auto bn = b.node();
    return Tensor(out_node("sub", a.shape(), std::move(out), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad) accum(*an, self.grad);
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
        }
    }));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    auto an = a.node();
    auto bn = b.node();
    return Tensor(out_node("mul", a.shape(), std::move(out), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                an->grad[i] += self.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                bn->grad[i] += self.grad[i] * an->value[i];
        }
    }));
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double s) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * s;
    auto an = a.node();
    return Tensor(out_node("scale", a.shape(), std::move(out), {an}, [an, s](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * s;
    }));
}

Tensor add_scalar(const Tensor& a, double s) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + s;
    auto an = a.node();
    return Tensor(out_node("add_scalar", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (an->requires_grad) accum(*an, self.grad);
    }));
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
    require_rank("add_rowvec", a, 2);
    require_rank("add_rowvec", v, 1);
    const auto R = a.dim(0), C = a.dim(1);
    if (v.dim(0) != C) {
        throw shape_error("add_rowvec: vector length " + std::to_string(v.dim(0)) +
                          " does not match row width " + std::to_string(C));
    }
    const auto& av = a.values();
    const auto& vv = v.values();
    std::vector<double> out(av.size());
    for (std::int64_t r = 0; r < R; ++r)
        for (std::int64_t c = 0; c < C; ++c)
            out[static_cast<std::size_t>(r * C + c)] =
                av[static_cast<std::size_t>(r * C + c)] + vv[static_cast<std::size_t>(c)];
    auto an = a.node();
    auto vn = v.node();
    return Tensor(out_node("add_rowvec", a.shape(), std::move(out), {an, vn}, [an, vn, R, C](Node& self) {
        if (an->requires_grad) accum(*an, self.grad);
        if (vn->requires_grad) {
            vn->ensure_grad();
            for (std::int64_t r = 0; r < R; ++r)
                for (std::int64_t c = 0; c < C; ++c)
                    vn->grad[static_cast<std::size_t>(c)] +=
                        self.grad[static_cast<std::size_t>(r * C + c)];
        }
    }));
}

// ---------------------------------------------------------------------------
// nonlinearities

Tensor relu(const Tensor& a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool on = av[i] > 0.0;
        trace_branch(on ? 1u : 0u);
        out[i] = on ? av[i] : 0.0;
    }
    auto an = a.node();
    return Tensor(out_node("relu", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (an->value[i] > 0.0) an->grad[i] += self.grad[i];
    }));
}

Tensor tanh_op(const Tensor& a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
    auto an = a.node();
    return Tensor(out_node("tanh", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            an->grad[i] += self.grad[i] * (1.0 - y * y);
        }
    }));
}

Tensor sigmoid(const Tensor& a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = av[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    auto an = a.node();
    return Tensor(out_node("sigmoid", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            an->grad[i] += self.grad[i] * y * (1.0 - y);
        }
    }));
}

Tensor exp_op(const Tensor& a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(av[i]);
    auto an = a.node();
    return Tensor(out_node("exp", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            an->grad[i] += self.grad[i] * self.value[i];
    }));
}

Tensor log_op(const Tensor& a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(av[i]);
    auto an = a.node();
    return Tensor(out_node("log", a.shape(), std::move(out), {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            an->grad[i] += self.grad[i] / an->value[i];
    }));
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (!(lo <= hi)) throw value_error("clamp: lo must be <= hi");
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = av[i];
        const std::uint64_t region = x < lo ? 0u : (x > hi ? 2u : 1u);
        trace_branch(region);
        out[i] = region == 0u ? lo : (region == 2u ? hi : x);
    }
    auto an = a.node();
    return Tensor(out_node("clamp", a.shape(), std::move(out), {an}, [an, lo, hi](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double x = an->value[i];
            if (x >= lo && x <= hi) an->grad[i] += self.grad[i];
        }
    }));
}

Tensor softmax_lastdim(const Tensor& a) {
    if (a.rank() < 1) throw shape_error("softmax_lastdim: scalar input");
    const auto C = a.shape().back();
    const auto rows = a.numel() / C;
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* x = &av[static_cast<std::size_t>(r * C)];
        double* y = &out[static_cast<std::size_t>(r * C)];
        double mx = x[0];
        for (std::int64_t c = 1; c < C; ++c) mx = std::max(mx, x[c]);
        double z = 0.0;
        for (std::int64_t c = 0; c < C; ++c) {
            y[c] = std::exp(x[c] - mx);
            z += y[c];
        }
        for (std::int64_t c = 0; c < C; ++c) y[c] /= z;
    }
    auto an = a.node();
    return Tensor(out_node("softmax", a.shape(), std::move(out), {an}, [an, rows, C](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r) {
            const double* y = &self.value[static_cast<std::size_t>(r * C)];
            const double* g = &self.grad[static_cast<std::size_t>(r * C)];
            double dot = 0.0;
            for (std::int64_t c = 0; c < C; ++c) dot += y[c] * g[c];
            double* gx = &an->grad[static_cast<std::size_t>(r * C)];
            for (std::int64_t c = 0; c < C; ++c) gx[c] += y[c] * (g[c] - dot);
        }
    }));
}

// ---------------------------------------------------------------------------
// reductions

Tensor sum_all(const Tensor& a) {
    const auto& av = a.values();
    double s = 0.0;
    for (double x : av) s += x;
    auto an = a.node();
    return Tensor(out_node("sum", Shape{}, {s}, {an}, [an](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (auto& g : an->grad) g += self.grad[0];
    }));
}

Tensor mean_all(const Tensor& a) {
    const auto n = static_cast<double>(a.numel());
    const auto& av = a.values();
    double s = 0.0;
    for (double x : av) s += x;
    auto an = a.node();
    return Tensor(out_node("mean", Shape{}, {s / n}, {an}, [an, n](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (auto& g : an->grad) g += self.grad[0] / n;
    }));
}

// ---------------------------------------------------------------------------
// composite / special

Tensor huber_mean(const Tensor& a, const Tensor& b, double delta) {
    require_same_shape("huber_mean", a, b);
    if (delta <= 0.0) throw value_error("huber_mean: delta must be positive");
    const auto& av = a.values();
    const auto& bv = b.values();
    const auto n = static_cast<double>(av.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double r = av[i] - bv[i];
        const bool quad = std::abs(r) < delta;
        trace_branch(quad ? 1u : 0u);
        loss += quad ? 0.5 * r * r / delta : std::abs(r) - 0.5 * delta;
    }
    auto an = a.node();
    auto bn = b.node();
    return Tensor(out_node("huber_mean", Shape{}, {loss / n}, {an, bn}, [an, bn, delta, n](Node& self) {
        const double g = self.grad[0] / n;
        const bool ga = an->requires_grad, gb = bn->requires_grad;
        if (ga) an->ensure_grad();
        if (gb) bn->ensure_grad();
        for (std::size_t i = 0; i < an->value.size(); ++i) {
            const double r = an->value[i] - bn->value[i];
            const double d = std::abs(r) < delta ? r / delta : (r > 0.0 ? 1.0 : -1.0);
            if (ga) an->grad[i] += g * d;
            if (gb) bn->grad[i] -= g * d;
        }
    }));
}

Tensor min_scalar(const Tensor& a, double m) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool keep = av[i] <= m;
        trace_branch(keep ? 1u : 0u);
        out[i] = keep ? av[i] : m;
    }
    auto an = a.node();
    return Tensor(out_node("min_scalar", a.shape(), std::move(out), {an}, [an, m](Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (an->value[i] <= m) an->grad[i] += self.grad[i];
    }));
}

Tensor normalize_rows3(const Tensor& a, const Tensor& rest, double eps) {
    if (a.rank() < 1 || a.shape().back() != 3) {
        throw shape_error("normalize_rows3: last dim must be 3, got " + shape_str(a.shape()));
    }
    require_same_shape("normalize_rows3", a, rest);
    if (rest.requires_grad()) {
        throw value_error("normalize_rows3: rest-pose fallback must not require grad");
    }
    const auto nvec = a.numel() / 3;
    const auto& av = a.values();
    const auto& rv = rest.values();
    std::vector<double> out(av.size());
    std::vector<double> norms(static_cast<std::size_t>(nvec));
    for (std::int64_t i = 0; i < nvec; ++i) {
        const double* x = &av[static_cast<std::size_t>(3 * i)];
        const double nrm = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        norms[static_cast<std::size_t>(i)] = nrm;
        const bool degenerate = nrm < eps;
        trace_branch(degenerate ? 1u : 0u);
        double* y = &out[static_cast<std::size_t>(3 * i)];
        if (degenerate) {
            const double* r = &rv[static_cast<std::size_t>(3 * i)];
            y[0] = r[0];
            y[1] = r[1];
            y[2] = r[2];
        } else {
            y[0] = x[0] / nrm;
            y[1] = x[1] / nrm;
            y[2] = x[2] / nrm;
        }
    }
    auto an = a.node();
    auto rn = rest.node();
    return Tensor(out_node("normalize_rows3", a.shape(), std::move(out), {an, rn},
                           [an, nvec, norms, eps](Node& self) {
                               if (!an->requires_grad) return;
                               an->ensure_grad();
                               for (std::int64_t i = 0; i < nvec; ++i) {
                                   const double nrm = norms[static_cast<std::size_t>(i)];
                                   if (nrm < eps) continue;  // fallback row: no gradient
                                   const double* y = &self.value[static_cast<std::size_t>(3 * i)];
                                   const double* g = &self.grad[static_cast<std::size_t>(3 * i)];
                                   const double dot = y[0] * g[0] + y[1] * g[1] + y[2] * g[2];
                                   double* gx = &an->grad[static_cast<std::size_t>(3 * i)];
                                   for (int k = 0; k < 3; ++k) gx[k] += (g[k] - y[k] * dot) / nrm;
                               }
                           }));
}

Tensor dilated_causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
                             std::int64_t dilation) {
    require_rank("dilated_causal_conv1d", x, 2);
    require_rank("dilated_causal_conv1d", w, 3);
    require_rank("dilated_causal_conv1d", b, 1);
    if (dilation < 1) throw value_error("dilated_causal_conv1d: dilation must be >= 1");
    const auto T = x.dim(0), Cin = x.dim(1);
    const auto K = w.dim(0), Cout = w.dim(2);
    if (w.dim(1) != Cin) {
        throw shape_error("dilated_causal_conv1d: weight expects " + std::to_string(w.dim(1)) +
                          " input channels, input has " + std::to_string(Cin));
    }
    if (b.dim(0) != Cout) {
        throw shape_error("dilated_causal_conv1d: bias length " + std::to_string(b.dim(0)) +
                          " does not match " + std::to_string(Cout) + " output channels");
    }
    const auto& xv = x.values();
    const auto& wv = w.values();
    const auto& bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(T * Cout));
    for (std::int64_t t = 0; t < T; ++t) {
        double* yr = &out[static_cast<std::size_t>(t * Cout)];
        for (std::int64_t co = 0; co < Cout; ++co) yr[co] = bv[static_cast<std::size_t>(co)];
        for (std::int64_t k = 0; k < K; ++k) {
            const auto src = t - k * dilation;
            if (src < 0) continue;  // causal left zero-padding
            const double* xr = &xv[static_cast<std::size_t>(src * Cin)];
            const double* wk = &wv[static_cast<std::size_t>(k * Cin * Cout)];
            for (std::int64_t ci = 0; ci < Cin; ++ci) {
                const double xs = xr[ci];
                if (xs == 0.0) continue;
                const double* wrow = &wk[static_cast<std::size_t>(ci * Cout)];
                for (std::int64_t co = 0; co < Cout; ++co) yr[co] += xs * wrow[co];
            }
        }
    }
    auto xn = x.node();
    auto wn = w.node();
    auto bn = b.node();
    return Tensor(out_node(
        "dilated_causal_conv1d", Shape{T, Cout}, std::move(out), {xn, wn, bn},
        [xn, wn, bn, T, Cin, K, Cout, dilation](Node& self) {
            const auto& g = self.grad;
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::int64_t t = 0; t < T; ++t)
                    for (std::int64_t co = 0; co < Cout; ++co)
                        bn->grad[static_cast<std::size_t>(co)] +=
                            g[static_cast<std::size_t>(t * Cout + co)];
            }
            const bool gx = xn->requires_grad, gw = wn->requires_grad;
            if (gx) xn->ensure_grad();
            if (gw) wn->ensure_grad();
            if (!gx && !gw) return;
            for (std::int64_t t = 0; t < T; ++t) {
                const double* gr = &g[static_cast<std::size_t>(t * Cout)];
                for (std::int64_t k = 0; k < K; ++k) {
                    const auto src = t - k * dilation;
                    if (src < 0) continue;
                    const double* wk = &wn->value[static_cast<std::size_t>(k * Cin * Cout)];
                    const double* xr = &xn->value[static_cast<std::size_t>(src * Cin)];
                    for (std::int64_t ci = 0; ci < Cin; ++ci) {
                        const double* wrow = &wk[static_cast<std::size_t>(ci * Cout)];
                        double acc = 0.0;
                        for (std::int64_t co = 0; co < Cout; ++co) acc += gr[co] * wrow[co];
                        if (gx) xn->grad[static_cast<std::size_t>(src * Cin + ci)] += acc;
                        if (gw) {
                            double* gwrow = &wn->grad[static_cast<std::size_t>((k * Cin + ci) * Cout)];
                            const double xs = xr[ci];
                            for (std::int64_t co = 0; co < Cout; ++co) gwrow[co] += xs * gr[co];
                        }
                    }
                }
            }
        }));
}

}  // namespace cogs
