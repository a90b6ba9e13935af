// tensor.hpp - dense double-precision tensors with reverse-mode differentiation
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cogs/common.hpp"
#include "cogs/rng.hpp"

namespace cogs {

class Tensor;

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first accumulation
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // adds contributions into parents' grads
    const char* op = "leaf";
    std::uint64_t id = 0;
    bool requires_grad = false;
    bool backward_done = false;

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(Shape shape, std::vector<double> value, bool requires_grad);

}  // namespace detail

/// One entry of the computation record behind a tensor: the op that produced a
/// node plus the ids of its inputs, listed in topological (creation) order.
struct GraphEntry {
    std::uint64_t id = 0;
    const char* op = "leaf";
    std::vector<std::uint64_t> inputs;
    Shape shape;
};

/// Immutable-by-convention value handle over a graph node. Copies share the
/// node. Values are only mutated through values_mut() on leaves (optimizer
/// updates), never while a graph referencing them is still to be traversed.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape s, bool requires_grad = false);
    static Tensor full(Shape s, double v, bool requires_grad = false);
    static Tensor from_vector(Shape s, std::vector<double> v, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor randn(Shape s, Rng& rng, double stddev = 1.0, bool requires_grad = false);
    static Tensor rand_uniform(Shape s, Rng& rng, double lo, double hi, bool requires_grad = false);
    static Tensor identity(std::int64_t n, bool requires_grad = false);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const;
    std::int64_t rank() const { return static_cast<std::int64_t>(shape().size()); }
    std::int64_t numel() const;
    std::int64_t dim(std::int64_t i) const;

    const std::vector<double>& values() const;
    /// Leaf-only in-place access for optimizer updates and loaders.
    std::vector<double>& values_mut();
    double item() const;
    double at(const std::vector<std::int64_t>& idx) const;

    bool requires_grad() const;
    bool is_leaf() const;
    bool has_grad() const;
    const std::vector<double>& grad() const;
    void zero_grad();
    /// Value copy sharing no graph history.
    Tensor detach() const;

    /// Reverse-mode pass from a scalar. Accumulates into leaf grads. A second
    /// call on the same node without rebuilding the graph is an error.
    void backward() const;

    /// Topologically ordered record of the sub-graph that produced this node.
    std::vector<GraphEntry> computation_record() const;

    const char* op_name() const;
    std::uint64_t node_id() const;

    detail::NodePtr node() const { return n_; }
    explicit Tensor(detail::NodePtr n) : n_(std::move(n)) {}

private:
    detail::NodePtr n_;
};

/// While enabled (scoped), every op output is checked for NaN/Inf and the
/// first offending op raises numeric_error naming itself.
class FiniteCheckGuard {
public:
    explicit FiniteCheckGuard(bool enabled = true);
    ~FiniteCheckGuard();
    FiniteCheckGuard(const FiniteCheckGuard&) = delete;
    FiniteCheckGuard& operator=(const FiniteCheckGuard&) = delete;

private:
    bool prev_;
};

bool finite_checks_enabled();
void check_finite(const char* op, const std::vector<double>& v);

/// Records which side of every non-smooth branch (relu sign, clamp, min,
/// normalization guard) an evaluation took. grad_check compares digests of
/// the two finite-difference evaluations and excludes coordinates whose
/// perturbation crossed a kink.
class BranchTrace {
public:
    void feed(std::uint64_t bits) { digest_ = fnv1a64(&bits, sizeof(bits), digest_); }
    std::uint64_t digest() const { return digest_; }

private:
    std::uint64_t digest_ = 0xcbf29ce484222325ull;
};

BranchTrace* active_branch_trace();

class BranchTraceGuard {
public:
    explicit BranchTraceGuard(BranchTrace& trace);
    ~BranchTraceGuard();
    BranchTraceGuard(const BranchTraceGuard&) = delete;
    BranchTraceGuard& operator=(const BranchTraceGuard&) = delete;

private:
    BranchTrace* prev_;
};

}  // namespace cogs
