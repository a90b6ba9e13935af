// tensor.cpp - node lifecycle, backward traversal, guards
#include "cogs/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace cogs {

namespace detail {

namespace {
std::atomic<std::uint64_t> g_next_id{1};
}  // namespace

NodePtr make_node(Shape shape, std::vector<double> value, bool requires_grad) {
    const auto n = numel_of(shape);
    if (static_cast<std::size_t>(n) != value.size()) {
        throw shape_error("node value size " + std::to_string(value.size()) +
                          " does not match shape " + shape_str(shape));
    }
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    return node;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// factories

Tensor Tensor::zeros(Shape s, bool requires_grad) {
    auto n = numel_of(s);
    return Tensor(detail::make_node(std::move(s), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                                    requires_grad));
}

Tensor Tensor::full(Shape s, double v, bool requires_grad) {
    auto n = numel_of(s);
    return Tensor(detail::make_node(std::move(s), std::vector<double>(static_cast<std::size_t>(n), v),
                                    requires_grad));
}

Tensor Tensor::from_vector(Shape s, std::vector<double> v, bool requires_grad) {
    return Tensor(detail::make_node(std::move(s), std::move(v), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return Tensor(detail::make_node(Shape{}, std::vector<double>{v}, requires_grad));
}

Tensor Tensor::randn(Shape s, Rng& rng, double stddev, bool requires_grad) {
    auto n = numel_of(s);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.normal() * stddev;
    return Tensor(detail::make_node(std::move(s), std::move(v), requires_grad));
}

Tensor Tensor::rand_uniform(Shape s, Rng& rng, double lo, double hi, bool requires_grad) {
    auto n = numel_of(s);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor(detail::make_node(std::move(s), std::move(v), requires_grad));
}

Tensor Tensor::identity(std::int64_t n, bool requires_grad) {
    if (n <= 0) throw value_error("identity size must be positive");
    std::vector<double> v(static_cast<std::size_t>(n * n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i * n + i)] = 1.0;
    return Tensor(detail::make_node(Shape{n, n}, std::move(v), requires_grad));
}

// ---------------------------------------------------------------------------
// accessors

namespace {
const detail::Node& deref(const detail::NodePtr& n) {
    if (!n) throw value_error("operation on undefined tensor");
    return *n;
}
detail::Node& deref_mut(const detail::NodePtr& n) {
    if (!n) throw value_error("operation on undefined tensor");
    return *n;
}
}  // namespace

const Shape& Tensor::shape() const { return deref(n_).shape; }

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(deref(n_).value.size()); }

std::int64_t Tensor::dim(std::int64_t i) const {
    const auto& s = shape();
    if (i < 0) i += static_cast<std::int64_t>(s.size());
    if (i < 0 || i >= static_cast<std::int64_t>(s.size())) {
        throw shape_error("dim index " + std::to_string(i) + " out of range for " + shape_str(s));
    }
    return s[static_cast<std::size_t>(i)];
}

const std::vector<double>& Tensor::values() const { return deref(n_).value; }

std::vector<double>& Tensor::values_mut() {
    auto& node = deref_mut(n_);
    if (node.backprop) {
        throw graph_error("values_mut is only valid on leaf tensors");
    }
    return node.value;
}

double Tensor::item() const {
    const auto& node = deref(n_);
    if (node.value.size() != 1) {
        throw shape_error("item() requires a single-element tensor, got " + shape_str(node.shape));
    }
    return node.value[0];
}

double Tensor::at(const std::vector<std::int64_t>& idx) const {
    const auto& node = deref(n_);
    if (idx.size() != node.shape.size()) {
        throw shape_error("index rank " + std::to_string(idx.size()) + " does not match " +
                          shape_str(node.shape));
    }
    std::int64_t flat = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
        if (idx[d] < 0 || idx[d] >= node.shape[d]) {
            throw shape_error("index out of range in dim " + std::to_string(d));
        }
        flat = flat * node.shape[d] + idx[d];
    }
    return node.value[static_cast<std::size_t>(flat)];
}

bool Tensor::requires_grad() const { return deref(n_).requires_grad; }

bool Tensor::is_leaf() const { return !deref(n_).backprop; }

bool Tensor::has_grad() const { return !deref(n_).grad.empty(); }

const std::vector<double>& Tensor::grad() const {
    const auto& node = deref(n_);
    if (node.grad.empty()) {
        throw graph_error("gradient not populated; call backward() on a scalar that depends on this tensor");
    }
    return node.grad;
}

void Tensor::zero_grad() {
    auto& node = deref_mut(n_);
    node.grad.clear();
    node.backward_done = false;
}

Tensor Tensor::detach() const {
    const auto& node = deref(n_);
    return Tensor(detail::make_node(node.shape, node.value, false));
}

const char* Tensor::op_name() const { return deref(n_).op; }

std::uint64_t Tensor::node_id() const { return deref(n_).id; }

// ---------------------------------------------------------------------------
// backward

namespace {

// Collect the sub-graph below `root` and sort by creation id. Creation order
// is a valid topological order because ops only consume already-built nodes.
std::vector<detail::Node*> collect_topo(detail::Node* root) {
    std::vector<detail::Node*> nodes;
    std::unordered_set<detail::Node*> seen;
    std::vector<detail::Node*> stack{root};
    seen.insert(root);
    while (!stack.empty()) {
        auto* n = stack.back();
        stack.pop_back();
        nodes.push_back(n);
        for (const auto& p : n->parents) {
            if (seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const detail::Node* a, const detail::Node* b) { return a->id > b->id; });
    return nodes;
}

}  // namespace

void Tensor::backward() const {
    auto& root = deref_mut(n_);
    if (root.value.size() != 1) {
        throw graph_error("backward() requires a scalar root, got " + shape_str(root.shape));
    }
    if (!root.requires_grad) {
        throw graph_error("backward() on a tensor that does not require grad");
    }
    if (root.backward_done) {
        throw graph_error("backward() called twice on the same graph root; rebuild the graph first");
    }
    root.backward_done = true;
    root.ensure_grad();
    root.grad[0] += 1.0;
    for (auto* n : collect_topo(n_.get())) {
        if (n->backprop && !n->grad.empty()) n->backprop(*n);
    }
}

std::vector<GraphEntry> Tensor::computation_record() const {
    deref(n_);
    auto nodes = collect_topo(n_.get());
    std::reverse(nodes.begin(), nodes.end());  // oldest first
    std::vector<GraphEntry> rec;
    rec.reserve(nodes.size());
    for (const auto* n : nodes) {
        GraphEntry e;
        e.id = n->id;
        e.op = n->op;
        e.shape = n->shape;
        for (const auto& p : n->parents) e.inputs.push_back(p->id);
        rec.push_back(std::move(e));
    }
    return rec;
}

// ---------------------------------------------------------------------------
// guards

namespace {
thread_local bool g_finite_checks = false;
thread_local BranchTrace* g_branch_trace = nullptr;
}  // namespace

FiniteCheckGuard::FiniteCheckGuard(bool enabled) : prev_(g_finite_checks) {
    g_finite_checks = enabled;
}

FiniteCheckGuard::~FiniteCheckGuard() { g_finite_checks = prev_; }

bool finite_checks_enabled() { return g_finite_checks; }

void check_finite(const char* op, const std::vector<double>& v) {
    if (!g_finite_checks) return;
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw numeric_error(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

BranchTrace* active_branch_trace() { return g_branch_trace; }

BranchTraceGuard::BranchTraceGuard(BranchTrace& trace) : prev_(g_branch_trace) {
    g_branch_trace = &trace;
}

BranchTraceGuard::~BranchTraceGuard() { g_branch_trace = prev_; }

}  // namespace cogs
