// ops.hpp - differentiable tensor operations
//
// All ops build graph nodes eagerly; gradients flow through the backprop
// closures installed here. Non-smooth ops (relu, clamp, min_scalar, huber,
// row normalization) feed their branch decisions into the active BranchTrace
// so finite-difference checks can exclude kink-crossing coordinates.
#pragma once

#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

// --- structural -------------------------------------------------------------

/// Matrix product of 2-D tensors [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Transpose of a 2-D tensor.
Tensor transpose(const Tensor& a);

/// View with a new shape; element count must match.
Tensor reshape(const Tensor& a, Shape s);

/// Concatenate along `axis`; all other dims must agree.
Tensor concat(const std::vector<Tensor>& parts, std::int64_t axis);

/// Contiguous sub-range [start, start+len) along `axis`.
Tensor slice(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t len);

/// Row gather on a 2-D tensor: out[i] = a[idx[i]]. Backward scatter-adds.
Tensor gather_rows(const Tensor& a, const std::vector<std::int64_t>& idx);

/// Endpoint-aligned linear interpolation from R to new_rows rows of a 2-D
/// tensor. new_rows == 1 takes row 0; R == 1 repeats the single row.
Tensor linear_resample_rows(const Tensor& a, std::int64_t new_rows);

// --- arithmetic -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

/// Broadcast add of a length-C vector to every row of an [R,C] tensor.
Tensor add_rowvec(const Tensor& a, const Tensor& v);

// --- nonlinearities ---------------------------------------------------------

Tensor relu(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor log_op(const Tensor& a);

/// Clamp into [lo, hi]; gradient passes on the closed interval.
Tensor clamp(const Tensor& a, double lo, double hi);

/// Softmax over the last axis (max-subtracted, numerically stable).
Tensor softmax_lastdim(const Tensor& a);

// --- reductions -------------------------------------------------------------

Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

// --- composite / special ----------------------------------------------------

/// Mean smooth-L1 loss between same-shape tensors: mean over elements of
/// 0.5 r^2 / delta for |r| < delta, |r| - delta/2 otherwise (r = a - b).
Tensor huber_mean(const Tensor& a, const Tensor& b, double delta);

/// Elementwise min against a constant: min(a, m).
Tensor min_scalar(const Tensor& a, double m);

/// Rows are 3-vectors (last dim == 3). Each is scaled to unit L2 norm;
/// rows with norm < eps return the matching row of `rest` (no gradient).
Tensor normalize_rows3(const Tensor& a, const Tensor& rest, double eps = 1e-8);

/// Causal dilated 1-D convolution over time. x is [T, Cin], w is
/// [K, Cin, Cout], b is [Cout]; out[t] = b + sum_k w[k] . x[t - k*d]
/// with zero padding left of t = 0 (k = 0 taps the current step).
Tensor dilated_causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
                             std::int64_t dilation);

}  // namespace cogs
