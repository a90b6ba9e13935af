// grad_check.hpp - finite-difference gradient verification
#pragma once

#include <functional>
#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

struct GradCheckReport {
    double max_rel_error = 0.0;       // over checked coordinates
    std::int64_t checked = 0;         // coordinates compared
    std::vector<std::int64_t> excluded;  // kink-crossing coordinates skipped
};

/// Compares the analytic gradient of scalar-valued `fn` at `x` against central
/// finite differences. Relative error per coordinate is
///   |analytic - central| / max(1, |central|).
/// Coordinates whose +eps / -eps evaluations take different sides of any
/// non-smooth branch (relu, clamp, min, huber region, normalization guard)
/// are excluded and listed in the report.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& x,
                           double eps = 1e-5);

/// Gradient check for a parameterized scalar loss: one analytic backward pass
/// populates grads for every listed leaf parameter, then each coordinate is
/// perturbed in place and the loss re-evaluated. Reports are parallel to
/// `params`. Parameter grads are cleared on return.
std::vector<GradCheckReport> grad_check_params(const std::function<Tensor()>& loss_fn,
                                               std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace cogs
