// grad_check.cpp
#include "cogs/grad_check.hpp"

#include <cmath>

namespace cogs {

namespace {

// Evaluates fn at x with one coordinate shifted, recording branch decisions.
double probe(const std::function<Tensor(const Tensor&)>& fn, const Tensor& x, std::int64_t coord,
             double shift, std::uint64_t* digest) {
    auto xp = x.detach();
    xp.values_mut()[static_cast<std::size_t>(coord)] += shift;
    BranchTrace trace;
    double y;
    {
        BranchTraceGuard guard(trace);
        auto out = fn(xp);
        if (out.numel() != 1) throw value_error("grad_check: fn must be scalar-valued");
        y = out.item();
    }
    *digest = trace.digest();
    return y;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& x,
                           double eps) {
    if (eps <= 0.0) throw value_error("grad_check: eps must be positive");

    // Analytic pass on a fresh differentiable copy of x.
    auto xd = Tensor::from_vector(x.shape(), x.values(), /*requires_grad=*/true);
    auto y = fn(xd);
    if (y.numel() != 1) throw value_error("grad_check: fn must be scalar-valued");
    y.backward();
    const auto& analytic = xd.grad();

    GradCheckReport report;
    const auto n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        std::uint64_t dplus = 0, dminus = 0;
        const double yp = probe(fn, x, i, +eps, &dplus);
        const double ym = probe(fn, x, i, -eps, &dminus);
        if (dplus != dminus) {
            report.excluded.push_back(i);  // perturbation crossed a kink
            continue;
        }
        const double central = (yp - ym) / (2.0 * eps);
        const double rel = std::abs(analytic[static_cast<std::size_t>(i)] - central) /
                           std::max(1.0, std::abs(central));
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.checked;
    }
    return report;
}

namespace {

// Evaluates loss_fn with one coordinate of `param` shifted in place, recording
// branch decisions, then restores the original value.
double probe_param(const std::function<Tensor()>& loss_fn, Tensor& param, std::int64_t coord,
                   double shift, std::uint64_t* digest) {
    auto& vals = param.values_mut();
    const double saved = vals[static_cast<std::size_t>(coord)];
    vals[static_cast<std::size_t>(coord)] = saved + shift;
    BranchTrace trace;
    double y;
    {
        BranchTraceGuard guard(trace);
        auto out = loss_fn();
        if (out.numel() != 1) throw value_error("grad_check_params: loss must be scalar-valued");
        y = out.item();
    }
    param.values_mut()[static_cast<std::size_t>(coord)] = saved;
    *digest = trace.digest();
    return y;
}

}  // namespace

std::vector<GradCheckReport> grad_check_params(const std::function<Tensor()>& loss_fn,
                                               std::vector<Tensor>& params, double eps) {
    if (eps <= 0.0) throw value_error("grad_check_params: eps must be positive");
    for (auto& p : params) {
        if (!p.requires_grad()) throw value_error("grad_check_params: params must require grad");
        p.zero_grad();
    }

    // One analytic pass fills every parameter's grad buffer.
    auto loss = loss_fn();
    if (loss.numel() != 1) throw value_error("grad_check_params: loss must be scalar-valued");
    loss.backward();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.push_back(p.grad());

    std::vector<GradCheckReport> reports(params.size());
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& param = params[pi];
        auto& report = reports[pi];
        const auto n = param.numel();
        for (std::int64_t i = 0; i < n; ++i) {
            std::uint64_t dplus = 0, dminus = 0;
            const double yp = probe_param(loss_fn, param, i, +eps, &dplus);
            const double ym = probe_param(loss_fn, param, i, -eps, &dminus);
            if (dplus != dminus) {
                report.excluded.push_back(i);
                continue;
            }
            const double central = (yp - ym) / (2.0 * eps);
            const double rel = std::abs(analytic[pi][static_cast<std::size_t>(i)] - central) /
                               std::max(1.0, std::abs(central));
            report.max_rel_error = std::max(report.max_rel_error, rel);
            ++report.checked;
        }
    }
    for (auto& p : params) p.zero_grad();
    return reports;
}

}  // namespace cogs
