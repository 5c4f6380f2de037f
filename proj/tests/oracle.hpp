#pragma once

// Test-only oracles: central finite differences and relative-error helpers.
// These stay independent of the autodiff implementation path they check.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace testing {

/// Relative error with an absolute floor so that near-zero components are
/// judged against the floor instead of exploding.
inline double rel_err(double a, double b, double floor = 1e-3) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double step = 1e-6) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double fp = f(x);
        x[i] = saved - step;
        const double fm = f(x);
        x[i] = saved;
        grad[i] = (fp - fm) / (2.0 * step);
    }
    return grad;
}

/// Largest relative error between an analytic gradient and its
/// finite-difference estimate.
inline double max_grad_rel_err(std::span<const double> analytic,
                               std::span<const double> numeric, double floor = 1e-3) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, rel_err(analytic[i], numeric[i], floor));
    return worst;
}

} // namespace testing
