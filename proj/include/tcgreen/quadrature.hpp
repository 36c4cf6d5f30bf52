#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tcgreen {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

using RealFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval.
QuadResult integrate_gk(const RealFn& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 12);

/// Tanh-sinh on a finite interval; tolerates integrable endpoint singularities.
QuadResult integrate_ts(const RealFn& f, double a, double b, double rel_tol = 1e-12);

/// Integral over [a, inf) for integrands with at least exponential decay.
QuadResult integrate_exp_tail(const RealFn& f, double a, double rel_tol = 1e-12);

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n, double a, double b);

}  // namespace tcgreen
