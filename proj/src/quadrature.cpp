#include "tcgreen/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <stdexcept>

#include "tcgreen/error.hpp"

namespace tcgreen {

namespace bq = boost::math::quadrature;

QuadResult integrate_gk(const RealFn& f, double a, double b, double rel_tol, unsigned max_depth) {
    QuadResult r;
    if (a == b) return r;
    try {
        r.value = bq::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &r.error);
    } catch (const std::exception& e) {
        throw NumericError(std::string("Gauss-Kronrod quadrature failed: ") + e.what());
    }
    return r;
}

QuadResult integrate_ts(const RealFn& f, double a, double b, double rel_tol) {
    thread_local bq::tanh_sinh<double> integrator;
    QuadResult r;
    if (a == b) return r;
    try {
        double l1 = 0.0;
        r.value = integrator.integrate(f, a, b, rel_tol, &r.error, &l1);
    } catch (const std::exception& e) {
        throw NumericError(std::string("tanh-sinh quadrature failed: ") + e.what());
    }
    return r;
}

QuadResult integrate_exp_tail(const RealFn& f, double a, double rel_tol) {
    thread_local bq::exp_sinh<double> integrator;
    QuadResult r;
    try {
        double l1 = 0.0;
        r.value = integrator.integrate([&](double u) { return f(a + u); }, rel_tol, &r.error, &l1);
    } catch (const std::exception& e) {
        throw NumericError(std::string("exp-sinh quadrature failed: ") + e.what());
    }
    return r;
}

namespace {

template <unsigned N>
GaussLegendre gl_fixed(double a, double b) {
    using G = bq::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    GaussLegendre out;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            out.nodes.push_back(mid);
            out.weights.push_back(half * w[i]);
            continue;
        }
        out.nodes.push_back(mid - half * x[i]);
        out.weights.push_back(half * w[i]);
        out.nodes.push_back(mid + half * x[i]);
        out.weights.push_back(half * w[i]);
    }
    return out;
}

}  // namespace

GaussLegendre gauss_legendre(int n, double a, double b) {
    switch (n) {
        case 16: return gl_fixed<16>(a, b);
        case 32: return gl_fixed<32>(a, b);
        case 64: return gl_fixed<64>(a, b);
        default: throw ParameterError("gauss_legendre: supported orders are 16, 32, 64");
    }
}

}  // namespace tcgreen
