#include "tcgreen/kernel_catalog.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tcgreen/error.hpp"
#include "tcgreen/quadrature.hpp"
#include "tcgreen/special_functions.hpp"

namespace tcgreen {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_index(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ParameterError(std::string(what) + " must lie in (0,1)");
}
void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be positive and finite");
}

double weight_at(const std::vector<double>& coeffs, double a) {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * a + coeffs[i];
    return v;
}

bool is_uniform(const DistributedOrderFamily& f) { return f.weight_coeffs.size() == 1 && f.weight_coeffs[0] == 1.0; }

// K for the truncated stable family from its entire power series; fine for |lambda delta| <= 2.
template <class T>
T truncated_K_series(const TruncatedStableFamily& f, T lambda) {
    const T x = lambda * f.delta;
    T sum = 0.0;
    T pw = 1.0;  // (-x)^n / n!
    for (int n = 0; n < 200; ++n) {
        const T term = pw / ((n + 1.0 - f.alpha) * (n + 1.0));
        sum += term;
        if (n > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
        pw *= -x / (n + 1.0);
    }
    return f.alpha * std::pow(f.delta, 1.0 - f.alpha) / std::tgamma(1.0 - f.alpha) * sum;
}

template <class T>
T truncated_phi_closed(const TruncatedStableFamily& f, T lambda) {
    const double a = f.alpha;
    const T g = upper_incomplete_gamma(-a, T(lambda * f.delta));
    return std::pow(lambda, a) * (1.0 - g / std::tgamma(-a)) - std::pow(f.delta, -a) / std::tgamma(1.0 - a);
}

// (lambda - 1) / (lambda log lambda), with the removable point at lambda = 1 expanded.
template <class T>
T uniform_order_K(T lambda) {
    const T L = std::log(lambda);
    if (std::abs(L) < 1e-3) {
        // (e^L - 1)/L = 1 + L/2 + L^2/6 + L^3/24 + L^4/120
        const T series = T(1.0) + L * (T(0.5) + L * (T(1.0 / 6.0) + L * (T(1.0 / 24.0) + L * T(1.0 / 120.0))));
        return series / lambda;
    }
    return (lambda - T(1.0)) / (lambda * L);
}

}  // namespace

SubordinatorModel::SubordinatorModel(Family f) : family_(std::move(f)) {
    std::visit(Overloaded{
                   [](const StableFamily& s) { require_index(s.alpha, "alpha"); },
                   [](const GammaFamily& g) {
                       require_positive(g.a, "a");
                       require_positive(g.b, "b");
                   },
                   [](const TruncatedStableFamily& s) {
                       require_index(s.alpha, "alpha");
                       require_positive(s.delta, "delta");
                   },
                   [](const TwoIndexStableFamily& s) {
                       require_index(s.alpha, "alpha");
                       require_index(s.beta, "beta");
                   },
                   [](const TemperedStableFamily& s) {
                       require_index(s.alpha, "alpha");
                       require_positive(s.gamma, "gamma");
                   },
                   [this](const DistributedOrderFamily& d) {
                       if (d.weight_coeffs.empty()) throw ParameterError("distributed order weight is empty");
                       const GaussLegendre gl = gauss_legendre(64, 0.0, 1.0);
                       order_nodes_ = gl.nodes;
                       order_weights_.resize(gl.nodes.size());
                       double mass = 0.0;
                       for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                           const double mu = weight_at(d.weight_coeffs, gl.nodes[i]);
                           if (mu < 0.0) throw ParameterError("distributed order weight must be nonnegative");
                           order_weights_[i] = gl.weights[i] * mu;
                           mass += order_weights_[i];
                       }
                       if (!(mass > 0.0)) throw ParameterError("distributed order weight has zero mass");
                   },
               },
               family_);
}

SubordinatorModel SubordinatorModel::stable(double alpha) { return SubordinatorModel(StableFamily{alpha}); }
SubordinatorModel SubordinatorModel::gamma(double a, double b) { return SubordinatorModel(GammaFamily{a, b}); }
SubordinatorModel SubordinatorModel::truncated_stable(double alpha, double delta) {
    return SubordinatorModel(TruncatedStableFamily{alpha, delta});
}
SubordinatorModel SubordinatorModel::two_index_stable(double alpha, double beta) {
    return SubordinatorModel(TwoIndexStableFamily{alpha, beta});
}
SubordinatorModel SubordinatorModel::tempered_stable(double alpha, double gamma) {
    return SubordinatorModel(TemperedStableFamily{alpha, gamma});
}
SubordinatorModel SubordinatorModel::distributed_order(std::vector<double> weight_coeffs) {
    return SubordinatorModel(DistributedOrderFamily{std::move(weight_coeffs)});
}

std::string SubordinatorModel::name() const {
    return std::visit(Overloaded{
                          [](const StableFamily&) { return std::string("stable"); },
                          [](const GammaFamily&) { return std::string("gamma"); },
                          [](const TruncatedStableFamily&) { return std::string("truncated_stable"); },
                          [](const TwoIndexStableFamily&) { return std::string("two_index_stable"); },
                          [](const TemperedStableFamily&) { return std::string("tempered_stable"); },
                          [](const DistributedOrderFamily&) { return std::string("distributed_order"); },
                      },
                      family_);
}

std::string SubordinatorModel::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(Overloaded{
                   [&](const StableFamily& s) { os << "Stable(" << s.alpha << ")"; },
                   [&](const GammaFamily& g) { os << "Gamma(" << g.a << "," << g.b << ")"; },
                   [&](const TruncatedStableFamily& s) { os << "TruncatedStable(" << s.alpha << "," << s.delta << ")"; },
                   [&](const TwoIndexStableFamily& s) { os << "TwoIndexStable(" << s.alpha << "," << s.beta << ")"; },
                   [&](const TemperedStableFamily& s) { os << "TemperedStable(" << s.alpha << "," << s.gamma << ")"; },
                   [&](const DistributedOrderFamily& d) {
                       os << "DistributedOrder(";
                       for (std::size_t i = 0; i < d.weight_coeffs.size(); ++i) os << (i ? "," : "") << d.weight_coeffs[i];
                       os << ")";
                   },
               },
               family_);
    return os.str();
}

Capabilities SubordinatorModel::capabilities() const {
    Capabilities c;
    if (std::holds_alternative<TruncatedStableFamily>(family_)) c.complex_K = false;  // right half plane only
    if (const auto* d = std::get_if<DistributedOrderFamily>(&family_)) {
        c.k_closed = false;
        c.N_closed = false;
        c.sampler = false;
        if (!is_uniform(*d)) {
            c.K_closed = false;
            c.phi_closed = false;
        }
    }
    return c;
}

// ---------------------------------------------------------------- Phi and K

double laplace_K(const SubordinatorModel& model, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("laplace_K: lambda must be positive");
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return std::pow(lambda, s.alpha - 1.0); },
                          [&](const GammaFamily& g) { return g.a * std::log1p(lambda / g.b) / lambda; },
                          [&](const TruncatedStableFamily& s) {
                              if (lambda * s.delta <= 2.0) return truncated_K_series(s, lambda);
                              return truncated_phi_closed(s, lambda) / lambda;
                          },
                          [&](const TwoIndexStableFamily& s) {
                              return std::pow(lambda, s.alpha - 1.0) + std::pow(lambda, s.beta - 1.0);
                          },
                          [&](const TemperedStableFamily& s) { return std::pow(lambda + s.gamma, s.alpha - 1.0); },
                          [&](const DistributedOrderFamily& d) {
                              if (is_uniform(d)) return uniform_order_K(lambda);
                              double v = 0.0;
                              const auto& a = model.order_nodes();
                              const auto& w = model.order_weights();
                              for (std::size_t i = 0; i < a.size(); ++i) v += w[i] * std::pow(lambda, a[i] - 1.0);
                              return v;
                          },
                      },
                      model.family());
}

double phi(const SubordinatorModel& model, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("phi: lambda must be nonnegative");
    if (lambda == 0.0) return 0.0;
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return std::pow(lambda, s.alpha); },
                          [&](const GammaFamily& g) { return g.a * std::log1p(lambda / g.b); },
                          [&](const TruncatedStableFamily& s) {
                              if (lambda * s.delta <= 2.0) return lambda * truncated_K_series(s, lambda);
                              return truncated_phi_closed(s, lambda);
                          },
                          [&](const TwoIndexStableFamily& s) { return std::pow(lambda, s.alpha) + std::pow(lambda, s.beta); },
                          [&](const auto&) { return lambda * laplace_K(model, lambda); },
                      },
                      model.family());
}

std::complex<double> laplace_K(const SubordinatorModel& model, std::complex<double> lambda) {
    using C = std::complex<double>;
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return std::pow(lambda, s.alpha - 1.0); },
                          [&](const GammaFamily& g) { return g.a * std::log(C(1.0) + lambda / g.b) / lambda; },
                          [&](const TruncatedStableFamily& s) -> C {
                              if (std::abs(lambda * s.delta) <= 2.0) return truncated_K_series(s, lambda);
                              if (!(lambda.real() > 0.0))
                                  throw UnsupportedError(
                                      "truncated stable transform grows like exp(-delta lambda) in the left half plane; "
                                      "it is only evaluated for Re lambda > 0");
                              return truncated_phi_closed(s, lambda) / lambda;
                          },
                          [&](const TwoIndexStableFamily& s) {
                              return std::pow(lambda, s.alpha - 1.0) + std::pow(lambda, s.beta - 1.0);
                          },
                          [&](const TemperedStableFamily& s) { return std::pow(lambda + s.gamma, s.alpha - 1.0); },
                          [&](const DistributedOrderFamily& d) {
                              if (is_uniform(d)) return uniform_order_K(lambda);
                              C v = 0.0;
                              const auto& a = model.order_nodes();
                              const auto& w = model.order_weights();
                              for (std::size_t i = 0; i < a.size(); ++i) v += w[i] * std::pow(lambda, a[i] - 1.0);
                              return v;
                          },
                      },
                      model.family());
}

std::complex<double> phi(const SubordinatorModel& model, std::complex<double> lambda) {
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return std::pow(lambda, s.alpha); },
                          [&](const GammaFamily& g) { return g.a * std::log(1.0 + lambda / g.b); },
                          [&](const TwoIndexStableFamily& s) { return std::pow(lambda, s.alpha) + std::pow(lambda, s.beta); },
                          [&](const auto&) { return lambda * laplace_K(model, lambda); },
                      },
                      model.family());
}

// ---------------------------------------------------------------- kernel, Levy density, N

double kernel_k(const SubordinatorModel& model, double t) {
    if (!(t > 0.0)) throw DomainError("kernel_k: t must be positive");
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return std::pow(t, -s.alpha) / std::tgamma(1.0 - s.alpha); },
                          [&](const GammaFamily& g) { return g.a * upper_incomplete_gamma(0.0, g.b * t); },
                          [&](const TruncatedStableFamily& s) {
                              if (t >= s.delta) return 0.0;
                              return (std::pow(t, -s.alpha) - std::pow(s.delta, -s.alpha)) / std::tgamma(1.0 - s.alpha);
                          },
                          [&](const TwoIndexStableFamily& s) {
                              return std::pow(t, -s.alpha) / std::tgamma(1.0 - s.alpha) +
                                     std::pow(t, -s.beta) / std::tgamma(1.0 - s.beta);
                          },
                          [&](const TemperedStableFamily& s) {
                              return std::pow(t, -s.alpha) * std::exp(-s.gamma * t) / std::tgamma(1.0 - s.alpha);
                          },
                          [&](const DistributedOrderFamily&) {
                              double v = 0.0;
                              const auto& a = model.order_nodes();
                              const auto& w = model.order_weights();
                              for (std::size_t i = 0; i < a.size(); ++i) v += w[i] * std::pow(t, -a[i]) / std::tgamma(1.0 - a[i]);
                              return v;
                          },
                      },
                      model.family());
}

double levy_density(const SubordinatorModel& model, double tau) {
    if (!(tau > 0.0)) throw DomainError("levy_density: tau must be positive");
    auto stable_part = [tau](double a) { return a * std::pow(tau, -1.0 - a) / std::tgamma(1.0 - a); };
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return stable_part(s.alpha); },
                          [&](const GammaFamily& g) { return g.a * std::exp(-g.b * tau) / tau; },
                          [&](const TruncatedStableFamily& s) { return tau <= s.delta ? stable_part(s.alpha) : 0.0; },
                          [&](const TwoIndexStableFamily& s) { return stable_part(s.alpha) + stable_part(s.beta); },
                          [&](const TemperedStableFamily& s) {
                              return (s.alpha * std::pow(tau, -1.0 - s.alpha) + s.gamma * std::pow(tau, -s.alpha)) *
                                     std::exp(-s.gamma * tau) / std::tgamma(1.0 - s.alpha);
                          },
                          [&](const DistributedOrderFamily&) {
                              double v = 0.0;
                              const auto& a = model.order_nodes();
                              const auto& w = model.order_weights();
                              for (std::size_t i = 0; i < a.size(); ++i) v += w[i] * stable_part(a[i]);
                              return v;
                          },
                      },
                      model.family());
}

double normalization_N(const SubordinatorModel& model, double T) {
    if (!(T >= 0.0)) throw DomainError("normalization_N: T must be nonnegative");
    if (T == 0.0) return 0.0;
    auto stable_N = [T](double a) { return std::pow(T, 1.0 - a) / std::tgamma(2.0 - a); };
    return std::visit(Overloaded{
                          [&](const StableFamily& s) { return stable_N(s.alpha); },
                          [&](const GammaFamily& g) {
                              const double bt = g.b * T;
                              return g.a * (T * upper_incomplete_gamma(0.0, bt) - std::expm1(-bt) / g.b);
                          },
                          [&](const TruncatedStableFamily& s) {
                              const double m = std::min(T, s.delta);
                              return (std::pow(m, 1.0 - s.alpha) / (1.0 - s.alpha) - std::pow(s.delta, -s.alpha) * m) /
                                     std::tgamma(1.0 - s.alpha);
                          },
                          [&](const TwoIndexStableFamily& s) { return stable_N(s.alpha) + stable_N(s.beta); },
                          [&](const TemperedStableFamily& s) {
                              return std::pow(s.gamma, s.alpha - 1.0) * boost::math::gamma_p(1.0 - s.alpha, s.gamma * T);
                          },
                          [&](const DistributedOrderFamily&) {
                              double v = 0.0;
                              const auto& a = model.order_nodes();
                              const auto& w = model.order_weights();
                              for (std::size_t i = 0; i < a.size(); ++i) v += w[i] * stable_N(a[i]);
                              return v;
                          },
                      },
                      model.family());
}

std::vector<double> kernel_breakpoints(const SubordinatorModel& model) {
    if (const auto* s = std::get_if<TruncatedStableFamily>(&model.family())) return {s->delta};
    return {};
}

namespace {

// Leading power of the kernel singularity at 0, used for the substitution t = s^p.
double leading_index(const SubordinatorModel& model) {
    return std::visit(Overloaded{
                          [](const StableFamily& s) { return s.alpha; },
                          [](const TruncatedStableFamily& s) { return s.alpha; },
                          [](const TwoIndexStableFamily& s) { return std::max(s.alpha, s.beta); },
                          [](const TemperedStableFamily& s) { return s.alpha; },
                          [](const auto&) { return 0.0; },
                      },
                      model.family());
}

}  // namespace

double normalization_N_quadrature(const SubordinatorModel& model, double T) {
    if (!(T >= 0.0)) throw DomainError("normalization_N: T must be nonnegative");
    if (T == 0.0) return 0.0;
    const double p = 1.0 / (1.0 - leading_index(model));
    std::vector<double> cuts{0.0};
    for (double b : kernel_breakpoints(model))
        if (b < T) cuts.push_back(b);
    cuts.push_back(T);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::pow(cuts[i], 1.0 / p);
        const double hi = std::pow(cuts[i + 1], 1.0 / p);
        auto integrand = [&](double s) {
            const double t = std::pow(s, p);
            if (t <= 0.0) return 0.0;  // underflow at the singular end; the piece has no width
            return kernel_k(model, t) * p * std::pow(s, p - 1.0);
        };
        const QuadResult q = integrate_ts(integrand, lo, hi, 1e-12);
        if (!std::isfinite(q.value)) throw NumericError("normalization_N: quadrature produced a non-finite value");
        if (q.error > 1e-6 * std::max(1.0, std::abs(q.value)))
            throw NumericError("normalization_N: quadrature did not converge (error estimate " + std::to_string(q.error) + ")");
        total += q.value;
    }
    return total;
}

AdmissibilityReport check_admissibility(const SubordinatorModel& model, const AdmissibilityProbe& probe) {
    AdmissibilityReport r;
    const double k1 = laplace_K(model, 1.0);
    const double p1 = phi(model, 1.0);
    const double f = probe.h_factor;
    r.h_ok[0] = laplace_K(model, probe.lambda_lo) > f * k1;
    r.h_ok[1] = laplace_K(model, probe.lambda_hi) < k1 / f;
    r.h_ok[2] = phi(model, probe.lambda_lo) < p1 / f;
    r.h_ok[3] = phi(model, probe.lambda_hi) > f * p1;

    r.a1_estimate = std::numeric_limits<double>::infinity();
    for (double lam : probe.a1_lambdas)
        r.a1_estimate = std::min(r.a1_estimate, normalization_N(model, probe.s0 / lam) / laplace_K(model, lam));

    r.a2_max_deviation = 0.0;
    for (double t : probe.a2_times)
        for (double eps : probe.a2_eps) {
            const double ratio = normalization_N(model, t * (1.0 + eps)) / normalization_N(model, t);
            r.a2_max_deviation = std::max(r.a2_max_deviation, std::abs(ratio - 1.0));
        }

    r.verdict = r.h_ok[0] && r.h_ok[1] && r.h_ok[2] && r.h_ok[3] && r.a1_estimate > 0.0 &&
                r.a2_max_deviation < probe.a2_bound;
    return r;
}

}  // namespace tcgreen
