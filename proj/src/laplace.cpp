#include "tcgreen/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tcgreen/error.hpp"
#include "tcgreen/quadrature.hpp"
#include "tcgreen/special_functions.hpp"

namespace tcgreen {

namespace {
constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;
}  // namespace

std::string to_string(InversionMethod m) {
    switch (m) {
        case InversionMethod::GaverStehfest: return "stehfest";
        case InversionMethod::Talbot: return "talbot";
        case InversionMethod::DeHoog: return "dehoog";
        case InversionMethod::ClosedForm: return "closed_form";
    }
    return "unknown";
}

InversionMethod inversion_method_from_string(const std::string& s) {
    if (s == "stehfest" || s == "gaver_stehfest") return InversionMethod::GaverStehfest;
    if (s == "talbot") return InversionMethod::Talbot;
    if (s == "dehoog") return InversionMethod::DeHoog;
    if (s == "closed_form") return InversionMethod::ClosedForm;
    throw ParameterError("unknown inversion method '" + s + "'");
}

void InversionSettings::validate() const {
    if (stehfest_terms < 2 || stehfest_terms % 2 != 0 || stehfest_terms > 24)
        throw NumericError("Gaver-Stehfest needs an even number of terms no larger than 24; "
                           "more terms overflow double precision, use fewer");
    if (talbot_nodes < 16) throw ParameterError("Talbot inversion needs at least 16 contour nodes");
    if (dehoog_terms < 4 || dehoog_terms > 60) throw ParameterError("DeHoog inversion needs between 4 and 60 terms");
}

// ---------------------------------------------------------------- forward transform

double forward_laplace(const std::function<double(double)>& f, double lambda, std::span<const double> breakpoints) {
    if (!(lambda > 0.0)) throw DomainError("forward_laplace: lambda must be positive");
    const double t_max = std::log(1e16) / lambda;
    std::vector<double> cuts{0.0, t_max, std::min(1.0 / lambda, t_max)};
    for (double b : breakpoints)
        if (b > 0.0 && b < t_max) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto integrand = [&](double t) { return t > 0.0 ? std::exp(-lambda * t) * f(t) : 0.0; };
    // First piece in the log variable t = t1 e^{-u}, which turns power and log singularities at 0 into tails.
    const double t1 = cuts[1];
    const QuadResult head = integrate_exp_tail(
        [&](double u) {
            const double t = t1 * std::exp(-u);
            return t > 0.0 ? integrand(t) * t : 0.0;
        },
        0.0, 1e-12);
    double total = head.value;
    double err = head.error;
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
        const QuadResult q = integrate_ts(integrand, cuts[i], cuts[i + 1], 1e-12);
        total += q.value;
        err += q.error;
    }
    if (!std::isfinite(total) || err > 1e-8 * std::max(1.0, std::abs(total))) {
        std::ostringstream os;
        os << "forward_laplace: quadrature did not converge at lambda=" << lambda << " (value " << total
           << ", error estimate " << err << ")";
        throw NumericError(os.str());
    }
    return total;
}

// ---------------------------------------------------------------- inversion engines

namespace {

// Extended precision keeps the alternating weights accurate to the last double digit.
std::vector<long double> stehfest_weights_ld(int n) {
    InversionSettings{n, 16, 20}.validate();
    const int half = n / 2;
    std::vector<long double> fact(2 * n + 1, 1.0L);
    for (int i = 1; i <= 2 * n; ++i) fact[i] = fact[i - 1] * i;
    std::vector<long double> v(n);
    for (int k = 1; k <= n; ++k) {
        long double s = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            s += std::pow(static_cast<long double>(j), half) * fact[2 * j] /
                 (fact[half - j] * fact[j] * fact[j - 1] * fact[k - j] * fact[2 * j - k]);
        }
        v[k - 1] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * s;
        if (!std::isfinite(static_cast<double>(v[k - 1])))
            throw NumericError("Gaver-Stehfest weights overflow; use fewer terms");
    }
    return v;
}

}  // namespace

std::vector<double> stehfest_weights(int n) {
    const std::vector<long double> v = stehfest_weights_ld(n);
    return {v.begin(), v.end()};
}

double invert_laplace_stehfest(const RealTransform& F, double t, int n_terms) {
    if (!(t > 0.0)) throw DomainError("invert_laplace: t must be positive");
    const std::vector<long double> v = stehfest_weights_ld(n_terms);
    const double a = kLn2 / t;
    long double s = 0.0L;
    for (int k = 1; k <= n_terms; ++k) s += v[k - 1] * static_cast<long double>(F(k * a));
    return static_cast<double>(a * s);
}

namespace {

struct TalbotNode {
    std::complex<double> s;      // contour point divided by r
    std::complex<double> coeff;  // (1 + i sigma), 1/2 for the real-axis node
};

std::vector<TalbotNode> talbot_nodes(int M) {
    std::vector<TalbotNode> nodes;
    nodes.push_back({{1.0, 0.0}, {0.5, 0.0}});
    for (int k = 1; k < M; ++k) {
        const double th = k * kPi / M;
        const double cot = std::cos(th) / std::sin(th);
        const double sigma = th + (th * cot - 1.0) * cot;
        nodes.push_back({{th * cot, th}, {1.0, sigma}});
    }
    return nodes;
}

}  // namespace

double invert_laplace_talbot(const ComplexTransform& F, double t, int M) {
    if (!(t > 0.0)) throw DomainError("invert_laplace: t must be positive");
    InversionSettings{16, M, 20}.validate();
    const double r = 2.0 * M / (5.0 * t);
    double sum = 0.0;
    for (const TalbotNode& n : talbot_nodes(M)) {
        const std::complex<double> s = r * n.s;
        sum += std::real(std::exp(t * s) * F(s) * n.coeff);
    }
    return r / M * sum;
}

namespace {

// Line parameters for a single t: half period T and abscissa gamma, with the discretization
// error of the Fourier series held near 1e-12 relative.
constexpr double kDeHoogPeriodFactor = 2.0;
constexpr double kDeHoogTolerance = 1e-12;

double dehoog_period(double t) { return kDeHoogPeriodFactor * t; }
double dehoog_shift(double t) { return -std::log(kDeHoogTolerance) / (2.0 * dehoog_period(t)); }

// Real part of the continued fraction built from a[0..2M] by the quotient-difference scheme,
// evaluated at z = exp(i pi t / T); a[0] must already be halved.
double dehoog_fraction(std::vector<std::complex<double>> a, double t, double T) {
    using C = std::complex<double>;
    // Trailing coefficients that underflowed carry no information and break the recursion.
    std::size_t used = a.size();
    while (used > 1 && std::abs(a[used - 1]) < 1e-290) --used;
    if (used < 3) return a[0].real();
    const int M = static_cast<int>((used - 1) / 2);
    const int n = 2 * M + 1;
    std::vector<C> d(n);
    std::vector<C> q(n), e(n, C(0.0));
    for (int i = 0; i + 1 < n; ++i) q[i] = a[i + 1] / a[i];
    d[0] = a[0];
    d[1] = -q[0];
    for (int r = 1; r <= M; ++r) {
        const int len_e = n - 2 * r;
        for (int i = 0; i < len_e; ++i) e[i] = q[i + 1] - q[i] + e[i + 1];
        d[2 * r] = -e[0];
        if (r == M) break;
        const int len_q = len_e - 1;
        for (int i = 0; i < len_q; ++i) q[i] = q[i + 1] * e[i + 1] / e[i];
        d[2 * r + 1] = -q[0];
    }
    const C z = std::exp(C(0.0, kPi * t / T));
    C A_prev = 0.0, A = d[0], B_prev = 1.0, B = 1.0;
    for (int k = 1; k < n; ++k) {
        const C A_next = A + d[k] * z * A_prev;
        const C B_next = B + d[k] * z * B_prev;
        A_prev = A;
        A = A_next;
        B_prev = B;
        B = B_next;
    }
    // Tail of the fraction replaced by its remainder estimate.
    const C h = 0.5 * (1.0 + (d[n - 2] - d[n - 1]) * z);
    const C R = -h * (1.0 - std::sqrt(1.0 + d[n - 1] * z / (h * h)));
    const C A_end = A + R * A_prev;
    const C B_end = B + R * B_prev;
    return (A_end / B_end).real();
}

}  // namespace

double invert_laplace_dehoog(const ComplexTransform& F, double t, int terms) {
    if (!(t > 0.0)) throw DomainError("invert_laplace: t must be positive");
    InversionSettings{16, 48, terms}.validate();
    const double T = dehoog_period(t);
    const double g = dehoog_shift(t);
    std::vector<std::complex<double>> a(2 * terms + 1);
    for (int k = 0; k <= 2 * terms; ++k) a[k] = F({g, k * kPi / T});
    a[0] *= 0.5;
    return std::exp(g * t) / T * dehoog_fraction(std::move(a), t, T);
}

// ---------------------------------------------------------------- density evaluator

DensityEvaluator::DensityEvaluator(SubordinatorModel model, InversionMethod method, InversionSettings settings)
    : model_(std::move(model)), method_(method), settings_(settings) {
    settings_.validate();
    if (method_ == InversionMethod::ClosedForm && !std::holds_alternative<StableFamily>(model_.family()))
        throw UnsupportedError("closed-form density is available for the stable family only");
    if ((method_ == InversionMethod::Talbot || method_ == InversionMethod::ClosedForm) && !model_.capabilities().complex_K)
        throw UnsupportedError(model_.describe() +
                               ": no analytic continuation into the left half plane for Talbot inversion; use dehoog or stehfest");
}

TimeSlice DensityEvaluator::slice(double t) const {
    if (!(t > 0.0)) throw DomainError("density: t must be positive");
    TimeSlice sl;
    sl.t_ = t;
    sl.method_ = method_;
    if (const auto* st = std::get_if<StableFamily>(&model_.family())) sl.stable_alpha_ = st->alpha;
    if (method_ == InversionMethod::GaverStehfest) {
        const std::vector<double> v = stehfest_weights(settings_.stehfest_terms);
        const double a = kLn2 / t;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double lam = (k + 1) * a;
            sl.lambda_.emplace_back(lam);
            sl.K_.emplace_back(laplace_K(model_, lam));
            sl.phi_.emplace_back(lam * sl.K_.back().real());
            sl.exponent_.emplace_back(0.0);
            sl.coeff_.emplace_back(a * v[k]);
        }
        return sl;
    }
    if (method_ == InversionMethod::DeHoog) {
        const double T = dehoog_period(t);
        const double g = dehoog_shift(t);
        sl.line_period_ = T;
        sl.line_shift_ = g;
        for (int k = 0; k <= 2 * settings_.dehoog_terms; ++k) {
            const std::complex<double> s(g, k * kPi / T);
            sl.lambda_.push_back(s);
            sl.K_.push_back(laplace_K(model_, s));
            sl.phi_.push_back(s * sl.K_.back());
        }
        return sl;
    }
    // Talbot nodes; the closed-form evaluator still uses them for the cumulative integral.
    const int M = settings_.talbot_nodes;
    sl.talbot_nodes_ = M;
    sl.model_ = std::make_shared<const SubordinatorModel>(model_);
    const double r = 2.0 * M / (5.0 * t);
    for (const TalbotNode& n : talbot_nodes(M)) {
        const std::complex<double> s = r * n.s;
        sl.lambda_.push_back(s);
        sl.K_.push_back(laplace_K(model_, s));
        sl.phi_.push_back(s * sl.K_.back());
        sl.exponent_.push_back(t * s);
        sl.coeff_.push_back(r / M * n.coeff);
    }
    return sl;
}

namespace {

// On a well-resolved contour the real-axis node carries the largest term; this much slack is allowed.
constexpr double kDominanceSlack = 2.3;

double log_term(std::complex<double> coeff, std::complex<double> K, std::complex<double> e, std::complex<double> lambda,
                bool cumulative) {
    double v = std::log(std::abs(coeff * K)) + e.real();
    if (cumulative) v -= std::log(std::abs(lambda));
    return v;
}

}  // namespace

double TimeSlice::sum_dehoog(double tau, bool cumulative) const {
    // Factor out the size of the k = 0 coefficient so that deep tails do not underflow.
    const double lead = t_ * line_shift_ - tau * phi_[0].real();
    if (lead < -745.0) return 0.0;
    std::vector<std::complex<double>> a(lambda_.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const std::complex<double> e = -tau * (phi_[k] - phi_[0].real());
        a[k] = e.real() < -745.0 ? 0.0 : K_[k] * std::exp(e);
        if (cumulative) a[k] /= lambda_[k];
    }
    a[0] *= 0.5;
    return std::exp(lead) / line_period_ * dehoog_fraction(std::move(a), t_, line_period_);
}

double TimeSlice::sum(double tau, bool cumulative) const {
    if (method_ == InversionMethod::DeHoog) return sum_dehoog(tau, cumulative);
    if (method_ != InversionMethod::GaverStehfest && tau > 0.0) {
        // e^{-tau Phi} grows along the far contour when Re Phi < 0 there; the fixed nodes then under-resolve it.
        const double lead = log_term(coeff_[0], K_[0], exponent_[0] - tau * phi_[0], lambda_[0], cumulative);
        for (std::size_t k = 1; k < lambda_.size(); ++k) {
            const std::complex<double> e = exponent_[k] - tau * phi_[k];
            if (log_term(coeff_[k], K_[k], e, lambda_[k], cumulative) > lead + kDominanceSlack)
                return sum_rescaled(tau, cumulative);
        }
    }
    double s = 0.0;
    for (std::size_t k = 0; k < lambda_.size(); ++k) {
        const std::complex<double> e = exponent_[k] - tau * phi_[k];
        if (e.real() < -745.0) continue;
        std::complex<double> term = coeff_[k] * K_[k] * std::exp(e);
        if (cumulative) term /= lambda_[k];
        s += term.real();
    }
    return s;
}

double TimeSlice::sum_rescaled(double tau, bool cumulative) const {
    const std::vector<TalbotNode> nodes = talbot_nodes(talbot_nodes_);
    const double M = talbot_nodes_;
    const double r0 = 2.0 * M / (5.0 * t_);
    std::vector<std::complex<double>> terms(nodes.size());
    double lowest_lead = std::numeric_limits<double>::infinity();
    for (double r = r0; r < 1e250; r *= 1.25) {
        double lead = 0.0, largest = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const std::complex<double> s = r * nodes[k].s;
            const std::complex<double> K = laplace_K(*model_, s);
            const std::complex<double> e = t_ * s - tau * s * K;
            const std::complex<double> coeff = r / M * nodes[k].coeff;
            const double lt = log_term(coeff, K, e, s, cumulative);
            if (k == 0) lead = lt;
            largest = std::max(largest, lt);
            terms[k] = (e.real() < -745.0) ? 0.0 : coeff * K * std::exp(e) / (cumulative ? s : 1.0);
        }
        if (largest < -745.0) return 0.0;
        lowest_lead = std::min(lowest_lead, lead);
        if (largest <= lead + kDominanceSlack) {
            double total = 0.0;
            for (const auto& term : terms) total += term.real();
            return total;
        }
    }
    // The real-axis node bounds the result from above up to a modest factor.
    if (lowest_lead < -700.0) return 0.0;
    std::ostringstream os;
    os << "contour inversion cannot be resolved at t=" << t_ << ", tau=" << tau;
    throw NumericError(os.str());
}

DensityValue TimeSlice::density(double tau) const {
    if (!(tau >= 0.0)) throw DomainError("density: tau must be nonnegative");
    DensityValue d;
    if (method_ == InversionMethod::ClosedForm) {
        const double a = stable_alpha_;
        const double scale = std::pow(t_, -a);
        d.raw = scale * m_wright(a, tau * scale);
    } else {
        d.raw = sum(tau, false);
    }
    if (!std::isfinite(d.raw)) {
        std::ostringstream os;
        os << "density inversion failed at t=" << t_ << ", tau=" << tau << " (raw value " << d.raw << ")";
        throw NumericError(os.str());
    }
    d.clamped = d.raw < 0.0;
    d.value = d.clamped ? 0.0 : d.raw;
    return d;
}

double TimeSlice::cumulative(double tau) const {
    if (!(tau >= 0.0)) throw DomainError("cumulative: tau must be nonnegative");
    const double v = sum(tau, true);
    if (!std::isfinite(v)) throw NumericError("cumulative density inversion produced a non-finite value");
    return v;
}

DensityValue DensityEvaluator::density(double t, double tau) const { return slice(t).density(tau); }
double DensityEvaluator::cumulative(double T, double tau) const { return slice(T).cumulative(tau); }

double density_G(const DensityEvaluator& ev, double t, double tau) { return ev.density(t, tau).value; }
double cumulative_G(const DensityEvaluator& ev, double T, double tau) { return ev.cumulative(T, tau); }

DoubleLaplaceResult double_laplace_residual(const DensityEvaluator& ev, double lambda, double p) {
    if (!(lambda > 0.0) || !(p > 0.0)) throw DomainError("double_laplace_residual: lambda and p must be positive");
    const double K = laplace_K(ev.model(), lambda);
    const double rate = lambda * K;
    DoubleLaplaceResult r;
    r.quadrature = integrate_exp_tail([&](double tau) { return std::exp(-p * tau) * K * std::exp(-tau * rate); }, 0.0,
                                      1e-14)
                       .value;
    r.expected = K / (rate + p);
    r.residual = std::abs(r.quadrature - r.expected);
    return r;
}

}  // namespace tcgreen
