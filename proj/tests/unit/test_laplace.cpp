#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tcgreen/error.hpp"
#include "tcgreen/kernel_catalog.hpp"
#include "tcgreen/laplace.hpp"
#include "tcgreen/quadrature.hpp"
#include "tcgreen/special_functions.hpp"

using namespace tcgreen;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

double levy_stable_half(double t, double tau) { return std::exp(-tau * tau / (4.0 * t)) / (kSqrtPi * std::sqrt(t)); }

struct Case {
    SubordinatorModel model;
    InversionMethod method;
};

std::vector<Case> evaluator_cases() {
    return {{SubordinatorModel::stable(0.5), InversionMethod::Talbot},
            {SubordinatorModel::stable(0.3), InversionMethod::Talbot},
            {SubordinatorModel::gamma(1.0, 1.0), InversionMethod::Talbot},
            {SubordinatorModel::two_index_stable(0.25, 0.75), InversionMethod::Talbot},
            {SubordinatorModel::tempered_stable(0.5, 1.0), InversionMethod::Talbot},
            {SubordinatorModel::distributed_order(), InversionMethod::Talbot},
            {SubordinatorModel::truncated_stable(0.5, 1.0), InversionMethod::DeHoog},
            {SubordinatorModel::gamma(1.0, 1.0), InversionMethod::DeHoog}};
}

}  // namespace

TEST_CASE("forward transform examples") {
    CHECK(forward_laplace([](double) { return 1.0; }, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    const auto st = SubordinatorModel::stable(0.5);
    CHECK(forward_laplace([&](double t) { return kernel_k(st, t); }, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    const auto ga = SubordinatorModel::gamma(1.0, 1.0);
    CHECK(forward_laplace([&](double t) { return kernel_k(ga, t); }, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(forward_laplace([](double) { return 1.0; }, 0.0), DomainError);
}

TEST_CASE("inversion of elementary transforms") {
    auto inv = [](std::complex<double> s) { return 1.0 / s; };
    auto inv2 = [](std::complex<double> s) { return 1.0 / (s * s); };
    // 32 contour nodes; roundoff grows like e^{2M/5} times machine epsilon
    CHECK(std::abs(invert_laplace_talbot(inv, 3.0, 32) - 1.0) <= 1e-8);
    CHECK(std::abs(invert_laplace_talbot(inv2, 2.0, 32) - 2.0) <= 1e-7);
    CHECK(std::abs(invert_laplace_talbot(inv, 3.0) - 1.0) <= 1e-7);
    // 16 terms: weights reach ~1e8, so rounding of F alone costs a few 1e-8; 12 terms meet 1e-8
    CHECK(std::abs(invert_laplace_stehfest([](double s) { return 1.0 / s; }, 3.0) - 1.0) <= 1e-7);
    CHECK(std::abs(invert_laplace_stehfest([](double s) { return 1.0 / s; }, 3.0, 12) - 1.0) <= 1e-8);
    CHECK(std::abs(invert_laplace_stehfest([](double s) { return 1.0 / (s * s); }, 2.0) - 2.0) <= 1e-7);

    const double expected = std::exp(-0.25) / kSqrtPi;
    const double talbot = invert_laplace_talbot([](std::complex<double> s) { return std::exp(-std::sqrt(s)) / std::sqrt(s); }, 1.0, 32);
    CHECK(talbot == doctest::Approx(expected).epsilon(1e-10));
    const double gs = invert_laplace_stehfest([](double s) { return std::exp(-std::sqrt(s)) / std::sqrt(s); }, 1.0);
    CHECK(gs == doctest::Approx(expected).epsilon(1e-4));

    CHECK(std::abs(invert_laplace_dehoog(inv, 3.0) - 1.0) <= 1e-8);
    CHECK(std::abs(invert_laplace_dehoog(inv2, 2.0) - 2.0) <= 1e-7);
    CHECK(invert_laplace_dehoog([](std::complex<double> s) { return std::exp(-std::sqrt(s)) / std::sqrt(s); }, 1.0) ==
          doctest::Approx(expected).epsilon(1e-8));
    CHECK(invert_laplace_dehoog([](std::complex<double> s) { return 1.0 / (s + 1.0); }, 4.0) ==
          doctest::Approx(std::exp(-4.0)).epsilon(1e-8));

    CHECK_THROWS_AS(invert_laplace_talbot(inv, 0.0), DomainError);
    CHECK_THROWS_AS(invert_laplace_dehoog(inv, -1.0), DomainError);
}

TEST_CASE("Gaver-Stehfest weights") {
    const auto v = stehfest_weights(16);
    REQUIRE(v.size() == 16);
    double sum = 0.0;
    for (double w : v) sum += w;
    CHECK(std::abs(sum) <= 1e-6);  // transform of a delta at the origin inverts to zero
    CHECK_THROWS_AS(stehfest_weights(26), NumericError);
    CHECK_THROWS_AS(stehfest_weights(15), NumericError);
    CHECK_THROWS_AS((InversionSettings{16, 8}.validate()), ParameterError);
    CHECK_THROWS_AS((InversionSettings{16, 48, 2}.validate()), ParameterError);
}

TEST_CASE("method names round-trip") {
    for (auto m : {InversionMethod::GaverStehfest, InversionMethod::Talbot, InversionMethod::DeHoog, InversionMethod::ClosedForm})
        CHECK(inversion_method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(inversion_method_from_string("euler"), ParameterError);
}

TEST_CASE("stable density examples and closed form agreement") {
    const auto st = SubordinatorModel::stable(0.5);
    const DensityEvaluator closed(st, InversionMethod::ClosedForm);
    const DensityEvaluator talbot(st, InversionMethod::Talbot);
    CHECK(density_G(closed, 1.0, 0.0) == doctest::Approx(1.0 / kSqrtPi).epsilon(1e-14));
    CHECK(density_G(closed, 1.0, 1.0) == doctest::Approx(std::exp(-0.25) / kSqrtPi).epsilon(1e-13));
    CHECK(density_G(talbot, 1.0, 0.0) == doctest::Approx(1.0 / kSqrtPi).epsilon(1e-7));
    CHECK(density_G(talbot, 1.0, 1.0) == doctest::Approx(std::exp(-0.25) / kSqrtPi).epsilon(1e-7));
    for (double t : {0.1, 1.0, 10.0})
        for (double tau : {0.0, 0.5, 1.0, 2.0, 5.0}) {
            INFO("t=", t, " tau=", tau);
            CHECK(density_G(closed, t, tau) == doctest::Approx(levy_stable_half(t, tau)).epsilon(1e-12));
        }
    for (double alpha : {0.3, 0.7}) {
        const auto m = SubordinatorModel::stable(alpha);
        const DensityEvaluator c(m, InversionMethod::ClosedForm), n(m, InversionMethod::Talbot);
        for (double t : {0.1, 1.0, 10.0})
            for (double tau : {0.0, 0.5, 1.0, 2.0}) {
                INFO("alpha=", alpha, " t=", t, " tau=", tau);
                CHECK(std::abs(density_G(c, t, tau) - density_G(n, t, tau)) <= 1e-6);
            }
    }
}

TEST_CASE("rescaled contour keeps large tau over t accurate") {
    // index above one half: Re Phi turns negative on the far contour nodes
    for (double alpha : {0.75, 0.9}) {
        const auto m = SubordinatorModel::stable(alpha);
        const DensityEvaluator c(m, InversionMethod::ClosedForm), n(m, InversionMethod::Talbot);
        for (double t : {0.01, 0.1, 1.0})
            for (double tau : {0.5, 2.75, 10.0, 60.0}) {
                INFO("alpha=", alpha, " t=", t, " tau=", tau);
                const double exact = density_G(c, t, tau);
                const DensityValue d = n.density(t, tau);
                CHECK(std::abs(d.raw - exact) <= 1e-9 + 1e-6 * exact);
            }
    }
}

TEST_CASE("line inversion agrees with the closed form") {
    for (double alpha : {0.3, 0.5, 0.75}) {
        const auto m = SubordinatorModel::stable(alpha);
        const DensityEvaluator c(m, InversionMethod::ClosedForm), n(m, InversionMethod::DeHoog);
        for (double t : {0.1, 1.0, 10.0})
            for (double tau : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                INFO("alpha=", alpha, " t=", t, " tau=", tau);
                const double exact = density_G(c, t, tau);
                CHECK(std::abs(n.density(t, tau).raw - exact) <= 1e-9 + 1e-6 * exact);
            }
    }
}

TEST_CASE("density at tau zero is the kernel") {
    // K(lambda) e^{-0 Phi} = K(lambda) inverts to k(t)
    for (const Case& c : evaluator_cases()) {
        const DensityEvaluator ev(c.model, c.method);
        for (double t : {0.3, 0.5, 2.0, 5.0}) {
            INFO(c.model.describe(), " ", to_string(c.method), " t=", t);
            const double k = kernel_k(c.model, t);
            // fixed Talbot with 48 nodes bottoms out near 1e-8 absolute
            const double floor = c.method == InversionMethod::Talbot ? 5e-8 : 1e-9;
            CHECK(std::abs(ev.density(t, 0.0).raw - k) <= floor + 1e-6 * k);
        }
    }
}

TEST_CASE("truncated stable methods agree away from the kink") {
    const auto m = SubordinatorModel::truncated_stable(0.5, 1.0);
    const DensityEvaluator line(m, InversionMethod::DeHoog), gs(m, InversionMethod::GaverStehfest);
    for (double t : {0.3, 0.5})
        for (double tau : {0.0, 0.5, 1.0}) {
            INFO("t=", t, " tau=", tau);
            CHECK(std::abs(line.density(t, tau).raw - gs.density(t, tau).raw) <= 2e-3);
        }
}

TEST_CASE("gamma density agrees across inversion methods") {
    const auto ga = SubordinatorModel::gamma(1.0, 1.0);
    const DensityEvaluator gs(ga, InversionMethod::GaverStehfest), tb(ga, InversionMethod::Talbot);
    CHECK(std::abs(density_G(gs, 1.0, 0.0) - density_G(tb, 1.0, 0.0)) <= 1e-5);
    CHECK(density_G(tb, 1.0, 0.0) > 0.0);
}

TEST_CASE("unsupported method and family combinations") {
    CHECK_THROWS_AS(DensityEvaluator(SubordinatorModel::gamma(1.0, 1.0), InversionMethod::ClosedForm), UnsupportedError);
    CHECK_THROWS_AS(DensityEvaluator(SubordinatorModel::truncated_stable(0.5, 1.0), InversionMethod::Talbot), UnsupportedError);
    CHECK_NOTHROW(DensityEvaluator(SubordinatorModel::truncated_stable(0.5, 1.0), InversionMethod::DeHoog));
    const DensityEvaluator ev(SubordinatorModel::stable(0.5));
    CHECK_THROWS_AS(ev.density(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ev.density(1.0, -1.0), DomainError);
}

TEST_CASE("densities integrate to one") {
    for (const Case& c : evaluator_cases()) {
        const DensityEvaluator ev(c.model, c.method);
        for (double t : {0.5, 1.0, 5.0}) {
            INFO(c.model.describe(), " t=", t);
            const TimeSlice sl = ev.slice(t);
            const double mass = integrate_exp_tail([&](double tau) { return sl.density(tau).value; }, 0.0, 1e-10).value;
            CHECK(std::abs(mass - 1.0) <= 1e-4);
        }
    }
}

TEST_CASE("clamping stays small on the standard grid") {
    for (const Case& c : evaluator_cases()) {
        if (c.method != InversionMethod::Talbot) continue;
        const DensityEvaluator ev(c.model, c.method);
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const TimeSlice sl = ev.slice(0.1 * std::pow(100.0, i / 20.0));
            for (int j = 0; j <= 40; ++j) {
                const DensityValue d = sl.density(0.25 * j);
                CHECK(d.value >= 0.0);
                if (d.clamped) worst = std::max(worst, -d.raw);
            }
        }
        INFO(c.model.describe());
        CHECK(worst <= 1e-7);
    }
}

TEST_CASE("cumulative matches trapezoid of the density in t") {
    for (const Case& c : evaluator_cases()) {
        if (c.method != InversionMethod::Talbot) continue;
        const DensityEvaluator ev(c.model, c.method);
        for (double tau : {0.5, 2.0}) {
            INFO(c.model.describe(), " tau=", tau);
            // For tau > 0 the density vanishes to all orders at t = 0, so a geometric grid from 1e-4 suffices.
            const double T = 3.0;
            const int n = 600;
            double prev_t = 0.0, prev_g = 0.0, acc = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double t = 1e-4 * std::pow(T / 1e-4, double(i) / n);
                const double g = ev.density(t, tau).raw;
                acc += 0.5 * (g + prev_g) * (t - prev_t);
                prev_t = t;
                prev_g = g;
            }
            CHECK(ev.cumulative(T, tau) == doctest::Approx(acc).epsilon(1e-4));
        }
    }
}

TEST_CASE("cumulative integral of the stable density diverges like N") {
    const auto st = SubordinatorModel::stable(0.5);
    const DensityEvaluator ev(st);
    double prev = 0.0;
    for (double T : {10.0, 100.0, 1000.0}) {
        const double v = ev.cumulative(T, 1.0);
        CHECK(v > prev);
        CHECK(v > 0.5 * normalization_N(st, T));
        prev = v;
    }
    // closed form: int_0^T e^{-1/(4s)}/sqrt(pi s) ds
    const double exact =
        integrate_ts([](double s) { return s > 0.0 ? levy_stable_half(s, 1.0) : 0.0; }, 0.0, 100.0, 1e-13).value;
    CHECK(ev.cumulative(100.0, 1.0) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("double Laplace identity") {
    {
        const DensityEvaluator ev(SubordinatorModel::stable(0.5));
        const auto r = double_laplace_residual(ev, 1.0, 1.0);
        CHECK(r.expected == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.residual <= 1e-12);
    }
    {
        const DensityEvaluator ev(SubordinatorModel::gamma(1.0, 1.0));
        const auto r = double_laplace_residual(ev, 1.0, 2.0);
        const double l2 = std::log(2.0);
        CHECK(r.expected == doctest::Approx(l2 / (l2 + 2.0)).epsilon(1e-14));
        CHECK(r.residual <= 1e-10);
        CHECK(double_laplace_residual(ev, 1.0, 1e8).quadrature < 1e-8);
    }
    for (const Case& c : evaluator_cases()) {
        const DensityEvaluator ev(c.model, c.method);
        for (double lam : {0.5, 1.0, 2.0})
            for (double p : {0.5, 1.0, 2.0}) {
                INFO(c.model.describe(), " lambda=", lam, " p=", p);
                CHECK(double_laplace_residual(ev, lam, p).residual <= 1e-10);
            }
    }
    CHECK_THROWS_AS(double_laplace_residual(DensityEvaluator(SubordinatorModel::stable(0.5)), 0.0, 1.0), DomainError);
}

TEST_CASE("tau transform of the stable density is Mittag-Leffler") {
    // int_0^inf e^{-p tau} G_t(tau) dtau for the stable law equals E_alpha(-p t^alpha)
    const DensityEvaluator ev(SubordinatorModel::stable(0.5), InversionMethod::ClosedForm);
    const TimeSlice sl = ev.slice(1.0);
    const double v = integrate_exp_tail([&](double tau) { return std::exp(-tau) * sl.density(tau).value; }, 0.0).value;
    CHECK(v == doctest::Approx(mittag_leffler(0.5, -1.0)).epsilon(1e-9));
}
