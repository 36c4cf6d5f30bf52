#include <doctest.h>

#include <cmath>
#include <vector>

#include "tcgreen/error.hpp"
#include "tcgreen/fractional_dynamics.hpp"
#include "tcgreen/special_functions.hpp"

using namespace tcgreen;

namespace {

Field bump(const Grid& g, double width) {
    return sample_field(g, [=](std::span<const double> y) {
        double r2 = 0.0;
        for (double c : y) r2 += c * c;
        return std::exp(-0.5 * r2 / (width * width));
    });
}

double continuum_bump(std::span<const double> y, double width) {
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    return std::exp(-0.5 * r2 / (width * width));
}

const SubordinatorModel kStable = SubordinatorModel::stable(0.5);

// The default experiment: 64^3 lattice, unit Gaussian jumps, bump of width 0.4 at the origin.
struct DefaultExperiment {
    Grid grid{};
    JumpKernel kernel = JumpKernel::gaussian(grid, 1.0);
    Field f = bump(grid, 0.4);
    Point x{0.0, 0.0, 0.0};
};

}  // namespace

TEST_CASE("subordination of scalars") {
    const DensityEvaluator ev(kStable);
    CHECK(subordinate([](double) { return 2.5; }, ev, 0.7) == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(subordinate([](double tau) { return std::exp(-tau); }, ev, 1.0) == doctest::Approx(0.427584).epsilon(1e-6));
    for (double t : {0.1, 3.0, 50.0}) {
        const double ml = mittag_leffler(0.5, -std::sqrt(t));
        CHECK(subordinate([](double tau) { return std::exp(-tau); }, ev, t) == doctest::Approx(ml).epsilon(1e-6));
    }
    CHECK(subordinate([](double tau) { return tau + 3.0; }, ev, 0.0) == 3.0);
    CHECK_THROWS_AS(subordinate([](double) { return 1.0; }, ev, -1.0), DomainError);

    SubordinationSettings strict;
    strict.weight_tolerance = 1e-15;
    CHECK_THROWS_AS(subordinate([](double) { return 1.0; }, ev, 1.0, strict), NormalizationError);
    SubordinationSettings even;
    even.nodes = 400;
    CHECK_THROWS_AS(subordinate([](double) { return 1.0; }, ev, 1.0, even), ParameterError);
}

TEST_CASE("subordination rules integrate the density to one for every family") {
    for (const auto& model : {SubordinatorModel::gamma(1.0, 1.0), SubordinatorModel::truncated_stable(0.5, 1.0),
                              SubordinatorModel::two_index_stable(0.25, 0.75), SubordinatorModel::tempered_stable(0.6, 1.0),
                              SubordinatorModel::distributed_order()}) {
        INFO(model.describe());
        const auto method = model.capabilities().complex_K ? InversionMethod::Talbot : InversionMethod::DeHoog;
        const DensityEvaluator ev(model, method);
        for (double t : {0.5, 2.0}) CHECK(std::abs(SubordinationRule::build(ev, t).weight_sum - 1.0) <= 1e-6);
    }
}

TEST_CASE("subordinated densities keep unit mass and match the field form") {
    const Grid g{3, 16, 0.5};
    const auto a = JumpKernel::gaussian(g, 1.0);
    const Field delta = delta_field(g, g.nearest_site(Point{0.0, 0.0, 0.0}));
    const DensityEvaluator ev(kStable);
    for (double t : {0.5, 2.0}) {
        const Field spectral = subordinate_semigroup(a, delta, ev, t);
        CHECK(std::abs(spectral.mass() - 1.0) <= 1e-6);
        const Field generic = subordinate([&](double tau) { return solve_KE(a, delta, tau); }, ev, t);
        CHECK(sup_distance(spectral, generic) <= 1e-10 * delta.values[g.nearest_site(Point{0.0, 0.0, 0.0})]);
        CHECK(generic.time == t);
    }
    CHECK(subordinate_semigroup(a, delta, ev, 0.0).values == delta.values);
}

TEST_CASE("GFD of constants and of t") {
    const double h = 1e-3;
    std::vector<double> constant(1001, 4.0), linear(1001);
    for (std::size_t i = 0; i < linear.size(); ++i) linear[i] = i * h;
    const auto K = product_weights(kStable, h, 1000);
    for (std::size_t j : {1u, 17u, 1000u}) CHECK(std::abs(gfd_apply(K, constant, h, j)) <= 1e-10);
    // the product rule integrates piecewise-linear samples exactly
    CHECK(gfd_apply(kStable, linear, h, 1000) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-10));
    CHECK(1.0 / std::tgamma(1.5) == doctest::Approx(1.128379).epsilon(1e-6));
    CHECK(gfd_apply(K, linear, h, 250) == doctest::Approx(std::sqrt(0.25) / std::tgamma(1.5)).epsilon(1e-10));
    CHECK_THROWS_AS(gfd_apply(kStable, linear, h, 0), DomainError);
    CHECK_THROWS_AS(gfd_apply(K, linear, h, 2000), DomainError);
}

TEST_CASE("Mittag-Leffler relaxation is an eigenfunction of the discrete GFD") {
    double previous = 1.0;
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const std::size_t J = static_cast<std::size_t>(std::llround(1.0 / h));
        std::vector<double> u(J + 1);
        for (std::size_t i = 0; i <= J; ++i) u[i] = mittag_leffler(0.5, -std::sqrt(i * h));
        const double residual = std::abs(gfd_apply(kStable, u, h, J) + u[J]);
        INFO("h = " << h);
        CHECK(residual <= 0.5 * h / 1e-3 * 1e-3 + 1e-6);
        CHECK(residual < previous);
        previous = residual;
    }
}

TEST_CASE("scalar relaxation tracks the Mittag-Leffler function") {
    const double h = 2e-3;
    const auto K = product_weights(kStable, h, 1000);
    const auto y = relaxation_sequence(K, h, 1.0, 1000);
    CHECK(y[0] == 1.0);
    CHECK(std::abs(y[500] - mittag_leffler(0.5, -1.0)) <= 1e-3);
    CHECK(std::abs(y[1000] - mittag_leffler(0.5, -std::sqrt(2.0))) <= 1e-3);
    const auto flat = relaxation_sequence(K, h, 0.0, 1000);
    for (double v : flat) CHECK(v == 1.0);
}

TEST_CASE("fractional Kolmogorov solver against subordination") {
    const DefaultExperiment e;
    const DensityEvaluator ev(kStable);
    const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
    const FkeSolution sol = solve_FKE(kStable, e.kernel, e.f, times);
    REQUIRE(sol.fields.size() == 4);
    CHECK(sol.fields[0].values == e.f.values);
    for (std::size_t i = 1; i < times.size(); ++i) {
        INFO("t = " << times[i]);
        const Field sub = subordinate_semigroup(e.kernel, e.f, ev, times[i]);
        CHECK(sup_distance(sol.fields[i], sub) <= 1e-3);
        CHECK(std::abs(sol.fields[i].mass() - e.f.mass()) <= 1e-8);
        CHECK(sol.fields[i].time == times[i]);
    }

    const PointTrace trace(e.kernel, e.f, e.x);
    const auto at_point = solve_FKE_at_point(kStable, trace, 2e-3, 1000);
    const std::size_t site = e.grid.nearest_site(e.x);
    CHECK(at_point[0] == doctest::Approx(e.f.values[site]).epsilon(1e-12));
    CHECK(at_point[500] == doctest::Approx(sol.fields[2].values[site]).epsilon(1e-10));

    const std::vector<double> off_grid{0.0011};
    CHECK_THROWS_AS(solve_FKE(kStable, e.kernel, e.f, off_grid), ParameterError);
}

TEST_CASE("Cesaro means") {
    const std::vector<double> s{0.0, 0.5, 1.0, 2.0, 4.0};
    const std::vector<double> c(5, 3.0), linear{0.0, 0.5, 1.0, 2.0, 4.0}, positive{1.0, 0.2, 0.0, 0.7, 0.1};
    CHECK(cesaro_mean(s, c, 3.0) == doctest::Approx(3.0));
    CHECK(cesaro_mean(s, linear, 3.0) == doctest::Approx(1.5));
    CHECK(cesaro_mean(s, linear, 4.0) == doctest::Approx(2.0));
    CHECK(cesaro_mean(s, positive, 2.5) >= 0.0);
    CHECK_THROWS_AS(cesaro_mean(s, c, 5.0), DomainError);
    CHECK_THROWS_AS(cesaro_mean(std::vector<double>{0.1, 1.0}, std::vector<double>{1.0, 1.0}, 0.5), DomainError);
    CHECK_THROWS_AS(cesaro_mean(s, std::vector<double>{1.0}, 1.0), ShapeError);
}

TEST_CASE("renormalized averages: exact renormalization") {
    Rng rng = make_stream(3, 0);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double raw = std::exp(u(rng)), N = std::exp(u(rng)) + 1e-3;
        const RenormalizedAverage r = RenormalizedAverage::from_raw(1.0, N, raw, 0.0, 0);
        CHECK(r.value * r.N_T == r.raw_integral);
    }
    CHECK_THROWS_AS(RenormalizedAverage::from_raw(1.0, 0.0, 1.0, 0.0, 0), DomainError);
}

TEST_CASE("Monte Carlo renormalized average against the deterministic route") {
    const DefaultExperiment e;
    const SubordinatorSampler sampler(kStable);
    const JumpSampler jumps(e.kernel);
    const auto f = [](std::span<const double> y) { return continuum_bump(y, 0.4); };
    const double T = 300.0;
    const RenormalizedAverage mc = renormalized_green_mc(sampler, jumps, f, e.x, T, 4000, 99);
    CHECK(mc.N_T == doctest::Approx(normalization_N(kStable, T)));
    CHECK(mc.value * mc.N_T == mc.raw_integral);
    CHECK(mc.std_error > 0.0);

    const DensityEvaluator ev(kStable);
    const ExtendedTrace trace(e.kernel, e.f, e.x);
    const RenormalizedAverage det = renormalized_green_deterministic(ev, trace, T);
    CHECK(det.value * det.N_T == det.raw_integral);
    CHECK(std::abs(mc.value - det.value) <= 4.0 * mc.std_error);

    const RenormalizedAverage zero =
        renormalized_green_mc(sampler, jumps, [](std::span<const double>) { return 0.0; }, e.x, T, 100, 1);
    CHECK(zero.value == 0.0);
    CHECK(zero.raw_integral == 0.0);

    const RenormalizedAverage one = renormalized_green_mc(sampler, jumps, f, e.x, T, 300, 7, 1);
    const RenormalizedAverage three = renormalized_green_mc(sampler, jumps, f, e.x, T, 300, 7, 3);
    CHECK(one.value == three.value);
    CHECK(one.std_error == three.std_error);

    CHECK_THROWS_AS(renormalized_green_mc(sampler, jumps, f, e.x, 50.0, 100, 1), ParameterError);
    const Grid plane{2, 16, 0.5};
    const JumpSampler flat(JumpKernel::gaussian(plane, 1.0));
    CHECK_THROWS_AS(renormalized_green_mc(sampler, flat, f, Point{0.0, 0.0}, T, 100, 1), DivergenceError);
}

TEST_CASE("divergence of the unnormalized occupation integral") {
    const DefaultExperiment e;
    const DensityEvaluator ev(kStable);
    const ExtendedTrace trace(e.kernel, e.f, e.x);
    const double T = 1e3;
    const double ratio = renormalized_green_deterministic(ev, trace, 2 * T).raw_integral /
                         renormalized_green_deterministic(ev, trace, T).raw_integral;
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
    CHECK(normalization_N(kStable, 2 * T) / normalization_N(kStable, T) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("occupation ratio approaches one uniformly on a tau grid") {
    const DensityEvaluator ev(kStable);
    for (double tau : {0.0, 1.0, 5.0}) {
        INFO("tau = " << tau);
        double previous = 1e300;
        for (double T : {1e2, 1e3, 1e4}) {
            const double dev = std::abs(occupation_ratio(ev, T, tau) - 1.0);
            // at tau = 0 the ratio is one analytically and only inversion noise remains
            CHECK((dev < previous || dev < 1e-8));
            previous = dev;
        }
        CHECK(previous < 0.05);
    }
    const double T = 1e3;
    for (double tau = 0.0; tau <= 50.0; tau += 2.5) CHECK(ev.cumulative(T, tau) <= 1.1 * normalization_N(kStable, T));
}

TEST_CASE("Cesaro average of the fractional solution converges to the Green pairing") {
    const DefaultExperiment e;
    const DensityEvaluator ev(kStable);
    const ExtendedTrace trace(e.kernel, e.f, e.x);
    const double target = green_measure(e.kernel, e.f, e.x).pairing;
    const std::vector<double> T_list{1e2, 1e3, 1e4};
    const FkeAverageReport report = verify_fke_average(ev, trace, target, T_list);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.gaps_decreasing);
    CHECK(report.rows.back().gap < 0.05);

    const Field zero{e.grid, std::vector<double>(e.grid.size(), 0.0), 0.0};
    const ExtendedTrace none(e.kernel, zero, e.x);
    const FkeAverageReport trivial = verify_fke_average(ev, none, 0.0, T_list);
    for (const auto& row : trivial.rows) CHECK(row.gap == 0.0);
}

TEST_CASE("Cesaro means decay like t^-alpha") {
    const DefaultExperiment e;
    const DensityEvaluator ev(kStable);
    const ExtendedTrace trace(e.kernel, e.f, e.x);
    const CesaroDecay decay = cesaro_decay(ev, trace, 1e2, 1e4, 4);
    CHECK(decay.times.front() == doctest::Approx(1e2));
    CHECK(decay.times.back() == doctest::Approx(1e4));
    CHECK(std::abs(decay.slope + 0.5) <= 0.05);
    for (double m : decay.means) CHECK(m > 0.0);
}

TEST_CASE("marginal of the time-changed walk matches the subordinated density") {
    const Grid g{3, 16, 0.5};
    std::vector<double> shape(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point y = g.site(i);
        shape[i] = std::exp(-0.5 * (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 0.64);
    }
    const auto a = JumpKernel::from_values(g, shape);
    const JumpSampler jumps(a);
    const SubordinatorSampler sampler(kStable);
    const Point x0{0.0, 0.0, 0.0};
    const double t = 1.0;
    const std::size_t runs = 30000;
    std::vector<double> counts(g.size(), 0.0);
    for (std::size_t r = 0; r < runs; ++r) {
        Rng rng = make_stream(404, r);
        const double operational = sampler.inverse_passage(t, 1e-7, rng).e_value;
        if (operational == 0.0) {
            counts[g.nearest_site(x0)] += 1.0;
            continue;
        }
        counts[g.nearest_site(simulate_cpp(jumps, x0, operational, rng).state_at(operational))] += 1.0;
    }
    const DensityEvaluator ev(kStable);
    const Field v = subordinate_semigroup(a, delta_field(g, g.nearest_site(x0)), ev, t);
    double sparse_count = 0.0, sparse_p = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = v.values[i] * g.cell_volume();
        if (p * runs < 5.0) {
            sparse_count += counts[i];
            sparse_p += p;
            continue;
        }
        INFO("site " << i);
        CHECK(std::abs(counts[i] - p * runs) <= 4.0 * std::sqrt(runs * p * (1.0 - p)));
    }
    CHECK(std::abs(sparse_count - sparse_p * runs) <= 4.0 * std::sqrt(runs * sparse_p * (1.0 - sparse_p)) + 1.0);
}
