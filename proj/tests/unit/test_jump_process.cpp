#include <doctest.h>

#include <cmath>
#include <vector>

#include "tcgreen/error.hpp"
#include "tcgreen/jump_process.hpp"
#include "tcgreen/parallel.hpp"

using namespace tcgreen;

namespace {

Field bump(const Grid& g, double width, double amplitude = 1.0) {
    return sample_field(g, [=](std::span<const double> y) {
        double r2 = 0.0;
        for (double c : y) r2 += c * c;
        return amplitude * std::exp(-0.5 * r2 / (width * width));
    });
}

Field pseudo_random_field(const Grid& g, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    Field f{g, std::vector<double>(g.size()), 0.0};
    for (double& v : f.values) v = u(rng);
    return f;
}

double lattice_sum(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s;
}

const Grid kSmall{3, 8, 0.6};
const Grid kMedium{3, 16, 0.5};

}  // namespace

TEST_CASE("kernel normalization, symmetry and moments") {
    const auto a = JumpKernel::gaussian(kMedium, 1.0);
    CHECK(std::abs(a.grid().cell_volume() * lattice_sum(Field{kMedium, a.values(), 0.0}) - 1.0) <= 1e-12);
    CHECK(a.symbol()[0] == doctest::Approx(1.0).epsilon(1e-13));
    // the extent-8 box clips the Gaussian tail slightly
    CHECK(a.second_moment() == doctest::Approx(3.0).epsilon(2e-3));
    CHECK(a.gaussian_width().value() == 1.0);

    std::vector<double> skew(kSmall.size(), 0.0);
    skew[1] = 1.0;
    CHECK_THROWS_AS(JumpKernel::from_values(kSmall, skew), ParameterError);
    CHECK_THROWS_AS(JumpKernel::from_values(kSmall, std::vector<double>(kSmall.size(), 0.0)), ParameterError);
    CHECK_THROWS_AS(JumpKernel::from_values(kSmall, std::vector<double>(3, 1.0)), ShapeError);
    CHECK_THROWS_AS(JumpKernel::gaussian(kSmall, -1.0), ParameterError);
}

TEST_CASE("generator annihilates constants and conserves mass") {
    const auto a = JumpKernel::gaussian(kMedium, 1.0);
    const Field c{kMedium, std::vector<double>(kMedium.size(), 2.5), 0.0};
    const Field lc = generator_apply(a, c);
    for (double v : lc.values) CHECK(std::abs(v) <= 1e-12);

    const Field lf = generator_apply(a, pseudo_random_field(kMedium, 4));
    CHECK(std::abs(lattice_sum(lf)) <= 1e-10);

    const Field other{kSmall, std::vector<double>(kSmall.size(), 1.0), 0.0};
    CHECK_THROWS_AS(generator_apply(a, other), ShapeError);
}

TEST_CASE("generator applied to the kernel matches the squared symbol") {
    const auto a = JumpKernel::gaussian(kSmall, 0.8);
    const Field af{kSmall, a.values(), 0.0};
    const Field la = generator_apply(a, af);
    const Field direct_square = convolution_power_direct(a, 2);
    for (std::size_t i = 0; i < la.values.size(); ++i)
        CHECK(la.values[i] == doctest::Approx(direct_square.values[i] - a.values()[i]).epsilon(1e-10));

    // (a*a)^ = a^2 with the h^d convention
    const FourierTransform fft(kSmall);
    const auto spec = fft.forward(direct_square.values);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        CHECK(spec[k].real() * kSmall.cell_volume() == doctest::Approx(a.symbol()[k] * a.symbol()[k]).epsilon(1e-10));
        CHECK(std::abs(spec[k].imag()) * kSmall.cell_volume() <= 1e-12);
    }
}

TEST_CASE("convolution powers: direct sums against spectral powers") {
    const auto a = JumpKernel::gaussian(kSmall, 0.9);
    for (int n = 0; n <= 6; ++n) {
        INFO("n = " << n);
        CHECK(sup_distance(convolution_power_direct(a, n), convolution_power_spectral(a, n)) <= 1e-10);
    }
    CHECK_THROWS_AS(convolution_power_direct(JumpKernel::gaussian(Grid{3, 32, 0.5}, 1.0), 2), ParameterError);
}

TEST_CASE("Kolmogorov solver: identity, atom, mass and semigroup") {
    const auto a = JumpKernel::gaussian(kMedium, 1.0);
    const Field f = pseudo_random_field(kMedium, 9);
    const Field same = solve_KE(a, f, 0.0);
    CHECK(same.values == f.values);

    const std::size_t x0 = kMedium.nearest_site(Point{0.5, -1.0, 1.5});
    const Field delta = delta_field(kMedium, x0);
    const Field u1 = solve_KE(a, delta, 1.0);
    CHECK(u1.values[x0] >= std::exp(-1.0) / kMedium.cell_volume());
    CHECK(u1.time == 1.0);

    for (double t : {0.5, 1.0, 5.0}) CHECK(std::abs(solve_KE(a, f, t).mass() - f.mass()) <= 1e-10);

    const Field two_step = solve_KE(a, solve_KE(a, f, 0.7), 1.6);
    const Field one_step = solve_KE(a, f, 2.3);
    CHECK(sup_distance(two_step, one_step) <= 1e-9);

    CHECK_THROWS_AS(solve_KE(a, f, -1.0), DomainError);
}

TEST_CASE("compound Poisson trajectories: counts, mean and spread") {
    const auto a = JumpKernel::gaussian(Grid{}, 1.0);
    const JumpSampler sampler(a);
    const Point x0{1.0, -2.0, 0.5};
    const double T = 3.0;
    const std::size_t runs = 10000;
    std::vector<double> jumps(runs), sq(runs), first(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        Rng rng = make_stream(123, r);
        const Trajectory tr = simulate_cpp(sampler, x0, T, rng);
        CHECK(tr.times.front() == 0.0);
        CHECK(tr.times.back() <= T);
        jumps[r] = static_cast<double>(tr.jumps());
        const auto end = tr.state_at(T);
        first[r] = end[0];
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += (end[c] - x0[c]) * (end[c] - x0[c]);
        sq[r] = s;
    }
    const double n = static_cast<double>(runs);
    auto mean = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / n;
    };
    CHECK(std::abs(mean(jumps) - T) <= 3.0 * std::sqrt(T / n));
    // per-axis variance of the end point is T
    CHECK(std::abs(mean(first) - x0[0]) <= 3.0 * std::sqrt(T / n));
    double var_sq = 0.0;
    const double msq = mean(sq);
    for (double x : sq) var_sq += (x - msq) * (x - msq);
    var_sq /= n - 1;
    CHECK(std::abs(msq - T * a.second_moment()) <= 3.0 * std::sqrt(var_sq / n));

    const Trajectory seeded = simulate_cpp(a, x0, T, 5);
    CHECK(seeded.states.size() == 3 * seeded.times.size());
    CHECK_THROWS_AS(simulate_cpp(a, Point{0.0, 0.0}, T, 5), ShapeError);
}

TEST_CASE("lattice histogram at t = 1 matches the Kolmogorov solution") {
    const Grid g = kMedium;
    std::vector<double> shape(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point y = g.site(i);
        shape[i] = std::exp(-0.5 * (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 0.64);
    }
    const auto a = JumpKernel::from_values(g, shape);
    const JumpSampler sampler(a);
    const Point x0{0.0, 0.0, 0.0};
    const std::size_t runs = 100000;
    std::vector<std::size_t> sites(runs);
    parallel_for(runs, 2, [&](std::size_t r) {
        Rng rng = make_stream(77, r);
        sites[r] = g.nearest_site(simulate_cpp(sampler, x0, 1.0, rng).state_at(1.0));
    });
    std::vector<double> counts(g.size(), 0.0);
    for (std::size_t s : sites) counts[s] += 1.0;

    const Field u = solve_KE(a, delta_field(g, g.nearest_site(x0)), 1.0);
    // cells with at least five expected visits one by one, the sparse remainder pooled
    int occupied = 0;
    double sparse_count = 0.0, sparse_p = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = u.values[i] * g.cell_volume();
        if (p * runs < 5.0) {
            sparse_count += counts[i];
            sparse_p += p;
            continue;
        }
        ++occupied;
        INFO("site " << i);
        CHECK(std::abs(counts[i] - p * runs) <= 4.0 * std::sqrt(runs * p * (1.0 - p)));
    }
    CHECK(std::abs(sparse_count - sparse_p * runs) <= 4.0 * std::sqrt(runs * sparse_p * (1.0 - sparse_p)));
    CHECK(occupied > 20);
}

TEST_CASE("power tails") {
    const PowerTail t = PowerTail::fit(10.0, std::pow(12.0, -1.5), 20.0, std::pow(22.0, -1.5), 1.5);
    CHECK(t.shift == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.amplitude == doctest::Approx(1.0).epsilon(1e-10));
    // sum_{n>N} (n+2)^-1.5 against a brute-force partial sum plus its integral remainder
    double brute = 0.0;
    for (int n = 21; n <= 2000000; ++n) brute += std::pow(n + 2.0, -1.5);
    brute += 2.0 / std::sqrt(2000002.5);
    CHECK(t.sum_beyond(20) == doctest::Approx(brute).epsilon(1e-9));
    CHECK(t.integral_beyond(20.0) == doctest::Approx(2.0 / std::sqrt(22.0)).epsilon(1e-14));
    const PowerTail zero = PowerTail::fit(1.0, 0.0, 2.0, 0.0, 1.5);
    CHECK(zero.sum_beyond(5) == 0.0);
}

TEST_CASE("point trace reproduces the Kolmogorov solution and convolution powers") {
    const auto a = JumpKernel::gaussian(kMedium, 1.0);
    const Field f = bump(kMedium, 0.7);
    const Point x{0.5, 0.0, -1.0};
    const PointTrace trace(a, f, x);
    const std::size_t site = kMedium.nearest_site(x);
    CHECK(trace.f_at_x() == f.values[site]);
    for (double tau : {0.0, 0.4, 3.0}) {
        const double direct = tau == 0.0 ? f.values[site] : solve_KE(a, f, tau).values[site];
        CHECK(trace.value(tau) == doctest::Approx(direct).epsilon(1e-11));
    }
    for (int n : {1, 3}) {
        const Field an = convolution_power_spectral(a, n);
        // (a^{*n} * f)(x) = h^d sum_z a^{*n}(z) f(x - z)
        const auto fft = FourierTransform(kMedium);
        auto spec = fft.forward(f.values);
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= std::pow(a.symbol()[k], n);
        const auto conv = fft.inverse(spec);
        CHECK(trace.neumann_term(n) == doctest::Approx(conv[site]).epsilon(1e-11));
        CHECK(an.mass() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("wrap horizon of the default lattice") {
    const auto a = JumpKernel::gaussian(Grid{}, 1.0);
    const double L = 25.6;
    CHECK(wrap_horizon(a) == doctest::Approx(L * L / (2.0 * std::log(6e6))).epsilon(1e-6));
    CHECK_THROWS_AS(wrap_horizon(a, 0.0), ParameterError);
}

TEST_CASE("Green pairing against time quadrature and the continuum series") {
    const Grid g{};
    const auto a = JumpKernel::gaussian(g, 1.0);
    const double width = 0.4;
    const Field f = bump(g, width);
    const Point x{0.0, 0.0, 0.0};
    const GreenEstimate est = green_measure(a, f, x);
    CHECK(est.atom_mass == 1.0);
    CHECK(est.truncation_order == 20);
    CHECK(est.tail_bound > 0.0);
    CHECK(est.pairing == doctest::Approx(est.pairing_truncated + est.tail_bound));

    const TimeQuadraturePairing tq = green_pairing_by_time_quadrature(a, f, x);
    CHECK(std::abs(est.pairing - tq.total) <= 0.01 * tq.total);

    // lattice terms against the continuum convolution of Gaussians
    const PointTrace trace(a, f, x);
    for (int n : {1, 5, 20}) {
        const double continuum = std::pow(width * width / (width * width + n), 1.5);
        CHECK(trace.neumann_term(n) == doctest::Approx(continuum).epsilon(1e-5));
    }
    CHECK(est.pairing >= f.values[g.nearest_site(x)]);
}

TEST_CASE("Green pairing: trivial cases and preconditions") {
    const Grid g{3, 32, 0.5};
    const auto a = JumpKernel::gaussian(g, 1.0);
    const Point x{0.0, 0.0, 0.0};
    const Field zero{g, std::vector<double>(g.size(), 0.0), 0.0};
    const GreenEstimate none = green_measure(a, zero, x);
    CHECK(none.pairing == 0.0);
    CHECK(none.tail_bound == 0.0);

    // indicator of a far cube: no atom, only the series
    const Field far = sample_field(g, [](std::span<const double> y) {
        return (std::abs(y[0] - 6.0) <= 1.0 && std::abs(y[1]) <= 1.0 && std::abs(y[2]) <= 1.0) ? 1.0 : 0.0;
    });
    const GreenEstimate est = green_measure(a, far, x);
    CHECK(est.pairing > 0.0);
    const PointTrace trace(a, far, x);
    double series = 0.0;
    for (int n = 1; n <= est.truncation_order; ++n) series += trace.neumann_term(n);
    CHECK(est.pairing_truncated == doctest::Approx(series).epsilon(1e-10));

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Field positive = pseudo_random_field(g, seed);
        for (double& v : positive.values) v = std::abs(v);
        const GreenEstimate p = green_measure(a, positive, x);
        CHECK(p.pairing >= positive.values[g.nearest_site(x)]);
    }

    const Grid plane{2, 32, 0.5};
    CHECK_THROWS_AS(green_measure(JumpKernel::gaussian(plane, 1.0), sample_field(plane, [](auto) { return 1.0; }), Point{0.0, 0.0}),
                    DivergenceError);
}
