#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcgreen/lattice.hpp"
#include "tcgreen/rng.hpp"

namespace tcgreen {

/// Symmetric probability density of jumps on a periodic lattice (h^d sum of values = 1).
class JumpKernel {
public:
    /// Isotropic Gaussian with per-axis standard deviation `width`.
    static JumpKernel gaussian(const Grid& grid, double width);
    /// Arbitrary lattice values; must be nonnegative and symmetric, and are normalized to mass 1.
    static JumpKernel from_values(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::optional<double> gaussian_width() const { return gaussian_width_; }
    /// h^d sum |y|^2 a(y).
    double second_moment() const { return second_moment_; }
    /// Real Fourier symbol a^(xi) on the stored half spectrum; a^(0) = 1.
    const std::vector<double>& symbol() const { return symbol_; }

private:
    JumpKernel(const Grid& grid, std::vector<double> values, std::optional<double> width);
    Grid grid_;
    std::vector<double> values_;
    std::optional<double> gaussian_width_;
    double second_moment_ = 0.0;
    std::vector<double> symbol_;
};

/// L f = a * f - f by circular convolution.
Field generator_apply(const JumpKernel& a, const Field& f);
/// u(t) = e^{tL} f, exact on the lattice.
Field solve_KE(const JumpKernel& a, const Field& f, double t);
/// a convolved with itself n times by repeated lattice convolution (direct sums; small grids only).
Field convolution_power_direct(const JumpKernel& a, int n);
/// The same through the symbol: inverse transform of a^(xi)^n.
Field convolution_power_spectral(const JumpKernel& a, int n);

/// Draws jump displacements: Gaussian kernels exactly in the continuum, other kernels by
/// inverse CDF over the lattice sites.
class JumpSampler {
public:
    explicit JumpSampler(const JumpKernel& a);
    int dim() const { return dim_; }
    void draw(Rng& rng, std::span<double> displacement) const;

private:
    int dim_;
    std::optional<double> width_;
    Grid grid_;
    std::vector<double> cdf_;
};

/// Piecewise-constant path: states[k] (flattened, dim entries each) holds on [times[k], times[k+1]).
struct Trajectory {
    int dim = 0;
    std::vector<double> times;
    std::vector<double> states;

    std::size_t jumps() const { return times.empty() ? 0 : times.size() - 1; }
    std::span<const double> state_at(double t) const;
};

Trajectory simulate_cpp(const JumpSampler& sampler, std::span<const double> x0, double T, Rng& rng);
Trajectory simulate_cpp(const JumpKernel& a, std::span<const double> x0, double T, std::uint64_t seed);

/// C (n + c)^-p and its tail sums; fitted through two late terms of a sequence.
struct PowerTail {
    double amplitude = 0.0;
    double shift = 0.0;
    double power = 1.5;

    static PowerTail fit(double n1, double v1, double n2, double v2, double power);
    double operator()(double n) const;
    /// sum over integers n > N.
    double sum_beyond(int N) const;
    /// integral over (T, inf).
    double integral_beyond(double T) const;
};

/// u(tau, x) and (a^{*n} * f)(x) at one site from the spectral data of (a, f), with modes grouped
/// by symbol value.
class PointTrace {
public:
    PointTrace(const JumpKernel& a, const Field& f, std::span<const double> x);

    double f_at_x() const { return f_at_x_; }
    double value(double tau) const;
    double neumann_term(int n) const;
    const std::vector<double>& symbol_values() const { return mu_; }
    const std::vector<double>& weights() const { return weight_; }

private:
    double f_at_x_ = 0.0;
    std::vector<double> mu_, weight_;
};

/// Largest time (or number of jumps) for which periodic images change point values by less
/// than `tolerance`, estimated from the kernel's second moment.
double wrap_horizon(const JumpKernel& a, double tolerance = 1e-6);

/// u(tau, x) from the lattice up to the wrap horizon and a d/2 power tail fitted there beyond it.
class ExtendedTrace {
public:
    ExtendedTrace(const JumpKernel& a, const Field& f, std::span<const double> x, double wrap_tolerance = 1e-6);

    double operator()(double tau) const;
    double horizon() const { return horizon_; }
    const PointTrace& lattice() const { return trace_; }
    const PowerTail& tail() const { return tail_; }

private:
    PointTrace trace_;
    double horizon_;
    PowerTail tail_;
};

struct GreenSettings {
    int n_max = 200;
    double wrap_tolerance = 1e-6;
    /// tail bounds above this fraction of the pairing produce a warning
    double tail_tolerance = 1e-2;
};

struct GreenEstimate {
    double atom_mass = 1.0;
    Field density;  // sum_{n=1}^{N} a^{*n}(y - x)
    int truncation_order = 0;
    double tail_bound = 0.0;
    double pairing_truncated = 0.0;  // f(x) + h^d sum density f
    double pairing = 0.0;            // truncated pairing plus the tail
    std::vector<std::string> warnings;
};

/// Green measure delta_x + sum_n a^{*n}(y - x) dy of the compound Poisson process and its pairing with f.
/// The order is capped by the wrap horizon of the lattice.
GreenEstimate green_measure(const JumpKernel& a, const Field& f, std::span<const double> x, GreenSettings settings = {});

struct TimeQuadraturePairing {
    double horizon = 0.0;
    double integral = 0.0;  // int_0^horizon u(t, x) dt
    double tail = 0.0;
    double total = 0.0;
};

/// int_0^inf u(t, x) dt by Gauss-Legendre panels up to the wrap horizon plus the power tail.
TimeQuadraturePairing green_pairing_by_time_quadrature(const JumpKernel& a, const Field& f, std::span<const double> x,
                                                       double wrap_tolerance = 1e-6);

}  // namespace tcgreen
