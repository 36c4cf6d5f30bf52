#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tcgreen/jump_process.hpp"
#include "tcgreen/kernel_catalog.hpp"
#include "tcgreen/laplace.hpp"
#include "tcgreen/samplers.hpp"

namespace tcgreen {

struct SubordinationSettings {
    int nodes = 401;                // odd: composite Simpson in log tau
    double lower_fraction = 1e-4;   // tau_lo = lower_fraction / Phi(1/t)
    double tail_level = 1e-9;       // tau_hi: first doubling with tau G_t(tau) below this
    double weight_tolerance = 1e-3;

    void validate() const;
};

/// Nodes and weights with sum_i w_i u(tau_i) ~ int_0^inf u(tau) G_t(tau) dtau.
/// The first node is tau = 0 with G_t(0) = k(t).
struct SubordinationRule {
    double t = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    double weight_sum = 0.0;

    static SubordinationRule build(const DensityEvaluator& ev, double t, const SubordinationSettings& settings = {});
};

/// v(t) = int_0^inf u(tau) G_t(tau) dtau; t = 0 returns u(0).
double subordinate(const std::function<double(double)>& u, const DensityEvaluator& ev, double t,
                   const SubordinationSettings& settings = {});
Field subordinate(const std::function<Field(double)>& u, const DensityEvaluator& ev, double t,
                  const SubordinationSettings& settings = {});
/// The same for u(tau) = e^{tau L} f, applied mode by mode in the spectral domain.
Field subordinate_semigroup(const JumpKernel& a, const Field& f, const DensityEvaluator& ev, double t,
                            const SubordinationSettings& settings = {});

/// K_m = N(t_{m+1}) - N(t_m), m = 0..count-1, on the grid t_m = m h.
std::vector<double> product_weights(const SubordinatorModel& model, double h, std::size_t count);

/// Discrete GFD of samples u_0..u_J (step h) at index j: sum_{i=1}^{j} K_{j-i} (u_i - u_{i-1}) / h.
double gfd_apply(const SubordinatorModel& model, std::span<const double> samples, double h, std::size_t j);
/// Same with precomputed product weights.
double gfd_apply(std::span<const double> weights, std::span<const double> samples, double h, std::size_t j);

/// y_j for D y = -rate y, y(0) = 1, by the implicit product-integration scheme at j = 0..steps.
std::vector<double> relaxation_sequence(std::span<const double> weights, double h, double rate, std::size_t steps);

struct FkeSettings {
    double time_step = 2e-3;
};

struct FkeSolution {
    std::vector<double> times;
    std::vector<Field> fields;
};

/// Solves D v = L v, v(0) = f, and returns v at the requested times (multiples of the step).
FkeSolution solve_FKE(const SubordinatorModel& model, const JumpKernel& a, const Field& f,
                      std::span<const double> output_times, const FkeSettings& settings = {});

/// v(t_j, x) for every step j = 0..steps of the same scheme, from a point trace.
std::vector<double> solve_FKE_at_point(const SubordinatorModel& model, const PointTrace& trace, double h,
                                       std::size_t steps);

/// (1/t) int_0^t v(s) ds by the trapezoid rule; grid starts at 0 and reaches t (linear interpolation at t).
double cesaro_mean(std::span<const double> s_grid, std::span<const double> values, double t);

struct RenormalizedAverage {
    double T = 0.0;
    double N_T = 0.0;
    double value = 0.0;         // raw_integral / N_T
    double raw_integral = 0.0;  // value * N_T, bit for bit
    double std_error = 0.0;     // of value; 0 for deterministic routes
    std::size_t samples = 0;

    static RenormalizedAverage from_raw(double T, double N_T, double raw, double raw_std_error, std::size_t samples);
};

/// Monte Carlo (1/N(T)) int_0^T E f(Y(s)) ds with Y = X(E(s)), summing f over flat periods of E exactly.
RenormalizedAverage renormalized_green_mc(const SubordinatorSampler& sampler, const JumpSampler& jumps,
                                          const PointFunction& f, std::span<const double> x, double T,
                                          std::size_t n_traj, std::uint64_t seed, unsigned threads = 1);

/// Deterministic route: int_0^T v(s, x) ds = int_0^inf u(tau, x) (int_0^T G_s(tau) ds) dtau.
RenormalizedAverage renormalized_green_deterministic(const DensityEvaluator& ev, const ExtendedTrace& trace, double T,
                                                     const SubordinationSettings& settings = {});

struct FkeAverageRow {
    double T = 0.0;
    double normalized = 0.0;
    double target = 0.0;
    double gap = 0.0;  // |normalized - target| / |target|, 0 when both vanish
};

struct FkeAverageReport {
    std::vector<FkeAverageRow> rows;
    bool gaps_decreasing = false;
};

FkeAverageReport verify_fke_average(const DensityEvaluator& ev, const ExtendedTrace& trace, double target,
                                    std::span<const double> T_list);

/// R(T, tau) = int_0^T G_s(tau) ds / N(T).
double occupation_ratio(const DensityEvaluator& ev, double T, double tau);

struct CesaroDecay {
    std::vector<double> times;
    std::vector<double> means;
    double slope = 0.0;  // least squares in log-log over the reported times
};

/// M_t(f) = (1/t) int_0^t v(s, x) ds with v by subordination, on a geometric grid of t in [t_lo, t_hi].
CesaroDecay cesaro_decay(const DensityEvaluator& ev, const ExtendedTrace& trace, double t_lo, double t_hi,
                         int points_per_decade = 8, const SubordinationSettings& settings = {});

}  // namespace tcgreen
