#pragma once

#include <array>
#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace tcgreen {

struct StableFamily {
    double alpha;
};
struct GammaFamily {
    double a;
    double b;
};
struct TruncatedStableFamily {
    double alpha;
    double delta;
};
struct TwoIndexStableFamily {
    double alpha;
    double beta;
};
/// Kernel k(t) = t^-alpha e^{-gamma t} / Gamma(1-alpha); Phi follows from Phi = lambda K.
struct TemperedStableFamily {
    double alpha;
    double gamma;
};
/// Weight mu(a) = sum_i coeffs[i] a^i on [0,1]; {1} is the uniform weight.
struct DistributedOrderFamily {
    std::vector<double> weight_coeffs{1.0};
};

/// Which quantities a family evaluates in closed form.
struct Capabilities {
    bool phi_closed = true;
    bool K_closed = true;
    bool k_closed = true;
    bool N_closed = true;
    bool complex_K = true;  // K and Phi continue to the plane cut along the negative axis
    bool right_half_plane_K = true;  // K and Phi evaluate for Re lambda > 0
    bool sampler = true;
};

class SubordinatorModel {
public:
    using Family = std::variant<StableFamily, GammaFamily, TruncatedStableFamily, TwoIndexStableFamily,
                                TemperedStableFamily, DistributedOrderFamily>;

    static SubordinatorModel stable(double alpha);
    static SubordinatorModel gamma(double a, double b);
    static SubordinatorModel truncated_stable(double alpha, double delta);
    static SubordinatorModel two_index_stable(double alpha, double beta);
    static SubordinatorModel tempered_stable(double alpha, double gamma);
    static SubordinatorModel distributed_order(std::vector<double> weight_coeffs = {1.0});

    const Family& family() const { return family_; }
    std::string name() const;
    std::string describe() const;
    Capabilities capabilities() const;

    /// Gauss-Legendre data over the order variable (distributed order only):
    /// nodes a_i and weights w_i mu(a_i).
    const std::vector<double>& order_nodes() const { return order_nodes_; }
    const std::vector<double>& order_weights() const { return order_weights_; }

private:
    explicit SubordinatorModel(Family f);
    Family family_;
    std::vector<double> order_nodes_;
    std::vector<double> order_weights_;
};

/// Laplace exponent Phi(lambda), lambda >= 0.
double phi(const SubordinatorModel& model, double lambda);
/// K(lambda) = int_0^inf e^{-lambda t} k(t) dt, lambda > 0.
double laplace_K(const SubordinatorModel& model, double lambda);
/// Analytic continuations used by contour inversion; throws UnsupportedError when absent.
std::complex<double> phi(const SubordinatorModel& model, std::complex<double> lambda);
std::complex<double> laplace_K(const SubordinatorModel& model, std::complex<double> lambda);

/// k(t) = sigma((t, inf)), t > 0.
double kernel_k(const SubordinatorModel& model, double t);
/// Density of the Levy measure sigma at tau > 0.
double levy_density(const SubordinatorModel& model, double tau);
/// N(T) = int_0^T k(s) ds.
double normalization_N(const SubordinatorModel& model, double T);
/// N(T) by quadrature of kernel_k, kept as an independent cross-check.
double normalization_N_quadrature(const SubordinatorModel& model, double T);

/// Points where k is not smooth (besides 0).
std::vector<double> kernel_breakpoints(const SubordinatorModel& model);

struct AdmissibilityProbe {
    double lambda_lo = 1e-24;
    double lambda_hi = 1e24;
    double h_factor = 1e3;
    double s0 = 1.0;
    std::vector<double> a1_lambdas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    std::vector<double> a2_times{1e2, 1e3, 1e4, 1e5, 1e6};
    std::vector<double> a2_eps{0.1, 0.01};
    double a2_bound = 0.2;
};

struct AdmissibilityReport {
    // K(0+) = inf, K(inf) = 0, Phi(0+) = 0, Phi(inf) = inf
    std::array<bool, 4> h_ok{};
    double a1_estimate = 0.0;
    double a2_max_deviation = 0.0;
    bool verdict = false;
};

AdmissibilityReport check_admissibility(const SubordinatorModel& model, const AdmissibilityProbe& probe = {});

}  // namespace tcgreen
