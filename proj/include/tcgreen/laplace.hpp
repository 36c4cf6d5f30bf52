#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tcgreen/kernel_catalog.hpp"

namespace tcgreen {

/// DeHoog: Fourier series on a vertical line right of the origin, accelerated by a continued fraction.
/// It only needs the transform for Re lambda > 0.
enum class InversionMethod { GaverStehfest, Talbot, DeHoog, ClosedForm };

std::string to_string(InversionMethod m);
InversionMethod inversion_method_from_string(const std::string& s);

struct InversionSettings {
    int stehfest_terms = 16;  // even, at most 24
    int talbot_nodes = 48;    // at least 16
    int dehoog_terms = 20;    // M, using 2M+1 line nodes; 4..60

    void validate() const;
};

using RealTransform = std::function<double(double)>;
using ComplexTransform = std::function<std::complex<double>(std::complex<double>)>;

/// int_0^inf e^{-lambda t} f(t) dt with the tail cut where e^{-lambda t} < 1e-16.
double forward_laplace(const std::function<double(double)>& f, double lambda, std::span<const double> breakpoints = {});

/// Gaver-Stehfest weights V_1..V_n.
std::vector<double> stehfest_weights(int n_terms);

double invert_laplace_stehfest(const RealTransform& F, double t, int n_terms = 16);
double invert_laplace_talbot(const ComplexTransform& F, double t, int nodes = 48);
double invert_laplace_dehoog(const ComplexTransform& F, double t, int terms = 20);

struct DensityValue {
    double value = 0.0;  // clamped at 0
    double raw = 0.0;
    bool clamped = false;
};

class DensityEvaluator;

/// Transform data for a single time t, shared by every tau evaluated at that t.
class TimeSlice {
public:
    double t() const { return t_; }
    /// G_t(tau).
    DensityValue density(double tau) const;
    /// int_0^t G_s(tau) ds, from the transform K(lambda) e^{-tau Phi(lambda)} / lambda.
    double cumulative(double tau) const;

private:
    friend class DensityEvaluator;
    double t_ = 0.0;
    InversionMethod method_ = InversionMethod::Talbot;
    double stable_alpha_ = 0.0;
    int talbot_nodes_ = 0;
    double line_shift_ = 0.0, line_period_ = 0.0;  // DeHoog abscissa and half period
    std::shared_ptr<const SubordinatorModel> model_;
    std::vector<std::complex<double>> lambda_, K_, phi_, exponent_, coeff_;

    double sum(double tau, bool cumulative) const;
    double sum_dehoog(double tau, bool cumulative) const;
    // Talbot sum on the smallest enlarged contour whose real-axis node dominates; nodes evaluated on the fly.
    double sum_rescaled(double tau, bool cumulative) const;
};

/// Density of E(t) by inversion of K(lambda) e^{-tau Phi(lambda)} (or closed form for the stable family).
class DensityEvaluator {
public:
    explicit DensityEvaluator(SubordinatorModel model, InversionMethod method = InversionMethod::Talbot,
                              InversionSettings settings = {});

    const SubordinatorModel& model() const { return model_; }
    InversionMethod method() const { return method_; }
    const InversionSettings& settings() const { return settings_; }

    TimeSlice slice(double t) const;
    DensityValue density(double t, double tau) const;
    double cumulative(double T, double tau) const;

private:
    SubordinatorModel model_;
    InversionMethod method_;
    InversionSettings settings_;
};

/// G_t(tau), clamped at 0.
double density_G(const DensityEvaluator& ev, double t, double tau);
/// int_0^T G_s(tau) ds.
double cumulative_G(const DensityEvaluator& ev, double T, double tau);

struct DoubleLaplaceResult {
    double quadrature = 0.0;
    double expected = 0.0;
    double residual = 0.0;
};
DoubleLaplaceResult double_laplace_residual(const DensityEvaluator& ev, double lambda, double p);

}  // namespace tcgreen
