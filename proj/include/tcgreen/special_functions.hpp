#pragma once

#include <complex>

namespace tcgreen {

struct SeriesAccuracy {
    double abs_tol = 1e-15;
    int max_terms = 400;
    double switch_radius = 5.0;  // |x| beyond which series are not attempted

    void validate() const;
};

/// A value with an estimate of its absolute error.
struct Evaluation {
    double value = 0.0;
    double error = 0.0;
    const char* route = "";
};

/// E_alpha(x) for 0 < alpha <= 1 and x <= 0.
double mittag_leffler(double alpha, double x, const SeriesAccuracy& acc = {});
Evaluation mittag_leffler_eval(double alpha, double x, const SeriesAccuracy& acc = {});

/// M-Wright profile M_alpha(z), z >= 0; t^-a M_a(tau t^-a) is the inverse stable density.
double m_wright(double alpha, double z, const SeriesAccuracy& acc = {});
Evaluation m_wright_eval(double alpha, double z, const SeriesAccuracy& acc = {});

/// Gamma(nu, z) for any real nu and z > 0.
double upper_incomplete_gamma(double nu, double z);
Evaluation upper_incomplete_gamma_eval(double nu, double z);
/// Gamma(nu, z) for Re z > 0 and |z| >= 1 by continued fraction.
std::complex<double> upper_incomplete_gamma(double nu, std::complex<double> z);

/// Density of the one-sided stable law with Laplace transform exp(-lambda^alpha).
double stable_density(double alpha, double x);

/// Integral of A(phi) exp(-c A(phi)) over (0, pi), A being Zolotarev's function.
/// Both the stable density and the M-Wright profile reduce to it.
Evaluation zolotarev_integral(double alpha, double c);

/// Zolotarev's function A(phi) used by Kanter's sampler and the integral above.
double zolotarev_a(double alpha, double phi);

}  // namespace tcgreen
