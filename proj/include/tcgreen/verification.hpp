#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcgreen/fractional_dynamics.hpp"

namespace tcgreen {

/// Shortest round-trip text for a double (17 significant digits).
std::string format_number(double v);

/// A CSV-ready trace: column names plus rows of preformatted cells.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_csv() const;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string summary;
    std::vector<Table> tables;
};

/// Talbot for families with complex continuations, DeHoog otherwise.
InversionMethod default_inversion(const SubordinatorModel& model);

/// Jump kernel, test function and start point of a Green-measure experiment.
struct GreenSetup {
    Grid grid{};
    double kernel_width = 1.0;
    double bump_width = 0.4;
    double bump_amplitude = 1.0;
    Point bump_center{0.0, 0.0, 0.0};
    Point start{0.0, 0.0, 0.0};
    double wrap_tolerance = 1e-6;

    void validate() const;
    JumpKernel kernel() const;
    /// The bump in the continuum (Monte Carlo paths are not confined to the lattice).
    PointFunction bump() const;
    Field bump_field() const;
};

// One function per acceptance criterion; each records its traces in the result tables.

CriterionResult check_density_oracle(std::vector<InversionMethod> methods = {InversionMethod::Talbot,
                                                                             InversionMethod::GaverStehfest},
                                     double tolerance = 1e-5);

CriterionResult check_mittag_leffler_law(std::size_t n, std::uint64_t seed, unsigned threads = 1);

struct OccupationRatioOptions {
    std::vector<double> taus{0.0, 1.0, 5.0};
    std::vector<double> T_list{1e2, 1e3, 1e4};
    double tolerance = 0.05;
    /// deviations below this count as zero (the ratio is exactly one at tau = 0)
    double noise_floor = 1e-8;
    /// bound factor for max over the tau grid of int_0^T G_s(tau) ds against N(T)
    double occupation_bound = 1.1;
    std::vector<double> bound_taus{0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
};
CriterionResult check_occupation_ratio(const std::vector<SubordinatorModel>& models, const OccupationRatioOptions& options = {});

CriterionResult check_divergence_rate(const SubordinatorModel& model, const GreenSetup& setup, double T = 1e3,
                                        double lo = 1.35, double hi = 1.48);

CriterionResult check_green_pairing(const GreenSetup& setup, double tolerance = 0.01);

struct RenormalizedOptions {
    std::vector<double> T_list{1e2, 1e3, 1e4};
    std::size_t n_traj = 100000;
    std::uint64_t seed = 2024;
    unsigned threads = 1;
    double tolerance = 0.05;
    double stderr_multiple = 3.0;
};
CriterionResult check_renormalized_green(const SubordinatorModel& model, const GreenSetup& setup,
                                         const RenormalizedOptions& options);

CriterionResult check_cesaro_decay(const std::vector<double>& alphas, const GreenSetup& setup, double t_lo = 1e2,
                                   double t_hi = 1e4, double tolerance = 0.05);

CriterionResult check_fke_cross_route(const SubordinatorModel& model, const GreenSetup& setup,
                                      std::vector<double> times = {0.5, 1.0, 2.0}, double time_step = 2e-3,
                                      double tolerance = 1e-3);

CriterionResult check_double_laplace(double tolerance = 1e-10);

}  // namespace tcgreen
