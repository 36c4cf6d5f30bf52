#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcgreen/error.hpp"
#include "tcgreen/verification.hpp"

namespace tcgreen::cli {

/// Raised for malformed or inconsistent configuration documents (exit status 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct Tolerances {
    double wrap = 1e-6;
    double green_tail = 1e-2;
    double green_pairing = 0.01;
    double renormalized = 0.05;
    double stderr_multiple = 3.0;
    double occupation_ratio = 0.05;
    double occupation_noise_floor = 1e-8;
    double occupation_bound = 1.1;
    double divergence_lo = 1.35;
    double divergence_hi = 1.48;
    double divergence_T = 1e3;
    double fke_cross_route = 1e-3;
    double subordination_weights = 1e-3;
    double density_oracle = 1e-5;
    double cesaro_slope = 0.05;
    double double_laplace = 1e-10;
};

struct ExperimentConfig {
    nlohmann::json model = {{"family", "stable"}, {"alpha", 0.5}};
    std::string inversion = "auto";  // auto, talbot, stehfest, dehoog, closed_form
    InversionSettings inversion_settings{};

    int dimension = 3;
    double extent = 25.6;
    double spacing = 0.4;
    double kernel_width = 1.0;
    double bump_width = 0.4;
    double bump_amplitude = 1.0;
    std::vector<double> bump_center{0.0, 0.0, 0.0};
    std::vector<double> start{0.0, 0.0, 0.0};

    std::optional<std::uint64_t> seed;
    std::size_t n_traj = 100000;
    std::vector<double> T_list{1e2, 1e3, 1e4};
    unsigned threads = 1;
    double resolution = 1e-7;
    Tolerances tolerances{};

    // kernel
    std::vector<double> lambdas{1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> kernel_times{1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
    // specfun
    std::string specfun_name = "mittag_leffler";
    double specfun_parameter = 0.5;
    std::vector<double> specfun_arguments{-1.0};
    // density
    std::vector<double> density_times{0.1, 1.0, 10.0};
    std::vector<double> density_taus{0.0, 0.5, 1.0, 2.0, 5.0};
    std::string density_crosscheck = "auto";
    // simulate
    std::string simulate_mode = "inverse";  // inverse: E(t); path: S(t)
    std::vector<double> simulate_times{0.5, 1.0, 2.0};
    std::size_t simulate_n = 1000;
    // green
    int green_n_max = 200;
    bool green_export_field = false;
    // fke
    std::vector<double> fke_times{0.5, 1.0, 2.0};
    double fke_time_step = 2e-3;
    bool fke_export_fields = false;
    // verify
    std::vector<int> verify_criteria{3, 4, 5, 6};
    std::vector<double> cesaro_alphas{0.3, 0.5, 0.7};
    double cesaro_t_lo = 1e2;
    double cesaro_t_hi = 1e4;

    std::string out_dir = "out";

    /// Throws ConfigError on unknown keys, wrong types or invalid values.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig from_file(const std::string& path);
    /// Every resolved field, tolerances included.
    nlohmann::json to_json() const;

    void validate() const;
    SubordinatorModel subordinator() const;
    InversionMethod inversion_method() const;
    GreenSetup green_setup() const;
    Grid grid() const;
    /// Requires a seed; throws ConfigError naming the subcommand otherwise.
    std::uint64_t require_seed(const std::string& subcommand) const;
};

SubordinatorModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const SubordinatorModel& model);

/// FNV-1a 64-bit hash of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace tcgreen::cli
