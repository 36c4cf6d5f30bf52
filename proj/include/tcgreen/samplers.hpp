#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "tcgreen/kernel_catalog.hpp"
#include "tcgreen/rng.hpp"

namespace tcgreen {

struct SamplerSettings {
    /// Truncated stable: jumps below truncation_ratio * delta are replaced by their mean.
    double truncation_ratio = 1e-4;
    /// Proposals allowed in a single rejection loop.
    long max_rejections = 10'000'000;
    /// Coarse steps allowed before a first passage counts as missing.
    long max_coarse_steps = 50'000'000;

    void validate() const;
};

/// S sampled at increasing times, S(0) = 0.
struct PathGrid {
    std::vector<double> times;
    std::vector<double> values;
    SubordinatorModel model;
    std::uint64_t seed = 0;
};

/// A draw of E(t). The bracket [lower, upper] has S(lower) < t <= S(upper) and width at most the resolution;
/// e_value is its midpoint.
struct InverseSample {
    double t = 0.0;
    double e_value = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    double s_lower = 0.0;
    double s_upper = 0.0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Exact increments and bridges of a catalog subordinator, built from independent parts
/// (stable, exponentially tilted stable, gamma, compound Poisson with drift). Immutable once built.
class SubordinatorSampler {
public:
    explicit SubordinatorSampler(const SubordinatorModel& model, SamplerSettings settings = {});
    ~SubordinatorSampler();
    SubordinatorSampler(SubordinatorSampler&&) noexcept;
    SubordinatorSampler& operator=(SubordinatorSampler&&) noexcept;

    const SubordinatorModel& model() const;
    const SamplerSettings& settings() const;

    /// One draw of S(dt).
    double increment(double dt, Rng& rng) const;
    /// S at the given increasing times (times[0] may be 0).
    std::vector<double> path_values(std::span<const double> times, Rng& rng) const;

    /// First passage of one path above t, refined by bisection with bridge resampling.
    InverseSample inverse_passage(double t, double resolution, Rng& rng) const;
    /// Passages of a single path above each of the nondecreasing levels.
    std::vector<InverseSample> inverse_passages(std::span<const double> levels, double resolution, Rng& rng) const;

    /// Truncated stable only (0 otherwise): the small-jump cutoff and the variance per unit time
    /// of the jumps replaced by their mean, which bounds the resulting error in law.
    double small_jump_cutoff() const;
    double small_jump_variance_rate() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// n i.i.d. draws of S(dt); draw i uses stream (seed, i).
std::vector<double> sample_increments(const SubordinatorModel& model, double dt, std::size_t n, std::uint64_t seed,
                                      unsigned threads = 1, SamplerSettings settings = {});

PathGrid sample_path(const SubordinatorModel& model, std::vector<double> times, std::uint64_t seed,
                     SamplerSettings settings = {});

InverseSample inverse_passage(const SubordinatorModel& model, double t, double resolution, std::uint64_t seed,
                              SamplerSettings settings = {});

/// n independent draws of E(t); draw i uses stream (seed, i).
std::vector<InverseSample> sample_inverse(const SubordinatorSampler& sampler, double t, double resolution,
                                          std::size_t n, std::uint64_t seed, unsigned threads = 1);

/// Mean of exp(-lambda E(t)) over n draws with its standard error.
McEstimate laplace_functional_mc(const SubordinatorModel& model, double lambda, double t, std::size_t n,
                                 std::uint64_t seed, unsigned threads = 1, double resolution = 1e-7,
                                 SamplerSettings settings = {});

/// Mean and standard error of per-draw values, summed in index order.
McEstimate summarize(std::span<const double> values);

}  // namespace tcgreen
