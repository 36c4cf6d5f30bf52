#include "tcgreen/samplers.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <variant>

#include "tcgreen/error.hpp"
#include "tcgreen/parallel.hpp"
#include "tcgreen/special_functions.hpp"

namespace tcgreen {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log of a Gamma(shape, 1) variate; finite even when the variate itself underflows.
double log_gamma_variate(double shape, Rng& rng) {
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(rng));
    }
    std::gamma_distribution<double> g(shape + 1.0, 1.0);
    return std::log(g(rng)) + std::log(uniform_open(rng)) / shape;
}

// Kanter's representation of the standard one-sided stable law, E e^{-lambda Z} = e^{-lambda^alpha}.
double kanter(double alpha, Rng& rng) {
    const double phi = kPi * uniform_open(rng);
    const double e = -std::log(uniform_open(rng));
    return std::pow(zolotarev_a(alpha, phi) / e, (1.0 - alpha) / alpha);
}

// log p_alpha(x) of the standard one-sided stable law, tabulated in log x.
class StableLogDensity {
public:
    explicit StableLogDensity(double alpha) : alpha_(alpha) {
        const double ratio = alpha / (1.0 - alpha);
        c0_ = (1.0 - alpha) * std::pow(alpha, ratio);
        tail_power_ = (2.0 - alpha) / (2.0 * (1.0 - alpha));
        // Left end where the exponent reaches 300, right end where x^-alpha = 1e-3.
        u_lo_ = -std::log(300.0 / c0_) / ratio;
        u_hi_ = 3.0 * std::log(10.0) / alpha;
        const int n = static_cast<int>(std::ceil((u_hi_ - u_lo_) / kStep)) + 1;
        step_ = (u_hi_ - u_lo_) / (n - 1);
        std::vector<double> values(n);
        int arg = 0;
        for (int i = 0; i < n; ++i) {
            values[i] = std::log(stable_density(alpha, std::exp(u_lo_ + i * step_)));
            if (values[i] > values[arg]) arg = i;
        }
        log_at_lo_ = values.front();
        spline_ = std::make_shared<Spline>(values.data(), values.size(), u_lo_, step_);
        // golden-section refinement of the mode
        double a = u_lo_ + std::max(0, arg - 1) * step_, b = u_lo_ + std::min(n - 1, arg + 1) * step_;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 60; ++it) {
            const double c = b - g * (b - a), d = a + g * (b - a);
            if ((*spline_)(c) > (*spline_)(d))
                b = d;
            else
                a = c;
        }
        mode_ = std::exp(0.5 * (a + b));
        log_max_ = (*this)(mode_);
    }

    double operator()(double x) const {
        const double u = std::log(x);
        if (u < u_lo_) return log_at_lo_ + left_tail(x) - left_tail(std::exp(u_lo_));
        if (u > u_hi_) return std::log(stable_density(alpha_, x));
        return (*spline_)(u);
    }

    /// Upper bound of log p over [lo, hi] (unimodal density), with a little headroom for interpolation.
    double max_on(double lo, double hi) const {
        double m;
        if (hi <= mode_)
            m = (*this)(hi);
        else if (lo >= mode_)
            m = (*this)(lo);
        else
            m = log_max_;
        return m + 1e-6;
    }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    static constexpr double kStep = 0.02;

    double left_tail(double x) const {
        return -tail_power_ * std::log(x) - c0_ * std::pow(x, -alpha_ / (1.0 - alpha_));
    }

    double alpha_;
    double c0_ = 0.0, tail_power_ = 0.0;
    double u_lo_ = 0.0, u_hi_ = 0.0, step_ = 0.0;
    double log_at_lo_ = 0.0;
    double mode_ = 1.0, log_max_ = 0.0;
    std::shared_ptr<const Spline> spline_;
};

// Phi = scale * lambda^alpha
struct StablePart {
    double alpha;
    double scale;
    std::shared_ptr<const StableLogDensity> density;
};
// Phi = (lambda + gamma)^alpha - gamma^alpha
struct TiltedStablePart {
    double alpha;
    double gamma;
    std::shared_ptr<const StableLogDensity> density;
};
// Phi = a log(1 + lambda / b)
struct GammaPart {
    double a;
    double b;
};
// Jumps with density proportional to x^{-1-alpha} on (lo, hi].
struct ParetoJumps {
    double alpha, lo, hi;
};
struct GammaJumps {
    double shape, rate;
};
struct PoissonPart {
    double rate;
    double drift;
    std::variant<ParetoJumps, GammaJumps> jumps;
};
using Part = std::variant<StablePart, TiltedStablePart, GammaPart, PoissonPart>;

// A part's contribution over one interval; compound Poisson parts keep their jumps for bridging.
struct Piece {
    double value = 0.0;
    std::vector<double> jumps;
};

struct Node {
    double start = 0.0;
    double length = 0.0;
    double s_start = 0.0;
    double total = 0.0;
    std::vector<Piece> pieces;
    int left = -1;
    int right = -1;
};

[[noreturn]] void rejection_failure(const char* what, long proposals, long accepted) {
    std::ostringstream os;
    os << what << ": rejection loop hit its cap after " << proposals << " proposals (acceptance rate "
       << (proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0) << ")";
    throw NumericError(os.str());
}

}  // namespace

struct SubordinatorSampler::Impl {
    SubordinatorModel model;
    SamplerSettings settings;
    std::vector<Part> parts;
    double cutoff = 0.0;
    double variance_rate = 0.0;

    Impl(const SubordinatorModel& m, SamplerSettings s) : model(m), settings(s) {}

    double draw_jump(const PoissonPart& p, Rng& rng) const {
        return std::visit(Overloaded{[&](const ParetoJumps& j) {
                                         const double a = std::pow(j.lo, -j.alpha), b = std::pow(j.hi, -j.alpha);
                                         return std::pow(a - uniform_open(rng) * (a - b), -1.0 / j.alpha);
                                     },
                                     [&](const GammaJumps& j) {
                                         std::gamma_distribution<double> g(j.shape, 1.0 / j.rate);
                                         return g(rng);
                                     }},
                          p.jumps);
    }

    Piece fresh(const Part& part, double len, Rng& rng) const {
        Piece piece;
        std::visit(Overloaded{[&](const StablePart& p) {
                                  piece.value = std::pow(p.scale * len, 1.0 / p.alpha) * kanter(p.alpha, rng);
                              },
                              [&](const TiltedStablePart& p) {
                                  // Exponential tilting by rejection; pieces keep the acceptance near e^{-1} or better.
                                  const double load = len * std::pow(p.gamma, p.alpha);
                                  const long m = std::max(1L, static_cast<long>(std::ceil(load)));
                                  const double sub_scale = std::pow(len / m, 1.0 / p.alpha);
                                  for (long i = 0; i < m; ++i) {
                                      long tries = 0;
                                      for (;;) {
                                          if (++tries > settings.max_rejections)
                                              rejection_failure("tempered stable increment", tries, 0);
                                          const double x = sub_scale * kanter(p.alpha, rng);
                                          if (uniform_open(rng) < std::exp(-p.gamma * x)) {
                                              piece.value += x;
                                              break;
                                          }
                                      }
                                  }
                              },
                              [&](const GammaPart& p) {
                                  piece.value = std::exp(log_gamma_variate(p.a * len, rng)) / p.b;
                              },
                              [&](const PoissonPart& p) {
                                  std::poisson_distribution<long> count(p.rate * len);
                                  const long n = count(rng);
                                  piece.jumps.reserve(n);
                                  double sum = 0.0;
                                  for (long i = 0; i < n; ++i) {
                                      piece.jumps.push_back(draw_jump(p, rng));
                                      sum += piece.jumps.back();
                                  }
                                  piece.value = sum + p.drift * len;
                              }},
                   part);
        return piece;
    }

    // Given S(a), a stable-law total z over a window, draw the two halves from their conditional law.
    // The smaller half has density proportional to q(w) q(z - w) on (0, z/2]; propose from q cut at z/2
    // and accept with q(z - w) / max q on [z/2, z].
    std::pair<double, double> stable_bridge(const StableLogDensity& density, double alpha, double z,
                                            double half_scale, Rng& rng) const {
        if (!(z > 0.0)) return {0.0, 0.0};
        const double zeta = z / half_scale;
        const double bound = density.max_on(0.5 * zeta, zeta);
        long proposals = 0, inside = 0;
        while (proposals < settings.max_rejections) {
            ++proposals;
            const double m = kanter(alpha, rng);
            if (m > 0.5 * zeta) continue;
            ++inside;
            if (uniform_open(rng) < std::exp(density(zeta - m) - bound)) {
                const double w = m * half_scale;
                if (rng() & 1u) return {w, z - w};
                return {z - w, w};
            }
        }
        rejection_failure("stable bridge", proposals, inside);
    }

    std::pair<Piece, Piece> split(const Part& part, const Piece& piece, double len, Rng& rng) const {
        Piece l, r;
        std::visit(Overloaded{[&](const StablePart& p) {
                                  const double hs = std::pow(p.scale * 0.5 * len, 1.0 / p.alpha);
                                  std::tie(l.value, r.value) = stable_bridge(*p.density, p.alpha, piece.value, hs, rng);
                              },
                              [&](const TiltedStablePart& p) {
                                  // the tilt factor depends only on the total, so the bridge is the stable one
                                  const double hs = std::pow(0.5 * len, 1.0 / p.alpha);
                                  std::tie(l.value, r.value) = stable_bridge(*p.density, p.alpha, piece.value, hs, rng);
                              },
                              [&](const GammaPart& p) {
                                  // Beta(s, s) fraction from two log-gamma variates
                                  const double shape = 0.5 * p.a * len;
                                  const double lx = log_gamma_variate(shape, rng), ly = log_gamma_variate(shape, rng);
                                  const double small = piece.value / (1.0 + std::exp(std::abs(lx - ly)));
                                  const double large = piece.value - small;
                                  l.value = lx < ly ? small : large;
                                  r.value = lx < ly ? large : small;
                              },
                              [&](const PoissonPart& p) {
                                  double sl = 0.0, sr = 0.0;
                                  for (double j : piece.jumps) {
                                      if (rng() & 1u) {
                                          l.jumps.push_back(j);
                                          sl += j;
                                      } else {
                                          r.jumps.push_back(j);
                                          sr += j;
                                      }
                                  }
                                  l.value = sl + 0.5 * p.drift * len;
                                  r.value = sr + 0.5 * p.drift * len;
                              }},
                   part);
        return {std::move(l), std::move(r)};
    }

    Node fresh_node(double start, double len, double s_start, Rng& rng) const {
        Node n;
        n.start = start;
        n.length = len;
        n.s_start = s_start;
        n.pieces.reserve(parts.size());
        for (const Part& p : parts) {
            n.pieces.push_back(fresh(p, len, rng));
            n.total += n.pieces.back().value;
        }
        return n;
    }

    double coarse_step(double level, double resolution) const {
        return std::max(resolution, 0.25 / phi(model, 1.0 / level));
    }
};

namespace {

// Walks one path forward in coarse steps and refines each step lazily as a binary tree, so that
// several levels can be resolved on the same realization.
class PassageWalker {
public:
    PassageWalker(const SubordinatorSampler::Impl& impl, double step, Rng& rng) : impl_(impl), step_(step), rng_(rng) {}

    InverseSample query(double level, double resolution) {
        InverseSample out;
        out.t = level;
        if (!(level > 0.0)) return out;
        if (tree_.empty()) tree_.push_back(impl_.fresh_node(0.0, step_, 0.0, rng_));
        while (tree_[0].s_start + tree_[0].total < level) {
            if (++steps_ > impl_.settings.max_coarse_steps) {
                std::ostringstream os;
                os << "path of " << impl_.model.describe() << " did not reach level " << level << " within "
                   << impl_.settings.max_coarse_steps << " steps of " << step_;
                throw HorizonError(os.str());
            }
            const Node& root = tree_[0];
            Node next = impl_.fresh_node(root.start + root.length, step_, root.s_start + root.total, rng_);
            tree_.clear();
            tree_.push_back(std::move(next));
        }
        std::size_t idx = 0;
        while (tree_[idx].length > resolution) {
            if (tree_[idx].left < 0) split(idx);
            const Node& left = tree_[tree_[idx].left];
            idx = (left.s_start + left.total >= level) ? tree_[idx].left : tree_[idx].right;
        }
        const Node& n = tree_[idx];
        out.e_value = n.start + 0.5 * n.length;
        out.bracket = {n.start, n.start + n.length};
        out.s_lower = n.s_start;
        out.s_upper = n.s_start + n.total;
        return out;
    }

private:
    void split(std::size_t idx) {
        Node l, r;
        {
            const Node& p = tree_[idx];
            const double half = 0.5 * p.length;
            l.start = p.start;
            r.start = p.start + half;
            l.length = r.length = half;
            l.s_start = p.s_start;
            for (std::size_t i = 0; i < impl_.parts.size(); ++i) {
                auto [a, b] = impl_.split(impl_.parts[i], p.pieces[i], p.length, rng_);
                l.total += a.value;
                l.pieces.push_back(std::move(a));
                r.pieces.push_back(std::move(b));
            }
            r.s_start = p.s_start + l.total;
            r.total = std::max(0.0, p.total - l.total);
        }
        tree_.push_back(std::move(l));
        tree_.push_back(std::move(r));
        tree_[idx].left = static_cast<int>(tree_.size() - 2);
        tree_[idx].right = static_cast<int>(tree_.size() - 1);
    }

    const SubordinatorSampler::Impl& impl_;
    double step_;
    Rng& rng_;
    std::vector<Node> tree_;
    long steps_ = 0;
};

void require_resolution(double resolution) {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw ParameterError("inverse passage: resolution must be positive");
}

}  // namespace

void SamplerSettings::validate() const {
    if (!(truncation_ratio > 0.0 && truncation_ratio < 1.0))
        throw ParameterError("sampler: truncation_ratio must lie in (0,1)");
    if (max_rejections < 1) throw ParameterError("sampler: max_rejections must be positive");
    if (max_coarse_steps < 1) throw ParameterError("sampler: max_coarse_steps must be positive");
}

SubordinatorSampler::SubordinatorSampler(const SubordinatorModel& model, SamplerSettings settings)
    : impl_(std::make_unique<Impl>(model, settings)) {
    settings.validate();
    auto& parts = impl_->parts;
    std::visit(Overloaded{[&](const StableFamily& f) {
                              parts.push_back(StablePart{f.alpha, 1.0, std::make_shared<StableLogDensity>(f.alpha)});
                          },
                          [&](const GammaFamily& f) { parts.push_back(GammaPart{f.a, f.b}); },
                          [&](const TruncatedStableFamily& f) {
                              const double eps = settings.truncation_ratio * f.delta;
                              const double g = std::tgamma(1.0 - f.alpha);
                              const double rate = (std::pow(eps, -f.alpha) - std::pow(f.delta, -f.alpha)) / g;
                              const double drift = f.alpha * std::pow(eps, 1.0 - f.alpha) / ((1.0 - f.alpha) * g);
                              parts.push_back(PoissonPart{rate, drift, ParetoJumps{f.alpha, eps, f.delta}});
                              impl_->cutoff = eps;
                              impl_->variance_rate = f.alpha * std::pow(eps, 2.0 - f.alpha) / ((2.0 - f.alpha) * g);
                          },
                          [&](const TwoIndexStableFamily& f) {
                              parts.push_back(StablePart{f.alpha, 1.0, std::make_shared<StableLogDensity>(f.alpha)});
                              parts.push_back(StablePart{f.beta, 1.0, std::make_shared<StableLogDensity>(f.beta)});
                          },
                          [&](const TemperedStableFamily& f) {
                              // tilted stable plus jumps of rate gamma^alpha with Gamma(1 - alpha, gamma) sizes
                              parts.push_back(
                                  TiltedStablePart{f.alpha, f.gamma, std::make_shared<StableLogDensity>(f.alpha)});
                              parts.push_back(
                                  PoissonPart{std::pow(f.gamma, f.alpha), 0.0, GammaJumps{1.0 - f.alpha, f.gamma}});
                          },
                          [&](const DistributedOrderFamily&) {
                              throw UnsupportedError(
                                  "no exact sampler for the distributed-order subordinator; use the density routes");
                          }},
               model.family());
}

SubordinatorSampler::~SubordinatorSampler() = default;
SubordinatorSampler::SubordinatorSampler(SubordinatorSampler&&) noexcept = default;
SubordinatorSampler& SubordinatorSampler::operator=(SubordinatorSampler&&) noexcept = default;

const SubordinatorModel& SubordinatorSampler::model() const { return impl_->model; }
const SamplerSettings& SubordinatorSampler::settings() const { return impl_->settings; }
double SubordinatorSampler::small_jump_cutoff() const { return impl_->cutoff; }
double SubordinatorSampler::small_jump_variance_rate() const { return impl_->variance_rate; }

double SubordinatorSampler::increment(double dt, Rng& rng) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("increment: dt must be positive");
    double sum = 0.0;
    for (const Part& p : impl_->parts) sum += impl_->fresh(p, dt, rng).value;
    return sum;
}

std::vector<double> SubordinatorSampler::path_values(std::span<const double> times, Rng& rng) const {
    std::vector<double> values(times.size());
    double prev_t = 0.0, s = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < prev_t) throw ParameterError("path times must be nondecreasing and nonnegative");
        if (times[i] > prev_t) s += increment(times[i] - prev_t, rng);
        values[i] = s;
        prev_t = times[i];
    }
    return values;
}

InverseSample SubordinatorSampler::inverse_passage(double t, double resolution, Rng& rng) const {
    const double level = t;
    return inverse_passages(std::span<const double>(&level, 1), resolution, rng).front();
}

std::vector<InverseSample> SubordinatorSampler::inverse_passages(std::span<const double> levels, double resolution,
                                                                 Rng& rng) const {
    require_resolution(resolution);
    std::vector<InverseSample> out;
    out.reserve(levels.size());
    if (levels.empty()) return out;
    double top = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 0.0 || !std::isfinite(levels[i])) throw DomainError("inverse passage: levels must be nonnegative");
        if (i > 0 && levels[i] < levels[i - 1]) throw ParameterError("inverse passage: levels must be nondecreasing");
        top = std::max(top, levels[i]);
    }
    const double step = top > 0.0 ? impl_->coarse_step(top, resolution) : resolution;
    PassageWalker walker(*impl_, step, rng);
    for (double level : levels) out.push_back(walker.query(level, resolution));
    return out;
}

std::vector<double> sample_increments(const SubordinatorModel& model, double dt, std::size_t n, std::uint64_t seed,
                                      unsigned threads, SamplerSettings settings) {
    const SubordinatorSampler sampler(model, settings);
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        out[i] = sampler.increment(dt, rng);
    });
    return out;
}

PathGrid sample_path(const SubordinatorModel& model, std::vector<double> times, std::uint64_t seed,
                     SamplerSettings settings) {
    const SubordinatorSampler sampler(model, settings);
    Rng rng = make_stream(seed, 0);
    PathGrid g{std::move(times), {}, model, seed};
    g.values = sampler.path_values(g.times, rng);
    return g;
}

InverseSample inverse_passage(const SubordinatorModel& model, double t, double resolution, std::uint64_t seed,
                              SamplerSettings settings) {
    const SubordinatorSampler sampler(model, settings);
    Rng rng = make_stream(seed, 0);
    return sampler.inverse_passage(t, resolution, rng);
}

std::vector<InverseSample> sample_inverse(const SubordinatorSampler& sampler, double t, double resolution,
                                          std::size_t n, std::uint64_t seed, unsigned threads) {
    std::vector<InverseSample> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        out[i] = sampler.inverse_passage(t, resolution, rng);
    });
    return out;
}

McEstimate summarize(std::span<const double> values) {
    McEstimate e;
    e.n = values.size();
    if (e.n == 0) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    if (e.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
    }
    return e;
}

McEstimate laplace_functional_mc(const SubordinatorModel& model, double lambda, double t, std::size_t n,
                                 std::uint64_t seed, unsigned threads, double resolution, SamplerSettings settings) {
    if (n < 1000) throw ParameterError("laplace_functional_mc: at least 1000 draws are required");
    if (!(lambda >= 0.0)) throw DomainError("laplace_functional_mc: lambda must be nonnegative");
    if (!(t >= 0.0)) throw DomainError("laplace_functional_mc: t must be nonnegative");
    if (lambda == 0.0) return {1.0, 0.0, n};
    const SubordinatorSampler sampler(model, settings);
    const auto draws = sample_inverse(sampler, t, resolution, n, seed, threads);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = std::exp(-lambda * draws[i].e_value);
    return summarize(values);
}

}  // namespace tcgreen
