#include "tcgreen/fractional_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tcgreen/error.hpp"
#include "tcgreen/parallel.hpp"

namespace tcgreen {

namespace {

// Modes sharing a symbol value (to 1e-13) evolve identically.
struct SymbolGroups {
    std::vector<double> values;
    std::vector<std::size_t> group_of_mode;
};

SymbolGroups group_symbol(const std::vector<double>& symbol) {
    SymbolGroups g;
    g.group_of_mode.resize(symbol.size());
    std::vector<std::size_t> order(symbol.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return symbol[i] < symbol[j]; });
    for (std::size_t idx : order) {
        if (g.values.empty() || symbol[idx] - g.values.back() > 1e-13) g.values.push_back(symbol[idx]);
        g.group_of_mode[idx] = g.values.size() - 1;
    }
    return g;
}

// Composite Simpson in log tau over [tau_lo, tau_hi] for int g(tau) dtau, plus the trapezoid on [0, tau_lo].
// Returns nodes (first is 0) and the weights multiplying g.
void log_simpson(double tau_lo, double tau_hi, int nodes, std::vector<double>& tau, std::vector<double>& w) {
    const int intervals = nodes - 1;
    const double step = (std::log(tau_hi) - std::log(tau_lo)) / intervals;
    tau.assign(1, 0.0);
    w.assign(1, 0.5 * tau_lo);
    for (int i = 0; i <= intervals; ++i) {
        const double t = std::exp(std::log(tau_lo) + i * step);
        const double simpson = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        tau.push_back(t);
        w.push_back(simpson * step / 3.0 * t);
    }
    w[1] += 0.5 * tau_lo;
}

double time_scale(const SubordinatorModel& model, double t) { return 1.0 / phi(model, 1.0 / t); }

}  // namespace

// ------------------------------------------------------------------ subordination

void SubordinationSettings::validate() const {
    if (nodes < 5 || nodes % 2 == 0) throw ParameterError("subordination nodes must be odd and at least 5");
    if (!(lower_fraction > 0.0 && lower_fraction < 1.0)) throw ParameterError("lower_fraction must lie in (0,1)");
    if (!(tail_level > 0.0)) throw ParameterError("tail_level must be positive");
    if (!(weight_tolerance > 0.0)) throw ParameterError("weight_tolerance must be positive");
}

SubordinationRule SubordinationRule::build(const DensityEvaluator& ev, double t, const SubordinationSettings& settings) {
    settings.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("subordination needs t > 0");
    const SubordinatorModel& model = ev.model();
    const TimeSlice slice = ev.slice(t);
    const double scale = time_scale(model, t);
    const double tau_lo = settings.lower_fraction * scale;
    double tau_hi = 4.0 * scale;
    for (int k = 0; tau_hi * slice.density(tau_hi).value >= settings.tail_level; ++k) {
        if (k > 200) throw NumericError("subordination: density of E(t) does not decay");
        tau_hi *= 2.0;
    }

    SubordinationRule rule;
    rule.t = t;
    // peaked densities (gamma-like families at large t) need a finer log grid
    for (int nodes = settings.nodes;; nodes = 2 * nodes - 1) {
        std::vector<double> base;
        log_simpson(tau_lo, tau_hi, nodes, rule.nodes, base);
        rule.weights.resize(base.size());
        rule.weights[0] = base[0] * kernel_k(model, t);
        for (std::size_t i = 1; i < base.size(); ++i) rule.weights[i] = base[i] * slice.density(rule.nodes[i]).value;
        rule.weight_sum = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
        if (std::abs(rule.weight_sum - 1.0) <= 1e-6 || nodes >= 16 * settings.nodes) break;
    }
    if (std::abs(rule.weight_sum - 1.0) > settings.weight_tolerance) {
        std::ostringstream os;
        os << "subordination weights for " << model.describe() << " at t = " << t << " sum to " << rule.weight_sum;
        throw NormalizationError(os.str());
    }
    return rule;
}

double subordinate(const std::function<double(double)>& u, const DensityEvaluator& ev, double t,
                   const SubordinationSettings& settings) {
    if (t == 0.0) return u(0.0);
    const SubordinationRule rule = SubordinationRule::build(ev, t, settings);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * u(rule.nodes[i]);
    return s;
}

Field subordinate(const std::function<Field(double)>& u, const DensityEvaluator& ev, double t,
                  const SubordinationSettings& settings) {
    if (t == 0.0) return u(0.0);
    const SubordinationRule rule = SubordinationRule::build(ev, t, settings);
    Field out = u(rule.nodes[0]);
    for (double& v : out.values) v *= rule.weights[0];
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
        const Field term = u(rule.nodes[i]);
        if (!(term.grid == out.grid) || term.values.size() != out.values.size())
            throw ShapeError("subordinate: fields change grid along tau");
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += rule.weights[i] * term.values[k];
    }
    out.time = t;
    return out;
}

Field subordinate_semigroup(const JumpKernel& a, const Field& f, const DensityEvaluator& ev, double t,
                            const SubordinationSettings& settings) {
    if (!(a.grid() == f.grid) || f.values.size() != a.grid().size()) throw ShapeError("field and kernel grids differ");
    if (t == 0.0) return f;
    const SubordinationRule rule = SubordinationRule::build(ev, t, settings);
    const SymbolGroups groups = group_symbol(a.symbol());
    std::vector<double> factor(groups.values.size(), 0.0);
    for (std::size_t g = 0; g < factor.size(); ++g) {
        const double rate = 1.0 - groups.values[g];
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) factor[g] += rule.weights[i] * std::exp(-rule.nodes[i] * rate);
    }
    const FourierTransform fft(a.grid());
    auto spec = fft.forward(f.values);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= factor[groups.group_of_mode[k]];
    return Field{f.grid, fft.inverse(spec), f.time + t};
}

// ------------------------------------------------------------------ GFD and the fractional equation

std::vector<double> product_weights(const SubordinatorModel& model, double h, std::size_t count) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("time step must be positive");
    std::vector<double> K(count);
    double previous = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
        const double next = normalization_N(model, (m + 1) * h);
        K[m] = next - previous;
        previous = next;
    }
    return K;
}

double gfd_apply(std::span<const double> weights, std::span<const double> samples, double h, std::size_t j) {
    if (j == 0) throw DomainError("gfd_apply: the derivative at j = 0 needs history");
    if (j >= samples.size()) throw DomainError("gfd_apply: index beyond the samples");
    if (weights.size() < j) throw ShapeError("gfd_apply: too few product weights");
    double s = 0.0;
    for (std::size_t i = 1; i <= j; ++i) s += weights[j - i] * (samples[i] - samples[i - 1]);
    return s / h;
}

double gfd_apply(const SubordinatorModel& model, std::span<const double> samples, double h, std::size_t j) {
    if (j == 0) throw DomainError("gfd_apply: the derivative at j = 0 needs history");
    const auto K = product_weights(model, h, j);
    return gfd_apply(K, samples, h, j);
}

std::vector<double> relaxation_sequence(std::span<const double> weights, double h, double rate, std::size_t steps) {
    if (weights.size() < steps) throw ShapeError("relaxation_sequence: too few product weights");
    std::vector<double> y(steps + 1), diff(steps + 1, 0.0);
    y[0] = 1.0;
    if (steps == 0) return y;
    const double denom = weights[0] + h * rate;
    if (!(denom > 0.0)) throw StabilityError("product-integration denominator is not positive");
    for (std::size_t j = 1; j <= steps; ++j) {
        double history = 0.0;
        for (std::size_t i = 1; i < j; ++i) history += weights[j - i] * diff[i];
        y[j] = (weights[0] * y[j - 1] - history) / denom;
        diff[j] = y[j] - y[j - 1];
    }
    return y;
}

FkeSolution solve_FKE(const SubordinatorModel& model, const JumpKernel& a, const Field& f,
                      std::span<const double> output_times, const FkeSettings& settings) {
    if (!(a.grid() == f.grid) || f.values.size() != a.grid().size()) throw ShapeError("field and kernel grids differ");
    const double h = settings.time_step;
    if (!(h > 0.0)) throw ParameterError("solve_FKE: time step must be positive");
    std::vector<std::size_t> index(output_times.size());
    std::size_t steps = 0;
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        const double t = output_times[i];
        if (!(t >= 0.0)) throw DomainError("solve_FKE: output times must be nonnegative");
        const double j = std::round(t / h);
        if (std::abs(j * h - t) > 1e-9 * std::max(1.0, t)) throw ParameterError("solve_FKE: output times must be multiples of the step");
        index[i] = static_cast<std::size_t>(j);
        steps = std::max(steps, index[i]);
    }

    const auto K = product_weights(model, h, steps);
    const SymbolGroups groups = group_symbol(a.symbol());
    // factor[group][output]
    std::vector<double> factor(groups.values.size() * index.size());
    for (std::size_t g = 0; g < groups.values.size(); ++g) {
        const auto y = relaxation_sequence(K, h, 1.0 - groups.values[g], steps);
        for (std::size_t o = 0; o < index.size(); ++o) factor[g * index.size() + o] = y[index[o]];
    }

    FkeSolution sol;
    const FourierTransform fft(a.grid());
    const auto spec = fft.forward(f.values);
    for (std::size_t o = 0; o < index.size(); ++o) {
        sol.times.push_back(output_times[o]);
        if (index[o] == 0) {
            sol.fields.push_back(f);
            continue;
        }
        auto s = spec;
        for (std::size_t k = 0; k < s.size(); ++k) s[k] *= factor[groups.group_of_mode[k] * index.size() + o];
        sol.fields.push_back(Field{f.grid, fft.inverse(s), f.time + output_times[o]});
    }
    return sol;
}

std::vector<double> solve_FKE_at_point(const SubordinatorModel& model, const PointTrace& trace, double h,
                                       std::size_t steps) {
    const auto K = product_weights(model, h, steps);
    std::vector<double> v(steps + 1, 0.0);
    for (std::size_t g = 0; g < trace.symbol_values().size(); ++g) {
        const auto y = relaxation_sequence(K, h, 1.0 - trace.symbol_values()[g], steps);
        for (std::size_t j = 0; j <= steps; ++j) v[j] += trace.weights()[g] * y[j];
    }
    return v;
}

double cesaro_mean(std::span<const double> s_grid, std::span<const double> values, double t) {
    if (s_grid.size() != values.size() || s_grid.size() < 2) throw ShapeError("cesaro_mean: grid and values differ in size");
    if (!(t > 0.0)) throw DomainError("cesaro_mean: t must be positive");
    if (s_grid.front() != 0.0 || s_grid.back() < t) throw DomainError("cesaro_mean: grid must cover [0, t]");
    double acc = 0.0;
    for (std::size_t i = 1; i < s_grid.size(); ++i) {
        const double lo = s_grid[i - 1], hi = s_grid[i];
        if (!(hi > lo)) throw DomainError("cesaro_mean: grid must be increasing");
        if (hi <= t) {
            acc += 0.5 * (hi - lo) * (values[i - 1] + values[i]);
            if (hi == t) break;
            continue;
        }
        const double at_t = values[i - 1] + (values[i] - values[i - 1]) * (t - lo) / (hi - lo);
        acc += 0.5 * (t - lo) * (values[i - 1] + at_t);
        break;
    }
    return acc / t;
}

// ------------------------------------------------------------------ renormalized averages

RenormalizedAverage RenormalizedAverage::from_raw(double T, double N_T, double raw, double raw_std_error,
                                                  std::size_t samples) {
    if (!(N_T > 0.0)) throw DomainError("renormalization needs N(T) > 0");
    RenormalizedAverage r;
    r.T = T;
    r.N_T = N_T;
    r.value = raw / N_T;
    r.raw_integral = r.value * N_T;
    r.std_error = raw_std_error / N_T;
    r.samples = samples;
    return r;
}

RenormalizedAverage renormalized_green_mc(const SubordinatorSampler& sampler, const JumpSampler& jumps,
                                          const PointFunction& f, std::span<const double> x, double T,
                                          std::size_t n_traj, std::uint64_t seed, unsigned threads) {
    if (jumps.dim() < 3) throw DivergenceError("renormalized Green averages need dimension d >= 3");
    if (static_cast<int>(x.size()) != jumps.dim()) throw ShapeError("start point dimension mismatch");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
    if (n_traj < 2) throw ParameterError("need at least two trajectories");
    const double N_T = normalization_N(sampler.model(), T);
    if (!(N_T > 10.0)) {
        std::ostringstream os;
        os << "N(T) = " << N_T << " at T = " << T << "; the horizon must make N(T) exceed 10";
        throw ParameterError(os.str());
    }
    const std::size_t max_steps = static_cast<std::size_t>(sampler.settings().max_coarse_steps);
    std::vector<double> raw(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        std::exponential_distribution<double> wait(1.0);
        std::vector<double> state(x.begin(), x.end()), jump(state.size());
        double clock = 0.0, acc = 0.0;
        for (std::size_t step = 0;; ++step) {
            if (step > max_steps) throw HorizonError("renormalized_green_mc: too many jumps before the horizon");
            // X holds still for an Exp(1) stretch of operational time; S maps it to physical time
            const double held = sampler.increment(wait(rng), rng);
            acc += f(state) * std::min(held, T - clock);
            clock += held;
            if (clock >= T) break;
            jumps.draw(rng, jump);
            for (std::size_t c = 0; c < state.size(); ++c) state[c] += jump[c];
        }
        raw[i] = acc;
    });
    const McEstimate m = summarize(raw);
    return RenormalizedAverage::from_raw(T, N_T, m.mean, m.std_error, n_traj);
}

RenormalizedAverage renormalized_green_deterministic(const DensityEvaluator& ev, const ExtendedTrace& trace, double T,
                                                     const SubordinationSettings& settings) {
    settings.validate();
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
    const SubordinatorModel& model = ev.model();
    const double N_T = normalization_N(model, T);
    const TimeSlice slice = ev.slice(T);
    const double scale = time_scale(model, T);
    const double tau_lo = settings.lower_fraction * scale;
    double tau_hi = 4.0 * scale;
    for (int k = 0; slice.cumulative(tau_hi) >= 1e-10 * N_T; ++k) {
        if (k > 200) throw NumericError("occupation density does not decay in tau");
        tau_hi *= 2.0;
    }
    std::vector<double> tau, w;
    log_simpson(tau_lo, tau_hi, settings.nodes, tau, w);
    double raw = w[0] * trace(0.0) * N_T;
    for (std::size_t i = 1; i < tau.size(); ++i) raw += w[i] * trace(tau[i]) * slice.cumulative(tau[i]);
    return RenormalizedAverage::from_raw(T, N_T, raw, 0.0, 0);
}

FkeAverageReport verify_fke_average(const DensityEvaluator& ev, const ExtendedTrace& trace, double target,
                                    std::span<const double> T_list) {
    FkeAverageReport report;
    for (double T : T_list) {
        FkeAverageRow row;
        row.T = T;
        row.normalized = renormalized_green_deterministic(ev, trace, T).value;
        row.target = target;
        const double diff = std::abs(row.normalized - target);
        row.gap = target != 0.0 ? diff / std::abs(target) : diff;
        report.rows.push_back(row);
    }
    report.gaps_decreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (report.rows[i].gap > report.rows[i - 1].gap) report.gaps_decreasing = false;
    return report;
}

double occupation_ratio(const DensityEvaluator& ev, double T, double tau) {
    return ev.cumulative(T, tau) / normalization_N(ev.model(), T);
}

CesaroDecay cesaro_decay(const DensityEvaluator& ev, const ExtendedTrace& trace, double t_lo, double t_hi,
                         int points_per_decade, const SubordinationSettings& settings) {
    if (!(t_lo > 0.0 && t_hi > t_lo)) throw DomainError("cesaro_decay: need 0 < t_lo < t_hi");
    if (points_per_decade < 1) throw ParameterError("cesaro_decay: points_per_decade must be positive");
    constexpr int kRefine = 4;
    constexpr double kDecadesBelow = 6.0;
    const double ratio = std::pow(10.0, 1.0 / (points_per_decade * kRefine));
    const int below = static_cast<int>(std::ceil(kDecadesBelow * points_per_decade * kRefine));
    const int above = static_cast<int>(std::ceil(std::log(t_hi / t_lo) / std::log(ratio) - 1e-9));

    std::vector<double> s{0.0}, v{trace(0.0)};
    for (int k = -below; k <= above; ++k) {
        s.push_back(t_lo * std::pow(ratio, k));
        v.push_back(subordinate([&](double tau) { return trace(tau); }, ev, s.back(), settings));
    }
    CesaroDecay out;
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        acc += 0.5 * (s[i] - s[i - 1]) * (v[i] + v[i - 1]);
        const int k = static_cast<int>(i) - 1 - below;
        if (k >= 0 && k % kRefine == 0) {
            out.times.push_back(s[i]);
            out.means.push_back(acc / s[i]);
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(out.times.size());
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        if (!(out.means[i] > 0.0)) throw NumericError("cesaro_decay: means must be positive for a log-log fit");
        const double lx = std::log(out.times[i]), ly = std::log(out.means[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

}  // namespace tcgreen
