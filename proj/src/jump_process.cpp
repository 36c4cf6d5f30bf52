#include "tcgreen/jump_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tcgreen/error.hpp"
#include "tcgreen/quadrature.hpp"

namespace tcgreen {

namespace {

// Flat index of the mirror image -y of site y.
std::size_t mirror_site(const Grid& g, std::size_t flat) {
    std::size_t out = 0, stride = 1;
    for (int axis = 0; axis < g.dim; ++axis) {
        const std::size_t i = flat % g.n;
        flat /= g.n;
        out += ((g.n - i) % g.n) * stride;
        stride *= g.n;
    }
    return out;
}

// Flat index of y - x for flat site indices (periodic).
std::size_t difference_site(const Grid& g, std::size_t y, std::size_t x) {
    std::size_t out = 0, stride = 1;
    for (int axis = 0; axis < g.dim; ++axis) {
        const std::size_t iy = y % g.n, ix = x % g.n;
        y /= g.n;
        x /= g.n;
        out += ((iy + g.n - ix) % g.n) * stride;
        stride *= g.n;
    }
    return out;
}

void require_same_grid(const JumpKernel& a, const Field& f) {
    if (!(a.grid() == f.grid) || f.values.size() != a.grid().size())
        throw ShapeError("field and jump kernel live on different grids");
}

Field multiply_symbol(const JumpKernel& a, const Field& f, const std::function<double(double)>& factor) {
    require_same_grid(a, f);
    const FourierTransform fft(a.grid());
    auto spec = fft.forward(f.values);
    const auto& sym = a.symbol();
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= factor(sym[k]);
    return Field{f.grid, fft.inverse(spec), f.time};
}

}  // namespace

// ------------------------------------------------------------------ kernel

JumpKernel::JumpKernel(const Grid& grid, std::vector<double> values, std::optional<double> width)
    : grid_(grid), values_(std::move(values)), gaussian_width_(width) {
    grid_.validate();
    if (values_.size() != grid_.size()) throw ShapeError("kernel values do not match the grid");
    double peak = 0.0;
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("jump kernel values must be finite and nonnegative");
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw ParameterError("jump kernel vanishes identically");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const std::size_t j = mirror_site(grid_, i);
        if (j < i) continue;
        if (std::abs(values_[i] - values_[j]) > 1e-12 * peak) throw ParameterError("jump kernel is not symmetric");
        const double mean = 0.5 * (values_[i] + values_[j]);
        values_[i] = values_[j] = mean;
    }
    const double vol = grid_.cell_volume();
    const double mass = std::accumulate(values_.begin(), values_.end(), 0.0) * vol;
    for (double& v : values_) v /= mass;

    for (std::size_t i = 0; i < values_.size(); ++i) {
        const Point y = grid_.site(i);
        double r2 = 0.0;
        for (double c : y) r2 += c * c;
        second_moment_ += r2 * values_[i];
    }
    second_moment_ *= vol;

    const FourierTransform fft(grid_);
    const auto spec = fft.forward(values_);
    symbol_.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) symbol_[k] = spec[k].real() * vol;
}

JumpKernel JumpKernel::gaussian(const Grid& grid, double width) {
    grid.validate();
    if (!(width > 0.0) || !std::isfinite(width)) throw ParameterError("Gaussian kernel width must be positive");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point y = grid.site(i);
        double r2 = 0.0;
        for (double c : y) r2 += c * c;
        v[i] = std::exp(-0.5 * r2 / (width * width));
    }
    return JumpKernel(grid, std::move(v), width);
}

JumpKernel JumpKernel::from_values(const Grid& grid, std::vector<double> values) {
    return JumpKernel(grid, std::move(values), std::nullopt);
}

// ------------------------------------------------------------------ generator and semigroup

Field generator_apply(const JumpKernel& a, const Field& f) {
    return multiply_symbol(a, f, [](double s) { return s - 1.0; });
}

Field solve_KE(const JumpKernel& a, const Field& f, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("solve_KE: t must be nonnegative");
    require_same_grid(a, f);
    if (t == 0.0) return f;
    Field u = multiply_symbol(a, f, [t](double s) { return std::exp(t * (s - 1.0)); });
    u.time = f.time + t;
    return u;
}

Field convolution_power_direct(const JumpKernel& a, int n) {
    const Grid& g = a.grid();
    if (n < 0) throw ParameterError("convolution power must be nonnegative");
    if (g.size() > 4096) throw ParameterError("direct convolution is only meant for small grids");
    const double vol = g.cell_volume();
    Field out = delta_field(g, 0);
    for (int p = 0; p < n; ++p) {
        std::vector<double> next(g.size(), 0.0);
        for (std::size_t y = 0; y < g.size(); ++y) {
            double s = 0.0;
            for (std::size_t z = 0; z < g.size(); ++z) s += a.values()[z] * out.values[difference_site(g, y, z)];
            next[y] = s * vol;
        }
        out.values = std::move(next);
    }
    return out;
}

Field convolution_power_spectral(const JumpKernel& a, int n) {
    if (n < 0) throw ParameterError("convolution power must be nonnegative");
    const Grid& g = a.grid();
    const FourierTransform fft(g);
    std::vector<std::complex<double>> spec(fft.spectrum_size());
    const double inv_vol = 1.0 / g.cell_volume();
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] = std::pow(a.symbol()[k], n) * inv_vol;
    return Field{g, fft.inverse(spec), 0.0};
}

// ------------------------------------------------------------------ trajectories

JumpSampler::JumpSampler(const JumpKernel& a) : dim_(a.grid().dim), width_(a.gaussian_width()), grid_(a.grid()) {
    if (width_) return;
    cdf_.resize(a.values().size());
    const double vol = grid_.cell_volume();
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
        acc += a.values()[i] * vol;
        cdf_[i] = acc;
    }
    for (double& c : cdf_) c /= acc;
}

void JumpSampler::draw(Rng& rng, std::span<double> displacement) const {
    if (static_cast<int>(displacement.size()) != dim_) throw ShapeError("displacement dimension mismatch");
    if (width_) {
        std::normal_distribution<double> normal(0.0, *width_);
        for (double& c : displacement) c = normal(rng);
        return;
    }
    const double u = uniform_open(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t site = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
    const Point y = grid_.site(site);
    std::copy(y.begin(), y.end(), displacement.begin());
}

std::span<const double> Trajectory::state_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return std::span<const double>(states).subspan(k * dim, dim);
}

Trajectory simulate_cpp(const JumpSampler& sampler, std::span<const double> x0, double T, Rng& rng) {
    if (static_cast<int>(x0.size()) != sampler.dim()) throw ShapeError("start point dimension mismatch");
    if (!(T > 0.0)) throw DomainError("simulate_cpp: horizon must be positive");
    Trajectory tr;
    tr.dim = sampler.dim();
    tr.times.push_back(0.0);
    tr.states.assign(x0.begin(), x0.end());
    std::exponential_distribution<double> wait(1.0);
    std::vector<double> jump(tr.dim);
    double t = 0.0;
    for (;;) {
        t += wait(rng);
        if (t > T) break;
        sampler.draw(rng, jump);
        const std::size_t last = tr.states.size() - tr.dim;
        for (int c = 0; c < tr.dim; ++c) tr.states.push_back(tr.states[last + c] + jump[c]);
        tr.times.push_back(t);
    }
    return tr;
}

Trajectory simulate_cpp(const JumpKernel& a, std::span<const double> x0, double T, std::uint64_t seed) {
    const JumpSampler sampler(a);
    Rng rng = make_stream(seed, 0);
    return simulate_cpp(sampler, x0, T, rng);
}

// ------------------------------------------------------------------ power tails

PowerTail PowerTail::fit(double n1, double v1, double n2, double v2, double power) {
    PowerTail t;
    t.power = power;
    if (!(v2 > 0.0)) return t;
    if (v1 > v2 && n2 > n1) {
        const double q = std::pow(v1 / v2, 1.0 / power);
        const double shift = (n2 - q * n1) / (q - 1.0);
        if (std::isfinite(shift) && shift > -n1) t.shift = shift;
    }
    t.amplitude = v2 * std::pow(n2 + t.shift, power);
    return t;
}

double PowerTail::operator()(double n) const { return amplitude * std::pow(n + shift, -power); }

double PowerTail::sum_beyond(int N) const {
    if (amplitude == 0.0) return 0.0;
    constexpr int kDirect = 2000;
    double s = 0.0;
    for (int n = N + 1; n <= N + kDirect; ++n) s += (*this)(n);
    // Euler-Maclaurin remainder from M on
    const double m = N + kDirect + 1 + shift;
    s += amplitude * (std::pow(m, 1.0 - power) / (power - 1.0) + 0.5 * std::pow(m, -power) +
                      power / 12.0 * std::pow(m, -power - 1.0));
    return s;
}

double PowerTail::integral_beyond(double T) const {
    if (amplitude == 0.0) return 0.0;
    return amplitude * std::pow(T + shift, 1.0 - power) / (power - 1.0);
}

// ------------------------------------------------------------------ point traces

PointTrace::PointTrace(const JumpKernel& a, const Field& f, std::span<const double> x) {
    require_same_grid(a, f);
    const Grid& g = a.grid();
    const std::size_t site = g.nearest_site(x);
    f_at_x_ = f.values[site];
    const Point xs = g.site(site);
    const FourierTransform fft(g);
    const auto spec = fft.forward(f.values);
    const double inv_n = 1.0 / static_cast<double>(g.size());

    std::vector<double> contrib(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const auto xi = fft.wavenumber(k);
        double phase = 0.0;
        for (int c = 0; c < g.dim; ++c) phase += xi[c] * xs[c];
        contrib[k] = fft.multiplicity(k) * inv_n * (spec[k] * std::polar(1.0, phase)).real();
    }
    const auto& sym = a.symbol();
    std::vector<std::size_t> order(spec.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sym[i] < sym[j]; });
    for (std::size_t idx : order) {
        if (!mu_.empty() && sym[idx] - mu_.back() <= 1e-13) {
            weight_.back() += contrib[idx];
        } else {
            mu_.push_back(sym[idx]);
            weight_.push_back(contrib[idx]);
        }
    }
}

double PointTrace::value(double tau) const {
    double s = 0.0;
    for (std::size_t g = 0; g < mu_.size(); ++g) s += weight_[g] * std::exp(-tau * (1.0 - mu_[g]));
    return s;
}

double PointTrace::neumann_term(int n) const {
    double s = 0.0;
    for (std::size_t g = 0; g < mu_.size(); ++g) s += weight_[g] * std::pow(mu_[g], n);
    return s;
}

double wrap_horizon(const JumpKernel& a, double tolerance) {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw ParameterError("wrap tolerance must lie in (0,1)");
    const int d = a.grid().dim;
    const double L = a.grid().extent();
    const double per_axis = a.second_moment() / d;
    return L * L / (2.0 * per_axis * std::log(2.0 * d / tolerance));
}

ExtendedTrace::ExtendedTrace(const JumpKernel& a, const Field& f, std::span<const double> x, double wrap_tolerance)
    : trace_(a, f, x), horizon_(wrap_horizon(a, wrap_tolerance)) {
    const double early = 0.75 * horizon_;
    tail_ = PowerTail::fit(early, trace_.value(early), horizon_, trace_.value(horizon_), 0.5 * a.grid().dim);
}

double ExtendedTrace::operator()(double tau) const { return tau <= horizon_ ? trace_.value(tau) : tail_(tau); }

// ------------------------------------------------------------------ Green measure

GreenEstimate green_measure(const JumpKernel& a, const Field& f, std::span<const double> x, GreenSettings settings) {
    require_same_grid(a, f);
    const Grid& g = a.grid();
    if (g.dim < 3) {
        std::ostringstream os;
        os << "the Green measure of the jump process requires dimension d >= 3 (got d = " << g.dim
           << "); sum of a^{*n} diverges at xi = 0";
        throw DivergenceError(os.str());
    }
    if (settings.n_max < 2) throw ParameterError("green_measure: n_max must be at least 2");
    const int order = std::min(settings.n_max, static_cast<int>(std::floor(wrap_horizon(a, settings.wrap_tolerance))));
    if (order < 2) throw ParameterError("green_measure: lattice too small, the wrap horizon is below two jumps");

    GreenEstimate est;
    est.truncation_order = order;

    const FourierTransform fft(g);
    std::vector<std::complex<double>> spec(fft.spectrum_size());
    const double inv_vol = 1.0 / g.cell_volume();
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double mu = a.symbol()[k];
        double p = 1.0, s = 0.0;
        for (int n = 1; n <= order; ++n) {
            p *= mu;
            s += p;
        }
        spec[k] = s * inv_vol;
    }
    const auto centred = fft.inverse(spec);
    const std::size_t xs = g.nearest_site(x);
    est.density = Field{g, std::vector<double>(g.size()), 0.0};
    for (std::size_t y = 0; y < g.size(); ++y) est.density.values[y] = centred[difference_site(g, y, xs)];

    double paired = 0.0;
    for (std::size_t y = 0; y < g.size(); ++y) paired += est.density.values[y] * f.values[y];
    est.pairing_truncated = f.values[xs] + paired * g.cell_volume();

    const PointTrace trace(a, f, x);
    const PowerTail tail = PowerTail::fit(order - 1, trace.neumann_term(order - 1), order, trace.neumann_term(order),
                                          0.5 * g.dim);
    est.tail_bound = tail.sum_beyond(order);
    est.pairing = est.pairing_truncated + est.tail_bound;
    if (est.tail_bound > settings.tail_tolerance * std::abs(est.pairing)) {
        std::ostringstream os;
        os << "tail beyond order " << order << " is " << est.tail_bound << ", above " << settings.tail_tolerance
           << " of the pairing; enlarge the lattice extent";
        est.warnings.push_back(os.str());
    }
    return est;
}

TimeQuadraturePairing green_pairing_by_time_quadrature(const JumpKernel& a, const Field& f, std::span<const double> x,
                                                       double wrap_tolerance) {
    const ExtendedTrace trace(a, f, x, wrap_tolerance);
    TimeQuadraturePairing out;
    out.horizon = trace.horizon();
    const int panels = static_cast<int>(std::ceil(out.horizon));
    for (int p = 0; p < panels; ++p) {
        const double lo = out.horizon * p / panels, hi = out.horizon * (p + 1) / panels;
        const GaussLegendre gl = gauss_legendre(16, lo, hi);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) out.integral += gl.weights[i] * trace.lattice().value(gl.nodes[i]);
    }
    out.tail = trace.tail().integral_beyond(out.horizon);
    out.total = out.integral + out.tail;
    return out;
}

}  // namespace tcgreen
