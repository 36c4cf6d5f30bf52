#include "tcgreen/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tcgreen/error.hpp"
#include "tcgreen/special_functions.hpp"

namespace tcgreen {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw ShapeError("table '" + name + "': row width differs from the header");
    rows.push_back(std::move(row));
}

namespace {

// RFC 4180 quoting for cells holding separators (model descriptions do).
std::string csv_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string Table::to_csv() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_cell(columns[c]);
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
        os << '\n';
    }
    return os.str();
}

InversionMethod default_inversion(const SubordinatorModel& model) {
    return model.capabilities().complex_K ? InversionMethod::Talbot : InversionMethod::DeHoog;
}

void GreenSetup::validate() const {
    grid.validate();
    if (!(kernel_width > 0.0) || !(bump_width > 0.0)) throw ParameterError("kernel and bump widths must be positive");
    if (!std::isfinite(bump_amplitude)) throw ParameterError("bump amplitude must be finite");
    if (static_cast<int>(bump_center.size()) != grid.dim || static_cast<int>(start.size()) != grid.dim)
        throw ShapeError("bump center and start point must have the grid dimension");
    if (!(wrap_tolerance > 0.0 && wrap_tolerance < 1.0)) throw ParameterError("wrap tolerance must lie in (0,1)");
}

JumpKernel GreenSetup::kernel() const { return JumpKernel::gaussian(grid, kernel_width); }

PointFunction GreenSetup::bump() const {
    const Point center = bump_center;
    const double w2 = bump_width * bump_width, amp = bump_amplitude;
    return [center, w2, amp](std::span<const double> y) {
        double r2 = 0.0;
        for (std::size_t c = 0; c < center.size(); ++c) r2 += (y[c] - center[c]) * (y[c] - center[c]);
        return amp * std::exp(-0.5 * r2 / w2);
    };
}

Field GreenSetup::bump_field() const { return sample_field(grid, bump()); }

namespace {

std::string fixed_text(double v, int digits = 3) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

// Strictly decreasing, with values under the floor counted as zero (and zero allowed to repeat).
bool decreasing_above_floor(const std::vector<double>& values, double floor) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double prev = values[i - 1] < floor ? 0.0 : values[i - 1];
        const double cur = values[i] < floor ? 0.0 : values[i];
        if (!(cur < prev || (cur == 0.0 && prev == 0.0))) return false;
    }
    return true;
}

}  // namespace

// ------------------------------------------------------------------ 1: density oracle

CriterionResult check_density_oracle(std::vector<InversionMethod> methods, double tolerance) {
    CriterionResult r;
    r.id = 1;
    r.title = "stable(0.5) inverted density against exp(-tau^2/(4t))/sqrt(pi t)";
    Table tab{"density_oracle", {"method", "t", "tau", "G", "exact", "rel_error"}, {}};
    r.pass = true;
    std::ostringstream summary;
    const auto model = SubordinatorModel::stable(0.5);
    for (InversionMethod m : methods) {
        const DensityEvaluator ev(model, m);
        double worst = 0.0;
        for (double t : {0.1, 1.0, 10.0}) {
            const TimeSlice slice = ev.slice(t);
            for (double tau : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                const double g = slice.density(tau).value;
                const double exact = std::exp(-tau * tau / (4.0 * t)) / std::sqrt(M_PI * t);
                const double rel = std::abs(g - exact) / exact;
                worst = std::max(worst, rel);
                tab.add_row({to_string(m), format_number(t), format_number(tau), format_number(g), format_number(exact),
                             format_number(rel)});
            }
        }
        const bool ok = worst <= tolerance;
        r.pass = r.pass && ok;
        summary << to_string(m) << " worst relative error " << fixed_text(worst) << (ok ? " (ok); " : " (FAIL); ");
    }
    summary << "tolerance " << tolerance;
    r.summary = summary.str();
    r.tables.push_back(std::move(tab));
    return r;
}

// ------------------------------------------------------------------ 2: Mittag-Leffler law

CriterionResult check_mittag_leffler_law(std::size_t n, std::uint64_t seed, unsigned threads) {
    CriterionResult r;
    r.id = 2;
    r.title = "Monte Carlo E[exp(-E(1))] for stable(0.5) against E_0.5(-1)";
    const double target = mittag_leffler(0.5, -1.0);
    const McEstimate m = laplace_functional_mc(SubordinatorModel::stable(0.5), 1.0, 1.0, n, seed, threads);
    const double z = (m.mean - target) / m.std_error;
    r.pass = std::abs(z) <= 3.0;
    Table tab{"mittag_leffler_law", {"n", "seed", "mean", "std_error", "target", "z"}, {}};
    tab.add_row({std::to_string(n), std::to_string(seed), format_number(m.mean), format_number(m.std_error),
                 format_number(target), format_number(z)});
    r.tables.push_back(std::move(tab));
    r.summary = "mean " + fixed_text(m.mean, 6) + ", target " + fixed_text(target, 6) + ", z = " + fixed_text(z);
    return r;
}

// ------------------------------------------------------------------ 3: occupation ratio

CriterionResult check_occupation_ratio(const std::vector<SubordinatorModel>& models, const OccupationRatioOptions& o) {
    CriterionResult r;
    r.id = 3;
    r.title = "int_0^T G_s(tau) ds / N(T) tends to one uniformly on the tau grid";
    Table ratios{"occupation_ratio", {"model", "tau", "T", "ratio", "deviation"}, {}};
    Table bounds{"occupation_integral_bound", {"model", "T", "max_cumulative", "N_T", "bound_factor"}, {}};
    r.pass = true;
    std::ostringstream summary;
    for (const auto& model : models) {
        // DeHoog keeps the inversion noise near 1e-12 for every family, which the monotonicity test needs
        const DensityEvaluator ev(model, InversionMethod::DeHoog);
        bool model_ok = true;
        double worst_final = 0.0;
        for (double tau : o.taus) {
            std::vector<double> dev;
            for (double T : o.T_list) {
                const double ratio = occupation_ratio(ev, T, tau);
                dev.push_back(std::abs(ratio - 1.0));
                ratios.add_row({model.describe(), format_number(tau), format_number(T), format_number(ratio),
                                format_number(dev.back())});
            }
            worst_final = std::max(worst_final, dev.back());
            if (!(dev.back() < o.tolerance) || !decreasing_above_floor(dev, o.noise_floor)) model_ok = false;
        }
        for (double T : o.T_list) {
            const double N = normalization_N(model, T);
            double top = 0.0;
            for (double tau : o.bound_taus) top = std::max(top, ev.cumulative(T, tau));
            bounds.add_row({model.describe(), format_number(T), format_number(top), format_number(N),
                            format_number(o.occupation_bound)});
            if (top > o.occupation_bound * N) model_ok = false;
        }
        r.pass = r.pass && model_ok;
        summary << model.describe() << ": max deviation at T=" << o.T_list.back() << " is " << fixed_text(worst_final)
                << (model_ok ? " (ok); " : " (FAIL); ");
    }
    summary << "tolerance " << o.tolerance;
    r.summary = summary.str();
    r.tables.push_back(std::move(ratios));
    r.tables.push_back(std::move(bounds));
    return r;
}

// ------------------------------------------------------------------ 4: divergence without renormalization

CriterionResult check_divergence_rate(const SubordinatorModel& model, const GreenSetup& setup, double T, double lo,
                                        double hi) {
    setup.validate();
    CriterionResult r;
    r.id = 4;
    r.title = "unnormalized occupation integrals grow like N(T)";
    const DensityEvaluator ev(model, default_inversion(model));
    const ExtendedTrace trace(setup.kernel(), setup.bump_field(), setup.start, setup.wrap_tolerance);
    const double raw_T = renormalized_green_deterministic(ev, trace, T).raw_integral;
    const double raw_2T = renormalized_green_deterministic(ev, trace, 2 * T).raw_integral;
    const double c_T = ev.cumulative(T, 1.0), c_2T = ev.cumulative(2 * T, 1.0);
    const double n_ratio = normalization_N(model, 2 * T) / normalization_N(model, T);
    Table tab{"divergence_rate", {"quantity", "T", "value_T", "value_2T", "ratio", "N_ratio"}, {}};
    tab.add_row({"green_raw_integral", format_number(T), format_number(raw_T), format_number(raw_2T),
                 format_number(raw_2T / raw_T), format_number(n_ratio)});
    tab.add_row({"cumulative_tau_1", format_number(T), format_number(c_T), format_number(c_2T),
                 format_number(c_2T / c_T), format_number(n_ratio)});
    const double g = raw_2T / raw_T, c = c_2T / c_T;
    r.pass = g >= lo && g <= hi && c >= lo && c <= hi;
    r.summary = "raw(2T)/raw(T) = " + fixed_text(g, 4) + ", cumulative ratio at tau=1 = " + fixed_text(c, 4) +
                ", N ratio = " + fixed_text(n_ratio, 4) + ", accepted [" + fixed_text(lo) + ", " + fixed_text(hi) + "]";
    r.tables.push_back(std::move(tab));
    return r;
}

// ------------------------------------------------------------------ 5: Green pairing

CriterionResult check_green_pairing(const GreenSetup& setup, double tolerance) {
    setup.validate();
    CriterionResult r;
    r.id = 5;
    r.title = "Neumann-series Green pairing against time quadrature of the Kolmogorov solution";
    const JumpKernel a = setup.kernel();
    const Field f = setup.bump_field();
    GreenSettings gs;
    gs.wrap_tolerance = setup.wrap_tolerance;
    const GreenEstimate est = green_measure(a, f, setup.start, gs);
    const TimeQuadraturePairing tq = green_pairing_by_time_quadrature(a, f, setup.start, setup.wrap_tolerance);
    const double gap = std::abs(est.pairing - tq.total) / std::abs(tq.total);
    r.pass = gap <= tolerance;
    Table tab{"green_pairing",
              {"truncation_order", "atom_mass", "pairing_truncated", "tail_bound", "pairing", "time_horizon",
               "time_integral", "time_tail", "time_total", "rel_gap"},
              {}};
    tab.add_row({std::to_string(est.truncation_order), format_number(est.atom_mass), format_number(est.pairing_truncated),
                 format_number(est.tail_bound), format_number(est.pairing), format_number(tq.horizon),
                 format_number(tq.integral), format_number(tq.tail), format_number(tq.total), format_number(gap)});
    r.tables.push_back(std::move(tab));
    r.summary = "series " + fixed_text(est.pairing, 7) + ", time quadrature " + fixed_text(tq.total, 7) +
                ", relative gap " + fixed_text(gap) + ", tolerance " + fixed_text(tolerance);
    return r;
}

// ------------------------------------------------------------------ 6: renormalized Green measure

CriterionResult check_renormalized_green(const SubordinatorModel& model, const GreenSetup& setup,
                                         const RenormalizedOptions& o) {
    setup.validate();
    CriterionResult r;
    r.id = 6;
    r.title = "renormalized averages (Monte Carlo and deterministic) against the Green pairing";
    const JumpKernel a = setup.kernel();
    const Field f_lattice = setup.bump_field();
    GreenSettings gs;
    gs.wrap_tolerance = setup.wrap_tolerance;
    const double target = green_measure(a, f_lattice, setup.start, gs).pairing;
    const DensityEvaluator ev(model, default_inversion(model));
    const ExtendedTrace trace(a, f_lattice, setup.start, setup.wrap_tolerance);
    const SubordinatorSampler sampler(model);
    const JumpSampler jumps(a);
    const PointFunction f = setup.bump();

    Table tab{"renormalized_green",
              {"T", "route", "N_T", "raw_integral", "value", "std_error", "target", "rel_gap", "allowed"},
              {}};
    std::vector<double> mc_gaps, det_gaps;
    bool final_ok = true;
    double last_mc = 0.0, last_det = 0.0, last_se = 0.0;
    for (std::size_t i = 0; i < o.T_list.size(); ++i) {
        const double T = o.T_list[i];
        const RenormalizedAverage mc = renormalized_green_mc(sampler, jumps, f, setup.start, T, o.n_traj, o.seed, o.threads);
        const RenormalizedAverage det = renormalized_green_deterministic(ev, trace, T);
        const double scale = std::abs(target) > 0.0 ? std::abs(target) : 1.0;
        mc_gaps.push_back(std::abs(mc.value - target) / scale);
        det_gaps.push_back(std::abs(det.value - target) / scale);
        const double mc_allowed = std::max(o.stderr_multiple * mc.std_error / scale, o.tolerance);
        tab.add_row({format_number(T), "monte_carlo", format_number(mc.N_T), format_number(mc.raw_integral),
                     format_number(mc.value), format_number(mc.std_error), format_number(target),
                     format_number(mc_gaps.back()), format_number(mc_allowed)});
        tab.add_row({format_number(T), "deterministic", format_number(det.N_T), format_number(det.raw_integral),
                     format_number(det.value), "0", format_number(target), format_number(det_gaps.back()),
                     format_number(o.tolerance)});
        if (i + 1 == o.T_list.size()) {
            final_ok = mc_gaps.back() <= mc_allowed && det_gaps.back() <= o.tolerance;
            last_mc = mc.value;
            last_det = det.value;
            last_se = mc.std_error;
        }
    }
    const bool mc_decreasing = decreasing_above_floor(mc_gaps, 0.0);
    const bool det_decreasing = decreasing_above_floor(det_gaps, 0.0);
    r.pass = final_ok && mc_decreasing && det_decreasing;
    std::ostringstream s;
    s << "target " << fixed_text(target, 6) << "; at T=" << o.T_list.back() << " Monte Carlo " << fixed_text(last_mc, 6)
      << " (stderr " << fixed_text(last_se) << "), deterministic " << fixed_text(last_det, 6) << "; gaps decreasing: MC "
      << (mc_decreasing ? "yes" : "no") << ", deterministic " << (det_decreasing ? "yes" : "no");
    r.summary = s.str();
    r.tables.push_back(std::move(tab));
    return r;
}

// ------------------------------------------------------------------ 7: Cesaro decay

CriterionResult check_cesaro_decay(const std::vector<double>& alphas, const GreenSetup& setup, double t_lo, double t_hi,
                                   double tolerance) {
    setup.validate();
    CriterionResult r;
    r.id = 7;
    r.title = "log-log slope of Cesaro means of the fractional solution equals -alpha";
    const ExtendedTrace trace(setup.kernel(), setup.bump_field(), setup.start, setup.wrap_tolerance);
    Table means{"cesaro_means", {"alpha", "t", "mean"}, {}};
    Table slopes{"cesaro_slopes", {"alpha", "slope", "target", "deviation"}, {}};
    r.pass = true;
    std::ostringstream s;
    for (double alpha : alphas) {
        const DensityEvaluator ev(SubordinatorModel::stable(alpha));
        const CesaroDecay d = cesaro_decay(ev, trace, t_lo, t_hi);
        for (std::size_t i = 0; i < d.times.size(); ++i)
            means.add_row({format_number(alpha), format_number(d.times[i]), format_number(d.means[i])});
        const double dev = std::abs(d.slope + alpha);
        slopes.add_row({format_number(alpha), format_number(d.slope), format_number(-alpha), format_number(dev)});
        const bool ok = dev <= tolerance;
        r.pass = r.pass && ok;
        s << "alpha " << alpha << ": slope " << fixed_text(d.slope, 4) << (ok ? " (ok); " : " (FAIL); ");
    }
    s << "tolerance " << tolerance;
    r.summary = s.str();
    r.tables.push_back(std::move(means));
    r.tables.push_back(std::move(slopes));
    return r;
}

// ------------------------------------------------------------------ 8: two routes to the fractional solution

CriterionResult check_fke_cross_route(const SubordinatorModel& model, const GreenSetup& setup, std::vector<double> times,
                                      double time_step, double tolerance) {
    setup.validate();
    CriterionResult r;
    r.id = 8;
    r.title = "product-integration solver against subordination of the Kolmogorov semigroup";
    const JumpKernel a = setup.kernel();
    const Field f = setup.bump_field();
    FkeSettings fs;
    fs.time_step = time_step;
    const FkeSolution sol = solve_FKE(model, a, f, times, fs);
    const DensityEvaluator ev(model, default_inversion(model));
    Table tab{"fke_cross_route", {"t", "sup_gap", "fke_mass", "subordinated_mass", "initial_mass"}, {}};
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Field sub = subordinate_semigroup(a, f, ev, times[i]);
        const double gap = sup_distance(sol.fields[i], sub);
        worst = std::max(worst, gap);
        tab.add_row({format_number(times[i]), format_number(gap), format_number(sol.fields[i].mass()),
                     format_number(sub.mass()), format_number(f.mass())});
    }
    r.pass = worst <= tolerance;
    r.summary = "worst sup-norm gap " + fixed_text(worst) + " on a " + std::to_string(setup.grid.n) + "^" +
                std::to_string(setup.grid.dim) + " grid, step " + fixed_text(time_step) + ", tolerance " +
                fixed_text(tolerance);
    r.tables.push_back(std::move(tab));
    return r;
}

// ------------------------------------------------------------------ 9: double Laplace identity

CriterionResult check_double_laplace(double tolerance) {
    CriterionResult r;
    r.id = 9;
    r.title = "double Laplace identity for every family with a closed-form K";
    Table tab{"double_laplace", {"model", "lambda", "p", "quadrature", "expected", "residual"}, {}};
    double worst = 0.0;
    const std::vector<SubordinatorModel> models{
        SubordinatorModel::stable(0.5),           SubordinatorModel::gamma(1.0, 1.0),
        SubordinatorModel::truncated_stable(0.5, 1.0), SubordinatorModel::two_index_stable(0.25, 0.75),
        SubordinatorModel::tempered_stable(0.6, 1.0),  SubordinatorModel::distributed_order()};
    int families = 0;
    for (const auto& model : models) {
        if (!model.capabilities().K_closed) continue;
        ++families;
        const DensityEvaluator ev(model, default_inversion(model));
        for (double lambda : {0.5, 1.0, 2.0})
            for (double p : {0.5, 1.0, 2.0}) {
                const DoubleLaplaceResult d = double_laplace_residual(ev, lambda, p);
                worst = std::max(worst, d.residual);
                tab.add_row({model.describe(), format_number(lambda), format_number(p), format_number(d.quadrature),
                             format_number(d.expected), format_number(d.residual)});
            }
    }
    r.pass = worst <= tolerance;
    r.summary = std::to_string(families) + " families, worst residual " + fixed_text(worst) + ", tolerance " +
                fixed_text(tolerance);
    r.tables.push_back(std::move(tab));
    return r;
}

}  // namespace tcgreen
