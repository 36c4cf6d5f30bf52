#include "tcgreen/cli/commands.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "tcgreen/cli/config.hpp"
#include "tcgreen/cli/output.hpp"
#include "tcgreen/parallel.hpp"
#include "tcgreen/special_functions.hpp"

namespace tcgreen::cli {

using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string integer_text(std::size_t v) { return std::to_string(v); }

void require_green_dimension(const ExperimentConfig& cfg, const std::string& what) {
    if (cfg.dimension < 3)
        throw DivergenceError(what + ": the Green measure exists only in dimension d >= 3 (lattice.dimension = " +
                              std::to_string(cfg.dimension) + ")");
}

Table field_table(const std::string& name, const Field& field) {
    Table t;
    t.name = name;
    for (int c = 0; c < field.grid.dim; ++c) t.columns.push_back("x" + std::to_string(c + 1));
    t.columns.push_back("value");
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        std::vector<std::string> row;
        for (double c : field.grid.site(i)) row.push_back(format_number(c));
        row.push_back(format_number(field.values[i]));
        t.add_row(std::move(row));
    }
    return t;
}

void announce(std::ostream& out, const ArtifactWriter& writer) {
    for (const auto& name : writer.artifacts()) out << "wrote " << (writer.dir() / name).string() << '\n';
}

void finish(ArtifactWriter& writer, const std::string& subcommand, const ExperimentConfig& cfg, std::ostream& out) {
    write_manifest(writer, subcommand, cfg);
    announce(out, writer);
}

// ------------------------------------------------------------------ kernel

int run_kernel(const ExperimentConfig& cfg, std::ostream& out) {
    ArtifactWriter writer(cfg.out_dir);
    const SubordinatorModel model = cfg.subordinator();

    Table laplace{"kernel_laplace", {"lambda", "phi", "K"}, {}};
    for (double lambda : cfg.lambdas)
        laplace.add_row({format_number(lambda), format_number(phi(model, lambda)), format_number(laplace_K(model, lambda))});

    Table time{"kernel_time", {"t", "k", "N", "levy_density"}, {}};
    for (double t : cfg.kernel_times) {
        double levy = kNan;
        try {
            levy = levy_density(model, t);
        } catch (const UnsupportedError&) {
        }
        time.add_row({format_number(t), format_number(kernel_k(model, t)), format_number(normalization_N(model, t)),
                      format_number(levy)});
    }

    const AdmissibilityReport adm = check_admissibility(model);
    Table admissible{"kernel_admissibility",
                     {"model", "K_infinite_at_0", "K_vanishes_at_infinity", "phi_vanishes_at_0", "phi_infinite_at_infinity",
                      "a1_estimate", "a2_max_deviation", "admissible"},
                     {}};
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    admissible.add_row({model.describe(), flag(adm.h_ok[0]), flag(adm.h_ok[1]), flag(adm.h_ok[2]), flag(adm.h_ok[3]),
                        format_number(adm.a1_estimate), format_number(adm.a2_max_deviation), flag(adm.verdict)});

    writer.write("kernel_laplace.csv", laplace.to_csv());
    writer.write("kernel_time.csv", time.to_csv());
    writer.write("kernel_admissibility.csv", admissible.to_csv());
    finish(writer, "kernel", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ specfun

Evaluation evaluate_specfun(const std::string& name, double parameter, double argument) {
    if (name == "mittag_leffler") return mittag_leffler_eval(parameter, argument);
    if (name == "m_wright") return m_wright_eval(parameter, argument);
    if (name == "upper_incomplete_gamma") return upper_incomplete_gamma_eval(parameter, argument);
    // no error estimate is produced by the stable density
    Evaluation e;
    e.value = stable_density(parameter, argument);
    e.error = kNan;
    e.route = argument > 0.0 && std::pow(argument, -parameter) <= 0.1 ? "large_x_series" : "zolotarev_integral";
    return e;
}

int run_specfun(const ExperimentConfig& cfg, std::ostream& out) {
    ArtifactWriter writer(cfg.out_dir);
    Table tab{"specfun", {"name", "parameter", "argument", "value", "error_estimate", "route"}, {}};
    for (double x : cfg.specfun_arguments) {
        const Evaluation e = evaluate_specfun(cfg.specfun_name, cfg.specfun_parameter, x);
        tab.add_row({cfg.specfun_name, format_number(cfg.specfun_parameter), format_number(x), format_number(e.value),
                     format_number(e.error), e.route});
    }
    writer.write("specfun.csv", tab.to_csv());
    finish(writer, "specfun", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ density

std::optional<InversionMethod> crosscheck_method(const ExperimentConfig& cfg, InversionMethod primary) {
    if (cfg.density_crosscheck == "none") return std::nullopt;
    if (cfg.density_crosscheck != "auto") return inversion_method_from_string(cfg.density_crosscheck);
    switch (primary) {
        case InversionMethod::Talbot: return InversionMethod::DeHoog;
        case InversionMethod::ClosedForm: return InversionMethod::Talbot;
        default:
            return cfg.subordinator().capabilities().complex_K ? InversionMethod::Talbot : InversionMethod::GaverStehfest;
    }
}

int run_density(const ExperimentConfig& cfg, std::ostream& out) {
    ArtifactWriter writer(cfg.out_dir);
    const SubordinatorModel model = cfg.subordinator();
    const InversionMethod method = cfg.inversion_method();
    const DensityEvaluator ev(model, method, cfg.inversion_settings);
    const auto alt_method = crosscheck_method(cfg, method);
    std::optional<DensityEvaluator> alt;
    if (alt_method) alt.emplace(model, *alt_method, cfg.inversion_settings);

    Table tab{"density", {"t", "tau", "G", "method", "crosscheck_delta"}, {}};
    for (double t : cfg.density_times) {
        const TimeSlice slice = ev.slice(t);
        std::optional<TimeSlice> alt_slice;
        if (alt) alt_slice = alt->slice(t);
        for (double tau : cfg.density_taus) {
            const double g = slice.density(tau).value;
            const std::string delta = alt_slice ? format_number(std::abs(g - alt_slice->density(tau).value)) : "";
            tab.add_row({format_number(t), format_number(tau), format_number(g), to_string(method), delta});
        }
    }
    writer.write("density.csv", tab.to_csv());
    finish(writer, "density", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ simulate

int run_simulate(const ExperimentConfig& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.require_seed("simulate");
    ArtifactWriter writer(cfg.out_dir);
    const SubordinatorSampler sampler(cfg.subordinator());
    const bool inverse = cfg.simulate_mode == "inverse";
    const std::size_t n = cfg.simulate_n, m = cfg.simulate_times.size();

    std::vector<std::vector<double>> values(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        if (inverse) {
            const auto draws = sampler.inverse_passages(cfg.simulate_times, cfg.resolution, rng);
            values[i].reserve(m);
            for (const auto& d : draws) values[i].push_back(d.e_value);
        } else {
            values[i] = sampler.path_values(cfg.simulate_times, rng);
        }
    });

    const std::string column = inverse ? "E" : "S";
    Table paths{"simulate", {"trajectory_id", "t", column}, {}};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            paths.add_row({integer_text(i), format_number(cfg.simulate_times[j]), format_number(values[i][j])});

    Table summary{"simulate_summary", {"t", "variable", "mean", "std_error", "n"}, {}};
    std::vector<double> column_values(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) column_values[i] = values[i][j];
        const McEstimate est = summarize(column_values);
        summary.add_row({format_number(cfg.simulate_times[j]), column, format_number(est.mean),
                         format_number(est.std_error), integer_text(est.n)});
    }
    writer.write("simulate.csv", paths.to_csv());
    writer.write("simulate_summary.csv", summary.to_csv());
    finish(writer, "simulate", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ green

int run_green(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    require_green_dimension(cfg, "green");
    ArtifactWriter writer(cfg.out_dir);
    const GreenSetup setup = cfg.green_setup();
    setup.validate();
    const JumpKernel a = setup.kernel();
    const Field f = setup.bump_field();
    GreenSettings gs;
    gs.n_max = cfg.green_n_max;
    gs.wrap_tolerance = cfg.tolerances.wrap;
    gs.tail_tolerance = cfg.tolerances.green_tail;
    const GreenEstimate est = green_measure(a, f, setup.start, gs);
    const TimeQuadraturePairing tq = green_pairing_by_time_quadrature(a, f, setup.start, cfg.tolerances.wrap);
    for (const auto& w : est.warnings) err << "warning: " << w << '\n';

    json doc;
    doc["x"] = setup.start;
    doc["pairing"] = est.pairing;
    doc["pairing_truncated"] = est.pairing_truncated;
    doc["atom_mass"] = est.atom_mass;
    doc["tail_bound"] = est.tail_bound;
    doc["truncation_order"] = est.truncation_order;
    doc["warnings"] = est.warnings;
    doc["time_quadrature"] = {{"horizon", tq.horizon}, {"integral", tq.integral}, {"tail", tq.tail}, {"total", tq.total}};
    writer.write_json("green.json", doc);
    if (cfg.green_export_field) writer.write("green_field.csv", field_table("green_field", est.density).to_csv());
    finish(writer, "green", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ fke

int run_fke(const ExperimentConfig& cfg, std::ostream& out) {
    ArtifactWriter writer(cfg.out_dir);
    const SubordinatorModel model = cfg.subordinator();
    const GreenSetup setup = cfg.green_setup();
    setup.validate();
    const JumpKernel a = setup.kernel();
    const Field f = setup.bump_field();
    FkeSettings fs;
    fs.time_step = cfg.fke_time_step;
    const FkeSolution sol = solve_FKE(model, a, f, cfg.fke_times, fs);
    const DensityEvaluator ev(model, cfg.inversion_method(), cfg.inversion_settings);
    SubordinationSettings ss;
    ss.weight_tolerance = cfg.tolerances.subordination_weights;
    const std::size_t site = setup.grid.nearest_site(setup.start);

    Table tab{"fke_point", {"t", "v_fke", "v_subordinated", "gap"}, {}};
    std::vector<std::pair<std::string, Table>> exports;
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
        const Field sub = subordinate_semigroup(a, f, ev, sol.times[i], ss);
        tab.add_row({format_number(sol.times[i]), format_number(sol.fields[i].values[site]),
                     format_number(sub.values[site]), format_number(sup_distance(sol.fields[i], sub))});
        if (cfg.fke_export_fields) {
            const std::string name = "fke_field_t" + format_number(sol.times[i]);
            exports.emplace_back(name + ".csv", field_table(name, sol.fields[i]));
        }
    }
    writer.write("fke_point.csv", tab.to_csv());
    for (const auto& [name, table] : exports) writer.write(name, table.to_csv());
    finish(writer, "fke", cfg, out);
    return kExitOk;
}

// ------------------------------------------------------------------ verify

CriterionResult run_criterion(int id, const ExperimentConfig& cfg) {
    const SubordinatorModel model = cfg.subordinator();
    const Tolerances& tol = cfg.tolerances;
    switch (id) {
        case 1: return check_density_oracle({InversionMethod::Talbot, InversionMethod::GaverStehfest}, tol.density_oracle);
        case 2: return check_mittag_leffler_law(cfg.n_traj, *cfg.seed, cfg.threads);
        case 3: {
            OccupationRatioOptions o;
            o.T_list = cfg.T_list;
            o.tolerance = tol.occupation_ratio;
            o.noise_floor = tol.occupation_noise_floor;
            o.occupation_bound = tol.occupation_bound;
            return check_occupation_ratio({model}, o);
        }
        case 4:
            require_green_dimension(cfg, "verify criterion 4");
            return check_divergence_rate(model, cfg.green_setup(), tol.divergence_T, tol.divergence_lo, tol.divergence_hi);
        case 5:
            require_green_dimension(cfg, "verify criterion 5");
            return check_green_pairing(cfg.green_setup(), tol.green_pairing);
        case 6: {
            require_green_dimension(cfg, "verify criterion 6");
            RenormalizedOptions o;
            o.T_list = cfg.T_list;
            o.n_traj = cfg.n_traj;
            o.seed = *cfg.seed;
            o.threads = cfg.threads;
            o.tolerance = tol.renormalized;
            o.stderr_multiple = tol.stderr_multiple;
            return check_renormalized_green(model, cfg.green_setup(), o);
        }
        case 7:
            require_green_dimension(cfg, "verify criterion 7");
            return check_cesaro_decay(cfg.cesaro_alphas, cfg.green_setup(), cfg.cesaro_t_lo, cfg.cesaro_t_hi,
                                      tol.cesaro_slope);
        case 8: return check_fke_cross_route(model, cfg.green_setup(), cfg.fke_times, cfg.fke_time_step, tol.fke_cross_route);
        case 9: return check_double_laplace(tol.double_laplace);
        default: throw ConfigError("verify: unknown criterion " + std::to_string(id));
    }
}

int run_verify(const ExperimentConfig& cfg, std::ostream& out) {
    const std::set<int> requested(cfg.verify_criteria.begin(), cfg.verify_criteria.end());
    if (requested.count(2) || requested.count(6)) cfg.require_seed("verify (criteria 2 and 6 are stochastic)");
    for (int id : requested)
        if ((id >= 4 && id <= 7)) require_green_dimension(cfg, "verify criterion " + std::to_string(id));
    ArtifactWriter writer(cfg.out_dir);

    json report;
    report["model"] = model_to_json(cfg.subordinator());
    report["criteria"] = json::array();
    bool all_pass = true;
    for (int id : requested) {
        const CriterionResult r = run_criterion(id, cfg);
        json entry{{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}};
        entry["traces"] = json::array();
        for (const auto& table : r.tables) {
            const std::string name = "verify_" + table.name + ".csv";
            writer.write(name, table.to_csv());
            entry["traces"].push_back(name);
        }
        report["criteria"].push_back(entry);
        all_pass = all_pass && r.pass;
        out << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.summary << '\n';
    }
    report["all_pass"] = all_pass;
    writer.write_json("verify_report.json", report);
    finish(writer, "verify", cfg, out);
    return all_pass ? kExitOk : kExitCriteriaFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inverse-subordinator time changes, Green measures and fractional dynamics", "tcgreen"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", TCGREEN_VERSION);

    std::string config_path, out_dir, model_text;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* o_config = app.add_option("--config", config_path, "JSON experiment configuration");
    auto* o_seed = app.add_option("--seed", seed, "master seed (mandatory for stochastic runs)");
    auto* o_out = app.add_option("--out-dir", out_dir, "directory receiving the artifacts");
    auto* o_threads = app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    auto* o_model = app.add_option("--model", model_text, "model as JSON, e.g. {\"family\":\"gamma\",\"a\":1,\"b\":1}");

    std::vector<double> v1, v2;
    std::string s1, s2;
    double d1 = 0.0;
    std::size_t n1 = 0;
    int i1 = 0;
    std::vector<int> criteria;

    auto* kernel = app.add_subcommand("kernel", "Phi, K, k, N and the Levy density of the model");
    auto* k_lambda = kernel->add_option("--lambda", v1, "Laplace variables");
    auto* k_time = kernel->add_option("--time", v2, "times");

    auto* specfun = app.add_subcommand("specfun", "spot values of the special functions");
    auto* f_name = specfun->add_option("--name", s1, "mittag_leffler, m_wright, upper_incomplete_gamma, stable_density");
    auto* f_param = specfun->add_option("--parameter", d1, "alpha, or nu for the incomplete gamma");
    auto* f_args = specfun->add_option("--arg", v1, "arguments");

    auto* density = app.add_subcommand("density", "density of the inverse subordinator E(t)");
    auto* g_t = density->add_option("--t", v1, "times");
    auto* g_tau = density->add_option("--tau", v2, "operational times");
    auto* g_method = density->add_option("--method", s1, "auto, talbot, stehfest, dehoog, closed_form");
    auto* g_cross = density->add_option("--crosscheck", s2, "auto, none or a method name");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo draws of E(t) or S(t)");
    auto* s_mode = simulate->add_option("--mode", s1, "inverse or path");
    auto* s_t = simulate->add_option("--t", v1, "increasing times");
    auto* s_n = simulate->add_option("--n", n1, "number of trajectories");

    auto* green = app.add_subcommand("green", "Green measure of the compound Poisson process and its pairing");
    auto* r_nmax = green->add_option("--n-max", i1, "largest convolution power");
    auto* r_export = green->add_flag("--export-field", "write the density part as CSV");

    auto* fke = app.add_subcommand("fke", "fractional Kolmogorov solution against subordination");
    auto* e_t = fke->add_option("--t", v1, "output times (multiples of the step)");
    auto* e_step = fke->add_option("--step", d1, "time step");
    auto* e_export = fke->add_flag("--export-fields", "write the solution fields as CSV");

    auto* verify = app.add_subcommand("verify", "acceptance criteria with JSON report and CSV traces");
    auto* c_ids = verify->add_option("--criteria", criteria, "criterion ids 1..9");
    auto* c_ntraj = verify->add_option("--n-traj", n1, "Monte Carlo trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        ExperimentConfig cfg = o_config->count() ? ExperimentConfig::from_file(config_path) : ExperimentConfig{};
        if (o_seed->count()) cfg.seed = seed;
        if (o_out->count()) cfg.out_dir = out_dir;
        if (o_threads->count()) cfg.threads = threads;
        if (o_model->count()) {
            try {
                cfg.model = json::parse(model_text);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("--model is not valid JSON: ") + e.what());
            }
        }

        if (app.got_subcommand(kernel)) {
            if (k_lambda->count()) cfg.lambdas = v1;
            if (k_time->count()) cfg.kernel_times = v2;
        } else if (app.got_subcommand(specfun)) {
            if (f_name->count()) cfg.specfun_name = s1;
            if (f_param->count()) cfg.specfun_parameter = d1;
            if (f_args->count()) cfg.specfun_arguments = v1;
        } else if (app.got_subcommand(density)) {
            if (g_t->count()) cfg.density_times = v1;
            if (g_tau->count()) cfg.density_taus = v2;
            if (g_method->count()) cfg.inversion = s1;
            if (g_cross->count()) cfg.density_crosscheck = s2;
        } else if (app.got_subcommand(simulate)) {
            if (s_mode->count()) cfg.simulate_mode = s1;
            if (s_t->count()) cfg.simulate_times = v1;
            if (s_n->count()) cfg.simulate_n = n1;
        } else if (app.got_subcommand(green)) {
            if (r_nmax->count()) cfg.green_n_max = i1;
            if (r_export->count()) cfg.green_export_field = true;
        } else if (app.got_subcommand(fke)) {
            if (e_t->count()) cfg.fke_times = v1;
            if (e_step->count()) cfg.fke_time_step = d1;
            if (e_export->count()) cfg.fke_export_fields = true;
        } else if (app.got_subcommand(verify)) {
            if (c_ids->count()) cfg.verify_criteria = criteria;
            if (c_ntraj->count()) cfg.n_traj = n1;
        }
        cfg.validate();

        if (app.got_subcommand(kernel)) return run_kernel(cfg, out);
        if (app.got_subcommand(specfun)) return run_specfun(cfg, out);
        if (app.got_subcommand(density)) return run_density(cfg, out);
        if (app.got_subcommand(simulate)) return run_simulate(cfg, out);
        if (app.got_subcommand(green)) return run_green(cfg, out, err);
        if (app.got_subcommand(fke)) return run_fke(cfg, out);
        return run_verify(cfg, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        // ConfigError and every validation-type library error
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace tcgreen::cli
