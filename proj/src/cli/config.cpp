#include "tcgreen/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace tcgreen::cli {

using nlohmann::json;

namespace {

// Reads the keys of one object and rejects any it was not asked about.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return doc_.contains(key); }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!doc_.contains(key)) return;
        try {
            out = doc_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void get_optional(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!doc_.contains(key) || doc_.at(key).is_null()) return;
        T value{};
        get(key, value);
        out = value;
    }

    const json& child(const char* key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<std::pair<const char*, double Tolerances::*>> tolerance_fields() {
    return {{"wrap", &Tolerances::wrap},
            {"green_tail", &Tolerances::green_tail},
            {"green_pairing", &Tolerances::green_pairing},
            {"renormalized", &Tolerances::renormalized},
            {"stderr_multiple", &Tolerances::stderr_multiple},
            {"occupation_ratio", &Tolerances::occupation_ratio},
            {"occupation_noise_floor", &Tolerances::occupation_noise_floor},
            {"occupation_bound", &Tolerances::occupation_bound},
            {"divergence_lo", &Tolerances::divergence_lo},
            {"divergence_hi", &Tolerances::divergence_hi},
            {"divergence_T", &Tolerances::divergence_T},
            {"fke_cross_route", &Tolerances::fke_cross_route},
            {"subordination_weights", &Tolerances::subordination_weights},
            {"density_oracle", &Tolerances::density_oracle},
            {"cesaro_slope", &Tolerances::cesaro_slope},
            {"double_laplace", &Tolerances::double_laplace}};
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void require_positive_list(const std::vector<double>& v, const std::string& name, bool allow_zero = false) {
    require(!v.empty(), name + " must not be empty");
    for (double x : v) require(std::isfinite(x) && (allow_zero ? x >= 0.0 : x > 0.0), name + " entries must be positive");
}

}  // namespace

SubordinatorModel model_from_json(const json& doc) {
    Section s(doc, "model");
    std::string family;
    s.get("family", family);
    SubordinatorModel model = SubordinatorModel::stable(0.5);
    try {
        if (family == "stable") {
            double alpha = 0.5;
            s.get("alpha", alpha);
            model = SubordinatorModel::stable(alpha);
        } else if (family == "gamma") {
            double a = 1.0, b = 1.0;
            s.get("a", a);
            s.get("b", b);
            model = SubordinatorModel::gamma(a, b);
        } else if (family == "truncated_stable") {
            double alpha = 0.5, delta = 1.0;
            s.get("alpha", alpha);
            s.get("delta", delta);
            model = SubordinatorModel::truncated_stable(alpha, delta);
        } else if (family == "two_index_stable") {
            double alpha = 0.25, beta = 0.75;
            s.get("alpha", alpha);
            s.get("beta", beta);
            model = SubordinatorModel::two_index_stable(alpha, beta);
        } else if (family == "tempered_stable") {
            double alpha = 0.5, gamma = 1.0;
            s.get("alpha", alpha);
            s.get("gamma", gamma);
            model = SubordinatorModel::tempered_stable(alpha, gamma);
        } else if (family == "distributed_order") {
            std::vector<double> coeffs{1.0};
            s.get("weight_coeffs", coeffs);
            model = SubordinatorModel::distributed_order(coeffs);
        } else {
            throw ConfigError("model.family: unknown family '" + family + "'");
        }
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    s.finish();
    return model;
}

json model_to_json(const SubordinatorModel& model) {
    json j;
    j["family"] = model.name();
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, StableFamily>) {
                j["alpha"] = f.alpha;
            } else if constexpr (std::is_same_v<F, GammaFamily>) {
                j["a"] = f.a;
                j["b"] = f.b;
            } else if constexpr (std::is_same_v<F, TruncatedStableFamily>) {
                j["alpha"] = f.alpha;
                j["delta"] = f.delta;
            } else if constexpr (std::is_same_v<F, TwoIndexStableFamily>) {
                j["alpha"] = f.alpha;
                j["beta"] = f.beta;
            } else if constexpr (std::is_same_v<F, TemperedStableFamily>) {
                j["alpha"] = f.alpha;
                j["gamma"] = f.gamma;
            } else {
                j["weight_coeffs"] = f.weight_coeffs;
            }
        },
        model.family());
    return j;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    ExperimentConfig c;
    Section top(doc, "config");
    if (top.has("model")) {
        c.model = top.child("model");
        model_from_json(c.model);
    }
    if (top.has("inversion")) {
        Section s(top.child("inversion"), "inversion");
        s.get("method", c.inversion);
        s.get("talbot_nodes", c.inversion_settings.talbot_nodes);
        s.get("stehfest_terms", c.inversion_settings.stehfest_terms);
        s.get("dehoog_terms", c.inversion_settings.dehoog_terms);
        s.finish();
    }
    if (top.has("lattice")) {
        Section s(top.child("lattice"), "lattice");
        s.get("dimension", c.dimension);
        s.get("extent", c.extent);
        s.get("spacing", c.spacing);
        s.finish();
        if (!top.has("test_function")) c.bump_center.assign(c.dimension, 0.0);
        if (!top.has("start")) c.start.assign(c.dimension, 0.0);
    }
    if (top.has("jump_kernel")) {
        Section s(top.child("jump_kernel"), "jump_kernel");
        std::string family = "gaussian";
        s.get("family", family);
        require(family == "gaussian", "jump_kernel.family: only 'gaussian' is supported");
        s.get("width", c.kernel_width);
        s.finish();
    }
    if (top.has("test_function")) {
        Section s(top.child("test_function"), "test_function");
        std::string family = "gaussian_bump";
        s.get("family", family);
        require(family == "gaussian_bump", "test_function.family: only 'gaussian_bump' is supported");
        s.get("width", c.bump_width);
        s.get("amplitude", c.bump_amplitude);
        c.bump_center.assign(c.dimension, 0.0);
        s.get("center", c.bump_center);
        s.finish();
    }
    top.get("start", c.start);
    if (top.has("run")) {
        Section s(top.child("run"), "run");
        s.get_optional("seed", c.seed);
        s.get("n_traj", c.n_traj);
        s.get("T_list", c.T_list);
        s.get("threads", c.threads);
        s.get("resolution", c.resolution);
        s.finish();
    }
    if (top.has("tolerances")) {
        Section s(top.child("tolerances"), "tolerances");
        for (const auto& [name, field] : tolerance_fields()) s.get(name, c.tolerances.*field);
        s.finish();
    }
    if (top.has("kernel")) {
        Section s(top.child("kernel"), "kernel");
        s.get("lambdas", c.lambdas);
        s.get("times", c.kernel_times);
        s.finish();
    }
    if (top.has("specfun")) {
        Section s(top.child("specfun"), "specfun");
        s.get("name", c.specfun_name);
        s.get("parameter", c.specfun_parameter);
        s.get("arguments", c.specfun_arguments);
        s.finish();
    }
    if (top.has("density")) {
        Section s(top.child("density"), "density");
        s.get("times", c.density_times);
        s.get("taus", c.density_taus);
        s.get("crosscheck", c.density_crosscheck);
        s.finish();
    }
    if (top.has("simulate")) {
        Section s(top.child("simulate"), "simulate");
        s.get("mode", c.simulate_mode);
        s.get("times", c.simulate_times);
        s.get("n", c.simulate_n);
        s.finish();
    }
    if (top.has("green")) {
        Section s(top.child("green"), "green");
        s.get("n_max", c.green_n_max);
        s.get("export_field", c.green_export_field);
        s.finish();
    }
    if (top.has("fke")) {
        Section s(top.child("fke"), "fke");
        s.get("times", c.fke_times);
        s.get("time_step", c.fke_time_step);
        s.get("export_fields", c.fke_export_fields);
        s.finish();
    }
    if (top.has("verify")) {
        Section s(top.child("verify"), "verify");
        s.get("criteria", c.verify_criteria);
        s.get("cesaro_alphas", c.cesaro_alphas);
        s.get("cesaro_t_lo", c.cesaro_t_lo);
        s.get("cesaro_t_hi", c.cesaro_t_hi);
        s.finish();
    }
    if (top.has("output")) {
        Section s(top.child("output"), "output");
        s.get("dir", c.out_dir);
        s.finish();
    }
    top.finish();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

json ExperimentConfig::to_json() const {
    json j;
    j["model"] = model_to_json(subordinator());
    j["inversion"] = {{"method", inversion},
                      {"talbot_nodes", inversion_settings.talbot_nodes},
                      {"stehfest_terms", inversion_settings.stehfest_terms},
                      {"dehoog_terms", inversion_settings.dehoog_terms}};
    j["lattice"] = {{"dimension", dimension}, {"extent", extent}, {"spacing", spacing}};
    j["jump_kernel"] = {{"family", "gaussian"}, {"width", kernel_width}};
    j["test_function"] = {
        {"family", "gaussian_bump"}, {"width", bump_width}, {"amplitude", bump_amplitude}, {"center", bump_center}};
    j["start"] = start;
    j["run"] = {{"seed", seed ? json(*seed) : json(nullptr)},
                {"n_traj", n_traj},
                {"T_list", T_list},
                {"threads", threads},
                {"resolution", resolution}};
    json tol;
    for (const auto& [name, field] : tolerance_fields()) tol[name] = tolerances.*field;
    j["tolerances"] = tol;
    j["kernel"] = {{"lambdas", lambdas}, {"times", kernel_times}};
    j["specfun"] = {{"name", specfun_name}, {"parameter", specfun_parameter}, {"arguments", specfun_arguments}};
    j["density"] = {{"times", density_times}, {"taus", density_taus}, {"crosscheck", density_crosscheck}};
    j["simulate"] = {{"mode", simulate_mode}, {"times", simulate_times}, {"n", simulate_n}};
    j["green"] = {{"n_max", green_n_max}, {"export_field", green_export_field}};
    j["fke"] = {{"times", fke_times}, {"time_step", fke_time_step}, {"export_fields", fke_export_fields}};
    j["verify"] = {{"criteria", verify_criteria},
                   {"cesaro_alphas", cesaro_alphas},
                   {"cesaro_t_lo", cesaro_t_lo},
                   {"cesaro_t_hi", cesaro_t_hi}};
    j["output"] = {{"dir", out_dir}};
    return j;
}

void ExperimentConfig::validate() const {
    subordinator();
    inversion_method();
    try {
        inversion_settings.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("inversion: ") + e.what());
    }
    require(dimension >= 1 && dimension <= 3, "lattice.dimension must be 1, 2 or 3");
    grid();
    require(kernel_width > 0.0 && std::isfinite(kernel_width), "jump_kernel.width must be positive");
    require(bump_width > 0.0 && std::isfinite(bump_width), "test_function.width must be positive");
    require(std::isfinite(bump_amplitude), "test_function.amplitude must be finite");
    require(static_cast<int>(bump_center.size()) == dimension, "test_function.center must have lattice.dimension entries");
    require(static_cast<int>(start.size()) == dimension, "start must have lattice.dimension entries");

    require(n_traj >= 2, "run.n_traj must be at least 2");
    require_positive_list(T_list, "run.T_list");
    for (std::size_t i = 1; i < T_list.size(); ++i) require(T_list[i] > T_list[i - 1], "run.T_list must increase");
    require(threads >= 1 && threads <= 1024, "run.threads must lie in [1, 1024]");
    require(resolution > 0.0 && std::isfinite(resolution), "run.resolution must be positive");

    for (const auto& [name, field] : tolerance_fields())
        require(tolerances.*field > 0.0 && std::isfinite(tolerances.*field),
                std::string("tolerances.") + name + " must be positive");
    require(tolerances.wrap < 1.0, "tolerances.wrap must be below 1");
    require(tolerances.divergence_lo < tolerances.divergence_hi, "tolerances.divergence_lo must be below divergence_hi");

    require_positive_list(lambdas, "kernel.lambdas");
    require_positive_list(kernel_times, "kernel.times");
    require(!specfun_arguments.empty(), "specfun.arguments must not be empty");
    const std::set<std::string> specfuns{"mittag_leffler", "m_wright", "upper_incomplete_gamma", "stable_density"};
    require(specfuns.count(specfun_name) == 1, "specfun.name must be one of mittag_leffler, m_wright, "
                                               "upper_incomplete_gamma, stable_density");
    require_positive_list(density_times, "density.times");
    require_positive_list(density_taus, "density.taus", true);
    if (density_crosscheck != "auto" && density_crosscheck != "none") {
        try {
            inversion_method_from_string(density_crosscheck);
        } catch (const Error&) {
            throw ConfigError("density.crosscheck: unknown method '" + density_crosscheck + "'");
        }
    }
    require(simulate_mode == "inverse" || simulate_mode == "path", "simulate.mode must be 'inverse' or 'path'");
    require_positive_list(simulate_times, "simulate.times");
    for (std::size_t i = 1; i < simulate_times.size(); ++i)
        require(simulate_times[i] > simulate_times[i - 1], "simulate.times must increase");
    require(simulate_n >= 1, "simulate.n must be positive");
    require(green_n_max >= 2, "green.n_max must be at least 2");
    require_positive_list(fke_times, "fke.times", true);
    require(fke_time_step > 0.0, "fke.time_step must be positive");
    for (int id : verify_criteria) require(id >= 1 && id <= 9, "verify.criteria entries must lie in 1..9");
    require_positive_list(cesaro_alphas, "verify.cesaro_alphas");
    for (double a : cesaro_alphas) require(a < 1.0, "verify.cesaro_alphas must lie in (0,1)");
    require(cesaro_t_lo > 0.0 && cesaro_t_hi > cesaro_t_lo, "verify.cesaro_t_lo must be positive and below cesaro_t_hi");
    require(!out_dir.empty(), "output.dir must not be empty");
}

SubordinatorModel ExperimentConfig::subordinator() const { return model_from_json(model); }

InversionMethod ExperimentConfig::inversion_method() const {
    if (inversion == "auto") return default_inversion(subordinator());
    try {
        return inversion_method_from_string(inversion);
    } catch (const Error&) {
        throw ConfigError("inversion.method: unknown method '" + inversion + "'");
    }
}

Grid ExperimentConfig::grid() const {
    require(spacing > 0.0 && extent > 0.0, "lattice.extent and lattice.spacing must be positive");
    const double ratio = extent / spacing;
    const long n = std::lround(ratio);
    require(std::abs(ratio - n) <= 1e-9 * ratio, "lattice.extent must be a whole multiple of lattice.spacing");
    require(n >= 4 && n % 2 == 0 && n <= 1024, "lattice.extent / lattice.spacing must be an even count in [4, 1024]");
    return Grid{dimension, static_cast<int>(n), spacing};
}

GreenSetup ExperimentConfig::green_setup() const {
    GreenSetup s;
    s.grid = grid();
    s.kernel_width = kernel_width;
    s.bump_width = bump_width;
    s.bump_amplitude = bump_amplitude;
    s.bump_center = bump_center;
    s.start = start;
    s.wrap_tolerance = tolerances.wrap;
    return s;
}

std::uint64_t ExperimentConfig::require_seed(const std::string& subcommand) const {
    if (!seed) throw ConfigError(subcommand + " is stochastic: a seed is mandatory (run.seed or --seed)");
    return *seed;
}

}  // namespace tcgreen::cli
