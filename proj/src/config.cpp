#include "perihom/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "perihom/errors.hpp"
#include "perihom/parallel.hpp"

namespace perihom {

namespace {

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

FourierSeries parse_series(const Json& j, int variables, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be a list of waves");
    std::vector<FourierWave> waves;
    for (const auto& w : j) {
        allow_keys(w, where, {"k", "amplitude", "phase"});
        waves.push_back({get<std::vector<int>>(w, "k", where), get<double>(w, "amplitude", where),
                         get_or<double>(w, "phase", 0.0, where)});
    }
    return FourierSeries(variables, std::move(waves));
}

}  // namespace

Kernel parse_kernel(const Json& j, int dimension) {
    const std::string family = get<std::string>(j, "family", "kernel");
    if (family == "gaussian") {
        allow_keys(j, "kernel", {"family", "sigma"});
        return Kernel::gaussian(dimension, get<double>(j, "sigma", "kernel"));
    }
    if (family == "box") {
        allow_keys(j, "kernel", {"family", "radius"});
        return Kernel::box(dimension, get<double>(j, "radius", "kernel"));
    }
    if (family == "exponential") {
        allow_keys(j, "kernel", {"family", "length"});
        return Kernel::exponential(dimension, get<double>(j, "length", "kernel"));
    }
    if (family == "tabulated_radial") {
        allow_keys(j, "kernel", {"family", "radii", "values"});
        return Kernel::tabulated_radial(dimension, get<std::vector<double>>(j, "radii", "kernel"),
                                        get<std::vector<double>>(j, "values", "kernel"));
    }
    throw ConfigError("unknown kernel family '" + family + "'");
}

Medium parse_medium(const Json& j, int dimension) {
    const std::string form = get<std::string>(j, "form", "medium");
    const std::string where = "medium";
    Medium m = Medium::constant(dimension, 1.0, 1.0, 1.0);
    if (form == "constant") {
        allow_keys(j, where, {"form", "value", "mu_minus", "mu_plus", "scale"});
        const double v = get<double>(j, "value", where);
        m = Medium::constant(dimension, v, get_or<double>(j, "mu_minus", v, where), get_or<double>(j, "mu_plus", v, where));
    } else if (form == "time_only") {
        allow_keys(j, where, {"form", "waves", "mu_minus", "mu_plus", "scale"});
        m = Medium::time_only(dimension, parse_series(j.at("waves"), 1, "medium.waves"),
                              get<double>(j, "mu_minus", where), get<double>(j, "mu_plus", where));
    } else if (form == "separable_sum") {
        allow_keys(j, where, {"form", "terms", "mu_minus", "mu_plus", "scale"});
        if (!j.contains("terms") || !j.at("terms").is_array()) throw ConfigError("medium.terms must be a list");
        std::vector<SeparableTerm> terms;
        for (const auto& t : j.at("terms")) {
            allow_keys(t, "medium.terms", {"coefficient", "factor", "time_factor"});
            SeparableTerm term;
            term.coefficient = get_or<double>(t, "coefficient", 1.0, "medium.terms");
            term.factor = parse_series(t.at("factor"), dimension + 1, "medium.terms.factor");
            if (t.contains("time_factor")) term.time_factor = parse_series(t.at("time_factor"), 1, "medium.terms.time_factor");
            terms.push_back(std::move(term));
        }
        m = Medium::separable_sum(dimension, std::move(terms), get<double>(j, "mu_minus", where),
                                  get<double>(j, "mu_plus", where));
    } else if (form == "tabulated") {
        allow_keys(j, where, {"form", "points", "time_points", "values", "mu_minus", "mu_plus", "scale"});
        m = Medium::tabulated(dimension, get<int>(j, "points", where), get<int>(j, "time_points", where),
                              get<std::vector<double>>(j, "values", where), get<double>(j, "mu_minus", where),
                              get<double>(j, "mu_plus", where));
    } else {
        throw ConfigError("unknown medium form '" + form + "'");
    }
    if (j.contains("scale")) m = m.scaled(get<double>(j, "scale", where));
    return m;
}

RunConfig parse_config(const Json& j) {
    allow_keys(j, "config", {"dimension", "kernel", "medium", "grid", "solver", "box", "eps", "T", "u0_sigma",
                             "snapshots", "boundary_tolerance", "residual", "residual_samples", "mc", "seed", "threads", "output",
                             "validation_density", "perturb_aeff"});
    RunConfig c;
    c.source = j;
    c.dimension = get_or<int>(j, "dimension", 1, "config");
    if (c.dimension < 1 || c.dimension > 2) throw ConfigError("dimension must be 1 or 2");
    c.kernel = parse_kernel(j.at("kernel"), c.dimension);
    c.medium = parse_medium(j.at("medium"), c.dimension);

    c.grid.dimension = c.dimension;
    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        allow_keys(g, "grid", {"N", "Nt"});
        c.grid.N = get_or<int>(g, "N", c.grid.N, "grid");
        c.grid.Nt = get_or<int>(g, "Nt", c.grid.Nt, "grid");
    }
    c.grid.validate();

    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        allow_keys(s, "solver", {"tolerance", "max_iterations", "compatibility_tolerance", "krylov_threshold",
                                 "enable_krylov", "krylov_restart"});
        c.cell.tolerance = get_or<double>(s, "tolerance", c.cell.tolerance, "solver");
        c.cell.max_iterations = get_or<int>(s, "max_iterations", c.cell.max_iterations, "solver");
        c.cell.compatibility_tolerance =
            get_or<double>(s, "compatibility_tolerance", c.cell.compatibility_tolerance, "solver");
        c.cell.krylov_threshold = get_or<double>(s, "krylov_threshold", c.cell.krylov_threshold, "solver");
        c.cell.enable_krylov = get_or<bool>(s, "enable_krylov", c.cell.enable_krylov, "solver");
        c.cell.krylov_restart = get_or<int>(s, "krylov_restart", c.cell.krylov_restart, "solver");
    }
    if (!(c.cell.tolerance > 0.0) || !(c.cell.compatibility_tolerance > 0.0) || c.cell.max_iterations < 1)
        throw ConfigError("solver tolerances and iteration limits must be positive");

    if (j.contains("box")) {
        const Json& b = j.at("box");
        allow_keys(b, "box", {"L", "Nx", "points_per_cell"});
        c.sweep.L = get_or<double>(b, "L", c.sweep.L, "box");
        c.sweep.Nx = get_or<int>(b, "Nx", 0, "box");
        c.sweep.points_per_cell = get_or<int>(b, "points_per_cell", 0, "box");
    }
    if (c.sweep.Nx == 0 && c.sweep.points_per_cell == 0) c.sweep.points_per_cell = c.grid.N;
    c.sweep.eps = get_or<std::vector<double>>(j, "eps", c.sweep.eps, "config");
    c.sweep.T = get_or<double>(j, "T", c.sweep.T, "config");
    c.sweep.u0_sigma = get_or<double>(j, "u0_sigma", c.sweep.u0_sigma, "config");
    c.sweep.snapshots = get_or<int>(j, "snapshots", c.sweep.snapshots, "config");
    c.sweep.boundary_tolerance = get_or<double>(j, "boundary_tolerance", c.sweep.boundary_tolerance, "config");
    c.sweep.residual = get_or<bool>(j, "residual", c.sweep.residual, "config");
    c.sweep.residual_samples = get_or<int>(j, "residual_samples", c.sweep.residual_samples, "config");
    if (!(c.sweep.L > 0.0) || !(c.sweep.T > 0.0) || !(c.sweep.u0_sigma > 0.0) || c.sweep.snapshots < 1 || c.sweep.residual_samples < 1 ||
        !(c.sweep.boundary_tolerance > 0.0))
        throw ConfigError("box, horizon, sigma, snapshots and boundary tolerance must be positive");
    for (double eps : c.sweep.eps) {
        const BoxDomain dom = c.sweep.Nx > 0 ? BoxDomain{c.dimension, c.sweep.L, c.sweep.Nx}
                                             : BoxDomain::resolving(c.dimension, c.sweep.L, eps, c.sweep.points_per_cell);
        dom.points_per_cell(eps);
    }

    if (j.contains("mc")) {
        const Json& m = j.at("mc");
        allow_keys(m, "mc", {"horizon", "paths", "groups", "min_acceptance"});
        c.walk.horizon = get_or<double>(m, "horizon", c.walk.horizon, "mc");
        c.walk.paths = get_or<long>(m, "paths", c.walk.paths, "mc");
        c.walk.groups = get_or<int>(m, "groups", c.walk.groups, "mc");
        c.walk.min_acceptance = get_or<double>(m, "min_acceptance", c.walk.min_acceptance, "mc");
    }
    c.walk.seed = get_or<std::uint64_t>(j, "seed", c.walk.seed, "config");
    const int threads = get_or<int>(j, "threads", 0, "config");
    c.sweep.threads = c.walk.threads = resolve_threads(threads);
    c.output = get_or<std::string>(j, "output", c.output.string(), "config");
    c.validation_density = get_or<int>(j, "validation_density", c.validation_density, "config");
    c.perturb_aeff = get_or<double>(j, "perturb_aeff", 0.0, "config");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::string config_hash(const Json& j) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace perihom
