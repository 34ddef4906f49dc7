#include "commands.hpp"

#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <Eigen/Core>

#include "perihom/effective.hpp"
#include "perihom/errors.hpp"
#include "perihom/fft.hpp"
#include "perihom/parallel.hpp"

namespace perihom::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

double parse_number(const std::string& s, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse '" + s + "' in " + flag);
    }
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& flag) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw ConfigError(flag + " expects two comma-separated values");
    return {parse_number(parts[0], flag), parse_number(parts[1], flag)};
}

/// Output directory, phase timings and the manifest of one command.
class Run {
public:
    Run(std::string command, const RunConfig& config) : command_(std::move(command)), config_(config) {
        std::filesystem::create_directories(config.output);
    }

    std::filesystem::path path(const std::string& name) {
        outputs_.push_back(name);
        return config_.output / name;
    }

    template <class F>
    auto phase(const std::string& name, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        auto result = body();
        timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }

    void finish(int exit_code) {
        Json versions = {{"perihom", "0.1.0"},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"fftw", fftw_version_string()},
                         {"boost", BOOST_LIB_VERSION},
                         {"compiler", __VERSION__}};
        Json manifest = {{"command", command_},
                         {"config_hash", config_hash(config_.source)},
                         {"config", config_.source},
                         {"seed", config_.walk.seed},
                         {"threads", config_.sweep.threads},
                         {"exit_code", exit_code},
                         {"versions", versions},
                         {"outputs", outputs_},
                         {"timings_seconds", timings_}};
        write_json(config_.output / "manifest.json", manifest);
    }

private:
    std::string command_;
    const RunConfig& config_;
    std::vector<std::string> outputs_;
    Json timings_ = Json::object();
};

void export_field(Run& run, const std::string& stem, const SpaceTimeField& f) {
    if (f.grid.dimension == 1) write_field_csv(run.path(stem + ".csv"), f);
    write_field_binary(run.path(stem + ".bin"), f);
}

struct Solved {
    std::unique_ptr<CellProblem> problem;
    Corrector chi;
    EffectiveMatrix effective;
    SecondCorrector kappa;
    Eigen::MatrixXd theta_mean;
};

Solved solve_cell(Run& run, const RunConfig& c, bool with_kappa) {
    Solved s;
    s.problem = std::make_unique<CellProblem>(c.kernel, c.medium, c.grid, c.cell);
    s.effective = run.phase("effective", [&] { return compute_effective(*s.problem, &s.chi); });
    if (with_kappa) {
        const int d = c.dimension;
        s.theta_mean = run.phase("kappa_rhs", [&] {
            const auto theta = second_corrector_rhs(*s.problem, s.chi, s.effective.a_hat);
            Eigen::MatrixXd m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = theta[i * d + j].mean();
            return m;
        });
        s.kappa = run.phase("kappa", [&] { return solve_second_corrector(*s.problem, s.chi, s.effective.a_hat); });
    }
    return s;
}

Json reports_json(const std::vector<PeriodicSolveReport>& reports) {
    Json a = Json::array();
    for (const auto& r : reports) a.push_back(to_json(r));
    return a;
}

void print_matrix(const std::string& label, const Eigen::MatrixXd& m) {
    std::cout << label << " =";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::cout << " [";
        for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << (j ? ", " : "") << format_double(m(i, j));
        std::cout << "]";
    }
    std::cout << "\n";
}

BoxDomain domain_for(const RunConfig& c, double eps) {
    return c.sweep.Nx > 0 ? BoxDomain{c.dimension, c.sweep.L, c.sweep.Nx}
                          : BoxDomain::resolving(c.dimension, c.sweep.L, eps, c.sweep.points_per_cell);
}

struct ResidualTable {
    std::vector<double> eps, time, value;
    std::vector<double> max_per_eps;
};

ResidualTable residual_table(const RunConfig& c, const Solved& s, const Eigen::MatrixXd& a_eff) {
    ResidualTable table;
    table.max_per_eps.resize(c.sweep.eps.size());
    std::vector<std::vector<double>> per_eps(c.sweep.eps.size());
    parallel_for(c.sweep.eps.size(), c.sweep.threads, [&](std::size_t e) {
        const double eps = c.sweep.eps[e];
        const BoxDomain domain = domain_for(c, eps);
        EpsOperator op(c.kernel, c.medium, domain, eps);
        const BoxField u0 = gaussian_field(domain, c.sweep.u0_sigma);
        HomogenizedSolution hom(a_eff, u0);
        Ansatz ansatz(s.chi, &s.kappa, hom, domain, eps);
        per_eps[e] = residual_norm(op, ansatz, residual_times(c.sweep.T, c.sweep.snapshots, c.sweep.residual_samples),
                                   evolution_step(op, c.sweep.T, {c.sweep.snapshots, 0.0}));
    });
    const auto times = residual_times(c.sweep.T, c.sweep.snapshots, c.sweep.residual_samples);
    for (std::size_t e = 0; e < per_eps.size(); ++e) {
        double m = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            table.eps.push_back(c.sweep.eps[e]);
            table.time.push_back(times[k]);
            table.value.push_back(per_eps[e][k]);
            m = std::max(m, per_eps[e][k]);
        }
        table.max_per_eps[e] = m;
    }
    return table;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace

RunConfig resolve_config(const Overrides& o) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config " + o.config);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + o.config + " is not valid JSON: " + e.what());
    }
    if (o.out) j["output"] = *o.out;
    if (o.seed) j["seed"] = *o.seed;
    if (o.threads) j["threads"] = *o.threads;
    if (o.perturb_aeff) j["perturb_aeff"] = *o.perturb_aeff;
    if (o.grid) {
        const auto [N, Nt] = parse_pair(*o.grid, "--grid");
        j["grid"] = {{"N", static_cast<int>(N)}, {"Nt", static_cast<int>(Nt)}};
    }
    if (o.box) {
        const auto [L, Nx] = parse_pair(*o.box, "--box");
        j["box"] = {{"L", L}, {"Nx", static_cast<int>(Nx)}};
    }
    if (o.eps) {
        std::vector<double> eps;
        for (const auto& part : split(*o.eps, ',')) eps.push_back(parse_number(part, "--eps"));
        j["eps"] = eps;
    }
    return parse_config(j);
}

int cmd_validate(const RunConfig& c) {
    Run run("validate", c);
    const ConditionReport report = run.phase("conditions", [&] { return verify_conditions(c.medium, c.validation_density); });
    const SpaceTimeField G = run.phase("jump_rate", [&] { return compute_G(c.kernel, c.medium, c.grid); });
    double g_min = G.values.front(), g_max = G.values.front();
    for (double v : G.values) {
        g_min = std::min(g_min, v);
        g_max = std::max(g_max, v);
    }
    write_json(run.path("validate.json"), {{"status", "pass"},
                                           {"mu_min_observed", report.mu_min_observed},
                                           {"mu_max_observed", report.mu_max_observed},
                                           {"max_symmetry_defect", report.max_symmetry_defect},
                                           {"G_min", g_min},
                                           {"G_max", g_max},
                                           {"truncation_radius", c.kernel.truncation_radius()}});
    std::cout << "validate: pass (mu in [" << format_double(report.mu_min_observed) << ", "
              << format_double(report.mu_max_observed) << "], symmetry defect "
              << format_double(report.max_symmetry_defect) << ")\n";
    run.finish(ok);
    return ok;
}

int cmd_corrector(const RunConfig& c) {
    Run run("corrector", c);
    CellProblem problem(c.kernel, c.medium, c.grid, c.cell);
    const Corrector chi = run.phase("corrector", [&] { return solve_corrector(problem); });
    for (int j = 0; j < c.dimension; ++j) export_field(run, "chi_" + std::to_string(j), chi.chi[j]);
    write_json(run.path("corrector.json"), {{"grid", to_json(c.grid)}, {"reports", reports_json(chi.reports)}});
    for (int j = 0; j < c.dimension; ++j)
        std::cout << "chi_" << j << ": " << chi.reports[j].method << ", " << chi.reports[j].iterations
                  << " iterations, residual " << format_double(chi.reports[j].residual) << "\n";
    run.finish(ok);
    return ok;
}

int cmd_effective(const RunConfig& c) {
    Run run("effective", c);
    const Solved s = solve_cell(run, c, false);
    for (int j = 0; j < c.dimension; ++j) export_field(run, "chi_" + std::to_string(j), s.chi.chi[j]);
    Json j = to_json(s.effective);
    j["corrector_reports"] = reports_json(s.chi.reports);
    write_json(run.path("effective.json"), j);
    print_matrix("a_eff", s.effective.a_eff);
    run.finish(ok);
    return ok;
}

int cmd_kappa(const RunConfig& c) {
    Run run("kappa", c);
    const Solved s = solve_cell(run, c, true);
    const int d = c.dimension;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            export_field(run, "kappa_" + std::to_string(i) + std::to_string(j), s.kappa.at(i, j));
    write_json(run.path("kappa.json"), {{"a_hat", to_json(s.effective.a_hat)},
                                        {"theta_mean", to_json(s.theta_mean)},
                                        {"reports", reports_json(s.kappa.reports)}});
    print_matrix("mean(theta)", s.theta_mean);
    run.finish(ok);
    return ok;
}

int cmd_converge(const RunConfig& c) {
    Run run("converge", c);
    const Solved s = solve_cell(run, c, c.sweep.residual);
    const Eigen::MatrixXd a = (1.0 - c.perturb_aeff) * s.effective.a_eff;
    const auto results = run.phase("sweep", [&] {
        return convergence_sweep(c.kernel, c.medium, c.sweep, {a}, &s.chi, c.sweep.residual ? &s.kappa : nullptr);
    });
    const SweepResult& r = results.front();
    write_sweep_csv(run.path("sweep.csv"), r);
    write_sweep_dat(run.path("sweep.dat"), r);
    Json j = to_json(r);
    j["perturb_aeff"] = c.perturb_aeff;
    write_json(run.path("sweep.json"), j);
    for (const auto& row : r.rows)
        std::cout << "eps " << format_double(row.epsilon) << ": sup error " << format_double(row.sup_error)
                  << ", final error " << format_double(row.final_error) << "\n";
    run.finish(ok);
    return ok;
}

int cmd_residual(const RunConfig& c) {
    Run run("residual", c);
    const Solved s = solve_cell(run, c, true);
    const Eigen::MatrixXd a = (1.0 - c.perturb_aeff) * s.effective.a_eff;
    const ResidualTable t = run.phase("residual", [&] { return residual_table(c, s, a); });
    {
        std::ofstream out(run.path("residual.csv"));
        out << "epsilon,time,residual\n";
        for (std::size_t i = 0; i < t.eps.size(); ++i)
            out << format_double(t.eps[i]) << ',' << format_double(t.time[i]) << ',' << format_double(t.value[i])
                << '\n';
    }
    Json rows = Json::array();
    for (std::size_t e = 0; e < c.sweep.eps.size(); ++e) {
        rows.push_back({{"epsilon", c.sweep.eps[e]}, {"max_residual", t.max_per_eps[e]}});
        std::cout << "eps " << format_double(c.sweep.eps[e]) << ": max residual " << format_double(t.max_per_eps[e])
                  << "\n";
    }
    write_json(run.path("residual.json"), {{"rows", rows}});
    run.finish(ok);
    return ok;
}

int cmd_mc(const RunConfig& c) {
    Run run("mc", c);
    const MonteCarloResult r = run.phase("mc", [&] { return simulate_diffusivity(c.kernel, c.medium, c.walk); });
    write_json(run.path("mc.json"), to_json(r));
    print_matrix("a_mc", r.a_mc);
    print_matrix("se", r.se);
    run.finish(ok);
    return ok;
}

int cmd_demo(const RunConfig& c) {
    if (c.dimension != 1) throw ConfigError("demo runs the d = 1 pipeline only");
    Run run("demo", c);
    run.phase("conditions", [&] { return verify_conditions(c.medium, c.validation_density); });
    const Solved s = solve_cell(run, c, true);
    const double perturb = c.perturb_aeff != 0.0 ? c.perturb_aeff : 0.2;
    const std::vector<Eigen::MatrixXd> candidates{s.effective.a_eff, (1.0 - perturb) * s.effective.a_eff};
    const auto results = run.phase("sweep", [&] {
        return convergence_sweep(c.kernel, c.medium, c.sweep, candidates, &s.chi, &s.kappa);
    });
    write_json(run.path("effective.json"), to_json(s.effective));
    write_sweep_csv(run.path("sweep.csv"), results[0]);
    write_sweep_dat(run.path("sweep.dat"), results[0]);
    write_sweep_csv(run.path("sweep_control.csv"), results[1]);

    std::vector<double> errors, residuals, control;
    for (const auto& row : results[0].rows) {
        errors.push_back(row.sup_error);
        residuals.push_back(row.residual);
    }
    for (const auto& row : results[1].rows) control.push_back(row.sup_error);
    const double threshold = 0.05;
    const bool converge = strictly_decreasing(errors) && errors.back() < threshold;
    const bool negative = *std::min_element(control.begin(), control.end()) >= threshold;
    const bool residual = strictly_decreasing(residuals);
    const bool compatible = s.theta_mean.cwiseAbs().maxCoeff() <= 1e-8;

    print_matrix("a_eff", s.effective.a_eff);
    for (std::size_t e = 0; e < errors.size(); ++e)
        std::cout << "eps " << format_double(c.sweep.eps[e]) << ": error " << format_double(errors[e])
                  << ", control " << format_double(control[e]) << ", residual " << format_double(residuals[e])
                  << "\n";
    auto line = [](bool pass, const std::string& what) {
        std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
    };
    line(compatible, "second-corrector compatibility");
    line(converge, "errors decrease and fall below 0.05");
    line(negative, "perturbed a_eff stays at or above 0.05");
    line(residual, "ansatz residual decreases");
    const bool all = compatible && converge && negative && residual;
    write_json(run.path("demo.json"), {{"a_eff", to_json(s.effective.a_eff)},
                                       {"errors", errors},
                                       {"control_errors", control},
                                       {"residuals", residuals},
                                       {"checks",
                                        {{"compatibility", compatible},
                                         {"convergence", converge},
                                         {"negative_control", negative},
                                         {"residual", residual}}}});
    const int code = all ? ok : acceptance_failure;
    run.finish(code);
    return code;
}

int guarded(const std::string& command, const std::function<int()>& body) {
    try {
        return body();
    } catch (const NonConvergence& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return solver_error;
    } catch (const PositivityViolation& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return solver_error;
    } catch (const MonteCarloDiagnostic& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return solver_error;
    } catch (const Error& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << command << ": unexpected error: " << e.what() << "\n";
        return failure;
    }
}

}  // namespace perihom::cli
