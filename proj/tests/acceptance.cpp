// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"

#include "perihom/cell_solver.hpp"
#include "perihom/config.hpp"
#include "perihom/effective.hpp"
#include "perihom/eps_experiment.hpp"
#include "perihom/errors.hpp"
#include "perihom/mc_oracle.hpp"

using namespace perihom;
using oracle::pi;

namespace {

const std::filesystem::path configs = PERIHOM_CONFIGS;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double l2(const SpaceTimeField& a) { return a.norm(); }

double l2_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return std::sqrt(s / static_cast<double>(a.values.size()));
}

Outcome homogeneous_case(const Medium& medium) {
    Stopwatch clock;
    CellProblem P(Kernel::box(1, 1.0), medium, TorusGrid{1, 64, 64});
    Corrector chi;
    const EffectiveMatrix e = compute_effective(P, &chi);
    const double chi_norm = l2(chi.chi[0]);
    const double err = std::abs(e.a_eff(0, 0) - 1.0 / 6.0);
    const double t = clock.seconds();
    return {chi_norm <= 1e-10 && err <= 1e-8 && t < 10.0,
            fmt("||chi|| = %.2e, |a_eff - 1/6| = %.2e, %.2f s", chi_norm, err, t)};
}

Outcome criterion_constant() { return homogeneous_case(Medium::constant(1, 1.0, 1.0, 1.0)); }

Outcome criterion_time_only() {
    // 1 + 0.5 sin(2 pi s) written as a cosine series.
    return homogeneous_case(Medium::time_only(1, FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, -pi / 2}}), 0.5, 1.5));
}

Outcome criterion_stationary() {
    Stopwatch clock;
    std::vector<SeparableTerm> terms;
    terms.push_back({1.0, FourierSeries::constant(2, 1.0), {}});
    terms.push_back({0.5, FourierSeries(2, {{{1, 0}, 1.0, -pi / 2}}), {}});
    terms.push_back({0.2, FourierSeries(2, {{{2, 0}, 1.0, 0.3}}), {}});
    const Medium M = Medium::separable_sum(1, terms, 0.3, 1.7);
    const TorusGrid g{1, 64, 16};
    CellProblem P(Kernel::gaussian(1, 0.25), M, g);
    Corrector chi;
    const EffectiveMatrix e = compute_effective(P, &chi);

    const Lattice lat = g.lattice();
    const auto& dk = P.generator().discrete_kernel();
    const Eigen::MatrixXd A = oracle::dense_generator(dk, M, lat, 0.0);
    const Eigen::VectorXd q = -oracle::drift(dk, M, lat, 0.0, 0);
    const Eigen::VectorXd ref = oracle::zero_mean_solve(A, q);
    SpaceTimeField tiled(g);
    for (int n = 0; n < g.Nt; ++n)
        for (int i = 0; i < g.N; ++i) tiled.slice(n)[i] = ref(i);
    const double chi_err = l2_diff(chi.chi[0], tiled);
    const double a_ref = oracle::stationary_a_hat(dk, M, lat, {ref}, 0, 0);
    const double a_err = std::abs(e.a_eff(0, 0) - a_ref);
    const double t = clock.seconds();
    return {chi_err <= 1e-7 && a_err <= 1e-7 && t < 60.0,
            fmt("||chi - chi_stat|| = %.2e (||chi|| = %.3e), |a_eff - a_stat| = %.2e, %.2f s", chi_err, l2(tiled), a_err, t)};
}

struct Separable {
    RunConfig cfg = load_config(configs / "separable.json");
    CellProblem problem{cfg.kernel, cfg.medium, cfg.grid, cfg.cell};
    Corrector chi;
    EffectiveMatrix eff = compute_effective(problem, &chi);
};

Outcome criterion_variational(Separable& s) {
    oracle::Draw draw(2026);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd zeta(1);
        zeta << draw.uniform(-3.0, 3.0);
        const double target = s.eff.a_eff(0, 0) * zeta(0) * zeta(0);
        worst = std::max(worst, std::abs(variational_value(s.problem, s.chi, zeta) - target) / std::abs(target));
    }
    return {worst <= 1e-6, fmt("max relative gap %.2e over 10 directions (a_eff = %.12f)", worst, s.eff.a_eff(0, 0))};
}

Outcome criterion_kappa(Separable& s) {
    const auto theta = second_corrector_rhs(s.problem, s.chi, s.eff.a_hat);
    const double m = std::abs(theta[0].mean());
    return {m <= 1e-8, fmt("|mean theta| = %.2e", m)};
}

Outcome criterion_monte_carlo(Separable& s) {
    Stopwatch clock;
    const MonteCarloResult r = simulate_diffusivity(s.cfg.kernel, s.cfg.medium, s.cfg.walk);
    const double gap = std::abs(r.a_mc(0, 0) - s.eff.a_eff(0, 0));
    const double se = r.se(0, 0);
    const double rel_se = se / s.eff.a_eff(0, 0);
    const double t = clock.seconds();
    return {gap <= 3 * se && rel_se <= 0.02 && t < 300.0,
            fmt("a_mc = %.6f +- %.6f vs a_eff = %.6f (%.2f SE, SE/a_eff = %.2f%%, %ld paths, acceptance %.2f), %.1f s",
                r.a_mc(0, 0), se, s.eff.a_eff(0, 0), gap / se, 100 * rel_se, r.paths, r.accept_rate, t)};
}

struct Demo {
    RunConfig cfg = load_config(configs / "demo.json");
    CellProblem problem{cfg.kernel, cfg.medium, cfg.grid, cfg.cell};
    Corrector chi;
    EffectiveMatrix eff = compute_effective(problem, &chi);
    SecondCorrector kappa = solve_second_corrector(problem, chi, eff.a_hat);
    std::vector<SweepResult> sweep;
    double seconds = 0.0;
};

std::string rows_text(const SweepResult& r, bool residual) {
    std::ostringstream out;
    for (const SweepRow& row : r.rows) out << fmt(" eps=%.2f:%.4f", row.epsilon, residual ? row.residual : row.sup_error);
    return out.str();
}

Outcome criterion_convergence(Demo& d) {
    Stopwatch clock;
    d.sweep = convergence_sweep(d.cfg.kernel, d.cfg.medium, d.cfg.sweep, {d.eff.a_eff, 0.8 * d.eff.a_eff}, &d.chi, &d.kappa);
    d.seconds = clock.seconds();
    const auto& rows = d.sweep[0].rows;
    bool decreasing = true;
    for (std::size_t k = 1; k < rows.size(); ++k) decreasing &= rows[k].sup_error < rows[k - 1].sup_error;
    const bool small = rows.back().sup_error < 0.05;
    double control = 1.0;
    for (const SweepRow& row : d.sweep[1].rows) control = std::min(control, row.sup_error);
    const bool control_fails = control >= 0.05;
    return {decreasing && small && control_fails && d.seconds < 900.0,
            fmt("a_eff = %.6f, errors", d.eff.a_eff(0, 0)) + rows_text(d.sweep[0], false) +
                fmt("; control min %.4f; %.0f s", control, d.seconds)};
}

Outcome criterion_residual(Demo& d) {
    if (d.sweep.empty()) return {false, "sweep did not run"};
    const auto& rows = d.sweep[0].rows;
    bool decreasing = true;
    for (std::size_t k = 1; k < rows.size(); ++k) decreasing &= rows[k].residual < rows[k - 1].residual;
    const SweepConfig& sc = d.cfg.sweep;
    const auto times = residual_times(sc.T, sc.snapshots, sc.residual_samples);
    double worst = 0.0;
    std::string per;
    for (double eps : sc.eps) {
        double sup[2] = {0.0, 0.0};
        double delta = 0.0;
        for (int r = 0; r < 2; ++r) {
            const BoxDomain domain = BoxDomain::resolving(1, sc.L, eps, sc.points_per_cell << r);
            EpsOperator op(d.cfg.kernel, d.cfg.medium, domain, eps);
            if (r == 0) delta = evolution_step(op, sc.T, {sc.snapshots, 0.0});
            HomogenizedSolution hom(d.eff.a_eff, gaussian_field(domain, sc.u0_sigma));
            Ansatz w(d.chi, &d.kappa, hom, domain, eps);
            const auto res = residual_norm(op, w, times, delta);
            sup[r] = *std::max_element(res.begin(), res.end());
        }
        const double change = std::abs(sup[1] - sup[0]) / sup[0];
        worst = std::max(worst, change);
        per += fmt(" eps=%.2f:%.1e", eps, change);
    }
    return {decreasing && worst < 0.1, "residuals" + rows_text(d.sweep[0], true) + "; Nx doubling change" + per};
}

Outcome criterion_stability() {
    const double eps = 0.5, T = 0.25;
    const BoxDomain domain = BoxDomain::resolving(1, 2.0, eps, 16);
    const auto x = [&](int i) { return domain.coordinate(i); };
    oracle::Draw draw(77);
    double worst_contraction = -1.0, worst_super = 0.0, worst_gronwall = -1.0, worst_mass = 0.0, worst_adjoint = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Medium M = oracle::random_medium(draw, 1);
        const Kernel K = draw.uniform(0, 1) < 0.5 ? Kernel::gaussian(1, draw.uniform(0.15, 0.4)) : Kernel::box(1, draw.uniform(0.3, 0.9));
        EpsOperator op(K, M, domain, eps);

        BoxField u0(domain), g(domain);
        for (int bump = 0; bump < 3; ++bump) {
            const double c = draw.uniform(-1, 1), w = draw.uniform(0.2, 0.6), a = draw.uniform(-1, 1);
            const double cg = draw.uniform(-1, 1), wg = draw.uniform(0.2, 0.6), ag = draw.uniform(-1, 1);
            for (int i = 0; i < domain.Nx; ++i) {
                u0.values[i] += a * std::exp(-(x(i) - c) * (x(i) - c) / (2 * w * w));
                g.values[i] += ag * std::exp(-(x(i) - cg) * (x(i) - cg) / (2 * wg * wg));
            }
        }
        const double omega = draw.uniform(1.0, 20.0);
        const Forcing f = [&](double t, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.values[i] * std::cos(omega * t);
        };
        const EvolveOptions opt{8, 0.0};
        const Trajectory free = evolve_eps(op, u0, nullptr, T, opt);
        const Trajectory forced = evolve_eps(op, BoxField(domain), f, T, opt);
        const Trajectory both = evolve_eps(op, u0, f, T, opt);
        for (std::size_t k = 0; k < free.fields.size(); ++k) {
            const double t = free.times[k];
            worst_contraction = std::max(worst_contraction, free.fields[k].norm() - u0.norm());
            double diff = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < u0.values.size(); ++i) {
                diff = std::max(diff, std::abs(both.fields[k].values[i] - free.fields[k].values[i] - forced.fields[k].values[i]));
                scale = std::max(scale, std::abs(both.fields[k].values[i]));
            }
            worst_super = std::max(worst_super, diff / scale);
            const double f2 = g.norm() * g.norm() * (t / 2 + std::sin(2 * omega * t) / (4 * omega));
            const double v2 = forced.fields[k].norm() * forced.fields[k].norm();
            worst_gronwall = std::max(worst_gronwall, v2 - f2 * std::exp(t));
            worst_mass = std::max(worst_mass, std::abs(free.fields[k].integral() - u0.integral()) / std::max(1.0, std::abs(u0.integral())));
        }
        std::vector<double> au(domain.Nx), ag(domain.Nx);
        const double s = draw.uniform(0, 1);
        op.apply(s, u0.values, au);
        op.apply(s, g.values, ag);
        double uag = 0.0, aug = 0.0;
        for (int i = 0; i < domain.Nx; ++i) {
            uag += u0.values[i] * ag[i];
            aug += au[i] * g.values[i];
        }
        worst_adjoint = std::max(worst_adjoint, std::abs(uag - aug) / std::max(std::abs(uag), 1e-300));
    }
    const bool pass = worst_contraction <= 0.0 && worst_super <= 1e-12 && worst_gronwall <= 0.0 && worst_mass <= 1e-10 &&
                      worst_adjoint <= 1e-12;
    return {pass, fmt("20 triples: max(||u(t)|| - ||u0||) = %.2e, superposition %.1e, max(||v2||^2 - bound) = %.2e, "
                      "mass %.1e, symmetry %.1e",
                      worst_contraction, worst_super, worst_gronwall, worst_mass, worst_adjoint)};
}

Outcome criterion_gate() {
    const TorusGrid g{1, 16, 256};
    CellProblem P(Kernel::box(1, 1.0), Medium::constant(1, 1.0, 1.0, 1.0), g);
    double defect = -1.0;
    try {
        P.solve_periodic(SpaceTimeField(g, 1.0));
    } catch (const CompatibilityViolation& e) {
        defect = e.defect();
    }
    SpaceTimeField theta(g), exact(g);
    for (int n = 0; n < g.Nt; ++n)
        for (int i = 0; i < g.N; ++i) {
            theta.slice(n)[i] = std::cos(2 * pi * n * g.ds());
            exact.slice(n)[i] = std::sin(2 * pi * n * g.ds()) / (2 * pi);
        }
    const auto [beta, report] = P.solve_periodic(theta);
    double err = 0.0;
    for (std::size_t i = 0; i < beta.values.size(); ++i) err = std::max(err, std::abs(beta.values[i] - exact.values[i]));
    return {std::abs(defect - 1.0) <= 1e-12 && err <= 1e-9,
            fmt("theta = 1 rejected with defect %.3f; max |beta - sin(2 pi s)/(2 pi)| = %.2e", defect, err)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s  [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "constant medium gives m2/2", criterion_constant);
    report(2, "time-only medium gives mean(mu) m2/2", criterion_time_only);
    report(3, "stationary limit matches the dense cell solve", criterion_stationary);
    std::unique_ptr<Separable> sep;
    try {
        sep = std::make_unique<Separable>();
    } catch (const std::exception& e) {
        std::printf("separable scenario setup failed: %s\n", e.what());
    }
    auto need = [&](auto fn) { return [&, fn]() { return sep ? fn(*sep) : Outcome{false, "setup failed"}; }; };
    report(4, "variational identity", need(criterion_variational));
    report(5, "second-corrector compatibility", need(criterion_kappa));
    report(6, "Monte Carlo diffusivity agrees", need(criterion_monte_carlo));
    std::unique_ptr<Demo> demo;
    try {
        demo = std::make_unique<Demo>();
    } catch (const std::exception& e) {
        std::printf("demo scenario setup failed: %s\n", e.what());
    }
    auto need_demo = [&](auto fn) { return [&, fn]() { return demo ? fn(*demo) : Outcome{false, "setup failed"}; }; };
    report(7, "homogenization error decreases, perturbed control does not", need_demo(criterion_convergence));
    report(8, "corrected residual decays and is resolution independent", need_demo(criterion_residual));
    report(9, "stability suites", criterion_stability);
    report(10, "solvability gate", criterion_gate);
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
