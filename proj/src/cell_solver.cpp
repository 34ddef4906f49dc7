#include "perihom/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "perihom/effective.hpp"
#include "perihom/errors.hpp"
#include "perihom/fft.hpp"

namespace perihom {

namespace {

double rms(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

double dot_mean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

void remove_mean(std::span<double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

// Restarted GMRES for op(x) = b with the mean-weighted Euclidean inner product.
template <class Op>
bool gmres(Op&& op, std::span<const double> b, std::vector<double>& x, double tol, int restart, int max_apply,
           int& applications, double& residual) {
    const std::size_t n = b.size();
    const int m = std::max(1, restart);
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1), w(n), y(m);
    while (applications < max_apply) {
        op(x, w);
        ++applications;
        for (std::size_t i = 0; i < n; ++i) V[0][i] = b[i] - w[i];
        const double beta = rms(V[0]);
        residual = beta;
        if (beta <= tol) return true;
        for (double& v : V[0]) v /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int j = 0;
        for (; j < m && applications < max_apply; ++j) {
            op(V[j], w);
            ++applications;
            for (int i = 0; i <= j; ++i) {
                H[i][j] = dot_mean(w, V[i]);
                for (std::size_t k = 0; k < n; ++k) w[k] -= H[i][j] * V[i][k];
            }
            H[j + 1][j] = rms(w);
            if (H[j + 1][j] > 0.0)
                for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] / H[j + 1][j];
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
                H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
                H[i][j] = t;
            }
            const double denom = std::hypot(H[j][j], H[j + 1][j]);
            cs[j] = denom > 0.0 ? H[j][j] / denom : 1.0;
            sn[j] = denom > 0.0 ? H[j + 1][j] / denom : 0.0;
            H[j][j] = denom;
            H[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            residual = std::abs(g[j + 1]);
            if (residual <= tol || denom == 0.0) {
                ++j;
                break;
            }
        }
        for (int i = j - 1; i >= 0; --i) {
            double t = g[i];
            for (int k = i + 1; k < j; ++k) t -= H[i][k] * y[k];
            y[i] = t / H[i][i];
        }
        for (int i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * V[i][k];
    }
    op(x, w);
    for (std::size_t i = 0; i < n; ++i) w[i] = b[i] - w[i];
    residual = rms(w);
    return residual <= tol;
}

}  // namespace

CellProblem::CellProblem(const Kernel& kernel, const Medium& medium, TorusGrid grid, CellOptions options)
    : grid_(grid), options_(options), generator_(make_cell_generator(kernel, medium, grid)) {
    if (grid_.ds() * 2.0 * medium.mu_plus() > 1.0)
        throw StabilityError("time step ds = 1/" + std::to_string(grid_.Nt) + " violates ds * 2 mu_plus <= 1 (mu_plus = " +
                             std::to_string(medium.mu_plus()) + "); increase Nt");
    slices_.reserve(2 * grid_.Nt);
    for (int k = 0; k < 2 * grid_.Nt; ++k) slices_.push_back(generator_.slice(k * 0.5 * grid_.ds()));
    const std::size_t n = grid_.nodes();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
}

const MediumSlice& CellProblem::half_slice(int k) const {
    const int m = 2 * grid_.Nt;
    return slices_[((k % m) + m) % m];
}

void CellProblem::apply(int half_index, std::span<const double> v, std::span<double> out) {
    generator_.apply(half_slice(half_index), v, out);
}

CellProblem::Forcing CellProblem::make_forcing(const SpaceTimeField* theta) const {
    Forcing f;
    if (!theta) return f;
    if (!(theta->grid == grid_)) throw ConfigError("forcing grid differs from the cell grid");
    f.nodes = theta;
    f.midpoints = time_midpoints(*theta);
    return f;
}

void CellProblem::step_forward(int n, std::vector<double>& y, const Forcing& f) {
    const std::size_t size = y.size();
    const double ds = grid_.ds();
    const int Nt = grid_.Nt;
    auto add = [&](std::vector<double>& k, std::span<const double> th) {
        for (std::size_t i = 0; i < size; ++i) k[i] += th[i];
    };
    std::span<const double> th0, thm, th1;
    if (f.nodes) {
        th0 = f.nodes->slice(n % Nt);
        thm = std::span<const double>(f.midpoints.data() + (n % Nt) * size, size);
        th1 = f.nodes->slice((n + 1) % Nt);
    }
    apply(2 * n, y, k1_);
    if (f.nodes) add(k1_, th0);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + 0.5 * ds * k1_[i];
    apply(2 * n + 1, tmp_, k2_);
    if (f.nodes) add(k2_, thm);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + 0.5 * ds * k2_[i];
    apply(2 * n + 1, tmp_, k3_);
    if (f.nodes) add(k3_, thm);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + ds * k3_[i];
    apply(2 * n + 2, tmp_, k4_);
    if (f.nodes) add(k4_, th1);
    for (std::size_t i = 0; i < size; ++i) y[i] += ds / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

void CellProblem::step_backward(int n, std::vector<double>& y, const Forcing& f) {
    // One step of -d_s g = A g + theta from s_{n+1} down to s_n.
    const std::size_t size = y.size();
    const double ds = grid_.ds();
    const int Nt = grid_.Nt;
    auto add = [&](std::vector<double>& k, std::span<const double> th) {
        for (std::size_t i = 0; i < size; ++i) k[i] += th[i];
    };
    std::span<const double> th0, thm, th1;
    if (f.nodes) {
        th0 = f.nodes->slice(n % Nt);
        thm = std::span<const double>(f.midpoints.data() + (n % Nt) * size, size);
        th1 = f.nodes->slice((n + 1) % Nt);
    }
    apply(2 * n + 2, y, k1_);
    if (f.nodes) add(k1_, th1);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + 0.5 * ds * k1_[i];
    apply(2 * n + 1, tmp_, k2_);
    if (f.nodes) add(k2_, thm);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + 0.5 * ds * k2_[i];
    apply(2 * n + 1, tmp_, k3_);
    if (f.nodes) add(k3_, thm);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y[i] + ds * k3_[i];
    apply(2 * n, tmp_, k4_);
    if (f.nodes) add(k4_, th0);
    for (std::size_t i = 0; i < size; ++i) y[i] += ds / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

std::vector<TorusField> CellProblem::propagate(const TorusField& nu, const SpaceTimeField* theta, int n0, int n1) {
    if (n0 < 0 || n1 > grid_.Nt || n0 > n1) throw ConfigError("propagate needs 0 <= n0 <= n1 <= Nt");
    const Forcing f = make_forcing(theta);
    std::vector<TorusField> out;
    out.reserve(n1 - n0 + 1);
    std::vector<double> y = nu.values;
    out.push_back(nu);
    for (int n = n0; n < n1; ++n) {
        step_forward(n, y, f);
        TorusField slice(grid_);
        slice.values = y;
        out.push_back(std::move(slice));
    }
    return out;
}

std::vector<TorusField> CellProblem::propagate_adjoint(const TorusField& nu, const SpaceTimeField* theta, int n0,
                                                       int n1) {
    if (n0 < 0 || n1 > grid_.Nt || n0 > n1) throw ConfigError("propagate_adjoint needs 0 <= n0 <= n1 <= Nt");
    const Forcing f = make_forcing(theta);
    std::vector<TorusField> out(n1 - n0 + 1, TorusField(grid_));
    std::vector<double> y = nu.values;
    out.back() = nu;
    for (int n = n1 - 1; n >= n0; --n) {
        step_backward(n, y, f);
        out[n - n0].values = y;
    }
    return out;
}

TorusField CellProblem::monodromy(const TorusField& nu) {
    TorusField out(grid_);
    out.values = apply_period_map(nu.values);
    return out;
}

std::vector<double> CellProblem::apply_period_map(const std::vector<double>& nu) {
    std::vector<double> y = nu;
    const Forcing none;
    for (int n = 0; n < grid_.Nt; ++n) step_forward(n, y, none);
    return y;
}

std::pair<SpaceTimeField, PeriodicSolveReport> CellProblem::solve_periodic(const SpaceTimeField& theta) {
    if (!(theta.grid == grid_)) throw ConfigError("right-hand side grid differs from the cell grid");
    PeriodicSolveReport report;
    const double theta_norm = theta.norm();
    report.compatibility_defect = std::abs(theta.mean());
    const double compat_tol = options_.compatibility_tolerance * std::max(1.0, theta_norm);
    if (report.compatibility_defect > compat_tol) throw CompatibilityViolation(report.compatibility_defect, compat_tol);

    const Forcing f = make_forcing(&theta);
    std::vector<double> phi(grid_.nodes(), 0.0);
    for (int n = 0; n < grid_.Nt; ++n) step_forward(n, phi, f);
    remove_mean(phi);
    const double tol = options_.tolerance * std::max(1.0, rms(phi));

    std::vector<double> nu(phi.size(), 0.0);
    auto fixed_point_map = [&](const std::vector<double>& x) {
        auto y = apply_period_map(x);
        remove_mean(y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += phi[i];
        return y;
    };

    bool converged = false;
    bool use_krylov = options_.force_krylov;
    double previous = 0.0;
    while (!use_krylov && report.iterations < options_.max_iterations) {
        auto next = fixed_point_map(nu);
        ++report.iterations;
        double inc = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) inc += (next[i] - nu[i]) * (next[i] - nu[i]);
        inc = std::sqrt(inc / static_cast<double>(nu.size()));
        if (previous > 0.0) report.contraction = inc / previous;
        previous = inc;
        nu = std::move(next);
        report.residual = inc;
        if (inc <= tol) {
            converged = true;
            break;
        }
        if (options_.enable_krylov && report.iterations >= 5 && report.contraction > options_.krylov_threshold)
            use_krylov = true;
    }
    if (use_krylov && !converged) {
        report.method = report.iterations > 0 ? "fixed-point+gmres" : "gmres";
        auto op = [&](const std::vector<double>& x, std::vector<double>& out) {
            auto y = apply_period_map(x);
            remove_mean(y);
            for (std::size_t i = 0; i < y.size(); ++i) out[i] = x[i] - y[i];
        };
        int applications = 0;
        double res = 0.0;
        gmres(op, phi, nu, tol, options_.krylov_restart, options_.max_iterations - report.iterations, applications,
              res);
        report.iterations += applications;
        remove_mean(nu);
        auto next = fixed_point_map(nu);
        double inc = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) inc += (next[i] - nu[i]) * (next[i] - nu[i]);
        report.residual = std::sqrt(inc / static_cast<double>(nu.size()));
        converged = report.residual <= tol;
    }
    if (!converged) throw NonConvergence(report.iterations, report.residual);

    SpaceTimeField beta(grid_);
    std::vector<double> y = nu;
    for (int n = 0; n < grid_.Nt; ++n) {
        std::copy(y.begin(), y.end(), beta.slice(n).begin());
        step_forward(n, y, f);
    }
    report.solution_mean = beta.mean();
    for (double& v : beta.values) v -= report.solution_mean;
    return {std::move(beta), report};
}

double CellProblem::periodic_defect(const SpaceTimeField& beta, const SpaceTimeField& theta) {
    const Forcing f = make_forcing(&theta);
    double sum = 0.0;
    for (int n = 0; n < grid_.Nt; ++n) {
        auto src = beta.slice(n);
        std::vector<double> y(src.begin(), src.end());
        step_forward(n, y, f);
        auto next = beta.slice((n + 1) % grid_.Nt);
        for (std::size_t i = 0; i < y.size(); ++i) sum += (next[i] - y[i]) * (next[i] - y[i]);
    }
    const double defect = std::sqrt(sum / static_cast<double>(beta.values.size())) / grid_.ds();
    const double scale = theta.norm();
    return scale > 0.0 ? defect / scale : defect;
}

double CellProblem::adjoint_defect(const SpaceTimeField& beta, const SpaceTimeField& theta) {
    const Forcing f = make_forcing(&theta);
    double sum = 0.0;
    for (int n = 0; n < grid_.Nt; ++n) {
        auto src = beta.slice((n + 1) % grid_.Nt);
        std::vector<double> y(src.begin(), src.end());
        step_backward(n, y, f);
        auto target = beta.slice(n);
        for (std::size_t i = 0; i < y.size(); ++i) sum += (target[i] - y[i]) * (target[i] - y[i]);
    }
    const double defect = std::sqrt(sum / static_cast<double>(beta.values.size())) / grid_.ds();
    const double scale = theta.norm();
    return scale > 0.0 ? defect / scale : defect;
}

double CellProblem::spectral_residual(const SpaceTimeField& beta, const SpaceTimeField& theta) {
    const SpaceTimeField db = time_derivative(beta);
    double sum = 0.0;
    std::vector<double> Ab(grid_.nodes());
    for (int n = 0; n < grid_.Nt; ++n) {
        apply(2 * n, beta.slice(n), Ab);
        auto d = db.slice(n);
        auto th = theta.slice(n);
        for (std::size_t i = 0; i < Ab.size(); ++i) {
            const double r = d[i] - Ab[i] - th[i];
            sum += r * r;
        }
    }
    const double res = std::sqrt(sum / static_cast<double>(beta.values.size()));
    const double scale = theta.norm();
    return scale > 0.0 ? res / scale : res;
}

std::vector<double> time_midpoints(const SpaceTimeField& f) {
    const int Nt = f.grid.Nt;
    const std::size_t nodes = f.grid.nodes();
    RealFft coarse(1, Nt), fine(1, 2 * Nt);
    std::vector<double> series(Nt), up(2 * Nt);
    std::vector<Complex> X(Nt / 2 + 1), Y(Nt + 1);
    std::vector<double> out(nodes * Nt);
    for (std::size_t i = 0; i < nodes; ++i) {
        for (int n = 0; n < Nt; ++n) series[n] = f.values[n * nodes + i];
        coarse.forward(series, X);
        std::fill(Y.begin(), Y.end(), Complex(0.0, 0.0));
        for (int k = 0; k < Nt / 2; ++k) Y[k] = 2.0 * X[k];
        if (Nt % 2 == 0) Y[Nt / 2] = X[Nt / 2];
        else Y[Nt / 2] = 2.0 * X[Nt / 2];
        fine.inverse(Y, up);
        for (int n = 0; n < Nt; ++n) out[n * nodes + i] = up[2 * n + 1];
    }
    return out;
}

SpaceTimeField time_derivative(const SpaceTimeField& f) {
    const int Nt = f.grid.Nt;
    const std::size_t nodes = f.grid.nodes();
    RealFft fft(1, Nt);
    std::vector<double> series(Nt);
    std::vector<Complex> X(Nt / 2 + 1);
    SpaceTimeField out(f.grid);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < nodes; ++i) {
        for (int n = 0; n < Nt; ++n) series[n] = f.values[n * nodes + i];
        fft.forward(series, X);
        for (int k = 0; k <= Nt / 2; ++k) X[k] *= Complex(0.0, two_pi * k);
        if (Nt % 2 == 0) X[Nt / 2] = 0.0;
        fft.inverse(X, series);
        for (int n = 0; n < Nt; ++n) out.values[n * nodes + i] = series[n];
    }
    return out;
}

Corrector solve_corrector(CellProblem& problem) {
    Corrector c;
    for (auto& q : rhs_q(problem)) {
        auto [chi, report] = problem.solve_periodic(q);
        c.chi.push_back(std::move(chi));
        c.reports.push_back(report);
    }
    return c;
}

std::vector<SpaceTimeField> second_corrector_rhs(CellProblem& problem, const Corrector& chi,
                                                 const Eigen::MatrixXd& a_hat) {
    const TorusGrid& grid = problem.grid();
    const int d = grid.dimension;
    if (static_cast<int>(chi.chi.size()) != d || a_hat.rows() != d || a_hat.cols() != d)
        throw ConfigError("second corrector needs d corrector components and a d x d matrix");
    auto& gen = problem.generator();
    const auto& dk = gen.discrete_kernel();
    const Lattice lattice = gen.lattice();
    const std::size_t nodes = grid.nodes();

    std::vector<std::vector<int>> back(dk.size(), std::vector<int>(d));
    for (std::size_t k = 0; k < dk.size(); ++k)
        for (int a = 0; a < d; ++a) back[k][a] = -dk.offset(k)[a];

    std::vector<SpaceTimeField> theta(d * d, SpaceTimeField(grid));
    std::vector<double> z(d), acc(d * d);
    for (int n = 0; n < grid.Nt; ++n) {
        const MediumSlice& slice = problem.half_slice(2 * n);
        for (std::size_t p = 0; p < nodes; ++p) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t k = 0; k < dk.size(); ++k) {
                const std::size_t q = lattice.shift(p, back[k]);
                const double wmu = dk.weight(k) * gen.pair(slice, p, back[k]);
                for (int a = 0; a < d; ++a) z[a] = dk.displacement(k, a);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        acc[i * d + j] += wmu * (0.5 * z[i] * z[j] + z[i] * chi.chi[j].values[n * nodes + q]);
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) theta[i * d + j].values[n * nodes + p] = acc[i * d + j] - a_hat(i, j);
        }
    }
    return theta;
}

SecondCorrector solve_second_corrector(CellProblem& problem, const Corrector& chi, const Eigen::MatrixXd& a_hat) {
    SecondCorrector out;
    out.dimension = problem.grid().dimension;
    for (auto& theta : second_corrector_rhs(problem, chi, a_hat)) {
        auto [kappa, report] = problem.solve_periodic(theta);
        out.kappa.push_back(std::move(kappa));
        out.reports.push_back(report);
    }
    return out;
}

}  // namespace perihom
