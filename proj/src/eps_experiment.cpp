#include "perihom/eps_experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "perihom/errors.hpp"
#include "perihom/parallel.hpp"

namespace perihom {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

long positive_mod(long a, long n) { return ((a % n) + n) % n; }

std::size_t power(std::size_t base, int exponent) {
    std::size_t r = 1;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}
}  // namespace

std::size_t BoxDomain::nodes() const { return power(static_cast<std::size_t>(Nx), dimension); }

int BoxDomain::points_per_cell(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    if (Nx % 2 != 0) throw ConfigError("box needs an even Nx");
    const double cells_exact = 2.0 * L / eps;
    const long cells = std::lround(cells_exact);
    if (cells < 1 || std::abs(cells_exact - cells) > 1e-9 * cells_exact)
        throw ConfigError("2L / eps = " + std::to_string(cells_exact) + " is not an integer");
    if (Nx % cells != 0)
        throw ConfigError("eps / h is not an integer: Nx = " + std::to_string(Nx) + ", cells = " + std::to_string(cells));
    const long n = Nx / cells;
    if (n < 8) throw ConfigError("eps / h = " + std::to_string(n) + " is below 8 points per cell");
    return static_cast<int>(n);
}

Lattice BoxDomain::lattice(double eps) const {
    return Lattice{dimension, Nx, points_per_cell(eps), -static_cast<long>(Nx / 2)};
}

BoxDomain BoxDomain::resolving(int dimension, double L, double eps, int points_per_cell) {
    const long cells = std::lround(2.0 * L / eps);
    BoxDomain d{dimension, L, static_cast<int>(cells * points_per_cell)};
    d.points_per_cell(eps);
    return d;
}

double BoxField::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * std::pow(domain.h(), domain.dimension));
}

double BoxField::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * std::pow(domain.h(), domain.dimension);
}

double BoxField::boundary_fraction() const {
    const int d = domain.dimension;
    const std::size_t Nx = static_cast<std::size_t>(domain.Nx);
    double total = 0.0, outer = 0.0;
    const double limit = 0.9 * domain.L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t rest = i;
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double x = domain.coordinate(static_cast<long>(rest % Nx));
            rest /= Nx;
            r2 += x * x;
        }
        const double v2 = values[i] * values[i];
        total += v2;
        if (r2 > limit * limit) outer += v2;
    }
    return total > 0.0 ? outer / total : 0.0;
}

BoxField gaussian_field(const BoxDomain& domain, double sigma, std::span<const double> center) {
    BoxField f(domain);
    const int d = domain.dimension;
    const std::size_t Nx = static_cast<std::size_t>(domain.Nx);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        std::size_t rest = i;
        double r2 = 0.0;
        for (int a = d - 1; a >= 0; --a) {
            const double x = domain.coordinate(static_cast<long>(rest % Nx)) - (center.empty() ? 0.0 : center[a]);
            rest /= Nx;
            r2 += x * x;
        }
        f.values[i] = std::exp(-r2 / (2.0 * sigma * sigma));
    }
    return f;
}

EpsOperator::EpsOperator(const Kernel& kernel, const Medium& medium, BoxDomain domain, double eps)
    : domain_(domain),
      eps_(eps),
      per_cell_(domain.points_per_cell(eps)),
      generator_(kernel, medium, domain.lattice(eps), kernel.truncation_radius()) {}

double EpsOperator::stable_step() const { return 0.1 * eps_ * eps_ / generator_.medium().mu_plus(); }

void EpsOperator::apply(double t, std::span<const double> u, std::span<double> out) {
    double s = t / (eps_ * eps_);
    s -= std::floor(s);
    if (s != cached_s_) {
        cached_ = generator_.slice(s);
        cached_s_ = s;
    }
    generator_.apply(cached_, u, out);
    const double scale = 1.0 / (eps_ * eps_);
    for (double& v : out) v *= scale;
}

BoxField apply_eps_generator(const Kernel& kernel, const Medium& medium, double eps, double t, const BoxField& u) {
    EpsOperator op(kernel, medium, u.domain, eps);
    BoxField out(u.domain);
    op.apply(t, u.values, out.values);
    return out;
}

double evolution_step(const EpsOperator& op, double T, EvolveOptions options) {
    const double bound = op.stable_step();
    if (options.dt > bound * (1.0 + 1e-12))
        throw StabilityError("time step " + std::to_string(options.dt) + " exceeds 0.1 eps^2 / mu_plus = " +
                             std::to_string(bound));
    const double target = options.dt > 0.0 ? options.dt : bound;
    long steps = static_cast<long>(std::ceil(T / target - 1e-9));
    steps = (steps + options.snapshots - 1) / options.snapshots * options.snapshots;
    return T / static_cast<double>(steps);
}

Trajectory evolve_eps(EpsOperator& op, const BoxField& u0, const Forcing& forcing, double T, EvolveOptions options) {
    if (options.snapshots < 1) throw ConfigError("need at least one snapshot");
    if (!(T > 0.0)) throw ConfigError("final time must be positive");
    const double dt = evolution_step(op, T, options);
    const long steps = std::lround(T / dt);
    const long per_snapshot = steps / options.snapshots;

    Trajectory traj;
    traj.dt = dt;
    traj.steps = steps;
    traj.times.push_back(0.0);
    traj.fields.push_back(u0);

    const std::size_t n = u0.values.size();
    std::vector<double> u = u0.values, k1(n), k2(n), k3(n), k4(n), tmp(n), f(n);
    auto add_forcing = [&](double t, std::vector<double>& k) {
        if (!forcing) return;
        forcing(t, f);
        for (std::size_t i = 0; i < n; ++i) k[i] += f[i];
    };
    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        op.apply(t, u, k1);
        add_forcing(t, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
        op.apply(t + 0.5 * dt, tmp, k2);
        add_forcing(t + 0.5 * dt, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
        op.apply(t + 0.5 * dt, tmp, k3);
        add_forcing(t + 0.5 * dt, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * k3[i];
        op.apply(t + dt, tmp, k4);
        add_forcing(t + dt, k4);
        for (std::size_t i = 0; i < n; ++i) u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if ((step + 1) % per_snapshot == 0) {
            BoxField snap(u0.domain);
            snap.values = u;
            traj.times.push_back(static_cast<double>(step + 1) * dt);
            traj.fields.push_back(std::move(snap));
        }
    }
    return traj;
}

HomogenizedSolution::HomogenizedSolution(Eigen::MatrixXd a_eff, const BoxField& u0)
    : a_eff_(std::move(a_eff)), domain_(u0.domain), fft_(u0.domain.dimension, u0.domain.Nx) {
    const int d = domain_.dimension;
    if (a_eff_.rows() != d || a_eff_.cols() != d) throw ConfigError("a_eff has the wrong size");
    u0_hat_.resize(fft_.spectral_size());
    fft_.forward(u0.values, u0_hat_);
    const long Nx = domain_.Nx;
    const long half = Nx / 2 + 1;
    wavenumber_.assign(u0_hat_.size(), std::vector<double>(d));
    nyquist_.assign(u0_hat_.size() * d, false);
    for (std::size_t idx = 0; idx < u0_hat_.size(); ++idx) {
        std::size_t rest = idx;
        for (int a = d - 1; a >= 0; --a) {
            const long extent = (a == d - 1) ? half : Nx;
            long k = static_cast<long>(rest % extent);
            rest /= extent;
            if (k == Nx / 2) nyquist_[idx * d + a] = true;
            if (k > Nx / 2) k -= Nx;
            wavenumber_[idx][a] = two_pi * static_cast<double>(k) / (2.0 * domain_.L);
        }
    }
}

BoxField HomogenizedSolution::transform(double t, int i, int j) {
    const int d = domain_.dimension;
    std::vector<Complex> spec(u0_hat_.size());
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        const auto& xi = wavenumber_[idx];
        double q = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) q += xi[a] * a_eff_(a, b) * xi[b];
        Complex c = u0_hat_[idx] * std::exp(-t * q);
        if (i >= 0) c *= nyquist_[idx * d + i] ? Complex(0.0) : Complex(0.0, xi[i]);
        if (j >= 0) c *= nyquist_[idx * d + j] ? Complex(0.0) : Complex(0.0, xi[j]);
        spec[idx] = c;
    }
    BoxField out(domain_);
    fft_.inverse(spec, out.values);
    return out;
}

BoxField HomogenizedSolution::at(double t) { return transform(t, -1, -1); }
BoxField HomogenizedSolution::gradient(double t, int axis) { return transform(t, axis, -1); }
BoxField HomogenizedSolution::hessian(double t, int i, int j) { return transform(t, i, j); }

Trajectory evolve_homogenized(const Eigen::MatrixXd& a_eff, const BoxField& u0, double T, int snapshots) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a_eff + a_eff.transpose()), Eigen::EigenvaluesOnly);
    if (!(solver.eigenvalues().minCoeff() > 0.0)) throw PositivityViolation(solver.eigenvalues().minCoeff());
    HomogenizedSolution sol(a_eff, u0);
    Trajectory traj;
    for (int k = 0; k <= snapshots; ++k) {
        const double t = T * k / snapshots;
        traj.times.push_back(t);
        traj.fields.push_back(k == 0 ? u0 : sol.at(t));
    }
    traj.dt = T / snapshots;
    traj.steps = snapshots;
    return traj;
}

CellSampler::CellSampler(const SpaceTimeField& field) : grid_(field.grid) {
    const int Nt = grid_.Nt;
    const std::size_t nodes = grid_.nodes();
    const std::size_t modes = Nt / 2 + 1;
    spectra_.resize(nodes * modes);
    RealFft fft(1, Nt);
    std::vector<double> series(Nt);
    std::vector<Complex> X(modes);
    for (std::size_t i = 0; i < nodes; ++i) {
        for (int n = 0; n < Nt; ++n) series[n] = field.values[n * nodes + i];
        fft.forward(series, X);
        std::copy(X.begin(), X.end(), spectra_.begin() + i * modes);
    }
}

std::vector<double> CellSampler::at_time(double s) const {
    const int Nt = grid_.Nt;
    const std::size_t nodes = grid_.nodes();
    const std::size_t modes = Nt / 2 + 1;
    std::vector<Complex> phase(modes);
    for (std::size_t k = 0; k < modes; ++k) {
        double w = (Nt % 2 == 0 && static_cast<int>(k) == Nt / 2) ? 1.0 : (k == 0 ? 1.0 : 2.0);
        const double arg = two_pi * static_cast<double>(k) * s;
        phase[k] = w * Complex(std::cos(arg), std::sin(arg)) / static_cast<double>(Nt);
    }
    std::vector<double> out(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        double v = 0.0;
        const Complex* X = spectra_.data() + i * modes;
        for (std::size_t k = 0; k < modes; ++k) v += (X[k] * phase[k]).real();
        out[i] = v;
    }
    return out;
}

CellToBox::CellToBox(const TorusGrid& grid, const BoxDomain& domain, double eps)
    : grid_(grid), domain_(domain), per_cell_(domain.points_per_cell(eps)) {
    if (grid.dimension != domain.dimension) throw ConfigError("cell grid and box dimensions differ");
    const int N = grid.N;
    const int n = per_cell_;
    interp_.assign(static_cast<std::size_t>(n) * N, 0.0);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < N; ++q) {
            if (n == N) {
                interp_[p * N + q] = (p == q) ? 1.0 : 0.0;
                continue;
            }
            const double x = static_cast<double>(p) / n - static_cast<double>(q) / N;
            double v = 1.0;
            for (int k = 1; k < N / 2; ++k) v += 2.0 * std::cos(two_pi * k * x);
            v += std::cos(std::numbers::pi * N * x);
            interp_[p * N + q] = v / N;
        }
    }
    const int d = domain.dimension;
    const std::size_t Nx = static_cast<std::size_t>(domain.Nx);
    pattern_index_.resize(domain.nodes());
    for (std::size_t i = 0; i < pattern_index_.size(); ++i) {
        std::size_t rest = i, idx = 0, stride = 1;
        for (int a = d - 1; a >= 0; --a) {
            const long c = static_cast<long>(rest % Nx);
            rest /= Nx;
            idx += static_cast<std::size_t>(positive_mod(c - static_cast<long>(Nx / 2), n)) * stride;
            stride *= static_cast<std::size_t>(n);
        }
        pattern_index_[i] = idx;
    }
}

void CellToBox::tile(std::span<const double> cell_values, std::span<double> box_out) const {
    const int d = grid_.dimension;
    const std::size_t N = static_cast<std::size_t>(grid_.N);
    const std::size_t n = static_cast<std::size_t>(per_cell_);
    std::vector<std::size_t> shape(d, N);
    std::vector<double> cur(cell_values.begin(), cell_values.end());
    for (int a = 0; a < d; ++a) {
        std::size_t outer = 1, inner = 1;
        for (int b = 0; b < a; ++b) outer *= shape[b];
        for (int b = a + 1; b < d; ++b) inner *= shape[b];
        std::vector<double> next(outer * n * inner, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < N; ++q) {
                    const double w = interp_[p * N + q];
                    if (w == 0.0) continue;
                    const double* src = cur.data() + (o * N + q) * inner;
                    double* dst = next.data() + (o * n + p) * inner;
                    for (std::size_t in = 0; in < inner; ++in) dst[in] += w * src[in];
                }
        shape[a] = n;
        cur = std::move(next);
    }
    for (std::size_t i = 0; i < box_out.size(); ++i) box_out[i] = cur[pattern_index_[i]];
}

Ansatz::Ansatz(const Corrector& chi, const SecondCorrector* kappa, HomogenizedSolution& u0, const BoxDomain& domain,
               double eps)
    : u0_(u0),
      domain_(domain),
      eps_(eps),
      d_(domain.dimension),
      to_box_(chi.chi.at(0).grid, domain, eps) {
    for (const auto& c : chi.chi) chi_.emplace_back(c);
    if (kappa)
        for (const auto& k : kappa->kappa) kappa_.emplace_back(k);
}

BoxField Ansatz::at(double t) {
    BoxField w = u0_.at(t);
    double s = t / (eps_ * eps_);
    s -= std::floor(s);
    std::vector<double> cell_on_box(w.values.size());
    for (int j = 0; j < d_; ++j) {
        to_box_.tile(chi_[j].at_time(s), cell_on_box);
        const BoxField g = u0_.gradient(t, j);
        for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] -= eps_ * cell_on_box[i] * g.values[i];
    }
    if (!kappa_.empty()) {
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
                to_box_.tile(kappa_[i * d_ + j].at_time(s), cell_on_box);
                const BoxField hess = u0_.hessian(t, i, j);
                for (std::size_t p = 0; p < w.values.size(); ++p)
                    w.values[p] += eps_ * eps_ * cell_on_box[p] * hess.values[p];
            }
    }
    return w;
}

std::vector<double> residual_norm(EpsOperator& op, Ansatz& ansatz, const std::vector<double>& times, double delta) {
    std::vector<double> out;
    for (double t : times) {
        const BoxField plus = ansatz.at(t + delta);
        const BoxField minus = ansatz.at(t - delta);
        const BoxField w = ansatz.at(t);
        BoxField r(w.domain);
        op.apply(t, w.values, r.values);
        for (std::size_t i = 0; i < r.values.size(); ++i)
            r.values[i] = (plus.values[i] - minus.values[i]) / (2.0 * delta) - r.values[i];
        out.push_back(r.norm());
    }
    return out;
}

std::vector<double> residual_times(double T, int snapshots, int per_snapshot) {
    const int count = snapshots * per_snapshot;
    if (count < 1) throw ConfigError("residual needs at least one sample time");
    std::vector<double> times(count);
    for (int k = 0; k < count; ++k) times[k] = T * (k + 1) / count;
    return times;
}

std::pair<double, double> relative_errors(const Trajectory& u, const Trajectory& v) {
    if (u.fields.size() != v.fields.size()) throw ConfigError("trajectories have different snapshot counts");
    double sup = 0.0, last = 0.0;
    for (std::size_t k = 1; k < u.fields.size(); ++k) {
        BoxField diff = u.fields[k];
        for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= v.fields[k].values[i];
        last = diff.norm() / v.fields[k].norm();
        sup = std::max(sup, last);
    }
    return {sup, last};
}

std::vector<SweepResult> convergence_sweep(const Kernel& kernel, const Medium& medium, const SweepConfig& config,
                                           const std::vector<Eigen::MatrixXd>& candidates, const Corrector* chi,
                                           const SecondCorrector* kappa) {
    if (candidates.empty()) throw ConfigError("convergence sweep needs at least one effective matrix");
    if (config.residual && !chi) throw ConfigError("residual evaluation needs the corrector");
    const int d = kernel.dimension();
    std::vector<SweepResult> results(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        results[c].a_eff = candidates[c];
        results[c].rows.resize(config.eps.size());
    }
    parallel_for(config.eps.size(), config.threads, [&](std::size_t e) {
        const double eps = config.eps[e];
        const BoxDomain domain = config.Nx > 0 ? BoxDomain{d, config.L, config.Nx}
                                               : BoxDomain::resolving(d, config.L, eps, config.points_per_cell);
        EpsOperator op(kernel, medium, domain, eps);
        const BoxField u0 = gaussian_field(domain, config.u0_sigma);
        const auto start = std::chrono::steady_clock::now();
        const Trajectory traj = evolve_eps(op, u0, nullptr, config.T, {config.snapshots, 0.0});
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& f : traj.fields)
            if (f.boundary_fraction() > config.boundary_tolerance)
                throw ConfigError("solution mass reaches the box boundary (fraction " +
                                  std::to_string(f.boundary_fraction()) + "); enlarge L");
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            HomogenizedSolution hom(candidates[c], u0);
            Trajectory ref;
            ref.times = traj.times;
            for (double t : traj.times) ref.fields.push_back(t == 0.0 ? u0 : hom.at(t));
            const auto [sup, last] = relative_errors(traj, ref);
            SweepRow row{eps, sup, last, std::numeric_limits<double>::quiet_NaN(), seconds};
            if (config.residual) {
                Ansatz ansatz(*chi, kappa, hom, domain, eps);
                const auto res = residual_norm(op, ansatz, residual_times(config.T, config.snapshots, config.residual_samples),
                                               traj.dt);
                row.residual = *std::max_element(res.begin(), res.end());
            }
            results[c].rows[e] = row;
        }
    });
    return results;
}

}  // namespace perihom
