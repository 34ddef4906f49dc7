#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "perihom/cell_solver.hpp"
#include "perihom/fft.hpp"

namespace perihom {

/// Periodic box [-L, L)^d with Nx nodes per axis standing in for R^d.
struct BoxDomain {
    int dimension = 1;
    double L = 10.0;
    int Nx = 1280;

    double h() const noexcept { return 2.0 * L / Nx; }
    std::size_t nodes() const;
    double coordinate(long index) const { return -L + static_cast<double>(index) * h(); }
    /// eps / h after checking that 2L/eps and eps/h are integers and eps/h >= 8.
    int points_per_cell(double eps) const;
    /// Lattice in cell units: node i sits at x_i / eps.
    Lattice lattice(double eps) const;
    /// Box whose grid resolves every cell of size eps with `points_per_cell` nodes.
    static BoxDomain resolving(int dimension, double L, double eps, int points_per_cell);
};

struct BoxField {
    BoxDomain domain;
    std::vector<double> values;

    BoxField() = default;
    explicit BoxField(const BoxDomain& d, double fill = 0.0) : domain(d), values(d.nodes(), fill) {}

    /// L2 norm with weights h^d.
    double norm() const;
    double integral() const;
    /// Share of the squared L2 norm carried by |x| > 0.9 L.
    double boundary_fraction() const;
};

/// exp(-|x - center|^2 / (2 sigma^2)).
BoxField gaussian_field(const BoxDomain& domain, double sigma, std::span<const double> center = {});

/// A^eps(t) u = eps^-2 sum_k w_k mu(x/eps, x/eps + z_k, t/eps^2) (u(x + eps z_k) - u(x)) on the box.
class EpsOperator {
public:
    EpsOperator(const Kernel& kernel, const Medium& medium, BoxDomain domain, double eps);

    double epsilon() const noexcept { return eps_; }
    const BoxDomain& domain() const noexcept { return domain_; }
    int points_per_cell() const noexcept { return per_cell_; }
    /// Largest admissible explicit step 0.1 eps^2 / mu_plus.
    double stable_step() const;
    LatticeGenerator& generator() noexcept { return generator_; }

    void apply(double t, std::span<const double> u, std::span<double> out);

private:
    BoxDomain domain_;
    double eps_;
    int per_cell_;
    LatticeGenerator generator_;
    double cached_s_ = -1.0;
    MediumSlice cached_;
};

BoxField apply_eps_generator(const Kernel& kernel, const Medium& medium, double eps, double t, const BoxField& u);

using Forcing = std::function<void(double t, std::span<double> out)>;

struct EvolveOptions {
    int snapshots = 16;
    /// Requested step; 0 picks the largest stable step dividing T into a multiple of `snapshots`.
    double dt = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<BoxField> fields;
    double dt = 0.0;
    long steps = 0;
};

/// Step used by evolve_eps: the largest step not above the requested or
/// stable one that splits T into a multiple of `options.snapshots` steps.
double evolution_step(const EpsOperator& op, double T, EvolveOptions options = {});

/// RK4 for d_t u = A^eps(t) u + f(t), snapshots at k T / snapshots (k = 0..snapshots).
Trajectory evolve_eps(EpsOperator& op, const BoxField& u0, const Forcing& forcing, double T,
                      EvolveOptions options = {});

/// Exact spectral solution of d_t u = div(a_eff grad u) on the box. Not thread-safe.
class HomogenizedSolution {
public:
    HomogenizedSolution(Eigen::MatrixXd a_eff, const BoxField& u0);

    const Eigen::MatrixXd& a_eff() const noexcept { return a_eff_; }
    BoxField at(double t);
    BoxField gradient(double t, int axis);
    BoxField hessian(double t, int i, int j);

private:
    BoxField transform(double t, int i, int j);

    Eigen::MatrixXd a_eff_;
    BoxDomain domain_;
    RealFft fft_;
    std::vector<Complex> u0_hat_;
    std::vector<std::vector<double>> wavenumber_;  // per spectral index, per axis
    std::vector<bool> nyquist_;                    // per spectral index, per axis flattened
};

Trajectory evolve_homogenized(const Eigen::MatrixXd& a_eff, const BoxField& u0, double T, int snapshots = 16);

/// Trigonometric interpolation of a cell field in s.
class CellSampler {
public:
    explicit CellSampler(const SpaceTimeField& field);
    const TorusGrid& grid() const noexcept { return grid_; }
    /// Values at the cell nodes at time s.
    std::vector<double> at_time(double s) const;

private:
    TorusGrid grid_;
    std::vector<Complex> spectra_;  // per node, Nt/2 + 1 coefficients
};

/// Maps cell-node values to the box by spatial trigonometric interpolation
/// at x / eps and periodic tiling.
class CellToBox {
public:
    CellToBox(const TorusGrid& grid, const BoxDomain& domain, double eps);
    void tile(std::span<const double> cell_values, std::span<double> box_out) const;

private:
    TorusGrid grid_;
    BoxDomain domain_;
    int per_cell_;
    std::vector<double> interp_;  // per_cell x N
    std::vector<std::size_t> pattern_index_;
};

/// w = u0 - eps chi(x/eps, t/eps^2) . grad u0 + eps^2 kappa(x/eps, t/eps^2) : grad grad u0.
/// chi solves d_s chi - A chi = q, hence the minus sign in the first-order term.
class Ansatz {
public:
    Ansatz(const Corrector& chi, const SecondCorrector* kappa, HomogenizedSolution& u0, const BoxDomain& domain,
           double eps);
    BoxField at(double t);

private:
    HomogenizedSolution& u0_;
    BoxDomain domain_;
    double eps_;
    int d_;
    std::vector<CellSampler> chi_;
    std::vector<CellSampler> kappa_;
    CellToBox to_box_;
};

/// ||(w(t+delta) - w(t-delta)) / (2 delta) - A^eps(t) w(t)|| at each time.
std::vector<double> residual_norm(EpsOperator& op, Ansatz& ansatz, const std::vector<double>& times, double delta);

/// T k / (snapshots * per_snapshot) for k = 1 .. snapshots * per_snapshot.
std::vector<double> residual_times(double T, int snapshots, int per_snapshot);

struct SweepConfig {
    double L = 10.0;
    /// Fixed box resolution; 0 resolves each eps with `points_per_cell` nodes per cell.
    int Nx = 0;
    int points_per_cell = 0;
    std::vector<double> eps{0.4, 0.2, 0.1};
    double T = 0.5;
    double u0_sigma = 1.0;
    int snapshots = 16;
    int threads = 1;
    bool residual = true;
    /// Residual times per snapshot interval; the residual is the sup over all of them.
    int residual_samples = 8;
    double boundary_tolerance = 1e-8;
};

struct SweepRow {
    double epsilon = 0.0;
    double sup_error = 0.0;
    double final_error = 0.0;
    double residual = 0.0;
    double seconds = 0.0;
};

struct SweepResult {
    Eigen::MatrixXd a_eff;
    std::vector<SweepRow> rows;
};

/// max over snapshots k >= 1 of ||u(t_k) - v(t_k)|| / ||v(t_k)||, and the value at the last snapshot.
std::pair<double, double> relative_errors(const Trajectory& u, const Trajectory& v);

/// Runs the eps-scale evolution once per eps and compares it with the
/// homogenized solution for every candidate matrix. Correctors are needed
/// only when `config.residual` is set.
std::vector<SweepResult> convergence_sweep(const Kernel& kernel, const Medium& medium, const SweepConfig& config,
                                           const std::vector<Eigen::MatrixXd>& candidates,
                                           const Corrector* chi = nullptr, const SecondCorrector* kappa = nullptr);

}  // namespace perihom
