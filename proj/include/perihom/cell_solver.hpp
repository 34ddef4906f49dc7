#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "perihom/torus_ops.hpp"

namespace perihom {

struct CellOptions {
    /// Fixed-point stopping tolerance on ||nu_{k+1} - nu_k||, scaled by max(1, ||phi||).
    double tolerance = 1e-11;
    int max_iterations = 10000;
    /// Compatibility tolerance, scaled by max(1, ||theta||).
    double compatibility_tolerance = 1e-10;
    /// Switch to GMRES once the observed contraction factor exceeds this.
    double krylov_threshold = 0.9;
    bool enable_krylov = true;
    bool force_krylov = false;
    int krylov_restart = 30;
};

struct PeriodicSolveReport {
    int iterations = 0;
    /// ||P S nu + phi - nu|| at the returned nu.
    double residual = 0.0;
    double compatibility_defect = 0.0;
    /// Space-time mean of the solution before normalization.
    double solution_mean = 0.0;
    /// Last observed ratio of successive fixed-point increments.
    double contraction = 0.0;
    std::string method = "fixed-point";
};

/// First corrector chi_j, j = 0..d-1, solving d_s chi - A chi = q_j with zero space-time mean.
struct Corrector {
    std::vector<SpaceTimeField> chi;
    bool normalized = true;
    std::vector<PeriodicSolveReport> reports;
};

/// Second corrector kappa_ij stored row-major at i * d + j.
struct SecondCorrector {
    std::vector<SpaceTimeField> kappa;
    std::vector<PeriodicSolveReport> reports;
    int dimension = 1;
    const SpaceTimeField& at(int i, int j) const { return kappa[i * dimension + j]; }
};

/// Time-periodic cell problem d_s beta - A(s) beta = theta on T^{d+1},
/// discretized with classical RK4 in s on the grid's Nt steps. The medium is
/// sampled at every half step once, at construction.
class CellProblem {
public:
    CellProblem(const Kernel& kernel, const Medium& medium, TorusGrid grid, CellOptions options = {});

    const TorusGrid& grid() const noexcept { return grid_; }
    const CellOptions& options() const noexcept { return options_; }
    const Kernel& kernel() const noexcept { return generator_.kernel(); }
    const Medium& medium() const noexcept { return generator_.medium(); }
    LatticeGenerator& generator() noexcept { return generator_; }
    /// Medium slice at s = k / (2 Nt), k taken modulo 2 Nt.
    const MediumSlice& half_slice(int k) const;

    /// out = A(k / (2 Nt)) v.
    void apply(int half_index, std::span<const double> v, std::span<double> out);

    /// RK4 trajectory of d_s gamma = A gamma + theta from step n0 to n1
    /// (n1 - n0 + 1 slices). theta may be null.
    std::vector<TorusField> propagate(const TorusField& nu, const SpaceTimeField* theta, int n0, int n1);
    /// Backward RK4 trajectory of -d_s g - A g = theta with g(s_{n1}) = nu;
    /// element k of the result is g at step n0 + k.
    std::vector<TorusField> propagate_adjoint(const TorusField& nu, const SpaceTimeField* theta, int n0, int n1);
    /// Period map S nu = gamma(1) for theta = 0.
    TorusField monodromy(const TorusField& nu);

    std::pair<SpaceTimeField, PeriodicSolveReport> solve_periodic(const SpaceTimeField& theta);

    /// ||beta_{n+1} - RK4(beta_n)|| / ds in L2(T^{d+1}), relative to ||theta||.
    double periodic_defect(const SpaceTimeField& beta, const SpaceTimeField& theta);
    /// Same defect for the backward (adjoint) scheme.
    double adjoint_defect(const SpaceTimeField& beta, const SpaceTimeField& theta);
    /// ||d_s beta - A beta - theta|| / ||theta|| with d_s taken spectrally in s.
    double spectral_residual(const SpaceTimeField& beta, const SpaceTimeField& theta);

private:
    struct Forcing {
        const SpaceTimeField* nodes = nullptr;
        std::vector<double> midpoints;
    };
    Forcing make_forcing(const SpaceTimeField* theta) const;
    void step_forward(int n, std::vector<double>& y, const Forcing& f);
    void step_backward(int n, std::vector<double>& y, const Forcing& f);
    std::vector<double> apply_period_map(const std::vector<double>& nu);

    TorusGrid grid_;
    CellOptions options_;
    LatticeGenerator generator_;
    std::vector<MediumSlice> slices_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Values of each node's time series at the midpoints (n + 1/2) ds by
/// trigonometric interpolation in s.
std::vector<double> time_midpoints(const SpaceTimeField& f);
/// Spectral derivative in s.
SpaceTimeField time_derivative(const SpaceTimeField& f);

Corrector solve_corrector(CellProblem& problem);

/// theta_ij(xi, s) = sum_k w_k mu(xi, xi - z_k, s) [z_i z_j / 2 + z_i chi_j(xi - z_k, s)] - a_hat_ij,
/// evaluated by a direct loop over kernel offsets.
std::vector<SpaceTimeField> second_corrector_rhs(CellProblem& problem, const Corrector& chi,
                                                 const Eigen::MatrixXd& a_hat);
SecondCorrector solve_second_corrector(CellProblem& problem, const Corrector& chi, const Eigen::MatrixXd& a_hat);

}  // namespace perihom
