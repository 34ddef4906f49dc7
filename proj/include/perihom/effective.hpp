#pragma once

#include <vector>

#include <Eigen/Dense>

#include "perihom/cell_solver.hpp"

namespace perihom {

struct EffectiveMatrix {
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd a_eff;
    double min_eigenvalue = 0.0;
    int N = 0;
    int Nt = 0;
    double truncation_radius = 0.0;
};

/// q_j(xi, s) = -sum_k w_k mu(xi, xi + z_k, s) z_{k,j}. Throws
/// QuadratureDiagnostic if a spatial mean exceeds 1e-10 * max(1, ||q_j||).
std::vector<SpaceTimeField> rhs_q(CellProblem& problem);

/// a_hat_ij = mean over T^{d+1} of sum_k w_k mu(xi, xi + z_k, s) [z_i z_j / 2 - z_i chi_j(xi + z_k, s)].
Eigen::MatrixXd assemble_hat(CellProblem& problem, const Corrector& chi);

/// a_eff = (a_hat + a_hat^T) / 2; throws PositivityViolation unless a_eff is
/// positive definite.
EffectiveMatrix symmetrize(const Eigen::MatrixXd& a_hat);

/// Half the space-time mean of sum_k w_k mu (z_k . zeta - (chi_zeta(xi + z_k) - chi_zeta(xi)))^2,
/// with chi_zeta = zeta . chi; equals a_eff zeta . zeta for a converged corrector.
double variational_value(CellProblem& problem, const Corrector& chi, const Eigen::VectorXd& zeta);

/// solve_corrector, assemble_hat and symmetrize in one call, with grid metadata filled in.
EffectiveMatrix compute_effective(CellProblem& problem, Corrector* corrector_out = nullptr);

}  // namespace perihom
