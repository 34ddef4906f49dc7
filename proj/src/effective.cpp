#include "perihom/effective.hpp"

#include <cmath>
#include <sstream>

#include "perihom/errors.hpp"

namespace perihom {

std::vector<SpaceTimeField> rhs_q(CellProblem& problem) {
    const TorusGrid& grid = problem.grid();
    const int d = grid.dimension;
    auto& gen = problem.generator();
    std::vector<double> ones(grid.nodes(), 1.0);
    std::vector<SpaceTimeField> q(d, SpaceTimeField(grid));
    for (int j = 0; j < d; ++j) {
        for (int n = 0; n < grid.Nt; ++n) {
            auto out = q[j].slice(n);
            gen.weighted_sum(problem.half_slice(2 * n), Moment{j, -1}, ones, out);
            for (double& v : out) v = -v;
        }
        const double tol = 1e-10 * std::max(1.0, q[j].norm());
        for (int n = 0; n < grid.Nt; ++n) {
            double m = 0.0;
            for (double v : q[j].slice(n)) m += v;
            m /= static_cast<double>(grid.nodes());
            if (std::abs(m) > tol) {
                std::ostringstream msg;
                msg << "spatial mean of q_" << j << " at s = " << n * grid.ds() << " is " << m;
                throw QuadratureDiagnostic(msg.str());
            }
        }
    }
    return q;
}

Eigen::MatrixXd assemble_hat(CellProblem& problem, const Corrector& chi) {
    const TorusGrid& grid = problem.grid();
    const int d = grid.dimension;
    if (static_cast<int>(chi.chi.size()) != d) throw ConfigError("corrector has the wrong number of components");
    auto& gen = problem.generator();
    const std::size_t nodes = grid.nodes();
    std::vector<double> ones(nodes, 1.0), buf(nodes);
    Eigen::MatrixXd a_hat = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n < grid.Nt; ++n) {
        const MediumSlice& slice = problem.half_slice(2 * n);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double sum = 0.0;
                gen.weighted_sum(slice, Moment{std::min(i, j), std::max(i, j)}, ones, buf);
                for (double v : buf) sum += 0.5 * v;
                gen.weighted_sum(slice, Moment{i, -1}, chi.chi[j].slice(n), buf);
                for (double v : buf) sum -= v;
                a_hat(i, j) += sum;
            }
        }
    }
    return a_hat / static_cast<double>(grid.size());
}

EffectiveMatrix symmetrize(const Eigen::MatrixXd& a_hat) {
    EffectiveMatrix e;
    e.a_hat = a_hat;
    e.a_eff = 0.5 * (a_hat + a_hat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e.a_eff, Eigen::EigenvaluesOnly);
    e.min_eigenvalue = solver.eigenvalues().minCoeff();
    if (!(e.min_eigenvalue > 0.0)) throw PositivityViolation(e.min_eigenvalue);
    return e;
}

double variational_value(CellProblem& problem, const Corrector& chi, const Eigen::VectorXd& zeta) {
    const TorusGrid& grid = problem.grid();
    const int d = grid.dimension;
    auto& gen = problem.generator();
    const auto& dk = gen.discrete_kernel();
    const Lattice lattice = gen.lattice();
    const std::size_t nodes = grid.nodes();
    std::vector<double> chi_zeta(nodes);
    double total = 0.0;
    for (int n = 0; n < grid.Nt; ++n) {
        std::fill(chi_zeta.begin(), chi_zeta.end(), 0.0);
        for (int j = 0; j < d; ++j) {
            auto c = chi.chi[j].slice(n);
            for (std::size_t p = 0; p < nodes; ++p) chi_zeta[p] += zeta(j) * c[p];
        }
        const MediumSlice& slice = problem.half_slice(2 * n);
        for (std::size_t p = 0; p < nodes; ++p) {
            for (std::size_t k = 0; k < dk.size(); ++k) {
                const auto offset = dk.offset(k);
                const std::size_t q = lattice.shift(p, offset);
                double proj = 0.0;
                for (int a = 0; a < d; ++a) proj += dk.displacement(k, a) * zeta(a);
                const double jump = proj - (chi_zeta[q] - chi_zeta[p]);
                total += dk.weight(k) * gen.pair(slice, p, offset) * jump * jump;
            }
        }
    }
    return 0.5 * total / static_cast<double>(grid.size());
}

EffectiveMatrix compute_effective(CellProblem& problem, Corrector* corrector_out) {
    Corrector chi = solve_corrector(problem);
    EffectiveMatrix e = symmetrize(assemble_hat(problem, chi));
    e.N = problem.grid().N;
    e.Nt = problem.grid().Nt;
    e.truncation_radius = problem.generator().discrete_kernel().radius();
    if (corrector_out) *corrector_out = std::move(chi);
    return e;
}

}  // namespace perihom
