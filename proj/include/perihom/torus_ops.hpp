#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "perihom/kernel.hpp"
#include "perihom/lattice.hpp"
#include "perihom/medium.hpp"

namespace perihom {

/// Uniform discretization of the space-time cell T^d x T^1.
struct TorusGrid {
    int dimension = 1;
    int N = 64;
    int Nt = 64;

    double h() const noexcept { return 1.0 / N; }
    double ds() const noexcept { return 1.0 / Nt; }
    std::size_t nodes() const;
    std::size_t size() const { return nodes() * static_cast<std::size_t>(Nt); }
    Lattice lattice() const { return Lattice{dimension, N, N, 0}; }
    /// Throws ConfigError unless N >= 8 is even and Nt >= 8.
    void validate() const;
    bool operator==(const TorusGrid&) const = default;
};

/// A function of xi on the spatial cell at fixed s.
struct TorusField {
    TorusGrid grid;
    std::vector<double> values;

    TorusField() = default;
    explicit TorusField(const TorusGrid& g, double fill = 0.0) : grid(g), values(g.nodes(), fill) {}

    double mean() const;
    /// L2(T^d) norm with weights h^d.
    double norm() const;
};

/// L2(T^d) inner product.
double inner(const TorusField& u, const TorusField& v);

/// A function on T^{d+1}; value at (node i, time n) is stored at n * nodes + i.
struct SpaceTimeField {
    TorusGrid grid;
    std::vector<double> values;

    SpaceTimeField() = default;
    explicit SpaceTimeField(const TorusGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    std::span<double> slice(int n) { return {values.data() + n * grid.nodes(), grid.nodes()}; }
    std::span<const double> slice(int n) const { return {values.data() + n * grid.nodes(), grid.nodes()}; }
    TorusField at(int n) const;
    double mean() const;
    /// L2(T^{d+1}) norm with weights h^d ds.
    double norm() const;
    /// max over n of the L2(T^d) norm of slice n.
    double sup_norm_in_time() const;
};

/// Generator on the unit cell with the kernel's default truncation radius.
LatticeGenerator make_cell_generator(const Kernel& kernel, const Medium& medium, const TorusGrid& grid);

/// (A(s) v)(xi) = sum over lattice offsets of w_k mu(xi, xi + z_k, s) (v(xi + z_k) - v(xi)).
TorusField apply_generator(const Kernel& kernel, const Medium& medium, double s, const TorusField& v);

/// G(xi, s) = sum_k w_k mu(xi, xi + z_k, s). Throws QuadratureDiagnostic if a
/// value leaves [mu_minus - tol, mu_plus + tol].
SpaceTimeField compute_G(const Kernel& kernel, const Medium& medium, const TorusGrid& grid,
                         double tolerance = 1e-10);

/// (<A(s)u, v>, <u, A(s)v>) in L2(T^d).
std::pair<double, double> generator_matrix_symmetry_probe(const Kernel& kernel, const Medium& medium, double s,
                                                          const TorusField& u, const TorusField& v);

}  // namespace perihom
