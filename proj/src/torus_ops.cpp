#include "perihom/torus_ops.hpp"

#include <cmath>
#include <sstream>

#include "perihom/errors.hpp"

namespace perihom {

std::size_t TorusGrid::nodes() const {
    std::size_t n = 1;
    for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(N);
    return n;
}

void TorusGrid::validate() const {
    if (dimension < 1) throw ConfigError("torus grid dimension must be positive");
    if (N < 8 || N % 2 != 0) throw ConfigError("torus grid needs an even N >= 8, got " + std::to_string(N));
    if (Nt < 8) throw ConfigError("torus grid needs Nt >= 8, got " + std::to_string(Nt));
}

double TorusField::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double TorusField::norm() const { return std::sqrt(inner(*this, *this)); }

double inner(const TorusField& u, const TorusField& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * v.values[i];
    return s / static_cast<double>(u.values.size());
}

TorusField SpaceTimeField::at(int n) const {
    TorusField f(grid);
    auto src = slice(n);
    std::copy(src.begin(), src.end(), f.values.begin());
    return f;
}

double SpaceTimeField::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double SpaceTimeField::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s / static_cast<double>(values.size()));
}

double SpaceTimeField::sup_norm_in_time() const {
    double best = 0.0;
    for (int n = 0; n < grid.Nt; ++n) best = std::max(best, at(n).norm());
    return best;
}

LatticeGenerator make_cell_generator(const Kernel& kernel, const Medium& medium, const TorusGrid& grid) {
    grid.validate();
    if (kernel.dimension() != grid.dimension || medium.dimension() != grid.dimension)
        throw ConfigError("kernel, medium and grid dimensions differ");
    return LatticeGenerator(kernel, medium, grid.lattice(), kernel.truncation_radius());
}

TorusField apply_generator(const Kernel& kernel, const Medium& medium, double s, const TorusField& v) {
    auto gen = make_cell_generator(kernel, medium, v.grid);
    TorusField out(v.grid);
    gen.apply(gen.slice(s), v.values, out.values);
    return out;
}

SpaceTimeField compute_G(const Kernel& kernel, const Medium& medium, const TorusGrid& grid, double tolerance) {
    auto gen = make_cell_generator(kernel, medium, grid);
    SpaceTimeField G(grid);
    for (int n = 0; n < grid.Nt; ++n) {
        auto out = G.slice(n);
        gen.gain(gen.slice(n * grid.ds()), out);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i] < medium.mu_minus() - tolerance || out[i] > medium.mu_plus() + tolerance) {
                std::ostringstream msg;
                msg << "G = " << out[i] << " at node " << i << ", s = " << n * grid.ds() << " outside ["
                    << medium.mu_minus() << ", " << medium.mu_plus() << "]";
                throw QuadratureDiagnostic(msg.str());
            }
        }
    }
    return G;
}

std::pair<double, double> generator_matrix_symmetry_probe(const Kernel& kernel, const Medium& medium, double s,
                                                          const TorusField& u, const TorusField& v) {
    auto gen = make_cell_generator(kernel, medium, u.grid);
    const auto slice = gen.slice(s);
    TorusField Au(u.grid), Av(v.grid);
    gen.apply(slice, u.values, Au.values);
    gen.apply(slice, v.values, Av.values);
    return {inner(Au, v), inner(u, Av)};
}

}  // namespace perihom
