#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "perihom/fft.hpp"
#include "perihom/kernel.hpp"
#include "perihom/medium.hpp"

namespace perihom {

/// Periodic lattice with `extent` nodes per axis and `per_unit` nodes per
/// unit cell. Node i sits at cell coordinate ((i + origin_index) mod
/// per_unit) / per_unit on every axis; the unit cell uses extent == per_unit,
/// an epsilon-scale box uses extent = Nx and per_unit = epsilon / h_x.
struct Lattice {
    int dimension = 1;
    int extent = 8;
    int per_unit = 8;
    long origin_index = 0;

    std::size_t nodes() const;
    double coordinate(long axis_index) const;
    /// Cell coordinates of a flat node index (row-major).
    void coordinates(std::size_t node, std::span<double> out) const;
    /// Flat index of node + offset (per-axis offsets, periodic).
    std::size_t shift(std::size_t node, std::span<const int> offset) const;
};

/// Selects which displacement moment a folded kernel carries:
/// w, w z_i or w z_i z_j.
struct Moment {
    int i = -1;
    int j = -1;
    auto operator<=>(const Moment&) const = default;
};

/// Quadrature of the kernel on the lattice (1/per_unit) Z^d truncated at a
/// radius. Nodes exactly on the edge of a compact support get half weight,
/// then the weights are rescaled by (alpha + beta |z|^2) so the discrete mass
/// is exactly one and the discrete second moment matches the analytic one.
class DiscreteKernel {
public:
    DiscreteKernel(const Kernel& kernel, int per_unit, double radius);

    int dimension() const noexcept { return dimension_; }
    int per_unit() const noexcept { return per_unit_; }
    double radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const int> offset(std::size_t k) const {
        return {offsets_.data() + k * dimension_, static_cast<std::size_t>(dimension_)};
    }
    double displacement(std::size_t k, int axis) const {
        return static_cast<double>(offsets_[k * dimension_ + axis]) / per_unit_;
    }
    double weight(std::size_t k) const noexcept { return weights_[k]; }
    double mass() const;
    double second_moment() const;

    /// Kernel folded onto a periodic lattice of `extent` nodes per axis,
    /// carrying the requested moment.
    std::vector<double> folded(int extent, Moment moment) const;

private:
    int dimension_;
    int per_unit_;
    double radius_;
    std::vector<int> offsets_;
    std::vector<double> weights_;
};

/// Medium restricted to the lattice at one time s.
/// For separable media: mu(x_p, x_q) = sum_m scale[m] lambda_m[p] lambda_m[q].
struct MediumSlice {
    double s = 0.0;
    std::vector<double> scale;
    std::vector<std::shared_ptr<const std::vector<double>>> lambda;
    /// correlation of the folded kernel with lambda_m, i.e. the per-term gain.
    std::vector<std::shared_ptr<const std::vector<double>>> lambda_gain;
    /// Tabulated media: mu at (node, distinct folded offset), row-major.
    std::vector<double> pairs;
};

/// Discrete unit-scale generator
///   (A(s) v)(x_p) = sum_k w_k mu(x_p, x_p + z_k, s) (v(x_p + z_k) - v(x_p))
/// on a periodic lattice, together with the moment-weighted sums used by the
/// cell problems. Separable media use FFT correlations (cost
/// O(T N^d log N)); tabulated media fall back to direct sums over the
/// distinct folded offsets. Not thread-safe: each thread needs its own copy.
class LatticeGenerator {
public:
    LatticeGenerator(const Kernel& kernel, const Medium& medium, Lattice lattice, double truncation_radius);

    const Lattice& lattice() const noexcept { return lattice_; }
    const DiscreteKernel& discrete_kernel() const noexcept { return discrete_; }
    const Medium& medium() const noexcept { return medium_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    std::size_t nodes() const noexcept { return nodes_; }

    MediumSlice slice(double s);

    /// out = A(s) v.
    void apply(const MediumSlice& slice, std::span<const double> v, std::span<double> out);
    /// out(x) = sum_k w_k m(z_k) mu(x, x + z_k, s) f(x + z_k), m the moment factor.
    void weighted_sum(const MediumSlice& slice, Moment moment, std::span<const double> f,
                      std::span<double> out);
    /// G(x, s) = sum_k w_k mu(x, x + z_k, s).
    void gain(const MediumSlice& slice, std::span<double> out);
    /// mu between node p and node p + offset.
    double pair(const MediumSlice& slice, std::size_t node, std::span<const int> offset) const;
    /// Plain correlation with the folded kernel (mu ignored).
    void correlate(Moment moment, std::span<const double> f, std::span<double> out);

private:
    struct WaveTable {
        std::vector<double> cos_part;
        std::vector<double> sin_part;
        double amplitude;
        int time_frequency;
    };
    struct TermTable {
        std::vector<WaveTable> waves;
        bool static_factor = true;
        std::shared_ptr<const std::vector<double>> lambda;
        std::shared_ptr<const std::vector<double>> lambda_gain;
    };

    const std::vector<Complex>& spectrum(Moment moment);
    std::size_t folded_slot(std::span<const int> offset) const;

    Kernel kernel_;
    Medium medium_;
    Lattice lattice_;
    DiscreteKernel discrete_;
    std::size_t nodes_;
    Correlator correlator_;
    std::map<Moment, std::vector<Complex>> spectra_;
    std::map<Moment, std::vector<double>> folded_;
    std::vector<TermTable> terms_;
    // Tabulated path: distinct folded offsets and their per-axis representative.
    std::vector<std::vector<int>> distinct_offsets_;
    std::vector<std::size_t> offset_slot_;
    std::vector<double> scratch_a_;
    std::vector<double> scratch_b_;
};

}  // namespace perihom
