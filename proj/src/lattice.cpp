#include "perihom/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "perihom/errors.hpp"

namespace perihom {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

long positive_mod(long a, long n) { return ((a % n) + n) % n; }
}  // namespace

std::size_t Lattice::nodes() const {
    std::size_t n = 1;
    for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(extent);
    return n;
}

double Lattice::coordinate(long axis_index) const {
    return static_cast<double>(positive_mod(axis_index + origin_index, per_unit)) / per_unit;
}

void Lattice::coordinates(std::size_t node, std::span<double> out) const {
    for (int axis = dimension - 1; axis >= 0; --axis) {
        out[axis] = coordinate(static_cast<long>(node % extent));
        node /= extent;
    }
}

std::size_t Lattice::shift(std::size_t node, std::span<const int> offset) const {
    std::size_t result = 0, stride = 1;
    for (int axis = dimension - 1; axis >= 0; --axis) {
        const long c = static_cast<long>(node % extent);
        node /= extent;
        result += static_cast<std::size_t>(positive_mod(c + offset[axis], extent)) * stride;
        stride *= static_cast<std::size_t>(extent);
    }
    return result;
}

DiscreteKernel::DiscreteKernel(const Kernel& kernel, int per_unit, double radius)
    : dimension_(kernel.dimension()), per_unit_(per_unit), radius_(radius) {
    if (per_unit < 1) throw ConfigError("discrete kernel needs per_unit >= 1");
    if (!(radius > 0.0)) throw ConfigError("discrete kernel needs a positive truncation radius");
    const int d = dimension_;
    const double h = 1.0 / per_unit;
    const double hd = std::pow(h, d);
    const double support = kernel.support_radius();
    const int reach = static_cast<int>(std::floor(radius * per_unit * (1.0 + 1e-12)));

    std::vector<int> o(d, -reach);
    std::vector<double> r2s;
    while (true) {
        long sq = 0;
        for (int v : o) sq += static_cast<long>(v) * v;
        const double r = std::sqrt(static_cast<double>(sq)) * h;
        if (r <= radius * (1.0 + 1e-12)) {
            double w = kernel.profile(r) * hd;
            if (std::isfinite(support) && std::abs(r - support) <= 1e-12 * support) w *= 0.5;
            if (w > 0.0) {
                offsets_.insert(offsets_.end(), o.begin(), o.end());
                weights_.push_back(w);
                r2s.push_back(r * r);
            }
        }
        int axis = 0;
        while (axis < d && ++o[axis] > reach) {
            o[axis] = -reach;
            ++axis;
        }
        if (axis == d) break;
    }
    if (weights_.size() < 3)
        throw ConfigError("kernel support is under-resolved by the lattice (fewer than 3 nodes)");

    double s0 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        s0 += weights_[k];
        s2 += weights_[k] * r2s[k];
        s4 += weights_[k] * r2s[k] * r2s[k];
    }
    const double m2 = kernel.second_moment();
    const double det = s0 * s4 - s2 * s2;
    double alpha = 1.0 / s0, beta = 0.0;
    if (det > 1e-14 * s0 * s4) {
        alpha = (s4 - s2 * m2) / det;
        beta = (s0 * m2 - s2) / det;
    }
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double factor = alpha + beta * r2s[k];
        if (!(factor > 0.5 && factor < 2.0))
            throw ConfigError("kernel is under-resolved by the lattice: moment correction factor " +
                              std::to_string(factor));
        weights_[k] *= factor;
    }
}

double DiscreteKernel::mass() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

double DiscreteKernel::second_moment() const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        double r2 = 0.0;
        for (int a = 0; a < dimension_; ++a) r2 += displacement(k, a) * displacement(k, a);
        s += weights_[k] * r2;
    }
    return s;
}

std::vector<double> DiscreteKernel::folded(int extent, Moment moment) const {
    const int d = dimension_;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(extent);
    std::vector<double> out(total, 0.0);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        std::size_t slot = 0;
        for (int a = 0; a < d; ++a)
            slot = slot * extent + static_cast<std::size_t>(positive_mod(offsets_[k * d + a], extent));
        double w = weights_[k];
        if (moment.i >= 0) w *= displacement(k, moment.i);
        if (moment.j >= 0) w *= displacement(k, moment.j);
        out[slot] += w;
    }
    return out;
}

LatticeGenerator::LatticeGenerator(const Kernel& kernel, const Medium& medium, Lattice lattice,
                                   double truncation_radius)
    : kernel_(kernel),
      medium_(medium),
      lattice_(lattice),
      discrete_(kernel, lattice.per_unit, truncation_radius),
      nodes_(lattice.nodes()),
      correlator_(lattice.dimension, lattice.extent),
      scratch_a_(nodes_),
      scratch_b_(nodes_) {
    const int d = lattice_.dimension;
    if (kernel.dimension() != d || medium.dimension() != d)
        throw ConfigError("kernel, medium and lattice dimensions differ");

    if (medium_.is_separable()) {
        std::vector<double> x(d);
        for (const auto& term : medium_.terms()) {
            TermTable table;
            table.static_factor = !term.factor.depends_on(d);
            for (const auto& wave : term.factor.waves()) {
                WaveTable wt;
                wt.amplitude = wave.amplitude;
                wt.time_frequency = wave.k[d];
                wt.cos_part.resize(nodes_);
                wt.sin_part.resize(nodes_);
                for (std::size_t p = 0; p < nodes_; ++p) {
                    lattice_.coordinates(p, x);
                    double arg = 0.0;
                    for (int a = 0; a < d; ++a) arg += wave.k[a] * x[a];
                    const double phase = two_pi * arg + wave.phase;
                    wt.cos_part[p] = std::cos(phase);
                    wt.sin_part[p] = std::sin(phase);
                }
                table.waves.push_back(std::move(wt));
            }
            terms_.push_back(std::move(table));
        }
        for (auto& table : terms_) {
            if (!table.static_factor) continue;
            auto lambda = std::make_shared<std::vector<double>>(nodes_, 0.0);
            for (const auto& w : table.waves)
                for (std::size_t p = 0; p < nodes_; ++p) (*lambda)[p] += w.amplitude * w.cos_part[p];
            auto g = std::make_shared<std::vector<double>>(nodes_);
            correlate(Moment{}, *lambda, *g);
            table.lambda = std::move(lambda);
            table.lambda_gain = std::move(g);
        }
    } else {
        std::unordered_map<std::size_t, std::size_t> seen;
        offset_slot_.resize(discrete_.size());
        for (std::size_t k = 0; k < discrete_.size(); ++k) {
            const auto o = discrete_.offset(k);
            const std::size_t slot = folded_slot(o);
            auto it = seen.find(slot);
            if (it == seen.end()) {
                it = seen.emplace(slot, distinct_offsets_.size()).first;
                distinct_offsets_.emplace_back(o.begin(), o.end());
            }
            offset_slot_[k] = it->second;
        }
    }
}

std::size_t LatticeGenerator::folded_slot(std::span<const int> offset) const {
    std::size_t slot = 0;
    for (int a = 0; a < lattice_.dimension; ++a)
        slot = slot * lattice_.extent + static_cast<std::size_t>(positive_mod(offset[a], lattice_.extent));
    return slot;
}

const std::vector<Complex>& LatticeGenerator::spectrum(Moment moment) {
    auto it = spectra_.find(moment);
    if (it != spectra_.end()) return it->second;
    auto& folded = folded_[moment];
    folded = discrete_.folded(lattice_.extent, moment);
    return spectra_.emplace(moment, correlator_.spectrum(folded)).first->second;
}

void LatticeGenerator::correlate(Moment moment, std::span<const double> f, std::span<double> out) {
    const auto& spec = spectrum(moment);
    correlator_.apply(spec, f, out);
}

MediumSlice LatticeGenerator::slice(double s) {
    MediumSlice slice;
    slice.s = s - std::floor(s);
    const int d = lattice_.dimension;
    if (medium_.is_separable()) {
        const auto& terms = medium_.terms();
        for (std::size_t m = 0; m < terms.size(); ++m) {
            const auto& term = terms[m];
            const double tau = term.time_factor.empty() ? 1.0
                                                        : term.time_factor(std::span<const double>(&slice.s, 1));
            slice.scale.push_back(term.coefficient * tau);
            const auto& table = terms_[m];
            if (table.static_factor) {
                slice.lambda.push_back(table.lambda);
                slice.lambda_gain.push_back(table.lambda_gain);
                continue;
            }
            auto lambda = std::make_shared<std::vector<double>>(nodes_, 0.0);
            for (const auto& w : table.waves) {
                const double c = w.amplitude * std::cos(two_pi * w.time_frequency * slice.s);
                const double sn = w.amplitude * std::sin(two_pi * w.time_frequency * slice.s);
                for (std::size_t p = 0; p < nodes_; ++p) (*lambda)[p] += c * w.cos_part[p] - sn * w.sin_part[p];
            }
            auto g = std::make_shared<std::vector<double>>(nodes_);
            correlate(Moment{}, *lambda, *g);
            slice.lambda.push_back(std::move(lambda));
            slice.lambda_gain.push_back(std::move(g));
        }
        return slice;
    }

    const std::size_t D = distinct_offsets_.size();
    slice.pairs.resize(nodes_ * D);
    std::vector<double> x(d), y(d);
    for (std::size_t p = 0; p < nodes_; ++p) {
        lattice_.coordinates(p, x);
        for (std::size_t q = 0; q < D; ++q) {
            lattice_.coordinates(lattice_.shift(p, distinct_offsets_[q]), y);
            slice.pairs[p * D + q] = medium_.evaluate(x, y, slice.s);
        }
    }
    return slice;
}

void LatticeGenerator::apply(const MediumSlice& slice, std::span<const double> v, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (medium_.is_separable()) {
        for (std::size_t m = 0; m < slice.scale.size(); ++m) {
            const auto& lam = *slice.lambda[m];
            const auto& g = *slice.lambda_gain[m];
            const double c = slice.scale[m];
            if (c == 0.0) continue;
            for (std::size_t p = 0; p < nodes_; ++p) scratch_a_[p] = lam[p] * v[p];
            correlate(Moment{}, scratch_a_, scratch_b_);
            for (std::size_t p = 0; p < nodes_; ++p) out[p] += c * lam[p] * (scratch_b_[p] - v[p] * g[p]);
        }
        return;
    }
    const auto& folded = folded_.count(Moment{}) ? folded_.at(Moment{}) : (spectrum(Moment{}), folded_.at(Moment{}));
    const std::size_t D = distinct_offsets_.size();
    for (std::size_t p = 0; p < nodes_; ++p) {
        double acc = 0.0;
        for (std::size_t q = 0; q < D; ++q) {
            const std::size_t nb = lattice_.shift(p, distinct_offsets_[q]);
            acc += folded[folded_slot(distinct_offsets_[q])] * slice.pairs[p * D + q] * (v[nb] - v[p]);
        }
        out[p] = acc;
    }
}

void LatticeGenerator::weighted_sum(const MediumSlice& slice, Moment moment, std::span<const double> f,
                                    std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (medium_.is_separable()) {
        for (std::size_t m = 0; m < slice.scale.size(); ++m) {
            const auto& lam = *slice.lambda[m];
            const double c = slice.scale[m];
            if (c == 0.0) continue;
            for (std::size_t p = 0; p < nodes_; ++p) scratch_a_[p] = lam[p] * f[p];
            correlate(moment, scratch_a_, scratch_b_);
            for (std::size_t p = 0; p < nodes_; ++p) out[p] += c * lam[p] * scratch_b_[p];
        }
        return;
    }
    spectrum(moment);
    const auto& folded = folded_.at(moment);
    const std::size_t D = distinct_offsets_.size();
    for (std::size_t p = 0; p < nodes_; ++p) {
        double acc = 0.0;
        for (std::size_t q = 0; q < D; ++q) {
            const std::size_t nb = lattice_.shift(p, distinct_offsets_[q]);
            acc += folded[folded_slot(distinct_offsets_[q])] * slice.pairs[p * D + q] * f[nb];
        }
        out[p] = acc;
    }
}

void LatticeGenerator::gain(const MediumSlice& slice, std::span<double> out) {
    if (medium_.is_separable()) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t m = 0; m < slice.scale.size(); ++m) {
            const auto& lam = *slice.lambda[m];
            const auto& g = *slice.lambda_gain[m];
            for (std::size_t p = 0; p < nodes_; ++p) out[p] += slice.scale[m] * lam[p] * g[p];
        }
        return;
    }
    std::vector<double> ones(nodes_, 1.0);
    weighted_sum(slice, Moment{}, ones, out);
}

double LatticeGenerator::pair(const MediumSlice& slice, std::size_t node, std::span<const int> offset) const {
    const std::size_t nb = lattice_.shift(node, offset);
    if (medium_.is_separable()) {
        double mu = 0.0;
        for (std::size_t m = 0; m < slice.scale.size(); ++m)
            mu += slice.scale[m] * (*slice.lambda[m])[node] * (*slice.lambda[m])[nb];
        return mu;
    }
    const int d = lattice_.dimension;
    std::vector<double> x(d), y(d);
    lattice_.coordinates(node, x);
    lattice_.coordinates(nb, y);
    return medium_.evaluate(x, y, slice.s);
}

}  // namespace perihom
