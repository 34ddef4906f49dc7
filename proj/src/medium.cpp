#include "perihom/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "perihom/errors.hpp"

namespace perihom {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double x) {
    const double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

std::string format_point(std::span<const double> xi, std::span<const double> eta, double s) {
    std::ostringstream os;
    os << "xi=(";
    for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
    os << ") eta=(";
    for (std::size_t i = 0; i < eta.size(); ++i) os << (i ? "," : "") << eta[i];
    os << ") s=" << s;
    return os.str();
}

// Sample coordinates of a density^d grid, row-major.
std::vector<std::vector<double>> sample_points(int d, int density) {
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) count *= static_cast<std::size_t>(density);
    std::vector<std::vector<double>> pts(count, std::vector<double>(d));
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t rest = p;
        for (int axis = d - 1; axis >= 0; --axis) {
            pts[p][axis] = static_cast<double>(rest % density) / density;
            rest /= density;
        }
    }
    return pts;
}

struct GridScan {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double defect = 0.0;
    std::size_t argmin_p = 0, argmin_q = 0, argmax_p = 0, argmax_q = 0, defect_p = 0, defect_q = 0;
    int argmin_n = 0, argmax_n = 0, defect_n = 0;
};

// Scan mu on the sample grid; separable media use per-time factor tables.
GridScan scan(const Medium& medium, int density) {
    const int d = medium.dimension();
    const auto pts = sample_points(d, density);
    const std::size_t P = pts.size();
    GridScan g;
    std::vector<double> mu(P * P);
    for (int n = 0; n < density; ++n) {
        const double s = static_cast<double>(n) / density;
        if (medium.is_separable()) {
            std::fill(mu.begin(), mu.end(), 0.0);
            std::vector<double> arg(d + 1);
            std::vector<double> lam(P);
            for (const auto& term : medium.terms()) {
                const double tau = term.time_factor.empty() ? 1.0 : term.time_factor(std::span<const double>(&s, 1));
                const double w = term.coefficient * tau;
                for (std::size_t p = 0; p < P; ++p) {
                    std::copy(pts[p].begin(), pts[p].end(), arg.begin());
                    arg[d] = s;
                    lam[p] = term.factor(arg);
                }
                for (std::size_t p = 0; p < P; ++p) {
                    const double wp = w * lam[p];
                    double* row = mu.data() + p * P;
                    for (std::size_t q = 0; q < P; ++q) row[q] += wp * lam[q];
                }
            }
        } else {
            for (std::size_t p = 0; p < P; ++p)
                for (std::size_t q = 0; q < P; ++q) mu[p * P + q] = medium.evaluate(pts[p], pts[q], s);
        }
        for (std::size_t p = 0; p < P; ++p) {
            for (std::size_t q = 0; q < P; ++q) {
                const double v = mu[p * P + q];
                if (v < g.min) { g.min = v; g.argmin_p = p; g.argmin_q = q; g.argmin_n = n; }
                if (v > g.max) { g.max = v; g.argmax_p = p; g.argmax_q = q; g.argmax_n = n; }
                const double defect = std::abs(v - mu[q * P + p]);
                if (defect > g.defect) { g.defect = defect; g.defect_p = p; g.defect_q = q; g.defect_n = n; }
            }
        }
    }
    return g;
}

}  // namespace

FourierSeries::FourierSeries(int variables, std::vector<FourierWave> waves)
    : variables_(variables), waves_(std::move(waves)) {
    for (const auto& w : waves_) {
        if (static_cast<int>(w.k.size()) != variables_)
            throw ConfigError("Fourier wave vector has wrong length");
        if (!std::isfinite(w.amplitude) || !std::isfinite(w.phase))
            throw ConfigError("Fourier wave amplitude and phase must be finite");
    }
}

FourierSeries FourierSeries::constant(int variables, double value) {
    return FourierSeries(variables, {FourierWave{std::vector<int>(variables, 0), value, 0.0}});
}

double FourierSeries::operator()(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& w : waves_) {
        double arg = 0.0;
        for (int i = 0; i < variables_; ++i) arg += w.k[i] * x[i];
        sum += w.amplitude * std::cos(two_pi * arg + w.phase);
    }
    return sum;
}

bool FourierSeries::depends_on(int index) const {
    return std::any_of(waves_.begin(), waves_.end(), [&](const FourierWave& w) {
        return w.k[index] != 0 && w.amplitude != 0.0;
    });
}

FourierSeries FourierSeries::reflected(int index) const {
    auto waves = waves_;
    for (auto& w : waves) w.k[index] = -w.k[index];
    return FourierSeries(variables_, std::move(waves));
}

std::string to_string(Medium::Form form) {
    switch (form) {
        case Medium::Form::constant: return "constant";
        case Medium::Form::time_only: return "time_only";
        case Medium::Form::separable_sum: return "separable_sum";
        case Medium::Form::tabulated: return "tabulated";
    }
    return "unknown";
}

Medium Medium::constant(int dimension, double value, double mu_minus, double mu_plus) {
    Medium m;
    m.dimension_ = dimension;
    m.form_ = Form::constant;
    m.mu_minus_ = mu_minus;
    m.mu_plus_ = mu_plus;
    m.terms_.push_back({value, FourierSeries::constant(dimension + 1, 1.0), FourierSeries{}});
    m.check_declared_bounds();
    return m;
}

Medium Medium::time_only(int dimension, FourierSeries series, double mu_minus, double mu_plus) {
    if (series.variables() != 1) throw ConfigError("time-only medium needs a series in s only");
    Medium m;
    m.dimension_ = dimension;
    m.form_ = Form::time_only;
    m.mu_minus_ = mu_minus;
    m.mu_plus_ = mu_plus;
    m.terms_.push_back({1.0, FourierSeries::constant(dimension + 1, 1.0), std::move(series)});
    m.check_declared_bounds();
    return m;
}

Medium Medium::separable_sum(int dimension, std::vector<SeparableTerm> terms, double mu_minus,
                             double mu_plus) {
    if (terms.empty()) throw ConfigError("separable-sum medium needs at least one term");
    for (const auto& t : terms) {
        if (t.factor.variables() != dimension + 1)
            throw ConfigError("separable factor must be a series on T^{d+1}");
        if (!t.time_factor.empty() && t.time_factor.variables() != 1)
            throw ConfigError("separable time factor must be a series in s");
        if (!std::isfinite(t.coefficient)) throw ConfigError("separable coefficient must be finite");
    }
    Medium m;
    m.dimension_ = dimension;
    m.form_ = Form::separable_sum;
    m.mu_minus_ = mu_minus;
    m.mu_plus_ = mu_plus;
    m.terms_ = std::move(terms);
    m.check_declared_bounds();
    const bool needs_certificate = std::any_of(m.terms_.begin(), m.terms_.end(), [](const SeparableTerm& t) {
        return t.coefficient < 0.0 || !t.time_factor.empty();
    });
    if (needs_certificate) m.certify_positivity();
    return m;
}

Medium Medium::tabulated(int dimension, int points, int time_points, std::vector<double> values,
                         double mu_minus, double mu_plus) {
    if (points < 2 || time_points < 1) throw ConfigError("tabulated medium grid too small");
    std::size_t spatial = 1;
    for (int i = 0; i < dimension; ++i) spatial *= static_cast<std::size_t>(points);
    if (values.size() != spatial * spatial * static_cast<std::size_t>(time_points))
        throw ConfigError("tabulated medium has the wrong number of values");
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("tabulated medium values must be finite");
    Medium m;
    m.dimension_ = dimension;
    m.form_ = Form::tabulated;
    m.mu_minus_ = mu_minus;
    m.mu_plus_ = mu_plus;
    m.points_ = points;
    m.time_points_ = time_points;
    m.table_ = std::move(values);
    m.check_declared_bounds();
    return m;
}

void Medium::check_declared_bounds() const {
    if (dimension_ < 1) throw ConfigError("medium dimension must be positive");
    if (!std::isfinite(mu_minus_) || !std::isfinite(mu_plus_) || mu_plus_ <= 0.0 || mu_minus_ > mu_plus_)
        throw ConfigError("medium declared bounds must satisfy 0 < mu_plus and mu_minus <= mu_plus");
}

void Medium::certify_positivity() const {
    // 64 points per axis; d >= 2 is capped so the scan stays quadratic in 24^d.
    const int density = dimension_ == 1 ? 64 : 24;
    const GridScan g = scan(*this, density);
    if (!(g.min > 0.0)) {
        throw ConditionViolation("C3", "separable medium with negative terms is not positive on the "
                                       "certification grid (min " + std::to_string(g.min) + ")");
    }
}

bool Medium::time_dependent() const {
    if (form_ == Form::tabulated) return time_points_ > 1;
    const int d = dimension_;
    return std::any_of(terms_.begin(), terms_.end(), [d](const SeparableTerm& t) {
        return t.factor.depends_on(d) || (!t.time_factor.empty() && t.time_factor.depends_on(0));
    });
}

double Medium::evaluate(std::span<const double> xi, std::span<const double> eta, double s) const {
    const int d = dimension_;
    s = wrap(s);
    if (form_ != Form::tabulated) {
        double a[8], b[8];
        std::vector<double> va, vb;
        double* pa = a;
        double* pb = b;
        if (d + 1 > 8) {
            va.resize(d + 1);
            vb.resize(d + 1);
            pa = va.data();
            pb = vb.data();
        }
        for (int i = 0; i < d; ++i) {
            pa[i] = wrap(xi[i]);
            pb[i] = wrap(eta[i]);
        }
        pa[d] = pb[d] = s;
        double sum = 0.0;
        for (const auto& t : terms_) {
            const double tau = t.time_factor.empty() ? 1.0 : t.time_factor(std::span<const double>(&s, 1));
            sum += t.coefficient * tau * t.factor(std::span<const double>(pa, d + 1)) *
                   t.factor(std::span<const double>(pb, d + 1));
        }
        return sum;
    }

    // Periodic multilinear interpolation over the 2d+1 table coordinates.
    const int dims = 2 * d + 1;
    std::vector<int> base(dims);
    std::vector<double> frac(dims);
    std::vector<int> extent(dims, points_);
    extent[dims - 1] = time_points_;
    for (int i = 0; i < dims; ++i) {
        const double x = (i < d ? wrap(xi[i]) : i < 2 * d ? wrap(eta[i - d]) : s) * extent[i];
        const double f = std::floor(x);
        base[i] = static_cast<int>(f) % extent[i];
        frac[i] = x - f;
    }
    std::size_t spatial = 1;
    for (int i = 0; i < d; ++i) spatial *= static_cast<std::size_t>(points_);
    double sum = 0.0;
    for (int corner = 0; corner < (1 << dims); ++corner) {
        double weight = 1.0;
        std::size_t ixi = 0, ieta = 0, it = 0;
        for (int i = 0; i < dims; ++i) {
            const int bit = (corner >> i) & 1;
            weight *= bit ? frac[i] : 1.0 - frac[i];
            const int idx = (base[i] + bit) % extent[i];
            if (i < d) ixi = ixi * points_ + idx;
            else if (i < 2 * d) ieta = ieta * points_ + idx;
            else it = idx;
        }
        if (weight == 0.0) continue;
        sum += weight * table_[(it * spatial + ixi) * spatial + ieta];
    }
    return sum;
}

Medium Medium::time_reversed() const {
    Medium m = *this;
    if (form_ == Form::tabulated) {
        std::size_t spatial = 1;
        for (int i = 0; i < dimension_; ++i) spatial *= static_cast<std::size_t>(points_);
        const std::size_t slab = spatial * spatial;
        for (int n = 0; n < time_points_; ++n) {
            const int src = (time_points_ - n) % time_points_;
            std::copy_n(table_.begin() + src * slab, slab, m.table_.begin() + n * slab);
        }
        return m;
    }
    for (auto& t : m.terms_) {
        t.factor = t.factor.reflected(dimension_);
        if (!t.time_factor.empty()) t.time_factor = t.time_factor.reflected(0);
    }
    return m;
}

Medium Medium::scaled(double c) const {
    if (!(c > 0.0)) throw ConfigError("medium scale factor must be positive");
    Medium m = *this;
    m.mu_minus_ *= c;
    m.mu_plus_ *= c;
    for (auto& t : m.terms_) t.coefficient *= c;
    for (auto& v : m.table_) v *= c;
    return m;
}

Medium Medium::with_bounds(double mu_minus, double mu_plus) const {
    Medium m = *this;
    m.mu_minus_ = mu_minus;
    m.mu_plus_ = mu_plus;
    m.check_declared_bounds();
    return m;
}

ConditionReport verify_conditions(const Medium& medium, int sample_density) {
    if (sample_density < 8) throw ConfigError("verify_conditions needs sample_density >= 8");
    if (!(medium.mu_minus() > 0.0))
        throw ConditionViolation("C3", "declared lower bound mu_minus must be strictly positive");

    const int d = medium.dimension();
    if (medium.form() == Medium::Form::tabulated) {
        // Symmetry of the table itself; interpolation preserves it.
        std::size_t spatial = 1;
        for (int i = 0; i < d; ++i) spatial *= static_cast<std::size_t>(medium.table_points());
        const auto& t = medium.table();
        for (int n = 0; n < medium.table_time_points(); ++n)
            for (std::size_t i = 0; i < spatial; ++i)
                for (std::size_t j = 0; j < i; ++j) {
                    const double a = t[(n * spatial + i) * spatial + j];
                    const double b = t[(n * spatial + j) * spatial + i];
                    if (std::abs(a - b) > 1e-12) {
                        std::ostringstream os;
                        os << "tabulated medium is not symmetric at table entry (s=" << n << ", xi=" << i
                           << ", eta=" << j << "): " << a << " vs " << b;
                        throw ConditionViolation("C5", os.str());
                    }
                }
    }

    const GridScan g = scan(medium, sample_density);
    const auto pts = sample_points(d, sample_density);
    auto where = [&](std::size_t p, std::size_t q, int n) {
        return format_point(pts[p], pts[q], static_cast<double>(n) / sample_density);
    };
    if (g.min < medium.mu_minus() - 1e-12)
        throw ConditionViolation("C3", "mu = " + std::to_string(g.min) + " below declared mu_minus at " +
                                           where(g.argmin_p, g.argmin_q, g.argmin_n));
    if (g.max > medium.mu_plus() + 1e-12)
        throw ConditionViolation("C3", "mu = " + std::to_string(g.max) + " above declared mu_plus at " +
                                           where(g.argmax_p, g.argmax_q, g.argmax_n));
    if (g.defect > 1e-12)
        throw ConditionViolation("C5", "symmetry defect " + std::to_string(g.defect) + " at " +
                                           where(g.defect_p, g.defect_q, g.defect_n));
    return {g.min, g.max, g.defect};
}

}  // namespace perihom
