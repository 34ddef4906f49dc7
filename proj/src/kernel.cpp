#include "perihom/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "perihom/errors.hpp"

namespace perihom {

namespace {

constexpr double pi = std::numbers::pi;

double norm(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

double ball_volume(int d, double r) {
    return std::pow(pi, 0.5 * d) * std::pow(r, d) / std::tgamma(0.5 * d + 1.0);
}

// 4-point Gauss-Legendre on [lo, hi]; exact for polynomials of degree <= 7.
template <class F>
double gauss4(double lo, double hi, F&& f) {
    static constexpr std::array<double, 4> x{-0.8611363115940526, -0.3399810435848563,
                                             0.3399810435848563, 0.8611363115940526};
    static constexpr std::array<double, 4> w{0.3478548451374538, 0.6521451548625461,
                                             0.6521451548625461, 0.3478548451374538};
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += w[i] * f(mid + half * x[i]);
    return s * half;
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::box: return "box";
        case KernelFamily::exponential: return "exponential";
        case KernelFamily::tabulated_radial: return "tabulated_radial";
    }
    return "unknown";
}

double unit_sphere_area(int dimension) {
    return 2.0 * std::pow(pi, 0.5 * dimension) / std::tgamma(0.5 * dimension);
}

Kernel Kernel::gaussian(int dimension, double sigma) {
    Kernel k;
    k.dimension_ = dimension;
    k.family_ = KernelFamily::gaussian;
    k.parameter_ = sigma;
    k.validate_and_normalize();
    return k;
}

Kernel Kernel::box(int dimension, double radius) {
    Kernel k;
    k.dimension_ = dimension;
    k.family_ = KernelFamily::box;
    k.parameter_ = radius;
    k.validate_and_normalize();
    return k;
}

Kernel Kernel::exponential(int dimension, double length) {
    Kernel k;
    k.dimension_ = dimension;
    k.family_ = KernelFamily::exponential;
    k.parameter_ = length;
    k.validate_and_normalize();
    return k;
}

Kernel Kernel::tabulated_radial(int dimension, std::vector<double> radii, std::vector<double> values) {
    Kernel k;
    k.dimension_ = dimension;
    k.family_ = KernelFamily::tabulated_radial;
    k.radii_ = std::move(radii);
    k.values_ = std::move(values);
    k.validate_and_normalize();
    return k;
}

void Kernel::validate_and_normalize() {
    if (dimension_ < 1) throw ConfigError("kernel dimension must be positive");
    const int d = dimension_;
    switch (family_) {
        case KernelFamily::gaussian:
            if (!(parameter_ > 0.0)) throw ConfigError("gaussian kernel needs sigma > 0");
            normalization_ = std::pow(2.0 * pi * parameter_ * parameter_, -0.5 * d);
            break;
        case KernelFamily::box:
            if (!(parameter_ > 0.0)) throw ConfigError("box kernel needs r > 0");
            normalization_ = 1.0 / ball_volume(d, parameter_);
            break;
        case KernelFamily::exponential:
            if (!(parameter_ > 0.0)) throw ConfigError("exponential kernel needs lambda > 0");
            normalization_ = 1.0 / (unit_sphere_area(d) * std::pow(parameter_, d) * std::tgamma(d));
            break;
        case KernelFamily::tabulated_radial: {
            if (radii_.empty() || radii_.size() != values_.size())
                throw ConfigError("tabulated kernel needs matching non-empty radii and values");
            for (std::size_t i = 0; i < radii_.size(); ++i) {
                if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
                    throw ConfigError("tabulated kernel radii must be positive and finite");
                if (i > 0 && !(radii_[i] > radii_[i - 1]))
                    throw ConfigError("tabulated kernel radii must be strictly increasing");
                if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
                    throw ConfigError("tabulated kernel values must be finite and non-negative");
            }
            normalization_ = 1.0;
            const double mass = unit_sphere_area(d) * radial_integral(0.0, radii_.back(), d - 1);
            if (!(mass > 0.0)) throw ConfigError("tabulated kernel has zero mass");
            normalization_ = 1.0 / mass;
            break;
        }
    }
}

double Kernel::profile(double r) const {
    switch (family_) {
        case KernelFamily::gaussian:
            return normalization_ * std::exp(-0.5 * r * r / (parameter_ * parameter_));
        case KernelFamily::box:
            return r <= parameter_ ? normalization_ : 0.0;
        case KernelFamily::exponential:
            return normalization_ * std::exp(-r / parameter_);
        case KernelFamily::tabulated_radial: {
            if (r > radii_.back()) return 0.0;
            if (r <= radii_.front()) return normalization_ * values_.front();
            const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
            const std::size_t hi = static_cast<std::size_t>(it - radii_.begin());
            if (hi >= radii_.size()) return normalization_ * values_.back();
            const std::size_t lo = hi - 1;
            const double t = (r - radii_[lo]) / (radii_[hi] - radii_[lo]);
            return normalization_ * ((1.0 - t) * values_[lo] + t * values_[hi]);
        }
    }
    return 0.0;
}

double Kernel::evaluate(std::span<const double> z) const { return profile(norm(z)); }

double Kernel::radial_integral(double lo, double hi, int power) const {
    // Only used for the tabulated family: integrate piecewise over the
    // breakpoints so every piece is a polynomial.
    if (hi <= lo) return 0.0;
    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), radii_.begin(), radii_.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = std::max(lo, breaks[i]);
        const double b = std::min(hi, breaks[i + 1]);
        if (b <= a) continue;
        total += gauss4(a, b, [&](double r) { return profile(r) * std::pow(r, power); });
    }
    return total;
}

double Kernel::second_moment() const {
    const int d = dimension_;
    const double p = parameter_;
    switch (family_) {
        case KernelFamily::gaussian: return d * p * p;
        case KernelFamily::box: return d * p * p / (d + 2.0);
        case KernelFamily::exponential: return p * p * d * (d + 1.0);
        case KernelFamily::tabulated_radial:
            return unit_sphere_area(d) * radial_integral(0.0, radii_.back(), d + 1);
    }
    return 0.0;
}

Eigen::MatrixXd Kernel::second_moment_matrix() const {
    return Eigen::MatrixXd::Identity(dimension_, dimension_) * (second_moment() / dimension_);
}

double Kernel::radial_cdf(double r) const {
    if (r <= 0.0) return 0.0;
    const int d = dimension_;
    const double p = parameter_;
    switch (family_) {
        case KernelFamily::gaussian: return boost::math::gamma_p(0.5 * d, 0.5 * r * r / (p * p));
        case KernelFamily::box: return r >= p ? 1.0 : std::pow(r / p, d);
        case KernelFamily::exponential: return boost::math::gamma_p(static_cast<double>(d), r / p);
        case KernelFamily::tabulated_radial:
            return std::min(1.0, unit_sphere_area(d) * radial_integral(0.0, std::min(r, radii_.back()), d - 1));
    }
    return 0.0;
}

double Kernel::tail_mass(double R) const {
    if (R < 0.0) R = 0.0;
    const int d = dimension_;
    const double p = parameter_;
    switch (family_) {
        case KernelFamily::gaussian: {
            const double x = 0.5 * R * R / (p * p);
            return boost::math::gamma_q(0.5 * d, x) + d * p * p * boost::math::gamma_q(0.5 * d + 1.0, x);
        }
        case KernelFamily::box: {
            if (R >= p) return 0.0;
            const double rd = std::pow(p, d);
            return (rd - std::pow(R, d)) / rd +
                   d / (d + 2.0) * (std::pow(p, d + 2) - std::pow(R, d + 2)) / rd;
        }
        case KernelFamily::exponential: {
            const double x = R / p;
            return boost::math::gamma_q(static_cast<double>(d), x) +
                   p * p * d * (d + 1.0) * boost::math::gamma_q(d + 2.0, x);
        }
        case KernelFamily::tabulated_radial: {
            const double top = radii_.back();
            if (R >= top) return 0.0;
            return unit_sphere_area(d) * (radial_integral(R, top, d - 1) + radial_integral(R, top, d + 1));
        }
    }
    return 0.0;
}

double Kernel::support_radius() const {
    switch (family_) {
        case KernelFamily::box: return parameter_;
        case KernelFamily::tabulated_radial: return radii_.back();
        default: return std::numeric_limits<double>::infinity();
    }
}

double Kernel::truncation_radius(double relative_tolerance) const {
    const double support = support_radius();
    if (std::isfinite(support)) return support;
    const double target = relative_tolerance * second_moment();
    double R = 0.1 * parameter_;
    while (tail_mass(R) > target) R *= 1.01;
    return R;
}

double Kernel::periodized(std::span<const double> x, double R) const {
    if (static_cast<int>(x.size()) != dimension_) throw ConfigError("periodized: dimension mismatch");
    if (!(R > 0.0)) throw ConfigError("periodized: truncation radius must be positive");
    if (family_ == KernelFamily::box && R < parameter_)
        throw ConfigError("periodized: truncation radius below the box kernel support");

    const int d = dimension_;
    std::vector<long> lo(d), hi(d), m(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = static_cast<long>(std::floor(-R - x[i]));
        hi[i] = static_cast<long>(std::ceil(R - x[i]));
        m[i] = lo[i];
    }
    std::vector<double> y(d);
    double sum = 0.0;
    while (true) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            y[i] = x[i] + static_cast<double>(m[i]);
            r2 += y[i] * y[i];
        }
        if (r2 <= R * R) sum += profile(std::sqrt(r2));
        int axis = 0;
        while (axis < d && ++m[axis] > hi[axis]) {
            m[axis] = lo[axis];
            ++axis;
        }
        if (axis == d) break;
    }
    return sum;
}

}  // namespace perihom
