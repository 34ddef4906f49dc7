#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace perihom {

enum class KernelFamily { gaussian, box, exponential, tabulated_radial };

std::string to_string(KernelFamily family);

/// Radial, unit-mass convolution kernel a(z) on R^d.
///
/// All families are radial, so a(-z) = a(z) holds by construction. The
/// normalization constant is fixed at construction so that the density
/// integrates to one; the tabulated family is normalized by exact piecewise
/// quadrature of its linear interpolant.
class Kernel {
public:
    static Kernel gaussian(int dimension, double sigma);
    /// Uniform density on the closed ball of radius r.
    static Kernel box(int dimension, double radius);
    /// Density proportional to exp(-|z|/lambda).
    static Kernel exponential(int dimension, double length);
    /// Radial profile given at sorted radii, linearly interpolated in |z|,
    /// constant below the first radius and zero beyond the last one.
    static Kernel tabulated_radial(int dimension, std::vector<double> radii,
                                   std::vector<double> values);

    int dimension() const noexcept { return dimension_; }
    KernelFamily family() const noexcept { return family_; }
    /// sigma, radius or length depending on the family (0 for tabulated).
    double parameter() const noexcept { return parameter_; }
    double normalization() const noexcept { return normalization_; }
    const std::vector<double>& radii() const noexcept { return radii_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double evaluate(std::span<const double> z) const;
    /// a as a function of |z|.
    double profile(double radius) const;

    /// E|Z|^2 = trace of the second moment matrix.
    double second_moment() const;
    Eigen::MatrixXd second_moment_matrix() const;

    /// Integral of (1 + |z|^2) a(z) over |z| > R.
    double tail_mass(double R) const;
    /// P(|Z| <= r) for the radial law of the kernel.
    double radial_cdf(double r) const;
    /// Radius of the support; infinity for gaussian and exponential.
    double support_radius() const;

    /// Smallest radius on a fine geometric grid with
    /// tail_mass(R) <= relative_tolerance * trace(M2).
    double truncation_radius(double relative_tolerance = 1e-12) const;

    /// Lattice sum of a(x + m) over m in Z^d with |x + m| <= R.
    double periodized(std::span<const double> x, double R) const;

private:
    Kernel() = default;
    void validate_and_normalize();
    // Integral of profile(r) * r^power over [lo, hi], exact for the tabulated profile.
    double radial_integral(double lo, double hi, int power) const;

    int dimension_ = 1;
    KernelFamily family_ = KernelFamily::gaussian;
    double parameter_ = 0.0;
    double normalization_ = 1.0;
    std::vector<double> radii_;
    std::vector<double> values_;
};

/// Surface measure of the unit sphere in R^d.
double unit_sphere_area(int dimension);

}  // namespace perihom
