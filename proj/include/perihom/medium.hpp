#pragma once

#include <span>
#include <string>
#include <vector>

namespace perihom {

/// One term A cos(2 pi k.x + phase) of a real trigonometric polynomial.
struct FourierWave {
    std::vector<int> k;
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Real trigonometric polynomial on the torus T^n, 1-periodic in each variable.
class FourierSeries {
public:
    FourierSeries() = default;
    FourierSeries(int variables, std::vector<FourierWave> waves);

    static FourierSeries constant(int variables, double value);

    int variables() const noexcept { return variables_; }
    const std::vector<FourierWave>& waves() const noexcept { return waves_; }
    double operator()(std::span<const double> x) const;
    /// True if some wave has a nonzero frequency in variable `index`.
    bool depends_on(int index) const;
    bool empty() const noexcept { return waves_.empty(); }

    /// Same series with variable `index` replaced by -x (time reversal).
    FourierSeries reflected(int index) const;

private:
    int variables_ = 0;
    std::vector<FourierWave> waves_;
};

/// mu = coefficient * time_factor(s) * factor(xi, s) * factor(eta, s).
/// `factor` lives on T^{d+1} (last variable is time); `time_factor` on T^1.
struct SeparableTerm {
    double coefficient = 1.0;
    FourierSeries factor;
    FourierSeries time_factor;
};

/// Space-time periodic modulation mu(xi, eta, s) with declared bounds.
///
/// Constant and time-only media are stored as one-term separable sums, so
/// the separable representation is canonical for every form except the
/// tabulated one.
class Medium {
public:
    enum class Form { constant, time_only, separable_sum, tabulated };

    static Medium constant(int dimension, double value, double mu_minus, double mu_plus);
    static Medium time_only(int dimension, FourierSeries m, double mu_minus, double mu_plus);
    static Medium separable_sum(int dimension, std::vector<SeparableTerm> terms, double mu_minus,
                                double mu_plus);
    /// Values on a `points`^d x `points`^d x `time_points` grid, layout
    /// [time][xi][eta] with row-major spatial indices; evaluated by periodic
    /// multilinear interpolation.
    static Medium tabulated(int dimension, int points, int time_points, std::vector<double> values,
                            double mu_minus, double mu_plus);

    int dimension() const noexcept { return dimension_; }
    Form form() const noexcept { return form_; }
    double mu_minus() const noexcept { return mu_minus_; }
    double mu_plus() const noexcept { return mu_plus_; }
    bool is_separable() const noexcept { return form_ != Form::tabulated; }
    bool time_dependent() const;

    const std::vector<SeparableTerm>& terms() const noexcept { return terms_; }
    int table_points() const noexcept { return points_; }
    int table_time_points() const noexcept { return time_points_; }
    const std::vector<double>& table() const noexcept { return table_; }

    /// mu(xi, eta, s); every argument is reduced modulo 1 first.
    double evaluate(std::span<const double> xi, std::span<const double> eta, double s) const;

    /// mu(xi, eta, 1 - s).
    Medium time_reversed() const;
    /// c * mu, with bounds scaled accordingly.
    Medium scaled(double c) const;
    /// Same medium with different declared bounds.
    Medium with_bounds(double mu_minus, double mu_plus) const;

private:
    Medium() = default;
    void check_declared_bounds() const;
    void certify_positivity() const;

    int dimension_ = 1;
    Form form_ = Form::constant;
    double mu_minus_ = 0.0;
    double mu_plus_ = 0.0;
    std::vector<SeparableTerm> terms_;
    int points_ = 0;
    int time_points_ = 0;
    std::vector<double> table_;
};

std::string to_string(Medium::Form form);

struct ConditionReport {
    double mu_min_observed = 0.0;
    double mu_max_observed = 0.0;
    double max_symmetry_defect = 0.0;
};

/// Exhaustive audit of uniform ellipticity and symmetry on a sample grid with
/// `sample_density` points per axis (xi, eta and s). Throws
/// ConditionViolation naming the condition and the offending sample point.
ConditionReport verify_conditions(const Medium& medium, int sample_density);

}  // namespace perihom
