#include "doctest.h"
#include "oracles.hpp"

#include "perihom/errors.hpp"
#include "perihom/medium.hpp"

using namespace perihom;
using oracle::pi;

namespace {

Medium separable_example() {
    std::vector<SeparableTerm> terms;
    terms.push_back({1.0, FourierSeries::constant(2, 1.0), {}});
    terms.push_back({0.5, FourierSeries(2, {{{1, 0}, 1.0, -pi / 2}}), FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, 0.0}})});
    return Medium::separable_sum(1, terms, 0.25, 1.75);
}

double closed_form(double xi, double eta, double s) {
    return 1.0 + 0.5 * std::sin(2 * pi * xi) * std::sin(2 * pi * eta) * (1.0 + 0.5 * std::cos(2 * pi * s));
}

}  // namespace

TEST_CASE("separable medium evaluates its closed form and reduces arguments mod 1") {
    const Medium m = separable_example();
    oracle::Draw draw(3);
    for (int i = 0; i < 50; ++i) {
        const double xi = draw.uniform(-3, 3), eta = draw.uniform(-3, 3), s = draw.uniform(-2, 2);
        const std::vector<double> x{xi}, y{eta};
        CHECK(m.evaluate(x, y, s) == doctest::Approx(closed_form(xi, eta, s)).epsilon(1e-14));
    }
    CHECK(m.is_separable());
    CHECK(m.time_dependent());
    CHECK(m.form() == Medium::Form::separable_sum);
}

TEST_CASE("fourier series") {
    const FourierSeries f(2, {{{1, 2}, 0.7, 0.3}});
    const std::vector<double> x{0.1, 0.4};
    CHECK(f(x) == doctest::Approx(0.7 * std::cos(2 * pi * (0.1 + 0.8) + 0.3)));
    CHECK(f.depends_on(0));
    CHECK(f.depends_on(1));
    const FourierSeries r = f.reflected(1);
    const std::vector<double> xr{0.1, -0.4};
    CHECK(r(x) == doctest::Approx(f(xr)));
    CHECK_THROWS_AS(FourierSeries(2, {{{1}, 1.0, 0.0}}), ConfigError);
    CHECK(FourierSeries::constant(3, 2.5)(std::vector<double>{0.2, 0.3, 0.9}) == doctest::Approx(2.5));
}

TEST_CASE("constant and time-only media") {
    const Medium c = Medium::constant(2, 1.5, 1.5, 1.5);
    const std::vector<double> x{0.1, 0.2}, y{0.7, 0.4};
    CHECK(c.evaluate(x, y, 0.3) == doctest::Approx(1.5));
    CHECK_FALSE(c.time_dependent());
    const Medium t = Medium::time_only(1, FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, -pi / 2}}), 0.5, 1.5);
    const std::vector<double> a{0.3}, b{0.9};
    CHECK(t.evaluate(a, b, 0.25) == doctest::Approx(1.5));
    CHECK(t.evaluate(a, b, 0.75) == doctest::Approx(0.5));
    CHECK(t.time_dependent());
}

TEST_CASE("time reversal, scaling and bound changes") {
    const Medium m = separable_example();
    const Medium r = m.time_reversed();
    const Medium c = m.scaled(3.0);
    const std::vector<double> x{0.13}, y{0.61};
    CHECK(r.evaluate(x, y, 0.2) == doctest::Approx(m.evaluate(x, y, 0.8)));
    CHECK(c.evaluate(x, y, 0.2) == doctest::Approx(3.0 * m.evaluate(x, y, 0.2)));
    CHECK(c.mu_minus() == doctest::Approx(0.75));
    CHECK(c.mu_plus() == doctest::Approx(5.25));
    const Medium w = m.with_bounds(0.2, 2.0);
    CHECK(w.mu_plus() == 2.0);
    CHECK_THROWS_AS(m.with_bounds(2.0, 1.0), ConfigError);
}

TEST_CASE("tabulated medium interpolates periodically") {
    // mu(xi, eta) = 1 + 0.25 (cos 2 pi xi + cos 2 pi eta) on a 4 x 4 table.
    const int P = 4;
    std::vector<double> v(P * P);
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) v[i * P + j] = 1.0 + 0.25 * (std::cos(2 * pi * i / P) + std::cos(2 * pi * j / P));
    const Medium m = Medium::tabulated(1, P, 1, v, 0.5, 1.5);
    const std::vector<double> x{0.25}, y{0.5};
    CHECK(m.evaluate(x, y, 0.4) == doctest::Approx(v[1 * P + 2]));
    const std::vector<double> xm{0.125}, yw{1.5};
    CHECK(m.evaluate(xm, yw, 0.0) == doctest::Approx(0.5 * (v[0 * P + 2] + v[1 * P + 2])));
    CHECK_FALSE(m.is_separable());
    CHECK_NOTHROW(verify_conditions(m, 16));
}

TEST_CASE("condition audit") {
    const ConditionReport rep = verify_conditions(separable_example(), 24);
    CHECK(rep.mu_min_observed >= 0.25 - 1e-12);
    CHECK(rep.mu_max_observed <= 1.75 + 1e-12);
    CHECK(rep.max_symmetry_defect <= 1e-12);

    SUBCASE("zero lower bound fails positivity") {
        const Medium m = Medium::constant(1, 1.0, 0.0, 1.0);
        try {
            verify_conditions(m, 16);
            FAIL("expected a violation");
        } catch (const ConditionViolation& e) {
            CHECK(e.condition() == "C3");
        }
    }
    SUBCASE("declared bounds that the medium leaves are reported") {
        const Medium m = separable_example().with_bounds(0.5, 1.75);
        CHECK_THROWS_AS(verify_conditions(m, 24), ConditionViolation);
    }
    SUBCASE("asymmetric table fails symmetry") {
        std::vector<double> v{1.0, 1.2, 1.0, 1.0};
        const Medium m = Medium::tabulated(1, 2, 1, v, 0.5, 1.5);
        try {
            verify_conditions(m, 16);
            FAIL("expected a violation");
        } catch (const ConditionViolation& e) {
            CHECK(e.condition() == "C5");
        }
    }
    SUBCASE("negative separable sum is caught at construction") {
        std::vector<SeparableTerm> terms;
        terms.push_back({1.0, FourierSeries::constant(2, 1.0), {}});
        terms.push_back({-1.5, FourierSeries(2, {{{1, 0}, 1.0, 0.0}}), {}});
        CHECK_THROWS_AS(Medium::separable_sum(1, terms, 0.1, 3.0), ConditionViolation);
    }
}

TEST_CASE("random media honour their declared bounds") {
    oracle::Draw draw(11);
    for (int i = 0; i < 5; ++i) {
        const Medium m = oracle::random_medium(draw, 1 + i % 2);
        CHECK_NOTHROW(verify_conditions(m, 12));
    }
}
