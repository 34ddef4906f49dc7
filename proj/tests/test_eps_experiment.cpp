#include "doctest.h"
#include "oracles.hpp"

#include "perihom/effective.hpp"
#include "perihom/eps_experiment.hpp"
#include "perihom/errors.hpp"

using namespace perihom;
using oracle::pi;

namespace {

std::vector<double> box_coordinates(const BoxDomain& b) {
    std::vector<double> x(b.Nx);
    for (int i = 0; i < b.Nx; ++i) x[i] = b.coordinate(i);
    return x;
}

}  // namespace

TEST_CASE("box commensurability") {
    const BoxDomain b{1, 10.0, 1280};
    CHECK(b.h() == doctest::Approx(20.0 / 1280));
    CHECK(b.points_per_cell(0.5) == 32);
    CHECK_THROWS_AS(b.points_per_cell(0.3), ConfigError);
    CHECK_THROWS_AS(b.points_per_cell(0.05), ConfigError);
    CHECK_THROWS_AS(BoxDomain({1, 10.0, 160}).points_per_cell(0.5), ConfigError);
    CHECK_THROWS_AS(b.points_per_cell(-0.5), ConfigError);
    const BoxDomain r = BoxDomain::resolving(2, 2.0, 0.25, 16);
    CHECK(r.Nx == 256);
    CHECK(r.nodes() == 256u * 256u);
    const Lattice lat = b.lattice(0.5);
    CHECK(lat.per_unit == 32);
    CHECK(lat.origin_index == -640);
}

TEST_CASE("box fields") {
    const BoxDomain b{1, 8.0, 512};
    const BoxField g = gaussian_field(b, 1.0);
    CHECK(g.integral() == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-12));
    CHECK(g.norm() == doctest::Approx(std::sqrt(std::sqrt(pi))).epsilon(1e-12));
    CHECK(g.boundary_fraction() < 1e-20);
    const BoxField wide = gaussian_field(b, 4.0);
    // |g|^2 is a normal density with standard deviation 4 / sqrt 2 restricted to [-8, 8).
    const double tail = (std::erfc(0.9 * 8.0 / 4.0) - std::erfc(8.0 / 4.0)) / (1.0 - std::erfc(8.0 / 4.0));
    CHECK(wide.boundary_fraction() == doctest::Approx(tail).epsilon(1e-3));
}

TEST_CASE("scaled generator matches the dense lattice oracle") {
    const double eps = 0.5;
    const BoxDomain b{1, 2.0, 64};
    oracle::Draw draw(4);
    const Medium M = oracle::random_medium(draw, 1);
    const Kernel K = Kernel::gaussian(1, 0.2);
    EpsOperator op(K, M, b, eps);
    const double t = 0.037;
    const Eigen::MatrixXd A = oracle::dense_generator(op.generator().discrete_kernel(), M, b.lattice(eps), t / (eps * eps)) / (eps * eps);
    std::vector<double> u(b.nodes()), out(b.nodes());
    for (double& v : u) v = draw.uniform(-1, 1);
    op.apply(t, u, out);
    const Eigen::VectorXd ref = A * Eigen::Map<Eigen::VectorXd>(u.data(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(out[i] == doctest::Approx(ref(i)).epsilon(1e-12).scale(1.0));

    const BoxField one(b, 1.0);
    const BoxField a1 = apply_eps_generator(K, M, eps, t, one);
    for (double v : a1.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("plane waves are eigenfunctions for a constant medium") {
    const double eps = 0.25, c = 1.4;
    const BoxDomain b{1, 4.0, 256};
    const Kernel K = Kernel::box(1, 0.5);
    EpsOperator op(K, Medium::constant(1, c, c, c), b, eps);
    const auto& dk = op.generator().discrete_kernel();
    const int m = 3;
    const double kx = pi * m / b.L;
    double lambda = 0.0;
    for (std::size_t k = 0; k < dk.size(); ++k) lambda += dk.weight(k) * (std::cos(kx * eps * dk.displacement(k, 0)) - 1.0);
    lambda *= c / (eps * eps);
    const auto x = box_coordinates(b);
    std::vector<double> u(b.Nx), out(b.Nx);
    for (int i = 0; i < b.Nx; ++i) u[i] = std::cos(kx * x[i]);
    op.apply(0.0, u, out);
    for (int i = 0; i < b.Nx; ++i) CHECK(out[i] == doctest::Approx(lambda * u[i]).epsilon(1e-10).scale(1.0));
    CHECK(lambda == doctest::Approx(-c * kx * kx * K.second_moment() / 2).epsilon(0.05));
}

TEST_CASE("evolution is contractive and conserves mass") {
    const double eps = 0.5;
    const BoxDomain b{1, 4.0, 256};
    oracle::Draw draw(8);
    const Medium M = oracle::random_medium(draw, 1);
    EpsOperator op(Kernel::gaussian(1, 0.25), M, b, eps);
    const BoxField u0 = gaussian_field(b, 0.7);
    const Trajectory tr = evolve_eps(op, u0, nullptr, 0.4, {8, 0.0});
    REQUIRE(tr.fields.size() == 9);
    CHECK(tr.times.back() == doctest::Approx(0.4));
    CHECK(tr.dt <= op.stable_step());
    CHECK(tr.steps % 8 == 0);
    for (std::size_t k = 1; k < tr.fields.size(); ++k) {
        CHECK(tr.fields[k].norm() <= tr.fields[k - 1].norm() * (1 + 1e-14));
        CHECK(tr.fields[k].integral() == doctest::Approx(u0.integral()).epsilon(1e-10));
    }
    EvolveOptions too_big{8, 2.0 * op.stable_step()};
    CHECK_THROWS_AS(evolution_step(op, 0.4, too_big), StabilityError);
    CHECK(evolution_step(op, 0.4, {8, 0.5 * op.stable_step()}) <= 0.5 * op.stable_step());
}

TEST_CASE("forcing enters linearly") {
    const double eps = 0.5;
    const BoxDomain b{1, 2.0, 64};
    EpsOperator op(Kernel::box(1, 0.5), Medium::constant(1, 1.0, 1.0, 1.0), b, eps);
    // A constant source on a generator that kills constants adds t * f.
    const Forcing f = [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.3); };
    const BoxField zero(b, 0.0);
    const Trajectory tr = evolve_eps(op, zero, f, 0.2, {4, 0.0});
    for (double v : tr.fields.back().values) CHECK(v == doctest::Approx(0.06).epsilon(1e-13));
}

TEST_CASE("homogenized solution is the heat kernel") {
    const BoxDomain b{1, 12.0, 512};
    Eigen::MatrixXd a(1, 1);
    a << 0.3;
    const BoxField u0 = gaussian_field(b, 1.0);
    HomogenizedSolution H(a, u0);
    const auto x = box_coordinates(b);
    const BoxField u = H.at(0.5);
    const BoxField g = H.gradient(0.5, 0);
    const BoxField hh = H.hessian(0.5, 0, 0);
    const double v = 1.0 + 2 * 0.3 * 0.5;
    for (int i = 0; i < b.Nx; i += 7) {
        const double ref = oracle::heat_gaussian(x[i], 1.0, 0.3, 0.5);
        CHECK(u.values[i] == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        CHECK(g.values[i] == doctest::Approx(-x[i] / v * ref).epsilon(1e-10).scale(1.0));
        CHECK(hh.values[i] == doctest::Approx((x[i] * x[i] / (v * v) - 1 / v) * ref).epsilon(1e-10).scale(1.0));
    }
    const Trajectory tr = evolve_homogenized(a, u0, 0.5, 5);
    CHECK(tr.fields.size() == 6);
    Eigen::MatrixXd neg(1, 1);
    neg << -0.1;
    CHECK_THROWS_AS(evolve_homogenized(neg, u0, 0.5), PositivityViolation);
}

TEST_CASE("cell interpolation in time and space") {
    const TorusGrid g{1, 16, 32};
    auto f = [](double xi, double s) { return std::cos(2 * pi * xi) * (1 + std::sin(2 * pi * s)) + 0.3 * std::sin(4 * pi * xi); };
    SpaceTimeField F(g);
    for (int n = 0; n < g.Nt; ++n)
        for (int i = 0; i < g.N; ++i) F.slice(n)[i] = f(i * g.h(), n * g.ds());
    const CellSampler S(F);
    const double s = 0.4137;
    const auto vals = S.at_time(s);
    for (int i = 0; i < g.N; ++i) CHECK(vals[i] == doctest::Approx(f(i * g.h(), s)).epsilon(1e-12).scale(1.0));

    SUBCASE("finer box interpolates") {
        const BoxDomain b{1, 2.0, 256};
        const double eps = 0.5;
        CellToBox map(g, b, eps);
        std::vector<double> out(b.nodes());
        map.tile(vals, out);
        for (int i = 0; i < b.Nx; ++i) CHECK(out[i] == doctest::Approx(f(b.coordinate(i) / eps, s)).epsilon(1e-12).scale(1.0));
    }
    SUBCASE("matching box copies") {
        const BoxDomain b{1, 2.0, 128};
        CellToBox map(g, b, 0.5);
        std::vector<double> out(b.nodes());
        map.tile(vals, out);
        for (int i = 0; i < b.Nx; ++i) {
            long c = (i - b.Nx / 2) % 16;
            if (c < 0) c += 16;
            CHECK(out[i] == vals[c]);
        }
    }
}

TEST_CASE("ansatz reduces to the homogenized solution when correctors vanish") {
    const TorusGrid g{1, 16, 16};
    CellProblem P(Kernel::box(1, 1.0), Medium::constant(1, 1.0, 1.0, 1.0), g);
    Corrector chi;
    const EffectiveMatrix e = compute_effective(P, &chi);
    const SecondCorrector kappa = solve_second_corrector(P, chi, e.a_hat);
    const BoxDomain b{1, 4.0, 128};
    const BoxField u0 = gaussian_field(b, 1.0);
    HomogenizedSolution H(e.a_eff, u0);
    Ansatz w(chi, &kappa, H, b, 0.5);
    const BoxField wt = w.at(0.3), ut = H.at(0.3);
    for (std::size_t i = 0; i < wt.values.size(); ++i) CHECK(wt.values[i] == doctest::Approx(ut.values[i]).epsilon(1e-13).scale(1.0));
}

TEST_CASE("small helpers") {
    const auto t = residual_times(1.0, 2, 4);
    REQUIRE(t.size() == 8);
    CHECK(t.front() == doctest::Approx(0.125));
    CHECK(t.back() == doctest::Approx(1.0));

    const BoxDomain b{1, 1.0, 16};
    Trajectory u, v;
    for (int k = 0; k < 3; ++k) {
        u.fields.emplace_back(b, 1.0 + 0.1 * k);
        v.fields.emplace_back(b, 1.0);
    }
    const auto [sup, last] = relative_errors(u, v);
    CHECK(sup == doctest::Approx(0.2));
    CHECK(last == doctest::Approx(0.2));
}

TEST_CASE("a short sweep decreases the error and rejects a leaking box") {
    std::vector<SeparableTerm> terms;
    terms.push_back({1.0, FourierSeries::constant(2, 1.0), {}});
    terms.push_back({0.5, FourierSeries(2, {{{1, 0}, 1.0, -pi / 2}}), FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, 0.0}})});
    const Medium M = Medium::separable_sum(1, terms, 0.25, 1.75).scaled(20.0);
    const Kernel K = Kernel::gaussian(1, 0.25);
    CellProblem P(K, M, TorusGrid{1, 16, 1024});
    const EffectiveMatrix e = compute_effective(P);
    SweepConfig cfg;
    cfg.L = 6.0;
    cfg.points_per_cell = 16;
    cfg.eps = {1.0, 0.5};
    cfg.T = 0.5;
    cfg.snapshots = 4;
    cfg.residual = false;
    const auto res = convergence_sweep(K, M, cfg, {e.a_eff});
    REQUIRE(res.size() == 1);
    REQUIRE(res[0].rows.size() == 2);
    CHECK(res[0].rows[1].sup_error < res[0].rows[0].sup_error);
    CHECK(std::isnan(res[0].rows[0].residual));
    cfg.L = 2.0;
    cfg.u0_sigma = 1.5;
    CHECK_THROWS_AS(convergence_sweep(K, M, cfg, {e.a_eff}), ConfigError);
}
