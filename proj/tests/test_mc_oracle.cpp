#include "doctest.h"
#include "oracles.hpp"

#include "perihom/errors.hpp"
#include "perihom/mc_oracle.hpp"

using namespace perihom;
using oracle::pi;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using B = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(Philox::block(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox::block(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox::block(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    Philox a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs_c |= x != c();
        differs_d |= x != d();
    }
    CHECK(differs_c);
    CHECK(differs_d);
    Philox u(1, 0);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        mean += v;
    }
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(4 * std::sqrt(1.0 / 12 / 100000) / 0.5));
}

TEST_CASE("displacement sampler reproduces the kernel") {
    const int n = 200000;
    for (const Kernel& K : {Kernel::gaussian(1, 0.3), Kernel::box(1, 0.8), Kernel::exponential(1, 0.2),
                            Kernel::gaussian(2, 0.25), Kernel::box(2, 0.6),
                            Kernel::tabulated_radial(1, {0.1, 0.5, 1.0}, {2.0, 1.0, 0.0})}) {
        CAPTURE(K.family());
        CAPTURE(K.dimension());
        const int d = K.dimension();
        DisplacementSampler S(K);
        Philox rng(5, 1);
        std::vector<double> z(d);
        double m2 = 0.0, m4 = 0.0, m1 = 0.0;
        const double r0 = 0.7 * std::sqrt(K.second_moment());
        long inside = 0;
        for (int i = 0; i < n; ++i) {
            S.sample(rng, z);
            double r2 = 0.0;
            for (double v : z) r2 += v * v;
            m1 += z[0];
            m2 += r2;
            m4 += r2 * r2;
            inside += std::sqrt(r2) <= r0;
        }
        m1 /= n;
        m2 /= n;
        m4 /= n;
        const double se2 = std::sqrt((m4 - m2 * m2) / n);
        CHECK(std::abs(m2 - K.second_moment()) <= 4 * se2);
        CHECK(std::abs(m1) <= 4 * std::sqrt(K.second_moment() / d / n));
        const double p = K.radial_cdf(r0);
        CHECK(std::abs(static_cast<double>(inside) / n - p) <= 4 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("homogeneous walks recover mean(mu) m2 / 2") {
    WalkConfig cfg;
    cfg.horizon = 10.0;
    cfg.paths = 20000;
    cfg.groups = 50;
    cfg.seed = 3;
    const Kernel K = Kernel::box(1, 1.0);
    SUBCASE("constant") {
        const MonteCarloResult r = simulate_diffusivity(K, Medium::constant(1, 1.0, 1.0, 1.0), cfg);
        CHECK(std::abs(r.a_mc(0, 0) - 1.0 / 6.0) <= 3 * r.se(0, 0));
        CHECK(r.accept_rate == 1.0);
        CHECK(r.paths == 20000);
    }
    SUBCASE("time-only") {
        const Medium M = Medium::time_only(1, FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, -pi / 2}}), 0.5, 1.5);
        const MonteCarloResult r = simulate_diffusivity(K, M, cfg);
        CHECK(std::abs(r.a_mc(0, 0) - 1.0 / 6.0) <= 3 * r.se(0, 0));
        CHECK(r.accept_rate == doctest::Approx(1.0 / 1.5).epsilon(0.01));
    }
    SUBCASE("two dimensions") {
        cfg.paths = 10000;
        const MonteCarloResult r = simulate_diffusivity(Kernel::gaussian(2, 0.3), Medium::constant(2, 2.0, 2.0, 2.0), cfg);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(r.a_mc(i, i) - 0.09) <= 3 * r.se(i, i));
        CHECK(std::abs(r.a_mc(0, 1)) <= 3 * r.se(0, 1));
    }
}

TEST_CASE("symmetric medium has no drift and runs are reproducible") {
    std::vector<SeparableTerm> terms;
    terms.push_back({1.0, FourierSeries::constant(2, 1.0), {}});
    terms.push_back({0.5, FourierSeries(2, {{{1, 0}, 1.0, -pi / 2}}), FourierSeries(1, {{{0}, 1.0, 0.0}, {{1}, 0.5, 0.0}})});
    const Medium M = Medium::separable_sum(1, terms, 0.25, 1.75);
    WalkConfig cfg;
    cfg.horizon = 5.0;
    cfg.paths = 4000;
    cfg.groups = 20;
    cfg.seed = 99;
    const Kernel K = Kernel::gaussian(1, 0.25);
    const MonteCarloResult a = simulate_diffusivity(K, M, cfg);
    CHECK(std::abs(a.drift(0)) <= 4 * a.drift_se(0));
    CHECK(a.accept_rate > 0.05);
    const MonteCarloResult b = simulate_diffusivity(K, M, cfg);
    CHECK(a.a_mc(0, 0) == b.a_mc(0, 0));
    CHECK(a.se(0, 0) == b.se(0, 0));
    cfg.threads = 3;
    const MonteCarloResult c = simulate_diffusivity(K, M, cfg);
    CHECK(a.a_mc(0, 0) == c.a_mc(0, 0));
    CHECK(a.proposals == c.proposals);
    cfg.seed = 100;
    CHECK(simulate_diffusivity(K, M, cfg).a_mc(0, 0) != a.a_mc(0, 0));
}

TEST_CASE("poor thinning acceptance is diagnosed") {
    WalkConfig cfg;
    cfg.horizon = 1.0;
    cfg.paths = 200;
    cfg.groups = 10;
    CHECK_THROWS_AS(simulate_diffusivity(Kernel::box(1, 1.0), Medium::constant(1, 0.01, 0.01, 1.0), cfg), MonteCarloDiagnostic);
    cfg.groups = 300;
    CHECK_THROWS_AS(simulate_diffusivity(Kernel::box(1, 1.0), Medium::constant(1, 1.0, 1.0, 1.0), cfg), ConfigError);
}
