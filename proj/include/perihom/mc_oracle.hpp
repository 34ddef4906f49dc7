#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "perihom/kernel.hpp"
#include "perihom/medium.hpp"

namespace perihom {

/// Philox4x32-10 counter-based generator. A stream is fixed by a 64-bit key
/// and a 64-bit stream index; successive calls walk the remaining counter
/// words. Satisfies UniformRandomBitGenerator.
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t key, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform double in (0, 1), 53 random bits.
    double uniform();

    /// One raw block: rounds applied to `counter` under `key`.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Draws z with density a(z).
class DisplacementSampler {
public:
    explicit DisplacementSampler(const Kernel& kernel);
    void sample(Philox& rng, std::span<double> z) const;

private:
    double radius(Philox& rng) const;

    Kernel kernel_;
};

struct WalkConfig {
    /// Horizon in periods of the medium.
    double horizon = 100.0;
    long paths = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Jackknife groups (contiguous path blocks).
    int groups = 100;
    /// Acceptance floor below which the run is rejected.
    double min_acceptance = 0.05;
};

struct MonteCarloResult {
    Eigen::MatrixXd a_mc;
    Eigen::MatrixXd se;
    /// mean(X_T) / T and its jackknife standard error.
    Eigen::VectorXd drift;
    Eigen::VectorXd drift_se;
    double accept_rate = 0.0;
    long paths = 0;
    long proposals = 0;
};

/// Estimates the effective diffusivity as Cov(X_T) / (2T) for the jump
/// process jumping from x to x + z at rate a(z) mu(x, x + z, s), simulated
/// exactly by thinning at rate mu_plus.
MonteCarloResult simulate_diffusivity(const Kernel& kernel, const Medium& medium, const WalkConfig& config);

}  // namespace perihom
