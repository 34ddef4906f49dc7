#include "perihom/mc_oracle.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "perihom/errors.hpp"
#include "perihom/parallel.hpp"

namespace perihom {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

struct Moments {
    long count = 0;
    long proposals = 0;
    long accepted = 0;
    Eigen::VectorXd sum;
    Eigen::MatrixXd outer;
};

Eigen::MatrixXd covariance(const Eigen::VectorXd& sum, const Eigen::MatrixXd& outer, double n) {
    const Eigen::VectorXd mean = sum / n;
    return (outer - n * mean * mean.transpose()) / (n - 1.0);
}

}  // namespace

Philox::Philox(std::uint64_t key, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      counter_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, c[0], hi0, lo0);
        mulhilo(philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += philox_w0;
        k[1] += philox_w1;
    }
    return c;
}

Philox::result_type Philox::operator()() {
    if (used_ == 4) {
        buffer_ = block(counter_, key_);
        if (++counter_[0] == 0) ++counter_[1];
        used_ = 0;
    }
    return buffer_[used_++];
}

double Philox::uniform() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return (static_cast<double>(hi * 67108864u + lo) + 0.5) / 9007199254740992.0;
}

DisplacementSampler::DisplacementSampler(const Kernel& kernel) : kernel_(kernel) {}

double DisplacementSampler::radius(Philox& rng) const {
    const int d = kernel_.dimension();
    const double u = rng.uniform();
    switch (kernel_.family()) {
        case KernelFamily::box:
            return kernel_.parameter() * std::pow(u, 1.0 / d);
        case KernelFamily::exponential: {
            std::gamma_distribution<double> gamma(d, kernel_.parameter());
            return gamma(rng);
        }
        default: {
            double lo = 0.0, hi = kernel_.support_radius();
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (kernel_.radial_cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
}

void DisplacementSampler::sample(Philox& rng, std::span<double> z) const {
    const int d = kernel_.dimension();
    std::normal_distribution<double> normal;
    if (kernel_.family() == KernelFamily::gaussian) {
        for (int a = 0; a < d; ++a) z[a] = kernel_.parameter() * normal(rng);
        return;
    }
    const double r = radius(rng);
    if (d == 1) {
        z[0] = (rng() & 1u) ? r : -r;
        return;
    }
    double n2 = 0.0;
    for (int a = 0; a < d; ++a) {
        z[a] = normal(rng);
        n2 += z[a] * z[a];
    }
    const double scale = r / std::sqrt(n2);
    for (int a = 0; a < d; ++a) z[a] *= scale;
}

MonteCarloResult simulate_diffusivity(const Kernel& kernel, const Medium& medium, const WalkConfig& config) {
    if (!(config.horizon > 0.0)) throw ConfigError("walk horizon must be positive");
    if (config.groups < 2 || config.paths < 2L * config.groups)
        throw ConfigError("need at least two jackknife groups with two paths each");
    if (kernel.dimension() != medium.dimension()) throw ConfigError("kernel and medium dimensions differ");
    const int d = kernel.dimension();
    const double rate = medium.mu_plus();
    const DisplacementSampler sampler(kernel);
    const double T = config.horizon;

    std::vector<Moments> groups(config.groups);
    parallel_for(groups.size(), config.threads, [&](std::size_t g) {
        Moments m;
        m.sum = Eigen::VectorXd::Zero(d);
        m.outer = Eigen::MatrixXd::Zero(d, d);
        const long begin = config.paths * static_cast<long>(g) / config.groups;
        const long end = config.paths * static_cast<long>(g + 1) / config.groups;
        std::vector<double> x(d), y(d), z(d), xi(d), eta(d);
        for (long p = begin; p < end; ++p) {
            Philox rng(config.seed, static_cast<std::uint64_t>(p));
            std::fill(x.begin(), x.end(), 0.0);
            double t = 0.0;
            while (true) {
                t -= std::log(rng.uniform()) / rate;
                if (t > T) break;
                sampler.sample(rng, z);
                for (int a = 0; a < d; ++a) {
                    y[a] = x[a] + z[a];
                    xi[a] = x[a] - std::floor(x[a]);
                    eta[a] = y[a] - std::floor(y[a]);
                }
                ++m.proposals;
                if (rng.uniform() * rate < medium.evaluate(xi, eta, t - std::floor(t))) {
                    x.swap(y);
                    ++m.accepted;
                }
            }
            const Eigen::Map<const Eigen::VectorXd> X(x.data(), d);
            m.sum += X;
            m.outer += X * X.transpose();
            ++m.count;
        }
        groups[g] = std::move(m);
    });

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
    long proposals = 0, accepted = 0;
    for (const auto& m : groups) {
        sum += m.sum;
        outer += m.outer;
        proposals += m.proposals;
        accepted += m.accepted;
    }
    const double n = static_cast<double>(config.paths);
    MonteCarloResult r;
    r.paths = config.paths;
    r.proposals = proposals;
    r.accept_rate = proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    r.a_mc = covariance(sum, outer, n) / (2.0 * T);
    r.drift = sum / (n * T);

    const double G = static_cast<double>(config.groups);
    std::vector<Eigen::MatrixXd> a_loo;
    std::vector<Eigen::VectorXd> drift_loo;
    for (const auto& m : groups) {
        const double k = n - static_cast<double>(m.count);
        a_loo.push_back(covariance(sum - m.sum, outer - m.outer, k) / (2.0 * T));
        drift_loo.push_back((sum - m.sum) / (k * T));
    }
    Eigen::MatrixXd a_bar = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd drift_bar = Eigen::VectorXd::Zero(d);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        a_bar += a_loo[g] / G;
        drift_bar += drift_loo[g] / G;
    }
    r.se = Eigen::MatrixXd::Zero(d, d);
    r.drift_se = Eigen::VectorXd::Zero(d);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        r.se += (a_loo[g] - a_bar).cwiseAbs2();
        r.drift_se += (drift_loo[g] - drift_bar).cwiseAbs2();
    }
    r.se = ((G - 1.0) / G * r.se).cwiseSqrt();
    r.drift_se = ((G - 1.0) / G * r.drift_se).cwiseSqrt();

    if (r.accept_rate < config.min_acceptance) {
        std::ostringstream msg;
        msg << "thinning acceptance rate " << r.accept_rate << " is below " << config.min_acceptance
            << "; mu_plus = " << rate << " is a loose bound";
        throw MonteCarloDiagnostic(msg.str());
    }
    return r;
}

}  // namespace perihom
