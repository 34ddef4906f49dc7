#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace perihom {

using Complex = std::complex<double>;

/// Real-to-complex FFT on a periodic d-dimensional lattice with the same
/// extent on every axis. Backed by FFTW with estimate-mode plans, which are
/// deterministic across runs. An instance owns its buffers and must not be
/// shared between threads; plan creation is serialized internally.
class RealFft {
public:
    RealFft(int dimension, int extent);
    ~RealFft();
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    int dimension() const noexcept { return dimension_; }
    int extent() const noexcept { return extent_; }
    std::size_t real_size() const noexcept { return real_size_; }
    /// extent^{d-1} * (extent/2 + 1) complex coefficients.
    std::size_t spectral_size() const noexcept { return spectral_size_; }

    void forward(std::span<const double> in, std::span<Complex> out);
    /// Normalized inverse: inverse(forward(x)) == x.
    void inverse(std::span<const Complex> in, std::span<double> out);

private:
    struct Impl;
    int dimension_;
    int extent_;
    std::size_t real_size_;
    std::size_t spectral_size_;
    std::unique_ptr<Impl> impl_;
};

/// Circular correlation on a periodic lattice:
/// out[i] = sum_k kernel[k] * f[i + k] (indices modulo extent per axis).
class Correlator {
public:
    Correlator(int dimension, int extent);

    /// Spectrum of a kernel array for use with `apply`.
    std::vector<Complex> spectrum(std::span<const double> kernel);
    void apply(std::span<const Complex> spectrum, std::span<const double> f, std::span<double> out);

    RealFft& fft() noexcept { return fft_; }

private:
    RealFft fft_;
    std::vector<double> reversed_;
    std::vector<Complex> work_;
};

/// Version string of the linked FFTW library.
std::string fftw_version_string();

}  // namespace perihom
