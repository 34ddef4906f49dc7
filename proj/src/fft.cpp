#include "perihom/fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

#include "perihom/errors.hpp"

namespace perihom {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct RealFft::Impl {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
};

RealFft::RealFft(int dimension, int extent)
    : dimension_(dimension), extent_(extent), impl_(std::make_unique<Impl>()) {
    if (dimension < 1 || extent < 2) throw ConfigError("RealFft needs dimension >= 1 and extent >= 2");
    real_size_ = 1;
    for (int i = 0; i < dimension; ++i) real_size_ *= static_cast<std::size_t>(extent);
    spectral_size_ = real_size_ / static_cast<std::size_t>(extent) * static_cast<std::size_t>(extent / 2 + 1);
    std::vector<int> n(dimension, extent);
    std::lock_guard lock(planner_mutex());
    impl_->real = fftw_alloc_real(real_size_);
    impl_->spec = fftw_alloc_complex(spectral_size_);
    impl_->fwd = fftw_plan_dft_r2c(dimension, n.data(), impl_->real, impl_->spec, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r(dimension, n.data(), impl_->spec, impl_->real, FFTW_ESTIMATE);
    if (!impl_->fwd || !impl_->bwd) throw Error("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
    std::copy(in.begin(), in.end(), impl_->real);
    fftw_execute(impl_->fwd);
    const auto* src = reinterpret_cast<const Complex*>(impl_->spec);
    std::copy(src, src + spectral_size_, out.begin());
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(impl_->spec));
    fftw_execute(impl_->bwd);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < real_size_; ++i) out[i] = impl_->real[i] * scale;
}

Correlator::Correlator(int dimension, int extent)
    : fft_(dimension, extent), reversed_(fft_.real_size()), work_(fft_.spectral_size()) {}

std::vector<Complex> Correlator::spectrum(std::span<const double> kernel) {
    // Correlation with k equals convolution with the reflected kernel k[-i].
    const int d = fft_.dimension();
    const int n = fft_.extent();
    const std::size_t total = fft_.real_size();
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i, j = 0, stride = 1;
        for (int axis = 0; axis < d; ++axis) {
            const std::size_t c = rest % n;
            rest /= n;
            j += ((n - c) % n) * stride;
            stride *= n;
        }
        reversed_[j] = kernel[i];
    }
    std::vector<Complex> spec(fft_.spectral_size());
    fft_.forward(reversed_, spec);
    return spec;
}

void Correlator::apply(std::span<const Complex> spectrum, std::span<const double> f, std::span<double> out) {
    fft_.forward(f, work_);
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= spectrum[i];
    fft_.inverse(work_, out);
}

std::string fftw_version_string() { return fftw_version; }

}  // namespace perihom
