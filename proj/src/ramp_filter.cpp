#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "lvr/errors.hpp"
#include "lvr/projector.hpp"

namespace lvr {

namespace {

struct RampPlan {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    std::vector<double> response;
};

// Plan creation is not thread-safe in FFTW; execution with the new-array
// interface is. Plans live for the process lifetime.
const RampPlan& plan_for(std::size_t length) {
    static std::mutex mutex;
    static std::map<std::size_t, RampPlan> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(length);
    if (it != plans.end())
        return it->second;
    std::vector<double> real(length);
    std::vector<std::complex<double>> spectrum(length / 2 + 1);
    const int n = static_cast<int>(length);
    auto* cplx = reinterpret_cast<fftw_complex*>(spectrum.data());
    RampPlan plan;
    plan.forward = fftw_plan_dft_r2c_1d(n, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan.inverse = fftw_plan_dft_c2r_1d(n, cplx, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan.response = ramp_frequency_response(length);
    return plans.emplace(length, std::move(plan)).first->second;
}

} // namespace

std::size_t ramp_padded_length(std::size_t n_detectors) {
    std::size_t length = 1;
    while (length < 2 * n_detectors)
        length <<= 1;
    return length;
}

std::vector<double> ramp_frequency_response(std::size_t padded_length) {
    if (padded_length < 2 || (padded_length & (padded_length - 1)) != 0)
        throw ConfigError("ramp response needs a power-of-two length");
    std::vector<double> response(padded_length / 2 + 1);
    const auto length = static_cast<double>(padded_length);
    for (std::size_t k = 0; k < response.size(); ++k)
        response[k] = 2.0 * static_cast<double>(k) / length;
    return response;
}

Sinogram ramp_filter(const Sinogram& sino) {
    sino.geometry.validate();
    const std::size_t n_det = sino.geometry.n_detectors;
    if (sino.data.size() != sino.geometry.n_views() * n_det)
        throw ConfigError("sinogram data does not match its geometry");
    const std::size_t length = ramp_padded_length(n_det);
    const RampPlan& plan = plan_for(length);
    const double inv_length = 1.0 / static_cast<double>(length);
    Sinogram out(sino.geometry);
    const auto n_views = static_cast<std::ptrdiff_t>(sino.geometry.n_views());

#pragma omp parallel
    {
        std::vector<double> real(length);
        std::vector<std::complex<double>> spectrum(length / 2 + 1);
        auto* cplx = reinterpret_cast<fftw_complex*>(spectrum.data());
#pragma omp for schedule(static)
        for (std::ptrdiff_t v = 0; v < n_views; ++v) {
            const auto in_row = sino.row(static_cast<std::size_t>(v));
            std::fill(real.begin(), real.end(), 0.0);
            std::copy(in_row.begin(), in_row.end(), real.begin());
            fftw_execute_dft_r2c(plan.forward, real.data(), cplx);
            for (std::size_t k = 0; k < spectrum.size(); ++k)
                spectrum[k] *= plan.response[k] * inv_length;
            fftw_execute_dft_c2r(plan.inverse, cplx, real.data());
            auto out_row = out.row(static_cast<std::size_t>(v));
            std::copy(real.begin(), real.begin() + static_cast<std::ptrdiff_t>(n_det), out_row.begin());
        }
    }
    return out;
}

} // namespace lvr
