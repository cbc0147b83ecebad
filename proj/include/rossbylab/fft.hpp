#ifndef ROSSBYLAB_FFT_HPP
#define ROSSBYLAB_FFT_HPP

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "rossbylab/util.hpp"

namespace rossby {

/// Batched 2D complex FFT over the horizontal layers of a (nz, ny, nx) array.
/// Owns aligned FFTW buffers; execution copies through them and is serialized,
/// so one cached instance per shape is safe to share between threads.
class HorizontalFft {
public:
    HorizontalFft(int nx, int ny, int nz) : nx_(nx), ny_(ny), nz_(nz) {
        const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!buf_) throw std::bad_alloc();
        int dims[2] = {ny, nx};
        const int layer = nx * ny;
        fwd_ = fftw_plan_many_dft(2, dims, nz, buf_, nullptr, 1, layer,
                                  buf_, nullptr, 1, layer, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_many_dft(2, dims, nz, buf_, nullptr, 1, layer,
                                  buf_, nullptr, 1, layer, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("HorizontalFft: FFTW planning failed");
    }

    ~HorizontalFft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    HorizontalFft(const HorizontalFft&) = delete;
    HorizontalFft& operator=(const HorizontalFft&) = delete;

    /// In-place forward transform, scaled by 1/(nx*ny) so that a constant
    /// field maps to amplitude at the zero mode.
    void forward(std::vector<complexd>& a) const {
        std::lock_guard<std::mutex> lock(mtx_);
        run(a, fwd_, 1.0 / (static_cast<double>(nx_) * ny_));
    }

    /// In-place inverse of forward (unscaled FFTW backward).
    void backward(std::vector<complexd>& a) const {
        std::lock_guard<std::mutex> lock(mtx_);
        run(a, bwd_, 1.0);
    }

private:
    void run(std::vector<complexd>& a, fftw_plan plan, double scale) const {
        const std::size_t n = static_cast<std::size_t>(nx_) * ny_ * nz_;
        if (a.size() != n) throw std::invalid_argument("HorizontalFft: shape mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            buf_[i][0] = a[i].real();
            buf_[i][1] = a[i].imag();
        }
        fftw_execute(plan);
        for (std::size_t i = 0; i < n; ++i)
            a[i] = complexd(buf_[i][0] * scale, buf_[i][1] * scale);
    }

    int nx_, ny_, nz_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
    mutable std::mutex mtx_;
};

/// Process-wide plan cache keyed by shape.
inline const HorizontalFft& horizontal_fft(int nx, int ny, int nz) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<HorizontalFft>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[{nx, ny, nz}];
    if (!slot) slot = std::make_unique<HorizontalFft>(nx, ny, nz);
    return *slot;
}

} // namespace rossby

#endif
