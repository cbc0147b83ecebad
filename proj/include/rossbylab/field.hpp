#ifndef ROSSBYLAB_FIELD_HPP
#define ROSSBYLAB_FIELD_HPP

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "rossbylab/fft.hpp"
#include "rossbylab/grid.hpp"

namespace rossby {

/// Parity in the vertical variable x3: the even/odd extension to the flat
/// circle of period 2. Odd fields vanish at x3 in {0,1}; even fields have
/// zero vertical derivative there. Slip conditions come for free.
enum class Parity { even, odd };

inline Parity flip(Parity p) { return p == Parity::even ? Parity::odd : Parity::even; }

/// Real samples on the grid, x fastest, vertical slowest.
struct ParityField {
    Grid grid;
    Parity parity = Parity::even;
    std::vector<double> values;

    ParityField() = default;
    ParityField(const Grid& g, Parity p) : grid(g), parity(p), values(g.size(), 0.0) {}

    double& operator()(int iz, int iy, int ix) { return values[grid.idx(iz, iy, ix)]; }
    double operator()(int iz, int iy, int ix) const { return values[grid.idx(iz, iy, ix)]; }
};

/// Complex coefficients indexed by (kappa, iy, ix): horizontal Fourier modes
/// xi, vertical cosine (even) or sine (odd) modes k = kappa*pi. Odd fields
/// keep slot kappa = 0 identically zero.
struct SpectralField {
    Grid grid;
    Parity parity = Parity::even;
    std::vector<complexd> coeffs;

    SpectralField() = default;
    SpectralField(const Grid& g, Parity p) : grid(g), parity(p), coeffs(g.size(), complexd(0.0)) {}

    complexd& operator()(int kappa, int iy, int ix) { return coeffs[grid.idx(kappa, iy, ix)]; }
    complexd operator()(int kappa, int iy, int ix) const { return coeffs[grid.idx(kappa, iy, ix)]; }
};

namespace detail {

/// Midpoint-grid cosine/sine analysis and synthesis tables for one nz.
struct VerticalBasis {
    int nz;
    // cos_tab[j*nz + kappa] = cos(kappa*pi*x_j), sin_tab likewise.
    std::vector<double> cos_tab, sin_tab;

    explicit VerticalBasis(int n) : nz(n), cos_tab(std::size_t(n) * n), sin_tab(std::size_t(n) * n) {
        for (int j = 0; j < nz; ++j) {
            const double x = (j + 0.5) / nz;
            for (int kappa = 0; kappa < nz; ++kappa) {
                cos_tab[std::size_t(j) * nz + kappa] = std::cos(kappa * pi * x);
                sin_tab[std::size_t(j) * nz + kappa] = std::sin(kappa * pi * x);
            }
        }
    }
};

inline const VerticalBasis& vertical_basis(int nz) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<VerticalBasis>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[nz];
    if (!slot) slot = std::make_unique<VerticalBasis>(nz);
    return *slot;
}

/// In-place vertical analysis over the kappa axis of a (nz, ny, nx) complex array.
inline void vertical_analyze(std::vector<complexd>& a, const Grid& g, Parity parity) {
    const VerticalBasis& vb = vertical_basis(g.nz);
    const std::size_t layer = g.layer_size();
    const int nz = g.nz;
    std::vector<complexd> col(nz);
    for (std::size_t p = 0; p < layer; ++p) {
        for (int j = 0; j < nz; ++j) col[j] = a[std::size_t(j) * layer + p];
        if (parity == Parity::even) {
            for (int kappa = 0; kappa < nz; ++kappa) {
                complexd s = 0.0;
                for (int j = 0; j < nz; ++j) s += col[j] * vb.cos_tab[std::size_t(j) * nz + kappa];
                a[std::size_t(kappa) * layer + p] = s * ((kappa == 0 ? 1.0 : 2.0) / nz);
            }
        } else {
            a[p] = 0.0;  // no kappa = 0 sine mode
            for (int kappa = 1; kappa < nz; ++kappa) {
                complexd s = 0.0;
                for (int j = 0; j < nz; ++j) s += col[j] * vb.sin_tab[std::size_t(j) * nz + kappa];
                a[std::size_t(kappa) * layer + p] = s * (2.0 / nz);
            }
        }
    }
}

/// In-place vertical synthesis, inverse of vertical_analyze.
inline void vertical_synthesize(std::vector<complexd>& a, const Grid& g, Parity parity) {
    const VerticalBasis& vb = vertical_basis(g.nz);
    const std::size_t layer = g.layer_size();
    const int nz = g.nz;
    std::vector<complexd> col(nz);
    for (std::size_t p = 0; p < layer; ++p) {
        for (int kappa = 0; kappa < nz; ++kappa) col[kappa] = a[std::size_t(kappa) * layer + p];
        const std::vector<double>& tab = parity == Parity::even ? vb.cos_tab : vb.sin_tab;
        const int k0 = parity == Parity::even ? 0 : 1;
        for (int j = 0; j < nz; ++j) {
            complexd s = 0.0;
            for (int kappa = k0; kappa < nz; ++kappa) s += col[kappa] * tab[std::size_t(j) * nz + kappa];
            a[std::size_t(j) * layer + p] = s;
        }
    }
}

} // namespace detail

/// Physical samples -> spectral coefficients. Exact (round-trip to machine
/// precision) for fields band-limited to the stored modes; odd-parity input
/// is projected onto sine modes kappa <= nz-1.
inline SpectralField transform_forward(const ParityField& f) {
    SpectralField out(f.grid, f.parity);
    if (f.values.size() != f.grid.size())
        throw std::invalid_argument("transform_forward: sample count does not match grid");
    std::vector<complexd> work(f.values.begin(), f.values.end());
    horizontal_fft(f.grid.nx, f.grid.ny, f.grid.nz).forward(work);
    detail::vertical_analyze(work, f.grid, f.parity);
    out.coeffs = std::move(work);
    return out;
}

/// Spectral coefficients -> physical samples (real part; imaginary residue of
/// a Hermitian-symmetric field is round-off).
inline ParityField transform_inverse(const SpectralField& F) {
    ParityField out(F.grid, F.parity);
    if (F.coeffs.size() != F.grid.size())
        throw std::invalid_argument("transform_inverse: coefficient count does not match grid");
    std::vector<complexd> work = F.coeffs;
    detail::vertical_synthesize(work, F.grid, F.parity);
    horizontal_fft(F.grid.nx, F.grid.ny, F.grid.nz).backward(work);
    for (std::size_t i = 0; i < work.size(); ++i) out.values[i] = work[i].real();
    return out;
}

} // namespace rossby

#endif
