#ifndef ROSSBYLAB_GRID_HPP
#define ROSSBYLAB_GRID_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "rossbylab/util.hpp"

namespace rossby {

/// Computational surrogate of the slab R^2 x (0,1): a horizontally periodic
/// box of side L with nx*ny collocation points, and nz vertical midpoints
/// x3 = (j+1/2)/nz on (0,1). Horizontal wavenumbers xi = (2*pi/L)*s with
/// signed integer s; vertical wavenumbers k = kappa*pi, kappa = 0..nz-1
/// (cosine modes for even fields, sine modes kappa >= 1 for odd ones).
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    double L = 0.0;

    std::vector<double> xi1;  // indexed by ix
    std::vector<double> xi2;  // indexed by iy
    std::vector<double> kz;   // kappa*pi, indexed by kappa

    double dx = 0.0;          // horizontal spacing L/nx
    double dz = 0.0;          // vertical spacing 1/nz

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
    std::size_t layer_size() const { return static_cast<std::size_t>(nx) * ny; }

    std::size_t idx(int iz, int iy, int ix) const {
        return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
    }

    double x1(int ix) const { return L * ix / nx; }
    double x2(int iy) const { return L * iy / ny; }
    double x3(int iz) const { return (iz + 0.5) / nz; }

    /// Signed mode integer for FFT bin i of n bins.
    static int signed_mode(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && L == o.L;
    }

    /// The purely horizontal companion grid (nz = 1, k = 0 only).
    Grid horizontal() const;
};

inline Grid make_grid(int nx, int ny, int nz, double L) {
    if (!is_pow2(nx) || !is_pow2(ny))
        throw std::invalid_argument("make_grid: nx and ny must be powers of two (got " +
                                    std::to_string(nx) + ", " + std::to_string(ny) + ")");
    if (nz < 1) throw std::invalid_argument("make_grid: nz must be >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: period L must be positive");

    Grid g;
    g.nx = nx; g.ny = ny; g.nz = nz; g.L = L;
    g.dx = L / nx;
    g.dz = 1.0 / nz;
    g.xi1.resize(nx);
    g.xi2.resize(ny);
    g.kz.resize(nz);
    const double dk = 2.0 * pi / L;
    for (int i = 0; i < nx; ++i) g.xi1[i] = dk * Grid::signed_mode(i, nx);
    for (int i = 0; i < ny; ++i) g.xi2[i] = dk * Grid::signed_mode(i, ny);
    for (int kappa = 0; kappa < nz; ++kappa) g.kz[kappa] = kappa * pi;
    return g;
}

inline Grid Grid::horizontal() const { return make_grid(nx, ny, 1, L); }

} // namespace rossby

#endif
