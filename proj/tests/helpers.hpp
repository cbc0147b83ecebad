#ifndef ROSSBYLAB_TEST_HELPERS_HPP
#define ROSSBYLAB_TEST_HELPERS_HPP

#include "rossbylab/operators.hpp"
#include "rossbylab/util.hpp"

namespace rossby::testing {

/// Random real field band-limited to a fraction of the representable modes:
/// white noise projected through forward transform + truncation.
inline SpectralField random_band_limited(const Grid& g, Parity parity, Rng& rng,
                                         double frac = 0.5) {
    ParityField noise(g, parity);
    for (auto& v : noise.values) v = rng.normal();
    SpectralField F = transform_forward(noise);
    const int cx = std::max(1, int(frac * g.nx / 2));
    const int cy = std::max(1, int(frac * g.ny / 2));
    const int cz = std::max(1, int(frac * g.nz));
    for (int kappa = 0; kappa < g.nz; ++kappa)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const int sx = Grid::signed_mode(ix, g.nx);
                const int sy = Grid::signed_mode(iy, g.ny);
                if (std::abs(sx) > cx || std::abs(sy) > cy || kappa > cz)
                    F(kappa, iy, ix) = 0.0;
            }
    return F;
}

/// Alias-free product oracle: embed both factors on a doubled grid, multiply
/// there, transform back and restrict. Independent of the dealias path.
inline SpectralField padded_product(const SpectralField& A, const SpectralField& B) {
    const Grid& g = A.grid;
    Grid big = make_grid(2 * g.nx, 2 * g.ny, 2 * g.nz, g.L);
    auto embed = [&](const SpectralField& F) {
        SpectralField E(big, F.parity);
        for (int kappa = 0; kappa < g.nz; ++kappa)
            for (int iy = 0; iy < g.ny; ++iy)
                for (int ix = 0; ix < g.nx; ++ix) {
                    const int sx = Grid::signed_mode(ix, g.nx);
                    const int sy = Grid::signed_mode(iy, g.ny);
                    const int bx = sx >= 0 ? sx : sx + big.nx;
                    const int by = sy >= 0 ? sy : sy + big.ny;
                    E(kappa, by, bx) = F(kappa, iy, ix);
                }
        return E;
    };
    ParityField pa = transform_inverse(embed(A));
    ParityField pb = transform_inverse(embed(B));
    SpectralField prod_big = transform_forward(multiply(pa, pb));
    SpectralField out(g, prod_big.parity);
    for (int kappa = 0; kappa < g.nz; ++kappa)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const int sx = Grid::signed_mode(ix, g.nx);
                const int sy = Grid::signed_mode(iy, g.ny);
                const int bx = sx >= 0 ? sx : sx + big.nx;
                const int by = sy >= 0 ? sy : sy + big.ny;
                out(kappa, iy, ix) = prod_big(kappa, by, bx);
            }
    return out;
}

inline double max_coeff_diff(const SpectralField& A, const SpectralField& B) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.coeffs.size(); ++i)
        m = std::max(m, std::abs(A.coeffs[i] - B.coeffs[i]));
    return m;
}

inline double max_value_diff(const ParityField& a, const ParityField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace rossby::testing

#endif
