#ifndef ROSSBYLAB_OPERATORS_HPP
#define ROSSBYLAB_OPERATORS_HPP

#include <algorithm>
#include <cmath>

#include "rossbylab/field.hpp"

namespace rossby {

// ---- field algebra ---------------------------------------------------------

inline void check_same(const Grid& a, const Grid& b, const char* who) {
    if (!(a == b)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    check_same(a.grid, b.grid, "SpectralField+");
    if (a.parity != b.parity) throw std::invalid_argument("SpectralField+: parity mismatch");
    SpectralField out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += b.coeffs[i];
    return out;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    check_same(a.grid, b.grid, "SpectralField-");
    if (a.parity != b.parity) throw std::invalid_argument("SpectralField-: parity mismatch");
    SpectralField out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] -= b.coeffs[i];
    return out;
}

inline SpectralField operator*(double s, const SpectralField& a) {
    SpectralField out = a;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

inline ParityField operator+(const ParityField& a, const ParityField& b) {
    check_same(a.grid, b.grid, "ParityField+");
    if (a.parity != b.parity) throw std::invalid_argument("ParityField+: parity mismatch");
    ParityField out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

inline ParityField operator-(const ParityField& a, const ParityField& b) {
    check_same(a.grid, b.grid, "ParityField-");
    if (a.parity != b.parity) throw std::invalid_argument("ParityField-: parity mismatch");
    ParityField out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

inline ParityField operator*(double s, const ParityField& a) {
    ParityField out = a;
    for (auto& v : out.values) v *= s;
    return out;
}

/// Pointwise product; parity follows the sign rule of the vertical extension.
inline ParityField multiply(const ParityField& a, const ParityField& b) {
    check_same(a.grid, b.grid, "multiply");
    ParityField out(a.grid, a.parity == b.parity ? Parity::even : Parity::odd);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

// ---- derivatives -----------------------------------------------------------

/// Spectral partial derivative along axis 1, 2 (multiplication by (i*xi)^order)
/// or 3 (cosine/sine ladder; each order flips parity).
inline SpectralField spectral_derivative(const SpectralField& F, int axis, int order = 1) {
    if (order < 1) throw std::invalid_argument("spectral_derivative: order must be >= 1");
    if (axis < 1 || axis > 3) throw std::invalid_argument("spectral_derivative: axis must be 1, 2 or 3");
    const Grid& g = F.grid;
    SpectralField out = F;
    if (axis == 1 || axis == 2) {
        for (int kappa = 0; kappa < g.nz; ++kappa)
            for (int iy = 0; iy < g.ny; ++iy)
                for (int ix = 0; ix < g.nx; ++ix) {
                    const double xi = axis == 1 ? g.xi1[ix] : g.xi2[iy];
                    complexd m(1.0, 0.0);
                    for (int o = 0; o < order; ++o) m *= complexd(0.0, xi);
                    out(kappa, iy, ix) *= m;
                }
        return out;
    }
    // vertical: d/dx3 of cos(k x3) is -k sin(k x3), of sin(k x3) is k cos(k x3)
    const std::size_t layer = g.layer_size();
    for (int o = 0; o < order; ++o) {
        const double sign = out.parity == Parity::even ? -1.0 : 1.0;
        for (int kappa = 0; kappa < g.nz; ++kappa) {
            const double fac = sign * g.kz[kappa];
            for (std::size_t p = 0; p < layer; ++p)
                out.coeffs[std::size_t(kappa) * layer + p] *= fac;
        }
        out.parity = flip(out.parity);
    }
    return out;
}

/// Horizontal Laplacian (multiplication by -|xi|^2).
inline SpectralField laplacian_h(const SpectralField& F) {
    const Grid& g = F.grid;
    SpectralField out = F;
    for (int kappa = 0; kappa < g.nz; ++kappa)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                out(kappa, iy, ix) *= -(g.xi1[ix] * g.xi1[ix] + g.xi2[iy] * g.xi2[iy]);
    return out;
}

// ---- dealiasing ------------------------------------------------------------

// Strictly below a third of the alias period in each direction, so quadratic
// products never fold back inside the kept band. (The horizontal alias period
// is n; vertically the midpoint cosine/sine grid has period 2*nz.)
inline int dealias_cut_h(int n) { return (n - 1) / 3; }
inline int dealias_cut_v(int nz) { return (2 * nz - 1) / 3; }

/// 2/3-rule truncation in every direction; idempotent.
inline SpectralField dealias(const SpectralField& F) {
    const Grid& g = F.grid;
    SpectralField out = F;
    const int cx = dealias_cut_h(g.nx), cy = dealias_cut_h(g.ny), cz = dealias_cut_v(g.nz);
    for (int kappa = 0; kappa < g.nz; ++kappa)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const int sx = Grid::signed_mode(ix, g.nx);
                const int sy = Grid::signed_mode(iy, g.ny);
                if (std::abs(sx) > cx || std::abs(sy) > cy || kappa > cz)
                    out(kappa, iy, ix) = 0.0;
            }
    return out;
}

// ---- vertical average ------------------------------------------------------

/// Integral over x3 in (0,1), returned on the horizontal companion grid.
/// Even fields: the kappa = 0 coefficient. Odd fields: sum of 2/(kappa*pi)
/// over odd kappa (the exact sine means).
inline SpectralField vertical_average(const SpectralField& F) {
    const Grid& g = F.grid;
    SpectralField out(g.horizontal(), Parity::even);
    const std::size_t layer = g.layer_size();
    if (F.parity == Parity::even) {
        for (std::size_t p = 0; p < layer; ++p) out.coeffs[p] = F.coeffs[p];
    } else {
        for (std::size_t p = 0; p < layer; ++p) {
            complexd s = 0.0;
            for (int kappa = 1; kappa < g.nz; kappa += 2)
                s += F.coeffs[std::size_t(kappa) * layer + p] * (2.0 / (kappa * pi));
            out.coeffs[p] = s;
        }
    }
    return out;
}

// ---- Helmholtz solve / projection -----------------------------------------

/// Solve -Lap_h q + omega^2 q = rhs on the horizontal grid. For omega = 0 the
/// zero mode takes the mean-free gauge; a nonzero mean is then unsolvable.
inline SpectralField invert_helmholtz_h(const SpectralField& rhs, double omega) {
    const Grid& g = rhs.grid;
    if (g.nz != 1) throw std::invalid_argument("invert_helmholtz_h: expected a horizontal (nz = 1) field");
    if (omega < 0.0) throw std::invalid_argument("invert_helmholtz_h: omega must be >= 0");
    SpectralField q(g, Parity::even);
    if (omega == 0.0) {
        double scale = 0.0;
        for (const complexd& c : rhs.coeffs) scale = std::max(scale, std::abs(c));
        if (std::abs(rhs.coeffs[g.idx(0, 0, 0)]) > 1e-10 * std::max(1.0, scale))
            throw std::runtime_error("invert_helmholtz_h: omega = 0 with nonzero-mean right side");
    }
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double xi2 = g.xi1[ix] * g.xi1[ix] + g.xi2[iy] * g.xi2[iy];
            const double denom = xi2 + omega * omega;
            q(0, iy, ix) = denom > 0.0 ? rhs(0, iy, ix) / denom : complexd(0.0);
        }
    return q;
}

/// Leray/Helmholtz projection of a horizontal vector field onto its
/// divergence-free part. The zero mode (a constant field) passes through.
inline void helmholtz_project_h(SpectralField& U1, SpectralField& U2) {
    check_same(U1.grid, U2.grid, "helmholtz_project_h");
    const Grid& g = U1.grid;
    if (g.nz != 1) throw std::invalid_argument("helmholtz_project_h: expected horizontal fields");
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x1 = g.xi1[ix], x2 = g.xi2[iy];
            const double xi2 = x1 * x1 + x2 * x2;
            if (xi2 == 0.0) continue;
            const complexd dv = (x1 * U1(0, iy, ix) + x2 * U2(0, iy, ix)) / xi2;
            U1(0, iy, ix) -= x1 * dv;
            U2(0, iy, ix) -= x2 * dv;
        }
}

// ---- norms and integrals ---------------------------------------------------

inline double parseval_weight(Parity parity, int kappa) {
    return (parity == Parity::even && kappa == 0) ? 1.0 : 0.5;
}

/// L2(Omega) norm by Parseval, deterministic summation order.
inline double l2_norm(const SpectralField& F) {
    const Grid& g = F.grid;
    const std::size_t layer = g.layer_size();
    std::vector<double> terms(F.coeffs.size());
    for (int kappa = 0; kappa < g.nz; ++kappa) {
        const double w = parseval_weight(F.parity, kappa);
        for (std::size_t p = 0; p < layer; ++p) {
            const std::size_t i = std::size_t(kappa) * layer + p;
            terms[i] = w * std::norm(F.coeffs[i]);
        }
    }
    return std::sqrt(g.L * g.L * pairwise_sum(std::span<const double>(terms)));
}

/// L2 inner product <F, G> of two same-parity fields (real part).
inline double inner_product_l2(const SpectralField& F, const SpectralField& G) {
    check_same(F.grid, G.grid, "inner_product_l2");
    if (F.parity != G.parity) return 0.0;  // orthogonal vertical bases
    const Grid& g = F.grid;
    const std::size_t layer = g.layer_size();
    std::vector<double> terms(F.coeffs.size());
    for (int kappa = 0; kappa < g.nz; ++kappa) {
        const double w = parseval_weight(F.parity, kappa);
        for (std::size_t p = 0; p < layer; ++p) {
            const std::size_t i = std::size_t(kappa) * layer + p;
            terms[i] = w * (F.coeffs[i] * std::conj(G.coeffs[i])).real();
        }
    }
    return g.L * g.L * pairwise_sum(std::span<const double>(terms));
}

/// Integral over Omega of a sampled field (midpoint x trapezoid rule; exact
/// for band-limited fields).
inline double integral(const ParityField& f) {
    const Grid& g = f.grid;
    return g.L * g.L / (double(g.nx) * g.ny * g.nz) * pairwise_sum(std::span<const double>(f.values));
}

inline double sup_norm(const ParityField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_norm(const SpectralField& F) {
    return sup_norm(transform_inverse(F));
}

/// L2 norm from samples (exact for band-limited fields below Nyquist).
inline double l2_norm_phys(const ParityField& f) {
    const Grid& g = f.grid;
    std::vector<double> sq(f.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = f.values[i] * f.values[i];
    return std::sqrt(g.L * g.L / (double(g.nx) * g.ny * g.nz) * pairwise_sum(std::span<const double>(sq)));
}

} // namespace rossby

#endif
