#ifndef ROSSBYLAB_LIMIT_SOLVERS_HPP
#define ROSSBYLAB_LIMIT_SOLVERS_HPP

#include "rossbylab/operators.hpp"

namespace rossby {

// Pseudo-spectral solvers for the planar limit dynamics: the incompressible
// Euler system in vorticity form, and its omega-regularized cousin that
// transports the potential vorticity Pi = (Lap_h - omega^2) q~ by grad_perp q~.
// Euler is exactly the omega = 0 instance of the same kernel.

struct cfl_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solver_blowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// q~ from Pi: (Lap_h - omega^2) q~ = Pi, mean-free gauge at omega = 0.
inline SpectralField invert_pv(const SpectralField& pv, double omega) {
    const Grid& g = pv.grid;
    SpectralField q(g, Parity::even);
    if (omega == 0.0) {
        double scale = 0.0;
        for (const complexd& c : pv.coeffs) scale = std::max(scale, std::abs(c));
        if (std::abs(pv.coeffs[0]) > 1e-10 * std::max(1.0, scale))
            throw std::runtime_error("invert_pv: omega = 0 with nonzero-mean potential vorticity");
    }
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double denom = g.xi1[ix] * g.xi1[ix] + g.xi2[iy] * g.xi2[iy] + omega * omega;
            q(0, iy, ix) = denom > 0.0 ? -pv(0, iy, ix) / denom : complexd(0.0);
        }
    return q;
}

/// Advection right side -grad_perp(q~) . grad(Pi), dealiased; the mean mode
/// is pinned to zero (exact for the continuous operator).
inline SpectralField pv_rhs(const SpectralField& pv, double omega) {
    SpectralField q = invert_pv(pv, omega);
    ParityField v1 = transform_inverse((-1.0) * spectral_derivative(q, 2));
    ParityField v2 = transform_inverse(spectral_derivative(q, 1));
    ParityField g1 = transform_inverse(spectral_derivative(pv, 1));
    ParityField g2 = transform_inverse(spectral_derivative(pv, 2));
    ParityField adv(pv.grid, Parity::even);
    for (std::size_t i = 0; i < adv.values.size(); ++i)
        adv.values[i] = -(v1.values[i] * g1.values[i] + v2.values[i] * g2.values[i]);
    SpectralField rhs = dealias(transform_forward(adv));
    rhs.coeffs[0] = 0.0;
    return rhs;
}

inline SpectralField advect_rk4(const SpectralField& pv0, double omega, double dt) {
    SpectralField k1 = pv_rhs(pv0, omega);
    SpectralField k2 = pv_rhs(pv0 + (0.5 * dt) * k1, omega);
    SpectralField k3 = pv_rhs(pv0 + (0.5 * dt) * k2, omega);
    SpectralField k4 = pv_rhs(pv0 + dt * k3, omega);
    SpectralField out = pv0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (const complexd& c : out.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw solver_blowup("advect_rk4: non-finite coefficient after step");
    return out;
}

inline void check_cfl(const SpectralField& pv, double omega, double dt, const char* who) {
    SpectralField q = invert_pv(pv, omega);
    ParityField v1 = transform_inverse((-1.0) * spectral_derivative(q, 2));
    ParityField v2 = transform_inverse(spectral_derivative(q, 1));
    double vmax = 0.0;
    for (std::size_t i = 0; i < v1.values.size(); ++i)
        vmax = std::max(vmax, std::hypot(v1.values[i], v2.values[i]));
    if (dt * vmax / pv.grid.dx > 0.5 + 1e-12)
        throw cfl_violation(std::string(who) + ": dt max|v|/dx = " +
                            std::to_string(dt * vmax / pv.grid.dx) + " exceeds 0.5");
}

} // namespace detail

namespace detail {

/// Zero mean up to round-off is pinned exactly; anything larger is a data error.
inline void require_mean_free(SpectralField& f, const char* who) {
    double scale = 0.0;
    for (const complexd& c : f.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(f.coeffs[0]) > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument(std::string(who) + ": field must be mean-free");
    f.coeffs[0] = 0.0;
}

} // namespace detail

/// curl of the horizontal velocity; zero mean, real-valued.
struct Vorticity2D {
    SpectralField zeta;

    explicit Vorticity2D(SpectralField z) : zeta(std::move(z)) {
        if (zeta.grid.nz != 1) throw std::invalid_argument("Vorticity2D: expected a horizontal grid");
        detail::require_mean_free(zeta, "Vorticity2D");
    }
};

/// Potential vorticity (Lap_h - omega^2) q~ and the rotation strength.
struct QGState {
    SpectralField pv;
    double omega = 0.0;

    QGState(SpectralField p, double om) : pv(std::move(p)), omega(om) {
        if (pv.grid.nz != 1) throw std::invalid_argument("QGState: expected a horizontal grid");
        if (omega < 0.0) throw std::invalid_argument("QGState: omega must be >= 0");
        if (omega == 0.0) detail::require_mean_free(pv, "QGState");
    }

    SpectralField stream() const { return detail::invert_pv(pv, omega); }
};

/// One RK4 step of d_t zeta + v . grad zeta = 0, v = grad_perp Lap^{-1} zeta.
inline Vorticity2D euler_step(const Vorticity2D& z, double dt) {
    detail::check_cfl(z.zeta, 0.0, dt, "euler_step");
    return Vorticity2D(detail::advect_rk4(z.zeta, 0.0, dt));
}

/// One RK4 step of d_t Pi + grad_perp(q~) . grad Pi = 0; omega = 0 is the
/// Euler step on the same data, bit for bit.
inline QGState qg_step(const QGState& st, double dt) {
    detail::check_cfl(st.pv, st.omega, dt, "qg_step");
    return QGState(detail::advect_rk4(st.pv, st.omega, dt), st.omega);
}

/// Conserved energy Int(|grad q~|^2 + omega^2 |q~|^2) dx, evaluated by
/// Parseval: sum |Pi^|^2 / (|xi|^2 + omega^2).
inline double qg_energy(const QGState& st) {
    const Grid& g = st.pv.grid;
    std::vector<double> terms(st.pv.coeffs.size(), 0.0);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double denom = g.xi1[ix] * g.xi1[ix] + g.xi2[iy] * g.xi2[iy] +
                                 st.omega * st.omega;
            if (denom > 0.0)
                terms[g.idx(0, iy, ix)] = std::norm(st.pv(0, iy, ix)) / denom;
        }
    return g.L * g.L * pairwise_sum(std::span<const double>(terms));
}

/// v = grad_perp q~ = (-d2 q~, d1 q~); divergence-free by construction.
inline std::pair<SpectralField, SpectralField> velocity_from_q(const QGState& st) {
    SpectralField q = st.stream();
    return {(-1.0) * spectral_derivative(q, 2), spectral_derivative(q, 1)};
}

/// d_t q~ of the potential-vorticity flow (spectral, exact in space).
inline SpectralField qg_dqdt(const QGState& st) {
    return detail::invert_pv(detail::pv_rhs(st.pv, st.omega), st.omega);
}

/// Balanced initial data from (already smoothed-truncated) slab fields:
///   Pi0 = Int curl_h u_h dx3 - omega Int rho1 dx3,
/// the potential vorticity of the kernel projection scaled by 1/omega.
/// As omega -> 0 the induced velocity tends to the Helmholtz projection of
/// the vertically averaged velocity.
inline QGState qg_initial_data(const SpectralField& u1, const SpectralField& u2,
                               const SpectralField& rho1, double omega) {
    check_same(u1.grid, u2.grid, "qg_initial_data");
    check_same(u1.grid, rho1.grid, "qg_initial_data");
    SpectralField curl = vertical_average(spectral_derivative(u2, 1) - spectral_derivative(u1, 2));
    SpectralField rbar = vertical_average(rho1);
    SpectralField pv = curl - omega * rbar;
    if (omega == 0.0) pv.coeffs[0] = 0.0;  // curl average is mean-free; drop round-off
    return QGState(std::move(pv), omega);
}

/// Kinetic energy and enstrophy of a vorticity field (Euler diagnostics).
inline double euler_kinetic_energy(const Vorticity2D& z) {
    QGState st(z.zeta, 0.0);
    return qg_energy(st);
}

inline double enstrophy(const SpectralField& zeta) {
    const double n = l2_norm(zeta);
    return n * n;
}

} // namespace rossby

#endif
