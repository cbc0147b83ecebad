#ifndef ROSSBYLAB_COMPRESSIBLE_HPP
#define ROSSBYLAB_COMPRESSIBLE_HPP

#include <functional>

#include "rossbylab/cutoff.hpp"
#include "rossbylab/eos.hpp"
#include "rossbylab/limit_solvers.hpp"
#include "rossbylab/wave_operator.hpp"

namespace rossby {

// Desk-scale solver for the scaled rotating compressible system, slip
// conditions enforced by parity. Pressure and gravity enter in the
// well-balanced combination -eps^{-2m} rho grad(H'(rho) - H'(rho~)), which
// equals -eps^{-2m} grad p + eps^{-2n} rho grad G in the continuum (the
// static relation H'(rho~) = eps^{2(m-n)} G + H'(1) eliminates G) and makes
// the static state an exact fixed point of the discrete step.

struct vacuum_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct positivity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FluidState {
    ParityField rho;       // even
    ParityField u1, u2;    // even
    ParityField u3;        // odd
    double time = 0.0;

    FluidState() = default;
    explicit FluidState(const Grid& g)
        : rho(g, Parity::even), u1(g, Parity::even), u2(g, Parity::even), u3(g, Parity::odd) {}
};

// ---- static and initial states ----------------------------------------------

/// Pointwise solution of the static problem; depends on x3 only, with
/// sup |rho~ - 1| = O(eps^{2(m-n)}).
inline ParityField static_state(const ScalingRegime& rg, const EquationOfState& eos,
                                const Grid& g) {
    ParityField rho(g, Parity::even);
    const double e = rg.eps2mn();
    for (int iz = 0; iz < g.nz; ++iz) {
        const double val = eos.static_density(g.x3(iz), e);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) rho(iz, iy, ix) = val;
    }
    return rho;
}

struct InitialState {
    FluidState state;
    bool support_warning = false;  // data reach within 10% of the periodic frame
};

/// rho(0) = rho~ + eps^m rho1, u(0) = u0. Ill-prepared data by construction.
inline InitialState initial_state(const ParityField& rho1, const ParityField& u01,
                                  const ParityField& u02, const ParityField& u03,
                                  const ScalingRegime& rg, const EquationOfState& eos) {
    const Grid& g = rho1.grid;
    InitialState out;
    out.state = FluidState(g);
    ParityField rs = static_state(rg, eos, g);
    const double epsm = rg.mach();
    for (std::size_t i = 0; i < rs.values.size(); ++i)
        out.state.rho.values[i] = rs.values[i] + epsm * rho1.values[i];
    out.state.u1 = u01;
    out.state.u2 = u02;
    out.state.u3 = u03;

    double rho_min = 1e300;
    for (double v : out.state.rho.values) rho_min = std::min(rho_min, v);
    if (!(rho_min > 0.0))
        throw positivity_error("initial_state: density is not positive (min = " +
                               std::to_string(rho_min) + ")");

    // support margin: the compact-support surrogate needs quiet data near the frame
    double inside = 0.0, frame = 0.0;
    const double margin = 0.1 * g.L;
    for (int iz = 0; iz < g.nz; ++iz)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double x = g.x1(ix), y = g.x2(iy);
                const double a = std::max({std::abs(rho1(iz, iy, ix)), std::abs(u01(iz, iy, ix)),
                                           std::abs(u02(iz, iy, ix)), std::abs(u03(iz, iy, ix))});
                const bool near_frame = x < margin || x > g.L - margin || y < margin || y > g.L - margin;
                if (near_frame)
                    frame = std::max(frame, a);
                else
                    inside = std::max(inside, a);
            }
    out.support_warning = frame > 1e-3 * std::max(inside, 1e-300);
    return out;
}

// ---- the time step -----------------------------------------------------------

struct NsForces {
    bool coriolis = true;
    bool viscosity = true;
    double mu = 1.0, eta = 0.0;
};

/// Called at each RK4 stage with the stage state and the quadrature weight
/// (dt/6, dt/3, dt/3, dt/6); accumulating f(stage) * weight integrates
/// Int f(t) dt with the step's own fourth-order accuracy.
using StageHook = std::function<void(const FluidState&, double weight)>;

namespace detail {

struct Cons {
    SpectralField rho, p1, p2, p3;
};

inline Cons axpy(const Cons& base, double a, const Cons& d) {
    Cons out = base;
    for (std::size_t i = 0; i < out.rho.coeffs.size(); ++i) {
        out.rho.coeffs[i] += a * d.rho.coeffs[i];
        out.p1.coeffs[i] += a * d.p1.coeffs[i];
        out.p2.coeffs[i] += a * d.p2.coeffs[i];
        out.p3.coeffs[i] += a * d.p3.coeffs[i];
    }
    return out;
}

} // namespace detail

/// One RK4 pseudo-spectral step in conservative variables (rho, rho u).
/// Mass is conserved exactly (spectral divergence); the acoustic CFL bound
/// dt <= 0.4 eps^m min(dx, dz) / sqrt(max p') is enforced.
inline FluidState ns_step(const FluidState& st, const ParityField& rho_static,
                          const ScalingRegime& rg, const EquationOfState& eos, double dt,
                          const NsForces& forces = {}, const StageHook& hook = {}) {
    const Grid& g = st.rho.grid;
    check_same(g, rho_static.grid, "ns_step");

    double rho_max = 0.0, rho_min = 1e300;
    for (double v : st.rho.values) {
        rho_max = std::max(rho_max, v);
        rho_min = std::min(rho_min, v);
    }
    if (rho_min < 1e-6)
        throw vacuum_error("ns_step: density fell below 1e-6 at t = " + std::to_string(st.time));
    const double cs = std::sqrt(eos.dp(rho_max));
    const double h = std::min(g.dx, g.dz);
    if (dt > 0.4 * rg.mach() * h / cs * (1.0 + 1e-9))
        throw cfl_violation("ns_step: dt = " + std::to_string(dt) +
                            " exceeds the acoustic CFL bound " +
                            std::to_string(0.4 * rg.mach() * h / cs));

    const double inv_e2m = 1.0 / rg.eps2m();
    const double inv_eps = 1.0 / rg.eps;
    const double nu = rg.eps_alpha();

    // physical rho~ and H'(rho~) reused by every stage
    ParityField hp_static(g, Parity::even);
    for (std::size_t i = 0; i < hp_static.values.size(); ++i)
        hp_static.values[i] = eos.Hp(rho_static.values[i]);

    auto rhs = [&](const detail::Cons& y, double stage_time, double weight,
                   detail::Cons& out) {
        ParityField rho = transform_inverse(y.rho);
        ParityField P1 = transform_inverse(y.p1);
        ParityField P2 = transform_inverse(y.p2);
        ParityField P3 = transform_inverse(y.p3);
        double mn = 1e300;
        for (double v : rho.values) mn = std::min(mn, v);
        if (!(mn >= 1e-6))
            throw vacuum_error("ns_step: stage density fell below 1e-6 at t = " +
                               std::to_string(stage_time));

        ParityField u1(g, Parity::even), u2(g, Parity::even), u3(g, Parity::odd);
        for (std::size_t i = 0; i < rho.values.size(); ++i) {
            u1.values[i] = P1.values[i] / rho.values[i];
            u2.values[i] = P2.values[i] / rho.values[i];
            u3.values[i] = P3.values[i] / rho.values[i];
        }

        if (hook) {
            FluidState stage(g);
            stage.rho = rho;
            stage.u1 = u1;
            stage.u2 = u2;
            stage.u3 = u3;
            stage.time = stage_time;
            hook(stage, weight);
        }

        // continuity
        out.rho = (-1.0) * (spectral_derivative(y.p1, 1) + spectral_derivative(y.p2, 2) +
                            spectral_derivative(y.p3, 3));

        // momentum flux divergence rows of rho u (x) u
        SpectralField F11 = transform_forward(multiply(P1, u1));
        SpectralField F12 = transform_forward(multiply(P1, u2));
        SpectralField F13 = transform_forward(multiply(P1, u3));
        SpectralField F22 = transform_forward(multiply(P2, u2));
        SpectralField F23 = transform_forward(multiply(P2, u3));
        SpectralField F33 = transform_forward(multiply(P3, u3));
        out.p1 = (-1.0) * (spectral_derivative(F11, 1) + spectral_derivative(F12, 2) +
                           spectral_derivative(F13, 3));
        out.p2 = (-1.0) * (spectral_derivative(F12, 1) + spectral_derivative(F22, 2) +
                           spectral_derivative(F23, 3));
        out.p3 = (-1.0) * (spectral_derivative(F13, 1) + spectral_derivative(F23, 2) +
                           spectral_derivative(F33, 3));

        // well-balanced pressure + gravity
        ParityField w(g, Parity::even);
        for (std::size_t i = 0; i < w.values.size(); ++i)
            w.values[i] = eos.Hp(rho.values[i]) - hp_static.values[i];
        SpectralField ws = transform_forward(w);
        ParityField g1 = transform_inverse(spectral_derivative(ws, 1));
        ParityField g2 = transform_inverse(spectral_derivative(ws, 2));
        ParityField g3 = transform_inverse(spectral_derivative(ws, 3));
        for (std::size_t i = 0; i < g1.values.size(); ++i) {
            g1.values[i] *= -inv_e2m * rho.values[i];
            g2.values[i] *= -inv_e2m * rho.values[i];
            g3.values[i] *= -inv_e2m * rho.values[i];
        }
        out.p1 = out.p1 + transform_forward(g1);
        out.p2 = out.p2 + transform_forward(g2);
        out.p3 = out.p3 + transform_forward(g3);

        if (forces.coriolis) {
            // -(1/eps) f x (rho u) = (1/eps)(P2, -P1, 0)
            out.p1 = out.p1 + inv_eps * y.p2;
            out.p2 = out.p2 - inv_eps * y.p1;
        }

        out.rho = dealias(out.rho);
        out.p1 = dealias(out.p1);
        out.p2 = dealias(out.p2);
        out.p3 = dealias(out.p3);

        if (forces.viscosity) {
            // eps^alpha [ mu Lap u + (mu/3 + eta) grad div u ], spectral in u
            SpectralField us1 = dealias(transform_forward(u1));
            SpectralField us2 = dealias(transform_forward(u2));
            SpectralField us3 = dealias(transform_forward(u3));
            SpectralField div = spectral_derivative(us1, 1) + spectral_derivative(us2, 2) +
                                spectral_derivative(us3, 3);
            const double lam = forces.mu / 3.0 + forces.eta;
            auto lap3 = [](const SpectralField& f) {
                return laplacian_h(f) + spectral_derivative(f, 3, 2);
            };
            out.p1 = out.p1 + nu * (forces.mu * lap3(us1) + lam * spectral_derivative(div, 1));
            out.p2 = out.p2 + nu * (forces.mu * lap3(us2) + lam * spectral_derivative(div, 2));
            out.p3 = out.p3 + nu * (forces.mu * lap3(us3) + lam * spectral_derivative(div, 3));
        }
    };

    // pack conservative variables
    detail::Cons y0;
    y0.rho = transform_forward(st.rho);
    y0.p1 = transform_forward(multiply(st.rho, st.u1));
    y0.p2 = transform_forward(multiply(st.rho, st.u2));
    y0.p3 = transform_forward(multiply(st.rho, st.u3));

    detail::Cons k1, k2, k3, k4;
    rhs(y0, st.time, dt / 6.0, k1);
    rhs(detail::axpy(y0, 0.5 * dt, k1), st.time + 0.5 * dt, dt / 3.0, k2);
    rhs(detail::axpy(y0, 0.5 * dt, k2), st.time + 0.5 * dt, dt / 3.0, k3);
    rhs(detail::axpy(y0, dt, k3), st.time + dt, dt / 6.0, k4);

    detail::Cons y1 = y0;
    for (std::size_t i = 0; i < y1.rho.coeffs.size(); ++i) {
        y1.rho.coeffs[i] += dt / 6.0 * (k1.rho.coeffs[i] + 2.0 * k2.rho.coeffs[i] +
                                        2.0 * k3.rho.coeffs[i] + k4.rho.coeffs[i]);
        y1.p1.coeffs[i] += dt / 6.0 * (k1.p1.coeffs[i] + 2.0 * k2.p1.coeffs[i] +
                                       2.0 * k3.p1.coeffs[i] + k4.p1.coeffs[i]);
        y1.p2.coeffs[i] += dt / 6.0 * (k1.p2.coeffs[i] + 2.0 * k2.p2.coeffs[i] +
                                       2.0 * k3.p2.coeffs[i] + k4.p2.coeffs[i]);
        y1.p3.coeffs[i] += dt / 6.0 * (k1.p3.coeffs[i] + 2.0 * k2.p3.coeffs[i] +
                                       2.0 * k3.p3.coeffs[i] + k4.p3.coeffs[i]);
    }

    FluidState out(g);
    out.time = st.time + dt;
    out.rho = transform_inverse(y1.rho);
    ParityField P1 = transform_inverse(y1.p1);
    ParityField P2 = transform_inverse(y1.p2);
    ParityField P3 = transform_inverse(y1.p3);
    for (std::size_t i = 0; i < out.rho.values.size(); ++i) {
        const double r = out.rho.values[i];
        if (!std::isfinite(r) || !std::isfinite(P1.values[i]) || !std::isfinite(P2.values[i]) ||
            !std::isfinite(P3.values[i]))
            throw solver_blowup("ns_step: non-finite state after step ending at t = " +
                                std::to_string(out.time));
        out.u1.values[i] = P1.values[i] / r;
        out.u2.values[i] = P2.values[i] / r;
        out.u3.values[i] = P3.values[i] / r;
    }
    return out;
}

// ---- energy and relative entropy --------------------------------------------

/// Int [ rho |u|^2 / 2 + eps^{-2m} (H(rho) - H'(rho~)(rho - rho~) - H(rho~)) ].
inline double energy_functional(const FluidState& st, const ParityField& rho_static,
                                const ScalingRegime& rg, const EquationOfState& eos) {
    const Grid& g = st.rho.grid;
    const double inv_e2m = 1.0 / rg.eps2m();
    ParityField density(g, Parity::even);
    for (std::size_t i = 0; i < density.values.size(); ++i) {
        const double rho = st.rho.values[i], rs = rho_static.values[i];
        const double kin = 0.5 * rho *
                           (st.u1.values[i] * st.u1.values[i] + st.u2.values[i] * st.u2.values[i] +
                            st.u3.values[i] * st.u3.values[i]);
        const double pot = eos.H(rho) - eos.Hp(rs) * (rho - rs) - eos.H(rs);
        density.values[i] = kin + inv_e2m * pot;
    }
    return integral(density);
}

/// Relative entropy against a positive comparison pair (r, U); reduces to
/// energy_functional at (r, U) = (rho~, 0) and vanishes iff (rho,u) = (r,U).
inline double relative_entropy(const FluidState& st, const ParityField& r, const ParityField& U1,
                               const ParityField& U2, const ParityField& U3,
                               const ScalingRegime& rg, const EquationOfState& eos) {
    const Grid& g = st.rho.grid;
    check_same(g, r.grid, "relative_entropy");
    const double inv_e2m = 1.0 / rg.eps2m();
    ParityField density(g, Parity::even);
    for (std::size_t i = 0; i < density.values.size(); ++i) {
        const double rr = r.values[i];
        if (!(rr > 0.0)) throw positivity_error("relative_entropy: comparison density must be positive");
        const double rho = st.rho.values[i];
        const double d1 = st.u1.values[i] - U1.values[i];
        const double d2 = st.u2.values[i] - U2.values[i];
        const double d3 = st.u3.values[i] - U3.values[i];
        const double kin = 0.5 * rho * (d1 * d1 + d2 * d2 + d3 * d3);
        const double pot = eos.H(rho) - eos.Hp(rr) * (rho - rr) - eos.H(rr);
        density.values[i] = kin + inv_e2m * pot;
    }
    return integral(density);
}

// ---- essential / residual splitting -----------------------------------------

/// h_ess = chi(rho) h with chi supported in [rho_lo, rho_hi], equal to 1 on
/// the middle half; h = h_ess + h_res exactly, pointwise.
inline std::pair<ParityField, ParityField> ess_res_split(const ParityField& h,
                                                         const ParityField& rho,
                                                         double rho_lo = 0.5,
                                                         double rho_hi = 1.5) {
    check_same(h.grid, rho.grid, "ess_res_split");
    if (!(rho_lo < 1.0 && 1.0 < rho_hi))
        throw std::invalid_argument("ess_res_split: window must contain 1");
    const double w = 0.25 * (rho_hi - rho_lo);
    ParityField ess = h, res = h;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        const double chi = smooth_window(rho.values[i], rho_lo, rho_lo + w, rho_hi - w, rho_hi);
        ess.values[i] = chi * h.values[i];
        res.values[i] = h.values[i] - ess.values[i];
    }
    return {ess, res};
}

// ---- smoothing / truncation --------------------------------------------------

/// [h]_delta: spatial bump phi_delta (radial, centered in the box), then the
/// frequency window psi_delta = 1 on [delta, 1/delta], then vertical modes
/// above floor(1/delta) dropped.
inline SpectralField smooth_truncate(const SpectralField& h, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("smooth_truncate: delta must be in (0, 1)");
    const Grid& g = h.grid;

    const double R1 = std::min(1.0 / delta, 0.30 * g.L);
    const double R2 = std::min(2.0 / delta, 0.42 * g.L);
    ParityField hp = transform_inverse(h);
    for (int iz = 0; iz < g.nz; ++iz)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double x = g.x1(ix) - 0.5 * g.L, y = g.x2(iy) - 0.5 * g.L;
                const double rad = std::hypot(x, y);
                const double phi = rad <= R1 ? 1.0 : 1.0 - smoothstep_cinf((rad - R1) / (R2 - R1));
                hp(iz, iy, ix) *= phi;
            }
    SpectralField out = transform_forward(hp);

    const int kmax = int(std::floor(1.0 / delta));
    for (int kappa = 0; kappa < g.nz; ++kappa)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double xi = std::hypot(g.xi1[ix], g.xi2[iy]);
                const double psi = smooth_window(xi, 0.5 * delta, delta, 1.0 / delta, 2.0 / delta);
                out(kappa, iy, ix) *= kappa > kmax ? 0.0 : psi;
            }
    return out;
}

// ---- initial-data decomposition ----------------------------------------------

struct InitialDecomposition {
    BalancedState balanced;  // (q0, v0) on the horizontal grid
    SpectralState4 wave;     // (s0, V0) on the slab grid
};

/// Kernel projection of the smoothed data: (q0, v0) is the geostrophic part,
/// (s0, V0) the L2-orthogonal remainder feeding the wave system.
inline InitialDecomposition decompose_initial_data(const SpectralField& rho1,
                                                   const SpectralField& u1,
                                                   const SpectralField& u2,
                                                   const SpectralField& u3, double omega) {
    const Grid& g = rho1.grid;
    InitialDecomposition out{kernel_project(rho1, u1, u2, omega), SpectralState4(g, omega)};
    const std::size_t layer = g.layer_size();
    out.wave.s = rho1;
    out.wave.v1 = u1;
    out.wave.v2 = u2;
    out.wave.v3 = u3;
    for (std::size_t p = 0; p < layer; ++p) {
        out.wave.s.coeffs[p] -= out.balanced.q.coeffs[p];
        out.wave.v1.coeffs[p] -= out.balanced.v1.coeffs[p];
        out.wave.v2.coeffs[p] -= out.balanced.v2.coeffs[p];
    }
    return out;
}

// ---- test functions -----------------------------------------------------------

/// The relative-entropy comparison pair r = rho~ + eps^m (q + s), U = v + V,
/// with its analytic time derivatives (the wave part differentiates through
/// the generator, the balanced part through the potential-vorticity flow).
struct TestFunctionPair {
    ParityField r;
    ParityField U1, U2, U3;
    SpectralField U1s, U2s, U3s;
    ParityField dtU1, dtU2, dtU3;
    ParityField dt_r;
    SpectralField q2d;            // omega q~, the balanced pressure amplitude
    SpectralField vb1, vb2;       // balanced velocity (horizontal grid)
    double eps = 0.0, delta = 0.0;
};

namespace detail {

inline SpectralField embed_2d(const SpectralField& two_d, const Grid& slab) {
    SpectralField out(slab, Parity::even);
    const std::size_t layer = slab.layer_size();
    for (std::size_t p = 0; p < layer; ++p) out.coeffs[p] = two_d.coeffs[p];
    return out;
}

} // namespace detail

inline TestFunctionPair build_test_functions(const SpectralState4& wave, const QGState& qg,
                                             const ScalingRegime& rg, const EquationOfState& eos,
                                             const ParityField& rho_static, double delta) {
    const Grid& g = wave.grid();
    TestFunctionPair tf;
    tf.eps = rg.eps;
    tf.delta = delta;
    const double omega = rg.omega();
    const double epsm = rg.mach();

    SpectralField qt = qg.stream();          // q~
    tf.q2d = omega * qt;                     // q = omega q~
    tf.vb1 = (-1.0) * spectral_derivative(qt, 2);
    tf.vb2 = spectral_derivative(qt, 1);

    // r = rho~ + eps^m (q + s)
    SpectralField q3 = detail::embed_2d(tf.q2d, g);
    ParityField qs = transform_inverse(q3 + wave.s);
    tf.r = rho_static;
    for (std::size_t i = 0; i < tf.r.values.size(); ++i) tf.r.values[i] += epsm * qs.values[i];
    double rmin = 1e300;
    for (double v : tf.r.values) rmin = std::min(rmin, v);
    if (!(rmin > 0.0))
        throw positivity_error(
            "build_test_functions: comparison density loses positivity; reduce eps or delta");

    // U = v + V
    tf.U1s = detail::embed_2d(tf.vb1, g) + wave.v1;
    tf.U2s = detail::embed_2d(tf.vb2, g) + wave.v2;
    tf.U3s = wave.v3;
    tf.U1 = transform_inverse(tf.U1s);
    tf.U2 = transform_inverse(tf.U2s);
    tf.U3 = transform_inverse(tf.U3s);

    // time derivatives: wave part -eps^{-m} B(s, V), balanced part through
    // the potential-vorticity equation
    SpectralState4 Bw = apply_B(wave);
    SpectralField dqt = qg_dqdt(qg);
    SpectralField dtv1 = (-1.0) * spectral_derivative(dqt, 2);
    SpectralField dtv2 = spectral_derivative(dqt, 1);
    const double inv_epsm = 1.0 / epsm;
    tf.dtU1 = transform_inverse(detail::embed_2d(dtv1, g) - inv_epsm * Bw.v1);
    tf.dtU2 = transform_inverse(detail::embed_2d(dtv2, g) - inv_epsm * Bw.v2);
    tf.dtU3 = transform_inverse((-inv_epsm) * Bw.v3);

    // dt r = eps^m (omega dt q~ + dt s), with eps^m dt s = -div V = -Bw.s
    tf.dt_r = transform_inverse(epsm * omega * detail::embed_2d(dqt, g) - Bw.s);
    return tf;
}

// ---- relative entropy inequality bookkeeping ----------------------------------

/// Instantaneous values of the time integrands on the right side of the
/// relative entropy inequality (and the viscosity difference of its left
/// side). Integrate each over [0, tau] to assemble the inequality.
struct ReiRates {
    double material = 0;      // Int rho (dt U + u . grad U) . (U - u)
    double visc_U = 0;        // eps^alpha Int S(grad U) : grad(U - u)
    double visc_diff = 0;     // eps^alpha Int S(grad(u-U)) : grad(u-U)   [LHS]
    double coriolis = 0;      // (1/eps) Int rho (f x u) . (U - u)
    double hprime = 0;        // eps^{-2m} Int [(r-rho) dt H'(r) + grad(H'(r)-H'(rho~)).(rU - rho u)]
    double pressure_div = 0;  // -eps^{-2m} Int div U (p(rho) - p(r))
    double gravity = 0;       // -eps^{-2n} Int (rho - r) grad G . U

    ReiRates& operator+=(const ReiRates& o) {
        material += o.material;
        visc_U += o.visc_U;
        visc_diff += o.visc_diff;
        coriolis += o.coriolis;
        hprime += o.hprime;
        pressure_div += o.pressure_div;
        gravity += o.gravity;
        return *this;
    }

    ReiRates scaled(double a) const {
        ReiRates out = *this;
        out.material *= a;
        out.visc_U *= a;
        out.visc_diff *= a;
        out.coriolis *= a;
        out.hprime *= a;
        out.pressure_div *= a;
        out.gravity *= a;
        return out;
    }

    double rhs_sum() const { return material + visc_U + coriolis + hprime + pressure_div + gravity; }
};

namespace detail {

/// Int S(grad a) : grad b via Parseval; S is the traceless viscous stress
/// plus bulk part, linear in the gradient.
inline double visc_inner(const SpectralField& a1, const SpectralField& a2, const SpectralField& a3,
                         const SpectralField& b1, const SpectralField& b2, const SpectralField& b3,
                         double mu, double eta) {
    const SpectralField* A[3] = {&a1, &a2, &a3};
    const SpectralField* B[3] = {&b1, &b2, &b3};
    double grad_grad = 0.0, gradT_grad = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            SpectralField dAi = spectral_derivative(*A[i], j + 1);
            SpectralField dBi = spectral_derivative(*B[i], j + 1);
            grad_grad += inner_product_l2(dAi, dBi);
            SpectralField dAj = spectral_derivative(*A[j], i + 1);
            gradT_grad += inner_product_l2(dAj, dBi);
        }
    SpectralField divA = spectral_derivative(a1, 1) + spectral_derivative(a2, 2) +
                         spectral_derivative(a3, 3);
    SpectralField divB = spectral_derivative(b1, 1) + spectral_derivative(b2, 2) +
                         spectral_derivative(b3, 3);
    const double dd = inner_product_l2(divA, divB);
    return mu * (grad_grad + gradT_grad - 2.0 / 3.0 * dd) + eta * dd;
}

} // namespace detail

/// Evaluate all (space-integrated) inequality integrands at one instant.
inline ReiRates rei_rates(const FluidState& st, const TestFunctionPair& tf,
                          const ParityField& rho_static, const ScalingRegime& rg,
                          const EquationOfState& eos, const NsForces& forces = {}) {
    const Grid& g = st.rho.grid;
    ReiRates out;
    const double inv_e2m = 1.0 / rg.eps2m();
    const double inv_e2n = 1.0 / rg.eps2n();
    const double inv_eps = 1.0 / rg.eps;

    SpectralField us1 = transform_forward(st.u1);
    SpectralField us2 = transform_forward(st.u2);
    SpectralField us3 = transform_forward(st.u3);

    // gradient tensor of U (physical) for the material derivative
    ParityField dU[3][3];
    const SpectralField* Us[3] = {&tf.U1s, &tf.U2s, &tf.U3s};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dU[i][j] = transform_inverse(spectral_derivative(*Us[i], j + 1));
    ParityField divU = transform_inverse(spectral_derivative(tf.U1s, 1) +
                                         spectral_derivative(tf.U2s, 2) +
                                         spectral_derivative(tf.U3s, 3));

    // grad(H'(r) - H'(rho~))
    ParityField w(g, Parity::even);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = eos.Hp(tf.r.values[i]) - eos.Hp(rho_static.values[i]);
    SpectralField ws = transform_forward(w);
    ParityField gw1 = transform_inverse(spectral_derivative(ws, 1));
    ParityField gw2 = transform_inverse(spectral_derivative(ws, 2));
    ParityField gw3 = transform_inverse(spectral_derivative(ws, 3));

    ParityField mat(g, Parity::even), cor(g, Parity::even), hpr(g, Parity::even),
        pdv(g, Parity::even), grv(g, Parity::even);
    const ParityField* u[3] = {&st.u1, &st.u2, &st.u3};
    const ParityField* U[3] = {&tf.U1, &tf.U2, &tf.U3};
    const ParityField* dtU[3] = {&tf.dtU1, &tf.dtU2, &tf.dtU3};
    for (std::size_t i = 0; i < mat.values.size(); ++i) {
        const double rho = st.rho.values[i], r = tf.r.values[i];
        double m = 0.0;
        for (int c = 0; c < 3; ++c) {
            double conv = 0.0;
            for (int j = 0; j < 3; ++j) conv += u[j]->values[i] * dU[c][j].values[i];
            m += (dtU[c]->values[i] + conv) * (U[c]->values[i] - u[c]->values[i]);
        }
        mat.values[i] = rho * m;

        // (f x u) . (U - u) = (f x u) . U
        cor.values[i] = inv_eps * rho *
                        (-st.u2.values[i] * (tf.U1.values[i] - st.u1.values[i]) +
                         st.u1.values[i] * (tf.U2.values[i] - st.u2.values[i]));

        double flux = 0.0;
        for (int c = 0; c < 3; ++c)
            flux += (r * U[c]->values[i] - rho * u[c]->values[i]) *
                    (c == 0 ? gw1.values[i] : c == 1 ? gw2.values[i] : gw3.values[i]);
        hpr.values[i] = inv_e2m * ((r - rho) * eos.Hpp(r) * tf.dt_r.values[i] + flux);

        pdv.values[i] = -inv_e2m * divU.values[i] * (eos.p(rho) - eos.p(r));

        // grad G = -e3
        grv.values[i] = inv_e2n * (rho - r) * tf.U3.values[i];
    }
    out.material = integral(mat);
    out.coriolis = integral(cor);
    out.hprime = integral(hpr);
    out.pressure_div = integral(pdv);
    out.gravity = integral(grv);

    const double nu = rg.eps_alpha();
    SpectralField d1 = us1 - tf.U1s, d2 = us2 - tf.U2s, d3 = us3 - tf.U3s;
    out.visc_diff = nu * detail::visc_inner(d1, d2, d3, d1, d2, d3, forces.mu, forces.eta);
    out.visc_U = -nu * detail::visc_inner(tf.U1s, tf.U2s, tf.U3s, d1, d2, d3, forces.mu, forces.eta);
    return out;
}

/// Inequality slack RHS - LHS >= 0 (up to discretization):
///   E(0) + integrated rates - E(tau) - integrated viscosity difference.
inline double rei_slack(double entropy0, double entropy_tau, const ReiRates& integrals) {
    return entropy0 + integrals.rhs_sum() - entropy_tau - integrals.visc_diff;
}

struct ReiReport {
    std::vector<double> times;
    std::vector<double> entropy;        // E(t_i)
    std::vector<ReiRates> cumulative;   // trapezoid integrals over [t_0, t_i]
    std::vector<double> slack;          // slack at each output time
};

/// Snapshot-trapezoid evaluation of every inequality term on a common time
/// grid (second order in the output spacing). The long-run experiments
/// accumulate the same rates with RK4 stage weights instead.
inline ReiReport rei_residual(std::span<const FluidState> traj,
                              std::span<const TestFunctionPair> pairs,
                              std::span<const double> times, const ParityField& rho_static,
                              const ScalingRegime& rg, const EquationOfState& eos,
                              const NsForces& forces = {}) {
    if (traj.size() != pairs.size() || traj.size() != times.size() || traj.empty())
        throw std::invalid_argument("rei_residual: trajectory, pairs and times must align");
    ReiReport rep;
    rep.times.assign(times.begin(), times.end());
    std::vector<ReiRates> rates(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        rates[i] = rei_rates(traj[i], pairs[i], rho_static, rg, eos, forces);
        rep.entropy.push_back(relative_entropy(traj[i], pairs[i].r, pairs[i].U1, pairs[i].U2,
                                               pairs[i].U3, rg, eos));
    }
    ReiRates cum;
    rep.cumulative.push_back(cum);
    rep.slack.push_back(rei_slack(rep.entropy[0], rep.entropy[0], cum));
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double h = times[i] - times[i - 1];
        cum += rates[i - 1].scaled(0.5 * h);
        cum += rates[i].scaled(0.5 * h);
        rep.cumulative.push_back(cum);
        rep.slack.push_back(rei_slack(rep.entropy[0], rep.entropy[i], cum));
    }
    return rep;
}

// ---- uniform-bounds report ------------------------------------------------------

struct EpsRunSummary {
    double eps = 0;
    double sup_sqrt_rho_u_l2 = 0;   // sup_t || sqrt(rho) u ||_{L2}
    double sup_ess_dev_l2 = 0;      // sup_t || [(rho - rho~)/eps^m]_ess ||_{L2}
    double sup_res_measure = 0;     // sup_t |{residual set}| / eps^{2m}
    double sup_dev_l2 = 0;          // sup_t || rho - rho~ ||_{L2}
    double sup_dev_mixed = 0;       // sup_t ( ||ess||_{L2} + ||res||_{Lgamma} )
    double visc_dissipation = 0;    // eps^alpha Int_0^T Int |grad u + grad u^T - 2/3 div u I|^2
};

/// Per-run tallies of the energy-inequality bounds.
inline EpsRunSummary summarize_run(std::span<const FluidState> traj,
                                   std::span<const double> times, const ParityField& rho_static,
                                   const ScalingRegime& rg, const EquationOfState& eos) {
    if (traj.empty() || traj.size() != times.size())
        throw std::invalid_argument("summarize_run: empty or misaligned trajectory");
    const Grid& g = rho_static.grid;
    EpsRunSummary s;
    s.eps = rg.eps;
    const double epsm = rg.mach();
    std::vector<double> diss(traj.size());
    for (std::size_t it = 0; it < traj.size(); ++it) {
        const FluidState& st = traj[it];
        ParityField sru(g, Parity::even);
        ParityField dev(g, Parity::even);
        for (std::size_t i = 0; i < sru.values.size(); ++i) {
            const double rho = st.rho.values[i];
            sru.values[i] = std::sqrt(rho * (st.u1.values[i] * st.u1.values[i] +
                                             st.u2.values[i] * st.u2.values[i] +
                                             st.u3.values[i] * st.u3.values[i]));
            dev.values[i] = rho - rho_static.values[i];
        }
        s.sup_sqrt_rho_u_l2 = std::max(s.sup_sqrt_rho_u_l2, l2_norm_phys(sru));
        s.sup_dev_l2 = std::max(s.sup_dev_l2, l2_norm_phys(dev));

        auto [ess, res] = ess_res_split(dev, st.rho);
        ParityField ess_scaled = (1.0 / epsm) * ess;
        s.sup_ess_dev_l2 = std::max(s.sup_ess_dev_l2, l2_norm_phys(ess_scaled));

        ParityField ones(g, Parity::even);
        for (auto& v : ones.values) v = 1.0;
        auto [one_ess, one_res] = ess_res_split(ones, st.rho);
        s.sup_res_measure = std::max(s.sup_res_measure, integral(one_res) / rg.eps2m());

        ParityField resg(g, Parity::even);
        for (std::size_t i = 0; i < resg.values.size(); ++i)
            resg.values[i] = std::pow(std::abs(res.values[i]), eos.gamma);
        const double res_lg = std::pow(integral(resg), 1.0 / eos.gamma);
        s.sup_dev_mixed = std::max(s.sup_dev_mixed, l2_norm_phys(ess) + res_lg);

        // |grad u + grad u^T - 2/3 div u I|^2 via Parseval
        SpectralField w1 = transform_forward(st.u1);
        SpectralField w2 = transform_forward(st.u2);
        SpectralField w3 = transform_forward(st.u3);
        diss[it] = detail::visc_inner(w1, w2, w3, w1, w2, w3, 1.0, 0.0);
    }
    double acc = 0.0;
    for (std::size_t it = 1; it < traj.size(); ++it)
        acc += 0.5 * (times[it] - times[it - 1]) * (diss[it] + diss[it - 1]);
    s.visc_dissipation = rg.eps_alpha() * acc;
    return s;
}

struct UniformBoundsReport {
    std::vector<EpsRunSummary> runs;
    double density_exponent = 0;   // fitted slope of sup_t ||rho - rho~||_{L2} vs eps
    double kinetic_spread = 0;     // max/min of sup_t ||sqrt(rho) u|| across eps
};

inline UniformBoundsReport uniform_bounds_report(std::span<const EpsRunSummary> runs) {
    if (runs.size() < 3)
        throw std::invalid_argument("uniform_bounds_report: need at least 3 eps values");
    UniformBoundsReport rep;
    rep.runs.assign(runs.begin(), runs.end());
    std::vector<double> eps, dev;
    double kmin = 1e300, kmax = 0.0;
    for (const auto& r : runs) {
        eps.push_back(r.eps);
        dev.push_back(std::max(r.sup_dev_l2, 1e-300));
        kmin = std::min(kmin, r.sup_sqrt_rho_u_l2);
        kmax = std::max(kmax, r.sup_sqrt_rho_u_l2);
    }
    rep.density_exponent = loglog_slope(eps, dev);
    rep.kinetic_spread = kmin > 0.0 ? kmax / kmin : 0.0;
    return rep;
}

} // namespace rossby

#endif

