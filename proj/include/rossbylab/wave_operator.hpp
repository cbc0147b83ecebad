#ifndef ROSSBYLAB_WAVE_OPERATOR_HPP
#define ROSSBYLAB_WAVE_OPERATOR_HPP

#include <optional>
#include <span>

#include "rossbylab/hermitian4.hpp"
#include "rossbylab/operators.hpp"

namespace rossby {

// The acoustic-Rossby operator B(omega): (s, V) -> (div V, omega f x V + grad s)
// on the slab, f = e3. Per horizontal mode xi and vertical mode k the symbol
// is a 4x4 Hermitian matrix acting on (s, V1, V2, V3~), where V3~ absorbs a
// factor -i relative to the sine-series coefficient of V3.

/// Raised when the closed-form eigenbasis is evaluated at a (near-)degenerate
/// mode; callers fall back to the numeric eigensolver.
struct degenerate_mode_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModeMatrix {
    Mat4 a;
    double xi1 = 0, xi2 = 0, k = 0, omega = 0;
};

inline ModeMatrix assemble_mode_matrix(double xi1, double xi2, double k, double omega) {
    if (omega < 0.0) throw std::invalid_argument("assemble_mode_matrix: omega must be >= 0");
    ModeMatrix M;
    M.xi1 = xi1; M.xi2 = xi2; M.k = k; M.omega = omega;
    Mat4& A = M.a;
    A(0, 1) = xi1; A(0, 2) = xi2; A(0, 3) = k;
    A(1, 0) = xi1; A(1, 2) = complexd(0.0, omega);
    A(2, 0) = xi2; A(2, 1) = complexd(0.0, -omega);
    A(3, 0) = k;
    return M;
}

/// The four eigenvalues (lambda1, lambda2, lambda3, lambda4) with
/// lambda1 >= lambda3 >= 0 >= lambda4 = -lambda3 >= lambda2 = -lambda1.
/// Evaluated in cancellation-free form: the inner radicand factors as
/// (z + (omega-|k|)^2)(z + (omega+|k|)^2) >= z^2, and lambda3 comes from
/// lambda1 * lambda3 = omega |k|.
inline std::array<double, 4> eigenvalues_closed(double z, double k, double omega) {
    if (z < 0.0) throw std::invalid_argument("eigenvalues_closed: |xi|^2 must be >= 0");
    const double ak = std::abs(k), aw = std::abs(omega);
    const double S = omega * omega + z + k * k;
    const double dm = aw - ak, dp = aw + ak;
    const double R = std::sqrt((z + dm * dm) * (z + dp * dp));
    const double l1 = std::sqrt(0.5 * (S + R));
    const double l3 = (ak == 0.0 || aw == 0.0) ? 0.0 : aw * ak * std::sqrt(2.0 / (S + R));
    return {l1, -l1, l3, -l3};
}

/// Sorted (descending) eigenvalues from the generic Jacobi solver; the
/// independent cross-check of the closed forms.
inline std::array<double, 4> eigenvalues_oracle(const ModeMatrix& M) {
    return hermitian_eig4(M.a).values;
}

/// One mode's spectral decomposition. Branch order (lambda1, lambda2,
/// lambda3, lambda4); vectors orthonormal with deterministic phase.
struct EigenSystem {
    std::array<double, 4> lambda{};
    std::array<Vec4, 4> vec{};
    bool degenerate = false;  // built by the numeric fallback
};

namespace detail {

inline Vec4 closed_vector(double xi1, double xi2, double k, double omega, double lambda,
                          double lam_sq_minus_k2) {
    const double z = xi1 * xi1 + xi2 * xi2;
    const double lam2 = lambda * lambda;
    const double q = lam2 * z / lam_sq_minus_k2;
    const double v3 = k * lambda * z / lam_sq_minus_k2;
    Vec4 E = {complexd(q, 0.0),
              complexd(lambda * xi1, omega * xi2),
              complexd(lambda * xi2, -omega * xi1),
              complexd(v3, 0.0)};
    const double mu2 = (lam2 * lam2 + k * k * lam2) / (lam_sq_minus_k2 * lam_sq_minus_k2) * z * z +
                       (lam2 + omega * omega) * z;
    double mu = 1.0 / std::sqrt(mu2);
    if (q < 0.0) mu = -mu;  // first nonzero component real positive
    for (auto& c : E) c *= mu;
    return E;
}

} // namespace detail

/// Closed-form orthonormal eigenbasis. Throws degenerate_mode_error when
/// |xi| ~ 0 or the spectral gap closes (then use eigenbasis_numeric).
inline EigenSystem eigenbasis_closed(double xi1, double xi2, double k, double omega,
                                     double tol_xi = 1e-8, double tol_gap = 1e-10) {
    const double z = xi1 * xi1 + xi2 * xi2;
    if (std::sqrt(z) < tol_xi)
        throw degenerate_mode_error("eigenbasis_closed: |xi| below tolerance");
    EigenSystem es;
    es.lambda = eigenvalues_closed(z, k, omega);
    const double l1 = es.lambda[0], l3 = es.lambda[2];
    if (l1 - l3 < tol_gap)
        throw degenerate_mode_error("eigenbasis_closed: eigenvalue gap below tolerance");
    if (k != 0.0 && l3 < tol_gap)
        throw degenerate_mode_error("eigenbasis_closed: lambda3 ~ 0 with k != 0");

    // lambda1^2 - k^2 = (omega^2 - k^2 + z + R)/2 >= z/2 > 0, stable form
    const double ak = std::abs(k), aw = std::abs(omega);
    const double dm = aw - ak, dp = aw + ak;
    const double R = std::sqrt((z + dm * dm) * (z + dp * dp));
    const double t1 = omega * omega - k * k + z;
    const double l1mk = t1 >= 0.0 ? 0.5 * (t1 + R) : 2.0 * k * k * z / (R - t1);
    // lambda1^2 - omega^2, same by the k <-> omega symmetry
    const double t2 = k * k - omega * omega + z;
    const double l1mw = t2 >= 0.0 ? 0.5 * (t2 + R) : 2.0 * omega * omega * z / (R - t2);

    if (k == 0.0) {
        // zero eigenvalue pair: geostrophic kernel vector and the vertical unit
        const double mu = 1.0 / std::sqrt(z + omega * omega);
        es.vec[0] = detail::closed_vector(xi1, xi2, 0.0, omega, l1, l1mk);
        es.vec[1] = detail::closed_vector(xi1, xi2, 0.0, omega, -l1, l1mk);
        es.vec[2] = {complexd(0.0, -mu * omega), complexd(-mu * xi2, 0.0), complexd(mu * xi1, 0.0), 0.0};
        es.vec[3] = {0.0, 0.0, 0.0, complexd(1.0, 0.0)};
        return es;
    }
    // lambda3^2 - k^2 = k^2 (omega^2 - lambda1^2)/lambda1^2 < 0
    const double l1sq = 0.5 * (omega * omega + z + k * k + R);
    const double l3mk = -k * k * l1mw / l1sq;
    es.vec[0] = detail::closed_vector(xi1, xi2, k, omega, l1, l1mk);
    es.vec[1] = detail::closed_vector(xi1, xi2, k, omega, -l1, l1mk);
    es.vec[2] = detail::closed_vector(xi1, xi2, k, omega, l3, l3mk);
    es.vec[3] = detail::closed_vector(xi1, xi2, k, omega, -l3, l3mk);
    return es;
}

/// Generic fallback: Jacobi eigensolve, branches matched to the
/// (l1, -l1, l3, -l3) ordering.
inline EigenSystem eigenbasis_numeric(const ModeMatrix& M) {
    HermitianEig4 he = hermitian_eig4(M.a);
    EigenSystem es;
    es.degenerate = true;
    // descending (l1, l3, l4, l2) -> branch order (l1, l2, l3, l4)
    es.lambda = {he.values[0], he.values[3], he.values[1], he.values[2]};
    es.vec = {he.vectors[0], he.vectors[3], he.vectors[1], he.vectors[2]};
    return es;
}

/// Closed form with automatic numeric fallback.
inline EigenSystem mode_eigensystem(double xi1, double xi2, double k, double omega) {
    try {
        return eigenbasis_closed(xi1, xi2, k, omega);
    } catch (const degenerate_mode_error&) {
        return eigenbasis_numeric(assemble_mode_matrix(xi1, xi2, k, omega));
    }
}

/// The 4-vector (s^, V1^, V2^, V3~) of one (xi, k) mode.
using ModeState = Vec4;

/// Exact unitary propagation: state(t) = sum_j exp(-i lambda_j t) <state, E_j> E_j.
inline ModeState propagate_mode(const ModeState& state, double t, const EigenSystem& eig) {
    ModeState out{};
    for (int j = 0; j < 4; ++j) {
        const complexd c = dot(state, eig.vec[j]);
        const complexd ph = std::polar(1.0, -eig.lambda[j] * t);
        for (int i = 0; i < 4; ++i) out[i] += c * ph * eig.vec[j][i];
    }
    return out;
}

// ---- full-field state ------------------------------------------------------

/// (s, V) on the slab grid: s, V1, V2 even, V3 odd. V.n = 0 at the walls is
/// automatic from the parity.
struct SpectralState4 {
    SpectralField s, v1, v2, v3;
    double omega = 0.0;

    SpectralState4() = default;
    SpectralState4(const Grid& g, double om)
        : s(g, Parity::even), v1(g, Parity::even), v2(g, Parity::even), v3(g, Parity::odd), omega(om) {}

    const Grid& grid() const { return s.grid; }
};

inline double state_norm_l2(const SpectralState4& st) {
    const double a = l2_norm(st.s), b = l2_norm(st.v1), c = l2_norm(st.v2), d = l2_norm(st.v3);
    return std::sqrt(a * a + b * b + c * c + d * d);
}

/// B applied spectrally; skew-symmetric in L2.
inline SpectralState4 apply_B(const SpectralState4& st) {
    SpectralState4 out(st.grid(), st.omega);
    out.s = spectral_derivative(st.v1, 1) + spectral_derivative(st.v2, 2) + spectral_derivative(st.v3, 3);
    out.v1 = (-st.omega) * st.v2 + spectral_derivative(st.s, 1);
    out.v2 = st.omega * st.v1 + spectral_derivative(st.s, 2);
    out.v3 = spectral_derivative(st.s, 3);
    return out;
}

/// Per-mode eigensystem table for one (grid, omega); reusable across times.
class WavePropagator {
public:
    WavePropagator(const Grid& g, double omega) : grid_(g), omega_(omega), modes_(g.size()) {
        const std::size_t layer = g.layer_size();
        parallel_for(g.size(), [&](std::size_t i) {
            const int kappa = int(i / layer);
            const std::size_t p = i % layer;
            const int iy = int(p / g.nx), ix = int(p % g.nx);
            modes_[i] = mode_eigensystem(g.xi1[ix], g.xi2[iy], g.kz[kappa], omega_);
        });
        degenerate_count_ = 0;
        for (const auto& es : modes_) degenerate_count_ += es.degenerate ? 1 : 0;
    }

    const Grid& grid() const { return grid_; }
    double omega() const { return omega_; }
    int degenerate_count() const { return degenerate_count_; }
    const EigenSystem& mode(std::size_t i) const { return modes_[i]; }

    /// Exact solution of the rescaled wave system at time t.
    SpectralState4 evolve(const SpectralState4& st, double t) const {
        if (!(st.grid() == grid_)) throw std::invalid_argument("WavePropagator: grid mismatch");
        SpectralState4 out(grid_, omega_);
        const complexd mi(0.0, -1.0), pi_(0.0, 1.0);
        parallel_for(grid_.size(), [&](std::size_t i) {
            ModeState y = {st.s.coeffs[i], st.v1.coeffs[i], st.v2.coeffs[i], mi * st.v3.coeffs[i]};
            y = propagate_mode(y, t, modes_[i]);
            out.s.coeffs[i] = y[0];
            out.v1.coeffs[i] = y[1];
            out.v2.coeffs[i] = y[2];
            out.v3.coeffs[i] = pi_ * y[3];
        });
        return out;
    }

private:
    Grid grid_;
    double omega_;
    std::vector<EigenSystem> modes_;
    int degenerate_count_ = 0;
};

/// One-shot convenience wrapper around WavePropagator.
inline SpectralState4 evolve(const SpectralState4& st, double t) {
    return WavePropagator(st.grid(), st.omega).evolve(st, t);
}

// ---- kernel projection -----------------------------------------------------

/// A geostrophically balanced state: q = q(x_h), v = (-d2 q, d1 q, 0)/omega.
struct BalancedState {
    SpectralField q, v1, v2;  // horizontal grid, even parity
};

/// L2-orthogonal projection onto N(B(omega)): q solves
///   -Lap_h q + omega^2 q = -omega Int curl_h U_h dx3 + omega^2 Int r dx3,
/// and v = grad_perp q / omega. Idempotent; output annihilated by B.
inline BalancedState kernel_project(const SpectralField& r, const SpectralField& U1,
                                    const SpectralField& U2, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("kernel_project: omega must be positive");
    check_same(r.grid, U1.grid, "kernel_project");
    check_same(r.grid, U2.grid, "kernel_project");
    SpectralField curl = vertical_average(spectral_derivative(U2, 1) - spectral_derivative(U1, 2));
    SpectralField rbar = vertical_average(r);
    SpectralField rhs = (omega * omega) * rbar - omega * curl;
    BalancedState out;
    out.q = invert_helmholtz_h(rhs, omega);
    out.v1 = (-1.0 / omega) * spectral_derivative(out.q, 2);
    out.v2 = (1.0 / omega) * spectral_derivative(out.q, 1);
    return out;
}

// ---- multiplier bound check -------------------------------------------------

struct MultiplierReport {
    double sup = 0.0;        // max sampled |grad_xi^A E_j|, component-wise abs
    int excluded = 0;        // degenerate samples skipped
    std::size_t samples = 0;
};

/// Empirical check that the eigenvector fields are L^p-multiplier symbols:
/// samples |grad_xi^A E_j| over the annulus a <= |xi| <= b by central
/// differences, for all multi-indices with |A| = order (order <= 2).
inline MultiplierReport multiplier_sup_check(double a, double b, double k, int order,
                                             std::span<const double> omegas,
                                             int n_radial = 12, int n_angle = 8) {
    if (!(0.0 < a && a < b)) throw std::invalid_argument("multiplier_sup_check: need 0 < a < b");
    if (order < 0 || order > 2) throw std::invalid_argument("multiplier_sup_check: order must be 0, 1 or 2");
    MultiplierReport rep;
    const double h = order == 1 ? 3e-5 : 3e-4;
    auto vecs = [&](double x1, double x2, double om) { return eigenbasis_closed(x1, x2, k, om).vec; };
    for (double om : omegas)
        for (int ir = 0; ir < n_radial; ++ir)
            for (int ia = 0; ia < n_angle; ++ia) {
                const double rad = a + (b - a) * (ir + 0.5) / n_radial;
                const double th = 2.0 * pi * ia / n_angle + 0.1;
                const double x1 = rad * std::cos(th), x2 = rad * std::sin(th);
                try {
                    std::array<Vec4, 4> c0 = vecs(x1, x2, om);
                    ++rep.samples;
                    if (order == 0) {
                        for (const auto& v : c0) rep.sup = std::max(rep.sup, norm(v));
                        continue;
                    }
                    if (order == 1) {
                        auto xp = vecs(x1 + h, x2, om), xm = vecs(x1 - h, x2, om);
                        auto yp = vecs(x1, x2 + h, om), ym = vecs(x1, x2 - h, om);
                        for (int j = 0; j < 4; ++j) {
                            rep.sup = std::max(rep.sup, norm((1.0 / (2 * h)) * (xp[j] - xm[j])));
                            rep.sup = std::max(rep.sup, norm((1.0 / (2 * h)) * (yp[j] - ym[j])));
                        }
                        continue;
                    }
                    auto xp = vecs(x1 + h, x2, om), xm = vecs(x1 - h, x2, om);
                    auto yp = vecs(x1, x2 + h, om), ym = vecs(x1, x2 - h, om);
                    auto pp = vecs(x1 + h, x2 + h, om), pm = vecs(x1 + h, x2 - h, om);
                    auto mp = vecs(x1 - h, x2 + h, om), mm = vecs(x1 - h, x2 - h, om);
                    for (int j = 0; j < 4; ++j) {
                        const double ih2 = 1.0 / (h * h);
                        Vec4 dxx = ih2 * (xp[j] - 2.0 * c0[j] + xm[j]);
                        Vec4 dyy = ih2 * (yp[j] - 2.0 * c0[j] + ym[j]);
                        Vec4 dxy = (0.25 * ih2) * ((pp[j] - pm[j]) - (mp[j] - mm[j]));
                        rep.sup = std::max({rep.sup, norm(dxx), norm(dyy),
                                            norm(dxy)});
                    }
                } catch (const degenerate_mode_error&) {
                    ++rep.excluded;
                }
            }
    return rep;
}

} // namespace rossby

#endif
