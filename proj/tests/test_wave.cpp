#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "rossbylab/wave_operator.hpp"

using namespace rossby;
using rossby::testing::max_coeff_diff;
using rossby::testing::random_band_limited;

namespace {

double residual(const Mat4& A, const Vec4& E, double lambda) {
    Vec4 r = A * E - complexd(lambda) * E;
    return norm(r);
}

double gram_error(const EigenSystem& es) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const complexd g = dot(es.vec[i], es.vec[j]);
            worst = std::max(worst, std::abs(g - (i == j ? complexd(1.0) : complexd(0.0))));
        }
    return worst;
}

SpectralState4 random_state(const Grid& g, double omega, Rng& rng, double frac = 0.6) {
    SpectralState4 st(g, omega);
    st.s = random_band_limited(g, Parity::even, rng, frac);
    st.v1 = random_band_limited(g, Parity::even, rng, frac);
    st.v2 = random_band_limited(g, Parity::even, rng, frac);
    st.v3 = random_band_limited(g, Parity::odd, rng, frac);
    return st;
}

double state_inner(const SpectralState4& a, const SpectralState4& b) {
    return inner_product_l2(a.s, b.s) + inner_product_l2(a.v1, b.v1) +
           inner_product_l2(a.v2, b.v2) + inner_product_l2(a.v3, b.v3);
}

} // namespace

TEST_CASE("assemble_mode_matrix: pattern and Hermitian symmetry") {
    ModeMatrix M = assemble_mode_matrix(0.4, -1.2, 2 * pi, 0.35);
    const Mat4& A = M.a;
    CHECK(A(0, 1) == complexd(0.4));
    CHECK(A(0, 2) == complexd(-1.2));
    CHECK(A(0, 3) == complexd(2 * pi));
    CHECK(A(1, 2) == complexd(0.0, 0.35));
    CHECK(A(2, 1) == complexd(0.0, -0.35));
    CHECK(A(3, 0) == complexd(2 * pi));
    CHECK(A(1, 1) == complexd(0.0));
    CHECK(A.is_hermitian(0.0));

    // pure acoustic symbol: eigenvalues +-1, 0, 0
    auto ev = eigenvalues_oracle(assemble_mode_matrix(1.0, 0.0, 0.0, 0.0));
    CHECK(ev[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(ev[1]) < 1e-12);
    CHECK(std::abs(ev[2]) < 1e-12);
    CHECK(ev[3] == Catch::Approx(-1.0).margin(1e-12));

    // xi = 0 block structure: +-k and +-omega
    auto ev2 = eigenvalues_oracle(assemble_mode_matrix(0.0, 0.0, pi, 0.5));
    CHECK(ev2[0] == Catch::Approx(pi).margin(1e-12));
    CHECK(ev2[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(ev2[2] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(ev2[3] == Catch::Approx(-pi).margin(1e-12));
}

TEST_CASE("eigenvalues_closed: pinned values and identities") {
    {
        auto l = eigenvalues_closed(1.0, 0.0, 0.0);
        CHECK(l[0] == Catch::Approx(1.0).margin(1e-15));
        CHECK(l[2] == 0.0);
    }
    {
        // |xi| = 0: lambda1 = max(omega, |k|), lambda3 = min
        auto l = eigenvalues_closed(0.0, pi, 0.5);
        CHECK(l[0] == Catch::Approx(pi).margin(1e-14));
        CHECK(l[2] == Catch::Approx(0.5).margin(1e-14));
    }
    {
        // golden-ratio point
        auto l = eigenvalues_closed(1.0, 1.0, 1.0);
        CHECK(l[0] == Catch::Approx(1.6180339887498949).margin(1e-14));
        CHECK(l[2] == Catch::Approx(0.6180339887498949).margin(1e-14));
        CHECK(l[0] * l[2] == Catch::Approx(1.0).margin(1e-14));
    }

    // lambda2 = -lambda1 and lambda4 = -lambda3 exactly; identities and
    // inequalities across a parameter grid
    for (double z : {0.1, 0.5, 2.0, 9.0, 16.0})
        for (double k : {0.0, pi, 2 * pi, 3 * pi})
            for (double om : {0.05, 0.3, 0.7, 1.0}) {
                auto l = eigenvalues_closed(z, k, om);
                CHECK(l[1] == -l[0]);
                CHECK(l[3] == -l[2]);
                CHECK(std::abs(l[0] * l[2] - om * k) <= 1e-12 * std::max(1.0, om * k));
                CHECK(l[0] * l[0] >= z / 2 - 1e-14);
                const double S = om * om + z + k * k;
                CHECK(S * S - 4 * om * om * k * k >= z * z - 1e-12 * z * z);
                CHECK(l[0] * l[0] - k * k >= z / 2 - 1e-10);
            }
}

TEST_CASE("eigenvalues_oracle vs closed form on a sampled grid") {
    Rng rng(17);
    // diagonal sanity
    Mat4 D;
    D(0, 0) = 3.0; D(1, 1) = -1.0; D(2, 2) = 7.0; D(3, 3) = 0.5;
    ModeMatrix MD;
    MD.a = D;
    auto ed = eigenvalues_oracle(MD);
    CHECK(ed[0] == Catch::Approx(7.0));
    CHECK(ed[1] == Catch::Approx(3.0));
    CHECK(ed[2] == Catch::Approx(0.5));
    CHECK(ed[3] == Catch::Approx(-1.0));

    // zero matrix
    auto ez = eigenvalues_oracle(assemble_mode_matrix(0, 0, 0, 0));
    for (double v : ez) CHECK(std::abs(v) < 1e-15);

    // spec'd spot check
    {
        auto eo = eigenvalues_oracle(assemble_mode_matrix(1.0, 1.0, 2 * pi, 0.3));
        auto ec = eigenvalues_closed(2.0, 2 * pi, 0.3);
        CHECK(std::abs(eo[0] - ec[0]) < 1e-10);
        CHECK(std::abs(eo[1] - ec[2]) < 1e-10);
        CHECK(std::abs(eo[2] - ec[3]) < 1e-10);
        CHECK(std::abs(eo[3] - ec[1]) < 1e-10);
    }

    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const double x1 = rng.uniform(-4, 4), x2 = rng.uniform(-4, 4);
        const double k = pi * double(int(rng.uniform(0, 4)));
        const double om = rng.uniform(0.01, 1.0);
        auto eo = eigenvalues_oracle(assemble_mode_matrix(x1, x2, k, om));
        auto ec = eigenvalues_closed(x1 * x1 + x2 * x2, k, om);
        worst = std::max({worst, std::abs(eo[0] - ec[0]), std::abs(eo[1] - ec[2]),
                          std::abs(eo[2] - ec[3]), std::abs(eo[3] - ec[1])});
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("eigenbasis_closed: kernel pair, orthonormality, residuals, ei3") {
    // kernel vector at xi = (1,0), k = 0, omega = 0.5: (1.25)^(-1/2) [-i/2, 0, 1, 0]
    EigenSystem es = eigenbasis_closed(1.0, 0.0, 0.0, 0.5);
    const double mu = 1.0 / std::sqrt(1.25);
    CHECK(std::abs(es.vec[2][0] - complexd(0.0, -0.5 * mu)) < 1e-14);
    CHECK(std::abs(es.vec[2][1]) < 1e-14);
    CHECK(std::abs(es.vec[2][2] - complexd(mu)) < 1e-14);
    CHECK(std::abs(es.vec[2][3]) < 1e-14);
    CHECK(std::abs(es.vec[3][3] - complexd(1.0)) < 1e-14);
    CHECK(gram_error(es) < 1e-10);

    Rng rng(29);
    for (int trial = 0; trial < 120; ++trial) {
        const double x1 = rng.uniform(-3, 3), x2 = rng.uniform(-3, 3);
        if (x1 * x1 + x2 * x2 < 0.01) continue;
        const double k = pi * double(int(rng.uniform(0, 4)));
        const double om = rng.uniform(0.02, 1.0);
        EigenSystem e = eigenbasis_closed(x1, x2, k, om);
        CHECK(gram_error(e) < 1e-10);
        const Mat4 A = assemble_mode_matrix(x1, x2, k, om).a;
        for (int j = 0; j < 4; ++j) CHECK(residual(A, e.vec[j], e.lambda[j]) < 1e-10);
    }

    // ei3 relation xi1 v1 + xi2 v2 + k v3 = lambda q on the lambda1 branch
    EigenSystem e3 = eigenbasis_closed(1.0, 1.0, pi, 0.7);
    const Vec4& E = e3.vec[0];
    const complexd lhs = 1.0 * E[1] + 1.0 * E[2] + pi * E[3];
    CHECK(std::abs(lhs - e3.lambda[0] * E[0]) < 1e-12);

    CHECK_THROWS_AS(eigenbasis_closed(1e-10, 0.0, pi, 0.5), degenerate_mode_error);
    CHECK_THROWS_AS(eigenbasis_closed(1.0, 0.0, pi, 0.0), degenerate_mode_error);  // lambda3 = 0, k != 0
}

TEST_CASE("eigenbasis_numeric: fallback quality") {
    // identity matrix -> standard basis
    ModeMatrix I;
    for (int i = 0; i < 4; ++i) I.a(i, i) = 1.0;
    EigenSystem ei = eigenbasis_numeric(I);
    CHECK(gram_error(ei) < 1e-12);
    for (int j = 0; j < 4; ++j) CHECK(ei.lambda[j] == Catch::Approx(1.0));

    // xi = 0 block case
    ModeMatrix M = assemble_mode_matrix(0.0, 0.0, pi, 0.5);
    EigenSystem e = eigenbasis_numeric(M);
    CHECK(e.lambda[0] == Catch::Approx(pi).margin(1e-12));
    CHECK(e.lambda[2] == Catch::Approx(0.5).margin(1e-12));
    CHECK(e.lambda[1] == Catch::Approx(-pi).margin(1e-12));
    CHECK(e.lambda[3] == Catch::Approx(-0.5).margin(1e-12));
    for (int j = 0; j < 4; ++j) CHECK(residual(M.a, e.vec[j], e.lambda[j]) < 1e-12);
    CHECK(gram_error(e) < 1e-12);

    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        ModeMatrix R = assemble_mode_matrix(rng.uniform(-3, 3), rng.uniform(-3, 3),
                                            pi * double(int(rng.uniform(0, 3))), rng.uniform(0, 1));
        EigenSystem er = eigenbasis_numeric(R);
        for (int j = 0; j < 4; ++j) CHECK(residual(R.a, er.vec[j], er.lambda[j]) < 1e-11);
        CHECK(gram_error(er) < 1e-11);
    }
}

TEST_CASE("propagate_mode: identity at t = 0, kernel fixed points, unitarity") {
    EigenSystem es = eigenbasis_closed(0.8, -0.6, 0.0, 0.4);
    Rng rng(41);
    ModeState y0;
    for (auto& c : y0) c = complexd(rng.normal(), rng.normal());

    ModeState y = propagate_mode(y0, 0.0, es);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(y[i] - y0[i]) < 1e-14);

    // kernel eigenvector is a fixed point for all t
    for (double t : {0.3, 7.1, 628.0}) {
        ModeState k = propagate_mode(es.vec[2], t, es);
        double d = 0.0;
        for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(k[i] - es.vec[2][i]));
        CHECK(d < 1e-12);
    }

    ModeState y73 = propagate_mode(y0, 7.3, es);
    CHECK(norm(y73) == Catch::Approx(norm(y0)).epsilon(1e-13));
}

TEST_CASE("evolve: conservation, realness, single-mode acoustics") {
    Grid g = make_grid(16, 16, 4, 2 * pi);
    Rng rng(53);
    const double omega = 0.37;

    // zero state stays zero
    SpectralState4 z(g, omega);
    SpectralState4 zt = evolve(z, 3.0);
    CHECK(state_norm_l2(zt) == 0.0);

    // L2 isometry on random band-limited data
    SpectralState4 st = random_state(g, omega, rng);
    WavePropagator prop(g, omega);
    const double n0 = state_norm_l2(st);
    for (double t : {0.5, 1.0, 37.0}) {
        SpectralState4 stt = prop.evolve(st, t);
        CHECK(std::abs(state_norm_l2(stt) - n0) < 1e-12 * n0);
    }

    // evolution preserves realness of the physical fields
    SpectralState4 s1 = prop.evolve(st, 1.7);
    for (const SpectralField* f : {&s1.s, &s1.v1, &s1.v2, &s1.v3}) {
        SpectralField back = transform_forward(transform_inverse(*f));
        CHECK(max_coeff_diff(*f, back) < 1e-12);
    }

    // single-mode acoustics at k = 0, omega = 0: s(t) = s0 cos(|xi| t)
    SpectralState4 ac(g, 0.0);
    ac.s(0, 0, 2) = 0.5;             // xi = (2, 0) on L = 2*pi
    ac.s(0, 0, g.nx - 2) = 0.5;      // Hermitian partner
    WavePropagator prop0(g, 0.0);
    for (double t : {0.2, 1.0, 2.9}) {
        SpectralState4 at = prop0.evolve(ac, t);
        CHECK(std::abs(at.s(0, 0, 2) - complexd(0.5 * std::cos(2.0 * t))) < 1e-12);
    }
}

TEST_CASE("kernel_project: constants, single mode, idempotence, balance") {
    Grid g = make_grid(32, 32, 4, 4 * pi);
    const double omega = 0.6;
    Rng rng(67);

    // r = const, U = 0 -> q = const, v = 0
    SpectralField r(g, Parity::even);
    r(0, 0, 0) = 2.25;
    SpectralField zero(g, Parity::even);
    BalancedState bs = kernel_project(r, zero, zero, omega);
    CHECK(std::abs(bs.q(0, 0, 0) - complexd(2.25)) < 1e-13);
    CHECK(l2_norm(bs.v1) < 1e-13);
    CHECK(l2_norm(bs.v2) < 1e-13);

    // rotational single mode: q^ = +omega |xi0|^2 psi^ / (|xi0|^2 + omega^2)
    // (orthogonal-projection sign)
    SpectralField psi(g, Parity::even);
    const int mx = 2, my = 1;
    psi(0, my, mx) = complexd(0.3, -0.2);
    psi(0, g.ny - my, g.nx - mx) = std::conj(psi(0, my, mx));
    SpectralField u1 = (-1.0) * spectral_derivative(psi, 2);
    SpectralField u2 = spectral_derivative(psi, 1);
    SpectralField rz(g, Parity::even);
    BalancedState bp = kernel_project(rz, u1, u2, omega);
    const double xi0sq = g.xi1[mx] * g.xi1[mx] + g.xi2[my] * g.xi2[my];
    const complexd expect = omega * xi0sq * psi(0, my, mx) / (xi0sq + omega * omega);
    CHECK(std::abs(bp.q(0, my, mx) - expect) < 1e-13);

    // idempotence and in-kernel checks on random data
    SpectralField rr = random_band_limited(g, Parity::even, rng, 0.5);
    SpectralField w1 = random_band_limited(g, Parity::even, rng, 0.5);
    SpectralField w2 = random_band_limited(g, Parity::even, rng, 0.5);
    BalancedState b1 = kernel_project(rr, w1, w2, omega);

    auto embed = [&](const SpectralField& two_d) {
        SpectralField F(g, Parity::even);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) F(0, iy, ix) = two_d(0, iy, ix);
        return F;
    };
    BalancedState b2 = kernel_project(embed(b1.q), embed(b1.v1), embed(b1.v2), omega);
    CHECK(max_coeff_diff(b1.q, b2.q) < 1e-11);
    CHECK(max_coeff_diff(b1.v1, b2.v1) < 1e-11);
    CHECK(max_coeff_diff(b1.v2, b2.v2) < 1e-11);

    // geostrophic balance omega f x v + grad q = 0, coefficientwise
    SpectralField bal1 = (-omega) * b1.v2 + spectral_derivative(b1.q, 1);
    SpectralField bal2 = omega * b1.v1 + spectral_derivative(b1.q, 2);
    CHECK(sup_norm(bal1) < 1e-12);
    CHECK(sup_norm(bal2) < 1e-12);

    // output annihilated by B, and fixed by evolve
    SpectralState4 kst(g, omega);
    kst.s = embed(b1.q);
    kst.v1 = embed(b1.v1);
    kst.v2 = embed(b1.v2);
    SpectralState4 Bk = apply_B(kst);
    CHECK(state_norm_l2(Bk) < 1e-10);
    SpectralState4 kev = WavePropagator(g, omega).evolve(kst, 11.0);
    CHECK(max_coeff_diff(kev.s, kst.s) < 1e-10);
    CHECK(max_coeff_diff(kev.v1, kst.v1) < 1e-10);
    CHECK(max_coeff_diff(kev.v2, kst.v2) < 1e-10);
    CHECK(l2_norm(kev.v3) < 1e-10);

    CHECK_THROWS_AS(kernel_project(rr, w1, w2, 0.0), std::invalid_argument);
}

TEST_CASE("apply_B: skew symmetry and gradient action") {
    Grid g = make_grid(16, 16, 4, 2 * pi);
    Rng rng(71);
    const double omega = 0.45;

    SpectralState4 x = random_state(g, omega, rng);
    SpectralState4 y = random_state(g, omega, rng);
    const double skew = state_inner(apply_B(x), y) + state_inner(x, apply_B(y));
    const double scale = state_norm_l2(x) * state_norm_l2(y);
    CHECK(std::abs(skew) < 1e-12 * scale);

    // s single mode, V = 0: output velocity part is grad s
    SpectralState4 sm(g, omega);
    sm.s(1, 1, 2) = complexd(0.4, 0.1);
    sm.s(1, g.ny - 1, g.nx - 2) = std::conj(sm.s(1, 1, 2));
    SpectralState4 Bs = apply_B(sm);
    CHECK(max_coeff_diff(Bs.v1, spectral_derivative(sm.s, 1)) < 1e-14);
    CHECK(max_coeff_diff(Bs.v2, spectral_derivative(sm.s, 2)) < 1e-14);
    CHECK(max_coeff_diff(Bs.v3, spectral_derivative(sm.s, 3)) < 1e-14);
    CHECK(l2_norm(Bs.s) == 0.0);
}

TEST_CASE("multiplier_sup_check") {
    std::vector<double> omegas = {1.0, 0.1, 0.01};

    MultiplierReport r0 = multiplier_sup_check(1.0, 4.0, pi, 0, omegas);
    CHECK(r0.sup == Catch::Approx(1.0).margin(1e-9));
    CHECK(r0.excluded == 0);

    // k = 0: the vertical branch E = [0,0,0,1] has zero derivatives
    EigenSystem a = eigenbasis_closed(1.5, 0.4, 0.0, 0.3);
    EigenSystem b = eigenbasis_closed(1.5 + 1e-5, 0.4, 0.0, 0.3);
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a.vec[3][i] - b.vec[3][i]));
    CHECK(d == 0.0);

    // k = pi, first derivatives: finite and stable as omega -> 0
    double sup_ref = 0.0;
    for (double om : omegas) {
        const double single[] = {om};
        MultiplierReport r1 = multiplier_sup_check(1.0, 4.0, pi, 1, std::span<const double>(single, 1));
        CHECK(r1.excluded == 0);
        CHECK(r1.sup < 10.0);
        if (om == 1.0) sup_ref = r1.sup;
        else CHECK(r1.sup < 5.0 * sup_ref + 5.0);
    }

    MultiplierReport r2 = multiplier_sup_check(1.0, 4.0, pi, 2, omegas);
    CHECK(r2.sup < 100.0);
    CHECK(std::isfinite(r2.sup));
}
