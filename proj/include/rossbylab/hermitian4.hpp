#ifndef ROSSBYLAB_HERMITIAN4_HPP
#define ROSSBYLAB_HERMITIAN4_HPP

#include <array>
#include <cmath>

#include "rossbylab/util.hpp"

namespace rossby {

using Vec4 = std::array<complexd, 4>;

struct Mat4 {
    std::array<complexd, 16> m{};

    complexd& operator()(int i, int j) { return m[i * 4 + j]; }
    complexd operator()(int i, int j) const { return m[i * 4 + j]; }

    Vec4 operator*(const Vec4& v) const {
        Vec4 out{};
        for (int i = 0; i < 4; ++i) {
            complexd s = 0.0;
            for (int j = 0; j < 4; ++j) s += m[i * 4 + j] * v[j];
            out[i] = s;
        }
        return out;
    }

    double frobenius() const {
        double s = 0.0;
        for (const complexd& c : m) s += std::norm(c);
        return std::sqrt(s);
    }

    bool is_hermitian(double tol = 0.0) const {
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
        return true;
    }
};

inline complexd dot(const Vec4& a, const Vec4& b) {  // <a, b> = sum a_i conj(b_i)
    complexd s = 0.0;
    for (int i = 0; i < 4; ++i) s += a[i] * std::conj(b[i]);
    return s;
}

inline double norm(const Vec4& a) { return std::sqrt(std::abs(dot(a, a))); }

inline Vec4 operator*(complexd c, const Vec4& v) {
    Vec4 out = v;
    for (auto& x : out) x *= c;
    return out;
}

inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    Vec4 out;
    for (int i = 0; i < 4; ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    Vec4 out;
    for (int i = 0; i < 4; ++i) out[i] = a[i] + b[i];
    return out;
}

/// Rotate a vector's phase so that its first non-negligible component is
/// real and positive; deterministic output for regression tests.
inline Vec4 fix_phase(const Vec4& v) {
    for (int i = 0; i < 4; ++i) {
        const double a = std::abs(v[i]);
        if (a > 1e-12) return (std::conj(v[i]) / a) * v;
    }
    return v;
}

struct HermitianEig4 {
    std::array<double, 4> values{};  // descending
    std::array<Vec4, 4> vectors{};   // orthonormal, values[i] <-> vectors[i]
};

/// Cyclic complex Jacobi for a 4x4 Hermitian matrix. Throws after the sweep
/// cap; eigenvalues are returned in descending order with phase-fixed,
/// orthonormal eigenvectors.
inline HermitianEig4 hermitian_eig4(const Mat4& A0, int max_sweeps = 64) {
    Mat4 A = A0;
    if (!A.is_hermitian(1e-12 * std::max(1.0, A.frobenius())))
        throw std::invalid_argument("hermitian_eig4: input is not Hermitian");
    // symmetrize round-off
    for (int i = 0; i < 4; ++i) {
        A(i, i) = complexd(A(i, i).real(), 0.0);
        for (int j = i + 1; j < 4; ++j) {
            const complexd h = 0.5 * (A(i, j) + std::conj(A(j, i)));
            A(i, j) = h;
            A(j, i) = std::conj(h);
        }
    }

    Mat4 V;
    for (int i = 0; i < 4; ++i) V(i, i) = 1.0;

    const double scale = std::max(A.frobenius(), 1e-300);
    const double tol = 1e-15 * scale;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += 2.0 * std::norm(A(p, q));
        if (std::sqrt(off) < tol) break;

        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) {
                const double r = std::abs(A(p, q));
                if (r <= tol * 1e-2) continue;
                const complexd phase = A(p, q) / r;       // a_pq = r * phase
                const double alpha = A(p, p).real(), beta = A(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * r, alpha - beta);
                const double c = std::cos(theta), s = std::sin(theta);
                const complexd sp = s * phase;            // G col p gets s*conj(phase), col q -s*phase

                // A <- G* A G ; columns first, then rows
                for (int i = 0; i < 4; ++i) {
                    const complexd aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip + std::conj(sp) * aiq;
                    A(i, q) = -sp * aip + c * aiq;
                }
                for (int j = 0; j < 4; ++j) {
                    const complexd apj = A(p, j), aqj = A(q, j);
                    A(p, j) = c * apj + sp * aqj;
                    A(q, j) = -std::conj(sp) * apj + c * aqj;
                }
                for (int i = 0; i < 4; ++i) {
                    const complexd vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip + std::conj(sp) * viq;
                    V(i, q) = -sp * vip + c * viq;
                }
            }
    }
    if (sweep >= max_sweeps)
        throw std::runtime_error("hermitian_eig4: no convergence within the sweep cap");

    std::array<int, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return A(a, a).real() > A(b, b).real(); });

    HermitianEig4 out;
    for (int i = 0; i < 4; ++i) {
        out.values[i] = A(order[i], order[i]).real();
        Vec4 v;
        for (int r2 = 0; r2 < 4; ++r2) v[r2] = V(r2, order[i]);
        out.vectors[i] = fix_phase((1.0 / norm(v)) * v);
    }
    return out;
}

} // namespace rossby

#endif
