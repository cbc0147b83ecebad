#ifndef ROSSBYLAB_QUADRATURE_HPP
#define ROSSBYLAB_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "rossbylab/util.hpp"

namespace rossby {

struct QuadResult {
    complexd value{0.0};
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

struct quadrature_error : std::runtime_error {
    double achieved;
    explicit quadrature_error(const std::string& what, double ach)
        : std::runtime_error(what + " (achieved tolerance " + std::to_string(ach) + ")"),
          achieved(ach) {}
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// One Gauss-Kronrod 7-15 panel; returns (K15, |K15 - G7|).
template <typename F>
std::pair<complexd, double> gk15(F&& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    complexd kres = gk_wk[7] * f(c);
    complexd gres = gk_wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const complexd fp = f(c + h * gk_x[i]);
        const complexd fm = f(c - h * gk_x[i]);
        kres += gk_wk[i] * (fp + fm);
        if (i % 2 == 1) gres += gk_wg[i / 2] * (fp + fm);
    }
    kres *= h;
    gres *= h;
    return {kres, std::abs(kres - gres)};
}

struct Panel {
    double lo, hi, err;
    complexd val;
    bool operator<(const Panel& o) const { return err < o.err; }
};

} // namespace detail

/// Adaptive Gauss-Kronrod integration of a complex integrand. `phase_span`
/// is the total phase swept across [lo, hi] by any oscillatory factor; the
/// initial partition keeps it below 2*pi per panel. Throws quadrature_error
/// if the tolerance cannot be reached within the panel budget.
inline QuadResult integrate_adaptive(const std::function<complexd(double)>& f, double lo,
                                     double hi, double reltol = 1e-8, double abstol = 1e-14,
                                     double phase_span = 0.0, int max_panels = 200000) {
    if (!(hi > lo)) throw std::invalid_argument("integrate_adaptive: need hi > lo");
    const int n0 = std::clamp(int(std::ceil(std::abs(phase_span) / (2.0 * pi))), 1, max_panels / 2);

    std::priority_queue<detail::Panel> panels;
    QuadResult out;
    complexd total = 0.0;
    double toterr = 0.0;
    for (int i = 0; i < n0; ++i) {
        const double a = lo + (hi - lo) * i / n0;
        const double b = lo + (hi - lo) * (i + 1) / n0;
        auto [v, e] = detail::gk15(f, a, b);
        panels.push({a, b, e, v});
        total += v;
        toterr += e;
        out.evaluations += 15;
    }
    int n = n0;
    while (toterr > std::max(abstol, reltol * std::abs(total)) && n < max_panels) {
        detail::Panel w = panels.top();
        panels.pop();
        const double mid = 0.5 * (w.lo + w.hi);
        auto [v1, e1] = detail::gk15(f, w.lo, mid);
        auto [v2, e2] = detail::gk15(f, mid, w.hi);
        total += v1 + v2 - w.val;
        toterr += e1 + e2 - w.err;
        panels.push({w.lo, mid, e1, v1});
        panels.push({mid, w.hi, e2, v2});
        out.evaluations += 30;
        ++n;
    }
    out.value = total;
    out.error = toterr;
    out.converged = toterr <= std::max(abstol, reltol * std::abs(total));
    if (!out.converged)
        throw quadrature_error("integrate_adaptive: panel budget exhausted",
                               std::abs(total) > 0 ? toterr / std::abs(total) : toterr);
    return out;
}

/// Real-valued convenience wrapper.
inline double integrate_real(const std::function<double(double)>& f, double lo, double hi,
                             double reltol = 1e-10, double abstol = 1e-14) {
    return integrate_adaptive([&](double z) { return complexd(f(z), 0.0); }, lo, hi, reltol, abstol)
        .value.real();
}

} // namespace rossby

#endif
