#ifndef ROSSBYLAB_CUTOFF_HPP
#define ROSSBYLAB_CUTOFF_HPP

#include <cmath>
#include <stdexcept>

namespace rossby {

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, exp(-1/s)-type transition.
inline double smoothstep_cinf(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double fa = std::exp(-1.0 / s);
    const double fb = std::exp(-1.0 / (1.0 - s));
    return fa / (fa + fb);
}

inline double smoothstep_cinf_deriv(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double fa = std::exp(-1.0 / s);
    const double fb = std::exp(-1.0 / (1.0 - s));
    const double da = fa / (s * s);
    const double db = -fb / ((1.0 - s) * (1.0 - s));
    const double sum = fa + fb;
    return (da * sum - fa * (da + db)) / (sum * sum);
}

/// Smooth plateau window: 0 outside (r0, r3), 1 on [r1, r2].
inline double smooth_window(double x, double r0, double r1, double r2, double r3) {
    if (x <= r1) return smoothstep_cinf((x - r0) / (r1 - r0));
    if (x >= r2) return 1.0 - smoothstep_cinf((x - r2) / (r3 - r2));
    return 1.0;
}

/// Frequency-truncation profile psi in the radial-squared variable z:
/// supported in [a, b], identically 1 on the middle half, C-infinity.
struct CutoffProfile {
    double a = 1.0, b = 9.0;

    CutoffProfile() = default;
    CutoffProfile(double a_, double b_) : a(a_), b(b_) {
        if (!(0.0 < a && a < b)) throw std::invalid_argument("CutoffProfile: need 0 < a < b");
    }

    double rise_end() const { return a + 0.25 * (b - a); }
    double fall_begin() const { return b - 0.25 * (b - a); }

    /// psi(sqrt(z)) as a function of z.
    double value_z(double z) const {
        if (z <= a || z >= b) return 0.0;
        return smooth_window(z, a, rise_end(), fall_begin(), b);
    }

    /// d/dz of value_z.
    double deriv_z(double z) const {
        if (z <= a || z >= b) return 0.0;
        const double w = 0.25 * (b - a);
        if (z < rise_end()) return smoothstep_cinf_deriv((z - a) / w) / w;
        if (z > fall_begin()) return -smoothstep_cinf_deriv((z - fall_begin()) / w) / w;
        return 0.0;
    }

    /// psi as a function of the radius r = |xi|.
    double value_r(double r) const { return value_z(r * r); }
};

} // namespace rossby

#endif
