#ifndef ROSSBYLAB_BESSEL_HPP
#define ROSSBYLAB_BESSEL_HPP

#include <cmath>
#include <stdexcept>

namespace rossby {

/// Bessel functions of the first kind, orders 0 and 1, for x >= 0.
/// J0' = -J1 is used by the oscillatory-integral variation terms.
inline double bessel_j(int order, double x) {
    if (x < 0.0) throw std::invalid_argument("bessel_j: x must be >= 0");
    if (order != 0 && order != 1) throw std::invalid_argument("bessel_j: order must be 0 or 1");
    return std::cyl_bessel_j(double(order), x);
}

inline double bessel_j0(double x) { return bessel_j(0, x); }
inline double bessel_j1(double x) { return bessel_j(1, x); }

} // namespace rossby

#endif
