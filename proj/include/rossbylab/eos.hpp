#ifndef ROSSBYLAB_EOS_HPP
#define ROSSBYLAB_EOS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace rossby {

/// Barotropic gamma-law pressure, normalized so p'(1) = 1:
///   p(rho) = rho^gamma / gamma,  H(rho) = (rho^gamma - rho)/(gamma (gamma-1)),
/// with H'' = p'/rho and H''(1) = 1.
struct EquationOfState {
    double gamma = 2.0;

    EquationOfState() = default;
    explicit EquationOfState(double g) : gamma(g) {
        if (!(gamma > 1.5))
            throw std::invalid_argument("EquationOfState: gamma must exceed 3/2 (got " +
                                        std::to_string(g) + ")");
    }

    double p(double rho) const { return std::pow(rho, gamma) / gamma; }
    double dp(double rho) const { return std::pow(rho, gamma - 1.0); }
    double H(double rho) const {
        return (std::pow(rho, gamma) - rho) / (gamma * (gamma - 1.0));
    }
    double Hp(double rho) const {
        return (gamma * std::pow(rho, gamma - 1.0) - 1.0) / (gamma * (gamma - 1.0));
    }
    double Hpp(double rho) const { return std::pow(rho, gamma - 2.0); }

    /// rho~(x3) solving H'(rho~) = eps2mn * G + H'(1) with G = -x3:
    /// rho~ = (1 - (gamma-1) eps2mn x3)^{1/(gamma-1)}.
    double static_density(double x3, double eps2mn) const {
        const double base = 1.0 - (gamma - 1.0) * eps2mn * x3;
        if (!(base > 0.0))
            throw std::runtime_error("EquationOfState: static state hits vacuum (eps too large)");
        return std::pow(base, 1.0 / (gamma - 1.0));
    }
};

/// The multiscale regime: Rossby = eps, Mach = eps^m, Froude = eps^n,
/// Reynolds = eps^{-alpha}, constrained by m/2 > n >= 1, alpha > 0.
struct ScalingRegime {
    double eps = 0.2;
    double m = 3.0, n = 1.0, alpha = 1.0;

    ScalingRegime() = default;
    ScalingRegime(double eps_, double m_, double n_, double alpha_)
        : eps(eps_), m(m_), n(n_), alpha(alpha_) {
        validate();
    }

    void validate() const {
        if (!(eps > 0.0 && eps <= 1.0))
            throw std::invalid_argument("ScalingRegime: eps must be in (0, 1]");
        if (!(m / 2.0 > n && n >= 1.0))
            throw std::invalid_argument("ScalingRegime: need m/2 > n >= 1 (m = " +
                                        std::to_string(m) + ", n = " + std::to_string(n) + ")");
        if (!(alpha > 0.0)) throw std::invalid_argument("ScalingRegime: need alpha > 0");
    }

    double omega() const { return std::pow(eps, m - 1.0); }
    double mach() const { return std::pow(eps, m); }
    double eps2m() const { return std::pow(eps, 2.0 * m); }
    double eps2n() const { return std::pow(eps, 2.0 * n); }
    double eps2mn() const { return std::pow(eps, 2.0 * (m - n)); }
    double eps_alpha() const { return std::pow(eps, alpha); }
};

} // namespace rossby

#endif
