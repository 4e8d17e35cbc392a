#pragma once

#include <cmath>
#include <stdexcept>

namespace lowmac {

/// Barotropic pressure law p = rho^gamma and the companion convex functions
/// used by the entropy estimates:
///   b(rho) = rho log rho          (gamma = 1)
///   b(rho) = rho^gamma/(gamma-1)  (gamma > 1)
/// which satisfy rho b'(rho) - b(rho) = rho^gamma, and the relative entropy
///   Pi(rho) = b(rho) - b(1) - b'(1)(rho - 1) >= 0, Pi(1) = 0.
///
/// Differences of the pressure law and Pi itself are evaluated through
/// expm1/log1p so that they keep full relative accuracy when rho is within
/// roundoff distance of a constant state. Flows at Mach number ma carry
/// density fluctuations of order ma^2, and the scheme divides pressure
/// differences by ma^2 (and their squares by ma^4); a naive rho^gamma
/// difference would lose all significant digits there.
struct Barotropic {
    double gamma;

    explicit Barotropic(double g) : gamma(g) {
        if (!(g >= 1))
            throw std::invalid_argument("Barotropic: gamma must be >= 1");
    }

    /// p = rho^gamma (exp(gamma log rho) semantics; gamma in {1,2} take
    /// exact fast paths that agree with the general branch to ulp level).
    double pressure(double rho) const {
        if (gamma == 1.0) return rho;
        if (gamma == 2.0) return rho * rho;
        return std::exp(gamma * std::log(rho));
    }

    double pressure_derivative(double rho) const {
        if (gamma == 1.0) return 1.0;
        if (gamma == 2.0) return 2.0 * rho;
        return gamma * std::exp((gamma - 1.0) * std::log(rho));
    }

    /// p(b) - p(a) without cancellation: relative accuracy follows the
    /// difference, not the operands. Requires a, b > 0.
    double pressure_diff(double a, double b) const {
        return pressure_diff_incr(a, b, b - a);
    }

    /// Same, with the difference b - a supplied exactly by the caller.
    /// Nonlinear solvers that carry density increments below one ulp of the
    /// base state use this to keep the pressure force consistent with the
    /// increment rather than with the rounded sum.
    double pressure_diff_incr(double a, double b, double diff) const {
        if (gamma == 1.0) return diff;
        if (gamma == 2.0) return diff * (b + a);
        return pressure(a) * std::expm1(gamma * std::log1p(diff / a));
    }

    double b_value(double rho) const {
        if (gamma == 1.0) return rho * std::log(rho);
        return pressure(rho) / (gamma - 1.0);
    }

    double b_derivative(double rho) const {
        if (gamma == 1.0) return std::log(rho) + 1.0;
        return gamma / (gamma - 1.0) * ((gamma == 2.0)
                                            ? rho
                                            : std::exp((gamma - 1.0) * std::log(rho)));
    }

    double b_at_one() const { return gamma == 1.0 ? 0.0 : 1.0 / (gamma - 1.0); }
    double b_derivative_at_one() const {
        return gamma == 1.0 ? 1.0 : gamma / (gamma - 1.0);
    }

    /// Pi(rho), accurate for rho near 1 (value ~ gamma (rho-1)^2 / 2).
    double pi(double rho) const {
        const double x = rho - 1.0;
        if (gamma == 1.0) return (1.0 + x) * std::log1p(x) - x;
        if (gamma == 2.0) return x * x;
        return (std::expm1(gamma * std::log1p(x)) - gamma * x) / (gamma - 1.0);
    }

    /// b(rho) - b'(1) rho = Pi(rho) - 1 for every gamma >= 1; the identity
    /// pins the constant: b(1) - b'(1) = -1.
    double b_fluctuation(double rho) const { return pi(rho) - 1.0; }
};

}  // namespace lowmac
