#pragma once

#include <span>
#include <string>
#include <vector>

namespace sgbh {

/// u_t = nu u_xx - alpha u^delta u_x + beta u (1 - u^delta)(u^delta - gamma) + noise
struct ModelParams {
    double nu = 0.1;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.5;
    int delta = 1;
    double p_norm = 8.0;

    /// Throws std::invalid_argument on nu <= 0, gamma outside (0,1), delta < 1,
    /// negative alpha/beta or p_norm < 2.
    void validate() const;

    /// p_norm > max(6, 2 delta + 1), the integrability needed for CLT and
    /// moderate-deviation experiments.
    bool admits_limit_theorems() const noexcept;
};

/// Integer power by repeated squaring; exact for the small degrees used here.
constexpr double ipow(double x, int n) noexcept {
    double result = 1.0;
    while (n > 0) {
        if (n & 1) result *= x;
        x *= x;
        n >>= 1;
    }
    return result;
}

// Pointwise nonlinearities and their derivatives.

/// p(u) = u^(delta+1)
constexpr double advective_flux(double u, int delta) noexcept { return ipow(u, delta + 1); }

/// p'(u) = (delta+1) u^delta
constexpr double advective_flux_derivative(double u, int delta) noexcept {
    return (delta + 1) * ipow(u, delta);
}

/// c(u) = u (1 - u^delta)(u^delta - gamma)
constexpr double reaction(double u, double gamma, int delta) noexcept {
    const double ud = ipow(u, delta);
    return u * (1.0 - ud) * (ud - gamma);
}

/// c'(u) = -gamma + (1+gamma)(1+delta) u^delta - (2 delta + 1) u^(2 delta)
constexpr double reaction_derivative(double u, double gamma, int delta) noexcept {
    const double ud = ipow(u, delta);
    return -gamma + (1.0 + gamma) * (1 + delta) * ud - (2 * delta + 1) * ud * ud;
}

/// c''(u) = (1+gamma) delta (1+delta) u^(delta-1) - 2 delta (2 delta + 1) u^(2 delta - 1)
constexpr double reaction_second_derivative(double u, double gamma, int delta) noexcept {
    return (1.0 + gamma) * delta * (1 + delta) * ipow(u, delta - 1) -
           2.0 * delta * (2 * delta + 1) * ipow(u, 2 * delta - 1);
}

/// ((u0 + s z)^m - u0^m) / s expanded binomially, so the quotient stays
/// accurate as s -> 0 and equals m u0^(m-1) z at s = 0.
double power_increment_quotient(double u0, double z, double s, int m) noexcept;

/// (p(u0 + s z) - p(u0)) / s
inline double advective_increment_quotient(double u0, double z, double s, int delta) noexcept {
    return power_increment_quotient(u0, z, s, delta + 1);
}

/// (c(u0 + s z) - c(u0)) / s using c(u) = -gamma u + (1+gamma) u^(delta+1) - u^(2 delta + 1).
inline double reaction_increment_quotient(double u0, double z, double s, double gamma,
                                          int delta) noexcept {
    return -gamma * z + (1.0 + gamma) * power_increment_quotient(u0, z, s, delta + 1) -
           power_increment_quotient(u0, z, s, 2 * delta + 1);
}

// Field versions over grid samples.
std::vector<double> advective_nonlinearity(std::span<const double> u, int delta);
std::vector<double> advective_derivative(std::span<const double> u0, int delta);
std::vector<double> reaction_nonlinearity(std::span<const double> u, double gamma, int delta);
std::vector<double> reaction_derivative(std::span<const double> u0, double gamma, int delta);
std::vector<double> reaction_second_derivative(std::span<const double> u0, double gamma, int delta);

/// Noise coefficient g(t, x, r) = kappa0 + kappa1 r (kappa1 = 0 for the
/// constant kind). Satisfies |g| <= K(1+|r|) and |g(r)-g(s)| <= L|r-s| with
/// K = |kappa0| + |kappa1| and L = |kappa1|.
struct NoiseCoefficient {
    enum class Kind { constant, affine };

    Kind kind = Kind::affine;
    double kappa0 = 1.0;
    double kappa1 = 0.5;

    static NoiseCoefficient constant(double value) { return {Kind::constant, value, 0.0}; }
    static NoiseCoefficient affine(double k0, double k1) { return {Kind::affine, k0, k1}; }

    double operator()(double /*t*/, double /*x*/, double r) const noexcept {
        return kind == Kind::constant ? kappa0 : kappa0 + kappa1 * r;
    }
    double slope() const noexcept { return kind == Kind::constant ? 0.0 : kappa1; }
    bool is_state_independent() const noexcept { return slope() == 0.0; }
    bool is_zero() const noexcept { return kappa0 == 0.0 && slope() == 0.0; }

    double growth_bound() const noexcept;     // K
    double lipschitz_bound() const noexcept;  // L
};

std::string to_string(NoiseCoefficient::Kind kind);
NoiseCoefficient::Kind parse_noise_kind(const std::string& text);

}  // namespace sgbh
