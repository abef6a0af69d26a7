#include "sgbh/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgbh {

void ModelParams::validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("model.nu must be > 0");
    if (!(alpha >= 0.0)) throw std::invalid_argument("model.alpha must be >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("model.beta must be >= 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("model.gamma must lie in (0,1)");
    if (delta < 1) throw std::invalid_argument("model.delta must be a positive integer");
    if (!(p_norm >= 2.0)) throw std::invalid_argument("model.p_norm must be >= 2");
}

bool ModelParams::admits_limit_theorems() const noexcept {
    return p_norm > std::max(6.0, 2.0 * delta + 1.0);
}

double power_increment_quotient(double u0, double z, double s, int m) noexcept {
    // sum_{k=1}^{m} C(m,k) u0^{m-k} s^{k-1} z^k, Horner in w = s z.
    // q = z * sum_{k=1}^{m} C(m,k) u0^{m-k} w^{k-1}
    const double w = s * z;
    double acc = 0.0;
    double binom = 1.0;  // C(m, m)
    double u0_power = 1.0;  // u0^(m-k)
    for (int k = m; k >= 1; --k) {
        acc = acc * w + binom * u0_power;
        u0_power *= u0;
        binom = binom * k / (m - k + 1);  // C(m, k-1)
    }
    return acc * z;
}

namespace {

template <typename F>
std::vector<double> pointwise(std::span<const double> u, F&& f) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i]);
    return out;
}

}  // namespace

std::vector<double> advective_nonlinearity(std::span<const double> u, int delta) {
    return pointwise(u, [delta](double v) { return advective_flux(v, delta); });
}

std::vector<double> advective_derivative(std::span<const double> u0, int delta) {
    return pointwise(u0, [delta](double v) { return advective_flux_derivative(v, delta); });
}

std::vector<double> reaction_nonlinearity(std::span<const double> u, double gamma, int delta) {
    return pointwise(u, [=](double v) { return reaction(v, gamma, delta); });
}

std::vector<double> reaction_derivative(std::span<const double> u0, double gamma, int delta) {
    return pointwise(u0, [=](double v) { return reaction_derivative(v, gamma, delta); });
}

std::vector<double> reaction_second_derivative(std::span<const double> u0, double gamma, int delta) {
    return pointwise(u0, [=](double v) { return reaction_second_derivative(v, gamma, delta); });
}

double NoiseCoefficient::growth_bound() const noexcept { return std::abs(kappa0) + std::abs(slope()); }

double NoiseCoefficient::lipschitz_bound() const noexcept { return std::abs(slope()); }

std::string to_string(NoiseCoefficient::Kind kind) {
    return kind == NoiseCoefficient::Kind::constant ? "constant" : "affine";
}

NoiseCoefficient::Kind parse_noise_kind(const std::string& text) {
    if (text == "constant") return NoiseCoefficient::Kind::constant;
    if (text == "affine") return NoiseCoefficient::Kind::affine;
    throw std::invalid_argument("noise kind must be \"constant\" or \"affine\", got \"" + text + "\"");
}

}  // namespace sgbh
