#include "sgbh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgbh {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(want) + ", got " + std::to_string(got));
    }
}

}  // namespace

Grid1D::Grid1D(int n_points) : n_points_(n_points) {
    if (n_points <= 0) {
        throw std::invalid_argument("Grid1D: n_points must be positive");
    }
    spacing_ = 1.0 / static_cast<double>(n_points + 1);
    nodes_.resize(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        nodes_[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) * spacing_;
    }
}

double Grid1D::integrate(std::span<const double> samples) const {
    require_size(samples.size(), nodes_.size(), "Grid1D::integrate");
    double sum = 0.0;
    for (double v : samples) sum += v;
    return spacing_ * sum;
}

double Grid1D::lp_norm(std::span<const double> samples, double p) const {
    require_size(samples.size(), nodes_.size(), "Grid1D::lp_norm");
    if (!(p >= 1.0)) {
        throw std::invalid_argument("Grid1D::lp_norm: p must be >= 1");
    }
    double sum = 0.0;
    if (p == 2.0) {
        for (double v : samples) sum += v * v;
        return std::sqrt(spacing_ * sum);
    }
    // Scale by the max to keep |f|^p representable for large p.
    double peak = 0.0;
    for (double v : samples) peak = std::max(peak, std::abs(v));
    if (peak == 0.0 || !std::isfinite(peak)) return peak;
    const double inv_peak = 1.0 / peak;
    if (p == std::floor(p) && p <= 64.0) {
        const int ip = static_cast<int>(p);
        for (double v : samples) {
            const double r = std::abs(v) * inv_peak;
            double acc = 1.0, base = r;
            for (int e = ip; e > 0; e >>= 1) {
                if (e & 1) acc *= base;
                base *= base;
            }
            sum += acc;
        }
    } else {
        for (double v : samples) sum += std::pow(std::abs(v) * inv_peak, p);
    }
    return peak * std::pow(spacing_ * sum, 1.0 / p);
}

SpectralBasis::SpectralBasis(int n_modes, Grid1D grid) : n_modes_(n_modes), grid_(std::move(grid)) {
    if (n_modes <= 0) {
        throw std::invalid_argument("SpectralBasis: n_modes must be positive");
    }
    if (grid_.n_points() < 4 * n_modes) {
        throw std::invalid_argument("SpectralBasis: grid has " + std::to_string(grid_.n_points()) +
                                    " points, need at least 4*n_modes = " +
                                    std::to_string(4 * n_modes));
    }
    const auto J = static_cast<std::size_t>(n_modes);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    eigenvalues_.resize(J);
    for (std::size_t k = 0; k < J; ++k) {
        const double jpi = static_cast<double>(k + 1) * std::numbers::pi;
        eigenvalues_[k] = jpi * jpi;
    }
    phi_.resize(n * J);
    dphi_.resize(n * J);
    // sin(j*pi*i/(n+1)) evaluated through the integer product j*i reduced
    // mod 2(n+1) so that every entry is computed from an exact angle.
    const long period = 2L * (grid_.n_points() + 1);
    const double step = std::numbers::pi * grid_.spacing();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < J; ++k) {
            const long m = (static_cast<long>(k + 1) * static_cast<long>(i + 1)) % period;
            const double angle = static_cast<double>(m) * step;
            const double jpi = static_cast<double>(k + 1) * std::numbers::pi;
            phi_[i * J + k] = std::numbers::sqrt2 * std::sin(angle);
            dphi_[i * J + k] = std::numbers::sqrt2 * jpi * std::cos(angle);
        }
    }
}

void SpectralBasis::to_spectral(std::span<const double> samples, std::span<double> coeffs) const {
    const auto J = static_cast<std::size_t>(n_modes_);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    require_size(samples.size(), n, "to_spectral(samples)");
    require_size(coeffs.size(), J, "to_spectral(coeffs)");
    for (std::size_t k = 0; k < J; ++k) coeffs[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = samples[i];
        const double* row = phi_.data() + i * J;
        for (std::size_t k = 0; k < J; ++k) coeffs[k] += f * row[k];
    }
    const double h = grid_.spacing();
    for (std::size_t k = 0; k < J; ++k) coeffs[k] *= h;
}

std::vector<double> SpectralBasis::to_spectral(std::span<const double> samples) const {
    std::vector<double> coeffs(static_cast<std::size_t>(n_modes_));
    to_spectral(samples, coeffs);
    return coeffs;
}

void SpectralBasis::to_grid(std::span<const double> coeffs, std::span<double> samples) const {
    const auto J = static_cast<std::size_t>(n_modes_);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    require_size(coeffs.size(), J, "to_grid(coeffs)");
    require_size(samples.size(), n, "to_grid(samples)");
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = phi_.data() + i * J;
        double acc = 0.0;
        for (std::size_t k = 0; k < J; ++k) acc += coeffs[k] * row[k];
        samples[i] = acc;
    }
}

std::vector<double> SpectralBasis::to_grid(std::span<const double> coeffs) const {
    std::vector<double> samples(static_cast<std::size_t>(grid_.n_points()));
    to_grid(coeffs, samples);
    return samples;
}

void SpectralBasis::pair_with_derivative(std::span<const double> samples, std::span<double> out) const {
    const auto J = static_cast<std::size_t>(n_modes_);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    require_size(samples.size(), n, "pair_with_derivative(samples)");
    require_size(out.size(), J, "pair_with_derivative(out)");
    for (std::size_t k = 0; k < J; ++k) out[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = samples[i];
        const double* row = dphi_.data() + i * J;
        for (std::size_t k = 0; k < J; ++k) out[k] += f * row[k];
    }
    const double h = grid_.spacing();
    for (std::size_t k = 0; k < J; ++k) out[k] *= h;
}

void SpectralBasis::project_weak(std::span<const double> flux, std::span<const double> source,
                                 std::span<double> out) const {
    const auto J = static_cast<std::size_t>(n_modes_);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    require_size(flux.size(), n, "project_weak(flux)");
    require_size(source.size(), n, "project_weak(source)");
    require_size(out.size(), J, "project_weak(out)");
    for (std::size_t k = 0; k < J; ++k) out[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = flux[i];
        const double c = source[i];
        const double* drow = dphi_.data() + i * J;
        const double* row = phi_.data() + i * J;
        for (std::size_t k = 0; k < J; ++k) out[k] += f * drow[k] + c * row[k];
    }
    const double h = grid_.spacing();
    for (std::size_t k = 0; k < J; ++k) out[k] *= h;
}

void SpectralBasis::derivative_to_grid(std::span<const double> coeffs, std::span<double> samples) const {
    const auto J = static_cast<std::size_t>(n_modes_);
    const auto n = static_cast<std::size_t>(grid_.n_points());
    require_size(coeffs.size(), J, "derivative_to_grid(coeffs)");
    require_size(samples.size(), n, "derivative_to_grid(samples)");
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = dphi_.data() + i * J;
        double acc = 0.0;
        for (std::size_t k = 0; k < J; ++k) acc += coeffs[k] * row[k];
        samples[i] = acc;
    }
}

std::vector<double> apply_semigroup(std::span<const double> coeffs, double nu_t) {
    if (!(nu_t >= 0.0)) {
        throw std::invalid_argument("apply_semigroup: diffusion-time product must be >= 0");
    }
    std::vector<double> out(coeffs.begin(), coeffs.end());
    if (nu_t == 0.0) return out;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double jpi = static_cast<double>(k + 1) * std::numbers::pi;
        out[k] *= std::exp(-jpi * jpi * nu_t);
    }
    return out;
}

}  // namespace sgbh
