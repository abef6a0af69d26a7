#pragma once

#include <span>
#include <vector>

namespace sgbh {

/// Uniform interior grid on (0,1). The Dirichlet boundary values u(0)=u(1)=0
/// are implicit and never stored.
class Grid1D {
public:
    explicit Grid1D(int n_points);

    int n_points() const noexcept { return n_points_; }
    double spacing() const noexcept { return spacing_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double node(int i) const noexcept { return nodes_[static_cast<std::size_t>(i)]; }

    /// Composite trapezoid rule over [0,1] including the boundary zeros.
    double integrate(std::span<const double> samples) const;

    /// Trapezoid L^p norm, (int |f|^p)^(1/p).
    double lp_norm(std::span<const double> samples, double p) const;

private:
    int n_points_;
    double spacing_;
    std::vector<double> nodes_;
};

/// Dirichlet sine basis phi_j(x) = sqrt(2) sin(j pi x), lambda_j = j^2 pi^2.
///
/// Storage is 0-based: index k holds mode j = k+1. On the interior grid with
/// n_points >= n_modes the basis is exactly orthonormal under the trapezoid
/// inner product (discrete sine transform identity), so projection and
/// reconstruction are mutually inverse for band-limited fields.
class SpectralBasis {
public:
    /// Requires n_points >= 4 * n_modes.
    SpectralBasis(int n_modes, Grid1D grid);

    int n_modes() const noexcept { return n_modes_; }
    const Grid1D& grid() const noexcept { return grid_; }
    int n_points() const noexcept { return grid_.n_points(); }

    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    double eigenvalue(int k) const noexcept { return eigenvalues_[static_cast<std::size_t>(k)]; }

    /// phi_{k+1}(x_i)
    double phi(int k, int i) const noexcept {
        return phi_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_modes_) +
                    static_cast<std::size_t>(k)];
    }

    /// Coefficient k = trapezoid quadrature of f * phi_{k+1}.
    std::vector<double> to_spectral(std::span<const double> samples) const;
    void to_spectral(std::span<const double> samples, std::span<double> coeffs) const;

    /// Samples of sum_k c_k phi_{k+1} on the grid.
    std::vector<double> to_grid(std::span<const double> coeffs) const;
    void to_grid(std::span<const double> coeffs, std::span<double> samples) const;

    /// out_k = int f phi_{k+1}'  (quadrature; f must vanish at the boundary).
    /// This is the weak form of -d/dx: (-f', phi) = (f, phi').
    void pair_with_derivative(std::span<const double> samples, std::span<double> out) const;

    /// out = pair_with_derivative(flux) + to_spectral(source) in one pass.
    void project_weak(std::span<const double> flux, std::span<const double> source,
                      std::span<double> out) const;
    /// samples_i = sum_k c_k phi_{k+1}'(x_i). Used by discrete adjoints.
    void derivative_to_grid(std::span<const double> coeffs, std::span<double> samples) const;

private:
    int n_modes_;
    Grid1D grid_;
    std::vector<double> eigenvalues_;
    std::vector<double> phi_;   // n_points x n_modes, row-major
    std::vector<double> dphi_;  // same layout, phi'
};

/// Heat semigroup in spectral form: c_k -> exp(-lambda_k * nu_t) c_k.
/// nu_t is the diffusion-time product and must be non-negative.
std::vector<double> apply_semigroup(std::span<const double> coeffs, double nu_t);

}  // namespace sgbh
