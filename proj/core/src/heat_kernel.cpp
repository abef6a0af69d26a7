#include "sgbh/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace sgbh {

namespace {

void require_positive_time(double t, const char* who) {
    if (!(t > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": t must be > 0");
    }
}

double gaussian_prefactor(double t) { return 1.0 / std::sqrt(4.0 * std::numbers::pi * t); }

}  // namespace

double heat_kernel_images(double t, double x, double y, int image_pairs) {
    require_positive_time(t, "heat_kernel_images");
    const double inv4t = 1.0 / (4.0 * t);
    double sum = 0.0;
    for (int m = -image_pairs; m <= image_pairs; ++m) {
        const double shift = 2.0 * m;
        const double d1 = y - x - shift;
        const double d2 = y + x - shift;
        sum += std::exp(-d1 * d1 * inv4t) - std::exp(-d2 * d2 * inv4t);
    }
    return gaussian_prefactor(t) * sum;
}

double heat_kernel_eigen(double t, double x, double y, int n_modes) {
    require_positive_time(t, "heat_kernel_eigen");
    double sum = 0.0;
    for (int j = 1; j <= n_modes; ++j) {
        const double jpi = j * std::numbers::pi;
        sum += std::exp(-jpi * jpi * t) * 2.0 * std::sin(jpi * x) * std::sin(jpi * y);
    }
    return sum;
}

double heat_kernel_dy(double t, double x, double y, int image_pairs) {
    require_positive_time(t, "heat_kernel_dy");
    const double inv4t = 1.0 / (4.0 * t);
    double sum = 0.0;
    for (int m = -image_pairs; m <= image_pairs; ++m) {
        const double shift = 2.0 * m;
        const double d1 = y - x - shift;
        const double d2 = y + x - shift;
        sum += -d1 / (2.0 * t) * std::exp(-d1 * d1 * inv4t) + d2 / (2.0 * t) * std::exp(-d2 * d2 * inv4t);
    }
    return gaussian_prefactor(t) * sum;
}

double heat_kernel_mass(double t, double x, int image_pairs) {
    require_positive_time(t, "heat_kernel_mass");
    const double scale = 1.0 / (2.0 * std::sqrt(t));
    // int_0^1 exp(-(y-c)^2/4t)/sqrt(4 pi t) dy = (erf((1-c)s) - erf(-c s)) / 2
    auto piece = [scale](double c) { return 0.5 * (std::erf((1.0 - c) * scale) - std::erf(-c * scale)); };
    double sum = 0.0;
    for (int m = -image_pairs; m <= image_pairs; ++m) {
        const double shift = 2.0 * m;
        sum += piece(x + shift) - piece(shift - x);
    }
    return sum;
}

HeatKernelEval heat_kernel(double t, const Grid1D& grid, KernelMethod method, int truncation,
                           double warn_tolerance) {
    require_positive_time(t, "heat_kernel");
    if (truncation < 1) {
        throw std::invalid_argument("heat_kernel: truncation must be >= 1");
    }
    HeatKernelEval out;
    out.t = t;
    out.method = method;
    out.truncation = truncation;
    out.n_points = grid.n_points();
    const auto n = static_cast<std::size_t>(grid.n_points());
    out.values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i; k < n; ++k) {
            const double x = grid.nodes()[i];
            const double y = grid.nodes()[k];
            const double g = method == KernelMethod::images ? heat_kernel_images(t, x, y, truncation)
                                                            : heat_kernel_eigen(t, x, y, truncation);
            out.values[i * n + k] = g;
            out.values[k * n + i] = g;
        }
    }
    if (method == KernelMethod::images) {
        // First omitted image pair sits at distance >= 2(M+1) - 1 from the domain.
        const double d = 2.0 * (truncation + 1) - 1.0;
        out.tail_bound = 4.0 * gaussian_prefactor(t) * std::exp(-d * d / (4.0 * t));
    } else {
        const double jpi = (truncation + 1) * std::numbers::pi;
        const double first = std::exp(-jpi * jpi * t);
        const double ratio = std::exp(-(2.0 * truncation + 3.0) * std::numbers::pi * std::numbers::pi * t);
        out.tail_bound = ratio < 1.0 ? 2.0 * first / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    }
    out.truncation_warning = out.tail_bound > warn_tolerance;
    return out;
}

double gaussian_lp_norm(double tau, double a, double p, int quadrature_points) {
    if (!(tau > 0.0) || !(a > 0.0) || !(p >= 1.0) || quadrature_points < 3) {
        throw std::invalid_argument("gaussian_lp_norm: invalid arguments");
    }
    const double h = 2.0 / (quadrature_points - 1);
    double sum = 0.0;
    for (int i = 0; i < quadrature_points; ++i) {
        const double z = -1.0 + i * h;
        const double w = (i == 0 || i == quadrature_points - 1) ? 0.5 : 1.0;
        sum += w * std::exp(-p * z * z / (a * tau));
    }
    return std::pow(h * sum, 1.0 / p);
}

namespace {

struct PointSample {
    double t;
    double dist2;
    double magnitude;
};

// Fits |value| <= C t^{-time_power} exp(-dist2 / (a t)).
EstimateFitReport fit_gaussian_bound(const std::string& id, const std::vector<PointSample>& samples,
                                     double time_power, const std::vector<double>& candidates) {
    EstimateFitReport best;
    best.estimate_id = id;
    best.fitted_C = std::numeric_limits<double>::infinity();
    double best_score = std::numeric_limits<double>::infinity();
    for (double a : candidates) {
        double c = 0.0;
        for (const auto& s : samples) {
            if (s.magnitude == 0.0) continue;
            const double bound_shape = std::pow(s.t, -time_power) * std::exp(-s.dist2 / (a * s.t));
            c = std::max(c, s.magnitude / bound_shape);
        }
        const double score = c * std::sqrt(a);
        if (std::isfinite(score) && score < best_score) {
            best_score = score;
            best.fitted_C = c;
            best.fitted_a = a;
        }
    }
    if (!std::isfinite(best.fitted_C)) {
        best.max_violation = std::numeric_limits<double>::infinity();
        best.pass = false;
        return best;
    }
    double worst = 0.0;
    for (const auto& s : samples) {
        const double bound = best.fitted_C * std::pow(s.t, -time_power) *
                             std::exp(-s.dist2 / (best.fitted_a * s.t));
        if (bound > 0.0) worst = std::max(worst, s.magnitude / bound);
    }
    best.max_violation = worst - 1.0;
    best.pass = best.fitted_C > 0.0 && best.max_violation <= 1e-12;
    return best;
}

}  // namespace

std::vector<EstimateFitReport> validate_kernel_estimates(std::span<const double> t_samples,
                                                         const Grid1D& grid,
                                                         const KernelEstimateOptions& options) {
    std::vector<PointSample> kernel_samples;
    std::vector<PointSample> gradient_samples;
    const auto nodes = grid.nodes();
    for (double t : t_samples) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw std::invalid_argument("validate_kernel_estimates: t samples must lie in (0,1]");
        }
        for (double x : nodes) {
            for (double y : nodes) {
                const double d2 = (x - y) * (x - y);
                kernel_samples.push_back({t, d2, std::abs(heat_kernel_images(t, x, y, options.image_pairs))});
                gradient_samples.push_back({t, d2, std::abs(heat_kernel_dy(t, x, y, options.image_pairs))});
            }
        }
    }

    std::vector<EstimateFitReport> reports;
    reports.push_back(fit_gaussian_bound("A1", kernel_samples, 0.5, options.a_candidates));
    reports.push_back(fit_gaussian_bound("A2", gradient_samples, 1.0, options.a_candidates));

    EstimateFitReport norm_fit;
    norm_fit.estimate_id = "A7";
    norm_fit.fitted_a = options.gaussian_a;
    const double exponent = 1.0 / (2.0 * options.gaussian_p);
    std::vector<double> norms;
    for (double tau : t_samples) {
        const double v = gaussian_lp_norm(tau, options.gaussian_a, options.gaussian_p,
                                          options.gaussian_quadrature_points);
        norms.push_back(v);
        norm_fit.fitted_C = std::max(norm_fit.fitted_C, v / std::pow(tau, exponent));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        worst = std::max(worst, norms[i] / (norm_fit.fitted_C * std::pow(t_samples[i], exponent)));
    }
    norm_fit.max_violation = worst - 1.0;
    norm_fit.pass = std::isfinite(norm_fit.fitted_C) && norm_fit.fitted_C > 0.0 &&
                    norm_fit.max_violation <= 1e-12;
    reports.push_back(norm_fit);
    return reports;
}

std::string to_json(std::span<const EstimateFitReport> reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["estimate_id"] = r.estimate_id;
        j["fitted_C"] = r.fitted_C;
        j["fitted_a"] = r.fitted_a;
        j["max_violation"] = r.max_violation;
        j["pass"] = r.pass;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

}  // namespace sgbh
