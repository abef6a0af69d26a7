#include "sgbh/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "sgbh/rng.hpp"

namespace sgbh {

NoiseSpec::NoiseSpec(int n_modes, double eta) : eta_(eta) {
    if (n_modes <= 0) throw std::invalid_argument("noise.modes must be positive");
    if (!(eta > 0.25)) throw std::invalid_argument("noise.eta must exceed 1/4 for trace-class noise");
    q_.resize(static_cast<std::size_t>(n_modes));
    for (int k = 0; k < n_modes; ++k) q_[static_cast<std::size_t>(k)] = mode_weight(k + 1, eta);
}

double NoiseSpec::mode_weight(int j, double eta) {
    const double jpi = j * std::numbers::pi;
    return std::pow(jpi * jpi, -eta);
}

double NoiseSpec::trace_partial_sum(int J) const {
    double sum = 0.0;
    for (int j = 1; j <= J; ++j) {
        const double q = mode_weight(j, eta_);
        sum += q * q;
    }
    return sum;
}

NoiseRealization NoiseRealization::zeros(int n_modes, int n_steps, double dt) {
    NoiseRealization r;
    r.n_modes = n_modes;
    r.n_steps = n_steps;
    r.dt = dt;
    r.increments.assign(static_cast<std::size_t>(n_modes) * static_cast<std::size_t>(n_steps), 0.0);
    return r;
}

NoiseRealization sample_noise(const NoiseSpec& spec, double dt, int n_steps, std::uint64_t seed,
                              std::uint32_t stream) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_noise: dt must be > 0");
    if (n_steps <= 0) throw std::invalid_argument("sample_noise: n_steps must be positive");
    NoiseRealization r = NoiseRealization::zeros(spec.n_modes(), n_steps, dt);
    r.seed = seed;
    r.stream = stream;
    const double scale = std::sqrt(dt);
    const int J = spec.n_modes();
    for (int step = 0; step < n_steps; ++step) {
        for (int k = 0; k < J; k += 2) {
            const auto [a, b] = normal_pair({seed, stream, static_cast<std::uint32_t>(step),
                                             static_cast<std::uint32_t>(k / 2), 0});
            r(k, step) = scale * a;
            if (k + 1 < J) r(k + 1, step) = scale * b;
        }
    }
    return r;
}

NoiseRealization refine_noise(const NoiseRealization& coarse, int factor) {
    if (factor < 2) throw std::invalid_argument("refine_noise: factor must be >= 2");
    NoiseRealization fine = NoiseRealization::zeros(coarse.n_modes, coarse.n_steps * factor, coarse.dt / factor);
    fine.seed = coarse.seed;
    fine.stream = coarse.stream;
    fine.refinement = coarse.refinement * static_cast<std::uint32_t>(factor);
    const double sub_scale = std::sqrt(fine.dt);
    const auto pairs_per_mode = static_cast<std::uint32_t>((factor + 1) / 2);
    std::vector<double> xi(static_cast<std::size_t>(factor));
    for (int k = 0; k < coarse.n_modes; ++k) {
        for (int step = 0; step < coarse.n_steps; ++step) {
            for (int i = 0; i < factor; i += 2) {
                const auto pair = static_cast<std::uint32_t>(k) * pairs_per_mode + static_cast<std::uint32_t>(i / 2);
                const auto [a, b] = normal_pair({coarse.seed, coarse.stream, static_cast<std::uint32_t>(step),
                                                 pair, fine.refinement});
                xi[static_cast<std::size_t>(i)] = a;
                if (i + 1 < factor) xi[static_cast<std::size_t>(i + 1)] = b;
            }
            double mean = 0.0;
            for (double v : xi) mean += v;
            mean /= factor;
            const double share = coarse(k, step) / factor;
            for (int i = 0; i < factor; ++i) {
                fine(k, step * factor + i) = share + sub_scale * (xi[static_cast<std::size_t>(i)] - mean);
            }
        }
    }
    return fine;
}

NoiseRealization coarsen_noise(const NoiseRealization& fine, int factor) {
    if (factor < 1 || fine.n_steps % factor != 0) {
        throw std::invalid_argument("coarsen_noise: factor must divide n_steps");
    }
    NoiseRealization coarse = NoiseRealization::zeros(fine.n_modes, fine.n_steps / factor, fine.dt * factor);
    coarse.seed = fine.seed;
    coarse.stream = fine.stream;
    coarse.refinement = fine.refinement / static_cast<std::uint32_t>(factor);
    if (coarse.refinement == 0) coarse.refinement = 1;
    for (int k = 0; k < fine.n_modes; ++k) {
        for (int step = 0; step < coarse.n_steps; ++step) {
            double sum = 0.0;
            for (int i = 0; i < factor; ++i) sum += fine(k, step * factor + i);
            coarse(k, step) = sum;
        }
    }
    return coarse;
}

double wiener_field(const NoiseRealization& noise, const NoiseSpec& spec, int step, double x) {
    if (step < 0 || step > noise.n_steps) throw std::out_of_range("wiener_field: step out of range");
    if (noise.n_modes > spec.n_modes()) throw std::invalid_argument("wiener_field: spec has too few modes");
    double value = 0.0;
    for (int k = 0; k < noise.n_modes; ++k) {
        double b = 0.0;
        for (int s = 0; s < step; ++s) b += noise(k, s);
        value += spec.weight(k) * std::numbers::sqrt2 * std::sin((k + 1) * std::numbers::pi * x) * b;
    }
    return value;
}

ControlPath ControlPath::zeros(int n_modes, int n_steps, double dt) {
    ControlPath h;
    h.n_modes = n_modes;
    h.n_steps = n_steps;
    h.dt = dt;
    h.hdot.assign(static_cast<std::size_t>(n_modes) * static_cast<std::size_t>(n_steps), 0.0);
    return h;
}

double ControlPath::energy() const noexcept {
    double sum = 0.0;
    for (double v : hdot) sum += v * v;
    return sum * dt;
}

double action(const ControlPath& h) noexcept { return 0.5 * h.energy(); }

void save_noise(const std::filesystem::path& path, const NoiseRealization& noise) {
    detail::BinaryWriter out(path);
    out.u64(static_cast<std::uint64_t>(noise.n_modes));
    out.u64(static_cast<std::uint64_t>(noise.n_steps));
    out.f64(noise.dt);
    out.u64(noise.seed);
    for (double v : noise.increments) out.f64(v);
    out.finish();
}

NoiseRealization load_noise(const std::filesystem::path& path) {
    detail::BinaryReader in(path);
    const auto J = in.u64();
    const auto n = in.u64();
    const double dt = in.f64();
    if (J == 0 || n == 0 || J > (1u << 20) || n > (1u << 30) || !(dt > 0.0)) {
        throw std::runtime_error("malformed noise header in " + path.string());
    }
    NoiseRealization r = NoiseRealization::zeros(static_cast<int>(J), static_cast<int>(n), dt);
    r.seed = in.u64();
    for (double& v : r.increments) v = in.f64();
    in.expect_end();
    return r;
}

void save_control(const std::filesystem::path& path, const ControlPath& control) {
    detail::BinaryWriter out(path);
    out.u64(static_cast<std::uint64_t>(control.n_modes));
    out.u64(static_cast<std::uint64_t>(control.n_steps));
    out.f64(control.dt);
    for (double v : control.hdot) out.f64(v);
    out.finish();
}

ControlPath load_control(const std::filesystem::path& path) {
    detail::BinaryReader in(path);
    const auto J = in.u64();
    const auto n = in.u64();
    const double dt = in.f64();
    if (J == 0 || n == 0 || J > (1u << 20) || n > (1u << 30) || !(dt > 0.0)) {
        throw std::runtime_error("malformed control header in " + path.string());
    }
    ControlPath h = ControlPath::zeros(static_cast<int>(J), static_cast<int>(n), dt);
    for (double& v : h.hdot) v = in.f64();
    in.expect_end();
    return h;
}

}  // namespace sgbh
