#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sgbh::cli {

using json = nlohmann::json;

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      line_(line) {}

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const json&)> set;
    std::function<json(const RunConfig&)> get;

    std::string name() const { return section + "." + key; }
};

[[noreturn]] void type_error(const std::string& what) { throw std::invalid_argument(what); }

double to_real(const json& v) {
    if (!v.is_number()) type_error("expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) type_error("expected a finite number");
    return d;
}

long long to_integer(const json& v) {
    if (!v.is_number_integer()) type_error("expected an integer");
    return v.get<long long>();
}

int to_int(const json& v) {
    const long long i = to_integer(v);
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) type_error("integer out of range");
    return static_cast<int>(i);
}

std::uint64_t to_u64(const json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    type_error("expected a non-negative integer");
}

std::vector<double> to_reals(const json& v) {
    if (!v.is_array()) type_error("expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(to_real(x));
    return out;
}

template <class Ref>
Field real(std::string section, std::string key, Ref ref) {
    return {std::move(section), std::move(key), [ref](RunConfig& c, const json& v) { ref(c) = to_real(v); },
            [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field integer(std::string section, std::string key, Ref ref) {
    return {std::move(section), std::move(key), [ref](RunConfig& c, const json& v) { ref(c) = to_int(v); },
            [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field text(std::string section, std::string key, Ref ref) {
    return {std::move(section), std::move(key),
            [ref](RunConfig& c, const json& v) {
                if (!v.is_string()) type_error("expected a string");
                ref(c) = v.get<std::string>();
            },
            [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field reals(std::string section, std::string key, Ref ref) {
    return {std::move(section), std::move(key), [ref](RunConfig& c, const json& v) { ref(c) = to_reals(v); },
            [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(real("model", "nu", [](RunConfig& c) -> double& { return c.model.nu; }));
        f.push_back(real("model", "alpha", [](RunConfig& c) -> double& { return c.model.alpha; }));
        f.push_back(real("model", "beta", [](RunConfig& c) -> double& { return c.model.beta; }));
        f.push_back(real("model", "gamma", [](RunConfig& c) -> double& { return c.model.gamma; }));
        f.push_back(integer("model", "delta", [](RunConfig& c) -> int& { return c.model.delta; }));
        f.push_back(real("model", "p_norm", [](RunConfig& c) -> double& { return c.model.p_norm; }));
        f.push_back(real("model", "initial_amplitude", [](RunConfig& c) -> double& { return c.initial_amplitude; }));

        f.push_back(integer("noise", "modes", [](RunConfig& c) -> int& { return c.noise.modes; }));
        f.push_back(real("noise", "eta", [](RunConfig& c) -> double& { return c.noise.eta; }));
        f.push_back(text("noise", "kind", [](RunConfig& c) -> std::string& { return c.noise.kind; }));
        f.push_back(real("noise", "kappa0", [](RunConfig& c) -> double& { return c.noise.kappa0; }));
        f.push_back(real("noise", "kappa1", [](RunConfig& c) -> double& { return c.noise.kappa1; }));

        f.push_back(text("solver", "kind", [](RunConfig& c) -> std::string& { return c.solver.kind; }));
        f.push_back(real("solver", "dt", [](RunConfig& c) -> double& { return c.solver.numerics.dt; }));
        f.push_back(real("solver", "t_end", [](RunConfig& c) -> double& { return c.solver.numerics.t_end; }));
        f.push_back(integer("solver", "modes", [](RunConfig& c) -> int& { return c.solver.numerics.n_modes; }));
        f.push_back(integer("solver", "grid", [](RunConfig& c) -> int& { return c.solver.numerics.n_points; }));
        f.push_back(real("solver", "blowup_threshold",
                         [](RunConfig& c) -> double& { return c.solver.numerics.blowup_threshold; }));
        f.push_back(real("solver", "eps", [](RunConfig& c) -> double& { return c.solver.eps; }));
        f.push_back(real("solver", "theta", [](RunConfig& c) -> double& { return c.solver.theta; }));

        f.push_back({"experiment", "kind",
                     [](RunConfig& c, const json& v) {
                         if (!v.is_string()) type_error("expected a string");
                         c.experiment.experiment = parse_experiment(v.get<std::string>());
                     },
                     [](const RunConfig& c) { return json(to_string(c.experiment.experiment)); }});
        f.push_back(integer("experiment", "paths", [](RunConfig& c) -> int& { return c.experiment.n_paths; }));
        f.push_back(reals("experiment", "eps", [](RunConfig& c) -> std::vector<double>& { return c.experiment.eps_list; }));
        f.push_back({"experiment", "coupled",
                     [](RunConfig& c, const json& v) {
                         if (!v.is_boolean()) type_error("expected true or false");
                         c.experiment.coupled = v.get<bool>();
                     },
                     [](const RunConfig& c) { return json(c.experiment.coupled); }});
        f.push_back(real("experiment", "theta", [](RunConfig& c) -> double& { return c.experiment.theta; }));
        f.push_back(reals("experiment", "rhos", [](RunConfig& c) -> std::vector<double>& { return c.experiment.rhos; }));
        f.push_back(real("experiment", "slope_tolerance",
                         [](RunConfig& c) -> double& { return c.experiment.slope_tolerance; }));
        f.push_back(real("experiment", "min_r2", [](RunConfig& c) -> double& { return c.experiment.min_r2; }));
        f.push_back(real("experiment", "min_order", [](RunConfig& c) -> double& { return c.experiment.min_order; }));
        f.push_back(real("experiment", "max_rejection",
                         [](RunConfig& c) -> double& { return c.experiment.max_rejection; }));

        f.push_back(reals("kernel", "times", [](RunConfig& c) -> std::vector<double>& { return c.kernel.times; }));
        f.push_back(integer("kernel", "points", [](RunConfig& c) -> int& { return c.kernel.points; }));
        f.push_back(integer("kernel", "image_pairs", [](RunConfig& c) -> int& { return c.kernel.image_pairs; }));
        f.push_back(integer("kernel", "eigen_modes", [](RunConfig& c) -> int& { return c.kernel.eigen_modes; }));
        f.push_back(real("kernel", "gaussian_p", [](RunConfig& c) -> double& { return c.kernel.gaussian_p; }));
        f.push_back(real("kernel", "gaussian_a", [](RunConfig& c) -> double& { return c.kernel.gaussian_a; }));

        f.push_back(real("rate", "tolerance", [](RunConfig& c) -> double& { return c.rate.tolerance; }));
        f.push_back({"rate", "max_iterations",
                     [](RunConfig& c, const json& v) {
                         const long long n = to_integer(v);
                         if (n < 0) type_error("expected a non-negative integer");
                         c.rate.max_iterations = static_cast<long>(n);
                     },
                     [](const RunConfig& c) { return json(c.rate.max_iterations); }});

        f.push_back({"run", "seed", [](RunConfig& c, const json& v) { c.run.seed = to_u64(v); },
                     [](const RunConfig& c) { return json(c.run.seed); }});
        f.push_back(integer("run", "workers", [](RunConfig& c) -> int& { return c.run.workers; }));
        f.push_back(text("run", "out", [](RunConfig& c) -> std::string& { return c.run.out; }));
        return f;
    }();
    return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::string suggestion(const std::string& section, const std::string& key) {
    std::string best;
    std::size_t best_d = 3;
    for (const auto& f : fields()) {
        if (f.section != section) continue;
        const auto d = edit_distance(key, f.key);
        if (d < best_d) {
            best_d = d;
            best = f.key;
        }
    }
    return best.empty() ? "" : " (did you mean '" + best + "'?)";
}

bool known_section(const std::string& s) {
    return std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return f.section == s; });
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void assign(RunConfig& config, const Field& field, const std::string& literal, int line) {
    json value;
    try {
        value = json::parse(literal);
    } catch (const json::parse_error&) {
        throw ConfigError("value of " + field.name() + " is not a JSON literal: " + literal, line);
    }
    try {
        field.set(config, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field.name() + ": " + e.what(), line);
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string raw, section;
    std::set<std::string> seen;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header: " + s, line);
            section = trim(s.substr(1, s.size() - 2));
            if (!known_section(section)) throw ConfigError("unknown section [" + section + "]", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected `key = value`, got: " + s, line);
        if (section.empty()) throw ConfigError("key outside of any section", line);
        const std::string key = trim(s.substr(0, eq));
        const Field* field = find_field(section, key);
        if (field == nullptr) {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]" + suggestion(section, key), line);
        }
        if (!seen.insert(field->name()).second) throw ConfigError("duplicate key " + field->name(), line);
        assign(config, *field, trim(s.substr(eq + 1)), line);
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const RunConfig& config) {
    std::string out, section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(config).dump() + "\n";
    }
    return out;
}

void set_value(RunConfig& config, const std::string& dotted_key, const std::string& json_literal) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos) throw ConfigError("override key must look like section.key: " + dotted_key);
    const std::string section = dotted_key.substr(0, dot), key = dotted_key.substr(dot + 1);
    const Field* field = find_field(section, key);
    if (field == nullptr) throw ConfigError("unknown key " + dotted_key + suggestion(section, key));
    assign(config, *field, json_literal, 0);
}

bool equivalent(const RunConfig& a, const RunConfig& b) {
    return std::all_of(fields().begin(), fields().end(), [&](const Field& f) { return f.get(a) == f.get(b); });
}

NoiseCoefficient make_coefficient(const RunConfig& config) {
    switch (parse_noise_kind(config.noise.kind)) {
        case NoiseCoefficient::Kind::constant:
            return NoiseCoefficient::constant(config.noise.kappa0);
        case NoiseCoefficient::Kind::affine:
            break;
    }
    return NoiseCoefficient::affine(config.noise.kappa0, config.noise.kappa1);
}

SolverContext make_context(const RunConfig& config) {
    return SolverContext(config.model, make_coefficient(config), NoiseSpec(config.noise.modes, config.noise.eta),
                         config.solver.numerics);
}

std::vector<double> make_initial_condition(const RunConfig& config, const SolverContext& ctx) {
    return ctx.sine_initial_condition(config.initial_amplitude);
}

EnsembleSpec make_ensemble(const RunConfig& config) {
    EnsembleSpec spec = config.experiment;
    spec.base_seed = config.run.seed;
    spec.workers = config.run.workers;
    return spec;
}

void validate(const RunConfig& config) {
    static const std::set<std::string> solvers{"deterministic", "spde", "clt", "mdp", "controlled", "skeleton"};
    try {
        if (!solvers.count(config.solver.kind)) {
            throw std::invalid_argument("solver.kind must be one of deterministic, spde, clt, mdp, controlled, skeleton");
        }
        if (!(config.solver.eps >= 0.0 && config.solver.eps <= 1.0)) {
            throw std::invalid_argument("solver.eps must lie in [0, 1]");
        }
        SpeedFunction check_speed(config.solver.theta);
        (void)make_context(config);
        make_ensemble(config).validate();
        if (config.run.workers < 0) throw std::invalid_argument("run.workers must be >= 0");
        if (config.kernel.points < 1 || config.kernel.image_pairs < 1 || config.kernel.eigen_modes < 1) {
            throw std::invalid_argument("kernel.points, kernel.image_pairs and kernel.eigen_modes must be >= 1");
        }
        if (!(config.rate.tolerance > 0.0)) throw std::invalid_argument("rate.tolerance must be > 0");
        if (config.run.out.empty()) throw std::invalid_argument("run.out must not be empty");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace sgbh::cli
