#include "tauflow/config.hpp"

#include "tauflow/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace tauflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    std::size_t used = 0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == text.size() && std::isfinite(out);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile file;
    file.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail("empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (name.empty()) fail("missing key");
        const std::string key = section.empty() ? name : section + "." + name;
        if (file.values_.count(key)) fail("duplicate key '" + key + "'");

        Value v;
        double number = 0.0;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            v = value.substr(1, value.size() - 2);
        } else if (value == "true" || value == "false") {
            v = value == "true";
        } else if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') fail("unterminated array for '" + key + "'");
            std::vector<double> items;
            std::istringstream parts(value.substr(1, value.size() - 2));
            std::string item;
            while (std::getline(parts, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                if (!parse_number(item, number)) fail("array '" + key + "' holds a non-number '" + item + "'");
                items.push_back(number);
            }
            v = std::move(items);
        } else if (parse_number(value, number)) {
            v = number;
        } else {
            fail("cannot parse value of '" + key + "'");
        }
        file.values_.emplace(key, std::move(v));
        file.lines_[key] = line_no;
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return parse(s.str(), path);
}

const ConfigFile::Value& ConfigFile::get(const std::string& key) const {
    used_[key] = true;
    return values_.at(key);
}

double ConfigFile::number(const std::string& key) const {
    if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    const auto* v = std::get_if<double>(&get(key));
    if (!v) throw ConfigError(origin_ + ": '" + key + "' must be a number");
    return *v;
}

double ConfigFile::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string ConfigFile::string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto* v = std::get_if<std::string>(&get(key));
    if (!v) throw ConfigError(origin_ + ": '" + key + "' must be a string");
    return *v;
}

bool ConfigFile::boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto* v = std::get_if<bool>(&get(key));
    if (!v) throw ConfigError(origin_ + ": '" + key + "' must be true or false");
    return *v;
}

std::vector<double> ConfigFile::array(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
    if (const auto* d = std::get_if<double>(&v)) return {*d};
    throw ConfigError(origin_ + ": '" + key + "' must be an array of numbers");
}

std::vector<std::string> ConfigFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        if (!used_.count(key)) out.push_back(key);
    }
    return out;
}

namespace {

std::size_t count_field(const ConfigFile& f, const std::string& key, std::size_t fallback) {
    if (!f.has(key)) return fallback;
    const double v = f.number(key);
    if (v < 0 || v != std::floor(v)) throw ConfigError("'" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::optional<double> optional_number(const ConfigFile& f, const std::string& key) {
    if (!f.has(key)) return std::nullopt;
    return f.number(key);
}

}  // namespace

RunConfig RunConfig::from_file(const ConfigFile& f) {
    RunConfig c;
    auto& g = c.geometry;
    g.backend = backend_from_string(f.string("geometry.backend", "axisymmetric"));
    g.intervals = count_field(f, "geometry.intervals", g.intervals);
    if (f.has("geometry.u_cos")) g.u_cos = f.array("geometry.u_cos");
    g.log_scale = f.number("geometry.log_scale", g.log_scale);
    g.dimension = static_cast<int>(count_field(f, "geometry.dimension", static_cast<std::size_t>(g.dimension)));
    g.scale = f.number("geometry.scale", g.scale);
    if (f.has("geometry.coefficients")) {
        const auto abc = f.array("geometry.coefficients");
        if (abc.size() != 3) throw ConfigError("'geometry.coefficients' needs exactly three values");
        g.coefficients = {abc[0], abc[1], abc[2]};
    }

    auto& p = c.perturbation;
    p.modes = static_cast<int>(count_field(f, "perturbation.modes", 0));
    p.amplitude = f.number("perturbation.amplitude", 0.0);
    p.seed = count_field(f, "perturbation.seed", 0);

    auto& fl = c.flow;
    fl.kind = flow_type_from_string(f.string("flow.kind", "tau_flow"));
    fl.tau = optional_number(f, "flow.tau");
    fl.step.dt = f.number("flow.dt", fl.step.dt);
    fl.step.method = step_method_from_string(f.string("flow.method", "rk4"));
    if (f.boolean("flow.adaptive", false)) {
        AdaptiveControl a;
        a.target_error = f.number("flow.target_error", a.target_error);
        a.min_dt = f.number("flow.min_dt", a.min_dt);
        a.max_dt = f.number("flow.max_dt", a.max_dt);
        fl.step.adapt = a;
    }
    fl.horizon = f.number("flow.horizon", fl.horizon);
    fl.output_interval = f.number("flow.output_interval", fl.output_interval);
    if (f.boolean("flow.volume_projection", false)) {
        fl.volume_target = f.number("flow.volume_target");
    } else if (f.has("flow.volume_target")) {
        throw ConfigError("'flow.volume_target' is set but 'flow.volume_projection' is not true");
    }
    fl.blowup_curvature = f.number("flow.blowup_curvature", fl.blowup_curvature);

    auto& e = c.entropy;
    e.enabled = f.boolean("entropy.enabled", e.enabled);
    e.tau = optional_number(f, "entropy.tau");
    e.mu_cadence = f.number("entropy.mu_cadence", e.mu_cadence);
    e.window = f.number("entropy.window", e.window);
    e.conjugate_step = f.number("entropy.conjugate_step", e.conjugate_step);
    e.mu.tolerance = f.number("entropy.tolerance", e.mu.tolerance);
    e.mu.max_iterations = count_field(f, "entropy.max_iterations", e.mu.max_iterations);

    auto& d = c.diagnostics;
    d.bounds.curvature = f.number("diagnostics.curvature_bound", d.bounds.curvature);
    d.bounds.diameter = f.number("diagnostics.diameter_bound", d.bounds.diameter);
    d.bounds.volume_floor = f.number("diagnostics.volume_floor", d.bounds.volume_floor);
    d.classification.soliton_residual = f.number("diagnostics.soliton_tolerance", d.classification.soliton_residual);
    d.classification.plateau_rate = f.number("diagnostics.plateau_rate", d.classification.plateau_rate);
    d.classification.plateau_fraction = f.number("diagnostics.plateau_fraction", d.classification.plateau_fraction);
    d.classification.traceless = f.number("diagnostics.traceless_tolerance", d.classification.traceless);
    d.classification.scalar = f.number("diagnostics.scalar_tolerance", d.classification.scalar);
    d.identity_tolerance = f.number("diagnostics.identity_tolerance", d.identity_tolerance);
    d.monotonicity_tolerance = f.number("diagnostics.monotonicity_tolerance", d.monotonicity_tolerance);
    d.min_scalar_tolerance = f.number("diagnostics.min_scalar_tolerance", d.min_scalar_tolerance);

    c.verify.horizon = f.number("verify.horizon", c.verify.horizon);
    c.output_directory = f.string("output.directory", c.output_directory);

    const auto unknown = f.unused_keys();
    if (!unknown.empty()) throw ConfigError("unknown config key '" + unknown.front() + "'");
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) { return from_file(ConfigFile::load(path)); }

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(geometry.intervals >= AxisymmetricSphereMetric::min_intervals || geometry.backend != Backend::axisymmetric,
            "geometry.intervals must be >= 16");
    require(geometry.backend != Backend::round_scale || geometry.dimension >= 2, "geometry.dimension must be >= 2");
    require(geometry.backend != Backend::round_scale || geometry.scale > 0.0, "geometry.scale must be > 0");
    for (double v : geometry.coefficients) require(v > 0.0, "geometry.coefficients must all be > 0");
    require(perturbation.amplitude >= 0.0, "perturbation.amplitude must be >= 0");
    if (flow.kind == FlowKind::Type::tau_flow) {
        require(flow.tau.has_value(), "flow.tau is required for tau_flow");
        require(*flow.tau > 0.0, "flow.tau must be > 0");
    } else {
        require(!flow.tau.has_value(), "flow.tau is only meaningful for tau_flow");
    }
    require(flow.step.dt > 0.0, "flow.dt must be > 0");
    if (flow.step.adapt) {
        const auto& a = *flow.step.adapt;
        require(a.target_error > 0.0, "flow.target_error must be > 0");
        require(a.min_dt > 0.0 && a.min_dt <= a.max_dt, "flow.min_dt must satisfy 0 < min_dt <= max_dt");
    }
    require(flow.horizon >= 0.0, "flow.horizon must be >= 0");
    require(flow.output_interval > 0.0, "flow.output_interval must be > 0");
    require(!flow.volume_target || *flow.volume_target > 0.0, "flow.volume_target must be > 0");
    require(flow.blowup_curvature > 0.0, "flow.blowup_curvature must be > 0");
    require(!entropy.tau || *entropy.tau > 0.0, "entropy.tau must be > 0");
    require(entropy.mu_cadence > 0.0, "entropy.mu_cadence must be > 0");
    require(entropy.window >= 0.0, "entropy.window must be >= 0");
    require(entropy.conjugate_step > 0.0, "entropy.conjugate_step must be > 0");
    require(entropy.mu.tolerance > 0.0, "entropy.tolerance must be > 0");
    require(diagnostics.bounds.curvature > 0.0, "diagnostics.curvature_bound must be > 0");
    require(diagnostics.bounds.diameter > 0.0, "diagnostics.diameter_bound must be > 0");
    require(diagnostics.bounds.volume_floor >= 0.0, "diagnostics.volume_floor must be >= 0");
    require(diagnostics.classification.plateau_fraction > 0.0 && diagnostics.classification.plateau_fraction <= 1.0,
            "diagnostics.plateau_fraction must lie in (0, 1]");
    require(verify.horizon > 0.0, "verify.horizon must be > 0");
}

json RunConfig::to_json() const {
    json j;
    json& g = j["geometry"];
    g["backend"] = std::string(to_string(geometry.backend));
    g["intervals"] = geometry.intervals;
    g["u_cos"] = geometry.u_cos;
    g["log_scale"] = geometry.log_scale;
    g["dimension"] = geometry.dimension;
    g["scale"] = geometry.scale;
    g["coefficients"] = geometry.coefficients;
    json& p = j["perturbation"];
    p["modes"] = perturbation.modes;
    p["amplitude"] = perturbation.amplitude;
    p["seed"] = perturbation.seed;
    json& f = j["flow"];
    f["kind"] = std::string(to_string(flow.kind));
    f["tau"] = flow.tau ? json(*flow.tau) : json(nullptr);
    f["dt"] = flow.step.dt;
    f["method"] = std::string(to_string(flow.step.method));
    if (flow.step.adapt) {
        f["adaptive"] = {{"target_error", flow.step.adapt->target_error},
                         {"min_dt", flow.step.adapt->min_dt},
                         {"max_dt", flow.step.adapt->max_dt}};
    } else {
        f["adaptive"] = nullptr;
    }
    f["horizon"] = flow.horizon;
    f["output_interval"] = flow.output_interval;
    f["volume_target"] = flow.volume_target ? json(*flow.volume_target) : json(nullptr);
    f["blowup_curvature"] = flow.blowup_curvature;
    json& e = j["entropy"];
    e["enabled"] = entropy.enabled;
    e["tau"] = entropy.tau ? json(*entropy.tau) : json(nullptr);
    e["mu_cadence"] = entropy.mu_cadence;
    e["window"] = entropy.window;
    e["conjugate_step"] = entropy.conjugate_step;
    e["tolerance"] = entropy.mu.tolerance;
    e["max_iterations"] = entropy.mu.max_iterations;
    json& d = j["diagnostics"];
    d["curvature_bound"] = diagnostics.bounds.curvature;
    d["diameter_bound"] = diagnostics.bounds.diameter;
    d["volume_floor"] = diagnostics.bounds.volume_floor;
    d["soliton_tolerance"] = diagnostics.classification.soliton_residual;
    d["plateau_rate"] = diagnostics.classification.plateau_rate;
    d["plateau_fraction"] = diagnostics.classification.plateau_fraction;
    d["traceless_tolerance"] = diagnostics.classification.traceless;
    d["scalar_tolerance"] = diagnostics.classification.scalar;
    d["identity_tolerance"] = diagnostics.identity_tolerance;
    d["monotonicity_tolerance"] = diagnostics.monotonicity_tolerance;
    d["min_scalar_tolerance"] = diagnostics.min_scalar_tolerance;
    j["verify"]["horizon"] = verify.horizon;
    j["output"]["directory"] = output_directory;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    const json& g = j.at("geometry");
    c.geometry.backend = backend_from_string(g.at("backend").get<std::string>());
    c.geometry.intervals = g.at("intervals").get<std::size_t>();
    c.geometry.u_cos = g.at("u_cos").get<std::vector<double>>();
    c.geometry.log_scale = g.at("log_scale").get<double>();
    c.geometry.dimension = g.at("dimension").get<int>();
    c.geometry.scale = g.at("scale").get<double>();
    c.geometry.coefficients = g.at("coefficients").get<std::array<double, 3>>();
    const json& p = j.at("perturbation");
    c.perturbation.modes = p.at("modes").get<int>();
    c.perturbation.amplitude = p.at("amplitude").get<double>();
    c.perturbation.seed = p.at("seed").get<std::uint64_t>();
    const json& f = j.at("flow");
    c.flow.kind = flow_type_from_string(f.at("kind").get<std::string>());
    if (!f.at("tau").is_null()) c.flow.tau = f.at("tau").get<double>();
    c.flow.step.dt = f.at("dt").get<double>();
    c.flow.step.method = step_method_from_string(f.at("method").get<std::string>());
    if (!f.at("adaptive").is_null()) {
        const json& a = f.at("adaptive");
        c.flow.step.adapt =
            AdaptiveControl{a.at("target_error").get<double>(), a.at("min_dt").get<double>(), a.at("max_dt").get<double>()};
    }
    c.flow.horizon = f.at("horizon").get<double>();
    c.flow.output_interval = f.at("output_interval").get<double>();
    if (!f.at("volume_target").is_null()) c.flow.volume_target = f.at("volume_target").get<double>();
    c.flow.blowup_curvature = f.at("blowup_curvature").get<double>();
    const json& e = j.at("entropy");
    c.entropy.enabled = e.at("enabled").get<bool>();
    if (!e.at("tau").is_null()) c.entropy.tau = e.at("tau").get<double>();
    c.entropy.mu_cadence = e.at("mu_cadence").get<double>();
    c.entropy.window = e.at("window").get<double>();
    c.entropy.conjugate_step = e.at("conjugate_step").get<double>();
    c.entropy.mu.tolerance = e.at("tolerance").get<double>();
    c.entropy.mu.max_iterations = e.at("max_iterations").get<std::size_t>();
    const json& d = j.at("diagnostics");
    c.diagnostics.bounds.curvature = d.at("curvature_bound").get<double>();
    c.diagnostics.bounds.diameter = d.at("diameter_bound").get<double>();
    c.diagnostics.bounds.volume_floor = d.at("volume_floor").get<double>();
    c.diagnostics.classification.soliton_residual = d.at("soliton_tolerance").get<double>();
    c.diagnostics.classification.plateau_rate = d.at("plateau_rate").get<double>();
    c.diagnostics.classification.plateau_fraction = d.at("plateau_fraction").get<double>();
    c.diagnostics.classification.traceless = d.at("traceless_tolerance").get<double>();
    c.diagnostics.classification.scalar = d.at("scalar_tolerance").get<double>();
    c.diagnostics.identity_tolerance = d.at("identity_tolerance").get<double>();
    c.diagnostics.monotonicity_tolerance = d.at("monotonicity_tolerance").get<double>();
    c.diagnostics.min_scalar_tolerance = d.at("min_scalar_tolerance").get<double>();
    c.verify.horizon = j.at("verify").at("horizon").get<double>();
    c.output_directory = j.at("output").at("directory").get<std::string>();
    c.validate();
    return c;
}

std::string RunConfig::hash() const {
    json j = to_json();
    // Where results land does not change them.
    j.erase("output");
    return sha256_hex(j.dump());
}

FlowKind RunConfig::flow_kind() const {
    switch (flow.kind) {
        case FlowKind::Type::tau_flow: return FlowKind::tau_flow(Tau(*flow.tau));
        case FlowKind::Type::ricci_unnormalized: return FlowKind::unnormalized();
        case FlowKind::Type::ricci_normalized: return FlowKind::normalized();
    }
    throw ConfigError("unknown flow kind");
}

namespace {

// Uniform on [-1, 1) from the raw 64-bit stream; the standard distributions
// are not specified bit-for-bit across library implementations.
double symmetric_uniform(std::mt19937_64& rng) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 2.0 * unit - 1.0;
}

}  // namespace

Metric RunConfig::initial_metric() const {
    std::mt19937_64 rng(perturbation.seed);
    const bool perturb = perturbation.modes > 0 && perturbation.amplitude > 0.0;
    switch (geometry.backend) {
        case Backend::axisymmetric: {
            const auto grid = SphereGrid::get(geometry.intervals);
            std::vector<double> modes = geometry.u_cos;
            if (perturb) {
                if (modes.size() < static_cast<std::size_t>(perturbation.modes) + 1) {
                    modes.resize(static_cast<std::size_t>(perturbation.modes) + 1, 0.0);
                }
                for (int l = 1; l <= perturbation.modes; ++l) {
                    modes[static_cast<std::size_t>(l)] += perturbation.amplitude * symmetric_uniform(rng);
                }
            }
            std::vector<double> u(grid->nodes(), geometry.log_scale);
            for (std::size_t k = 0; k < u.size(); ++k) {
                for (std::size_t l = 0; l < modes.size(); ++l) {
                    u[k] += modes[l] * std::cos(static_cast<double>(l) * grid->theta(k));
                }
            }
            return AxisymmetricSphereMetric(std::move(u));
        }
        case Backend::round_scale: {
            double c = geometry.scale;
            if (perturb) c *= 1.0 + perturbation.amplitude * symmetric_uniform(rng);
            return RoundScaleMetric(geometry.dimension, c);
        }
        case Backend::su2: {
            auto abc = geometry.coefficients;
            if (perturb) {
                for (double& v : abc) v *= 1.0 + perturbation.amplitude * symmetric_uniform(rng);
            }
            return HomogeneousSU2Metric(abc);
        }
    }
    throw ConfigError("unknown backend");
}

ToleranceProfile tolerance_profile_from_string(const std::string& name) {
    if (name == "default") return ToleranceProfile::standard;
    if (name == "strict") return ToleranceProfile::strict;
    throw ConfigError("unknown tolerance profile '" + name + "' (expected strict or default)");
}

void apply_profile(RunConfig& config, ToleranceProfile profile) {
    if (profile != ToleranceProfile::strict) return;
    auto& d = config.diagnostics;
    d.identity_tolerance /= 10.0;
    d.monotonicity_tolerance /= 10.0;
    d.min_scalar_tolerance /= 10.0;
    d.classification.soliton_residual /= 10.0;
    d.classification.plateau_rate /= 10.0;
    d.classification.traceless /= 10.0;
    d.classification.scalar /= 10.0;
}

}  // namespace tauflow
