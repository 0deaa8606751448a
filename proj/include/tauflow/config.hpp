#pragma once

#include "tauflow/diagnostics.hpp"
#include "tauflow/entropy.hpp"
#include "tauflow/flow.hpp"
#include "tauflow/io.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tauflow {

/// Sectioned key = value file: `[section]` headers, `#` comments, values are
/// numbers, "strings", true/false or [number, ...] arrays.
class ConfigFile {
public:
    using Value = std::variant<double, std::string, bool, std::vector<double>>;

    static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    /// Keys are "section.name".
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::vector<double> array(const std::string& key) const;
    /// Keys that were read through an accessor are marked; the rest are unknown.
    std::vector<std::string> unused_keys() const;

private:
    const Value& get(const std::string& key) const;
    std::string origin_;
    std::map<std::string, Value> values_;
    std::map<std::string, int> lines_;
    mutable std::map<std::string, bool> used_;
};

struct GeometryConfig {
    Backend backend = Backend::axisymmetric;
    std::size_t intervals = 128;
    /// u(θ) = log_scale + Σ_l u_cos[l] cos(lθ).
    std::vector<double> u_cos;
    double log_scale = 0.0;
    int dimension = 2;
    double scale = 1.0;
    std::array<double, 3> coefficients{1.0, 1.0, 1.0};
};

struct PerturbationConfig {
    /// Number of random cos(lθ) modes (l = 1..modes); on homogeneous backends any
    /// positive value perturbs the scale factors multiplicatively.
    int modes = 0;
    double amplitude = 0.0;
    std::uint64_t seed = 0;
};

struct FlowConfig {
    FlowKind::Type kind = FlowKind::Type::tau_flow;
    std::optional<double> tau;
    StepControl step;
    double horizon = 1.0;
    double output_interval = 0.01;
    std::optional<double> volume_target;
    double blowup_curvature = 1e8;
};

struct EntropyConfig {
    bool enabled = true;
    /// Entropy scale. Defaults to the flow's τ, or to n/(2r) at the final sample
    /// for the Ricci flows (the τ whose Einstein metrics have that r).
    std::optional<double> tau;
    double mu_cadence = 0.1;
    double window = 0.5;
    double conjugate_step = 1e-3;
    MuOptions mu;
};

struct DiagnosticsConfig {
    HypothesisBounds bounds;
    ClassificationTolerances classification;
    double identity_tolerance = 1e-5;
    double monotonicity_tolerance = 1e-6;
    double min_scalar_tolerance = 1e-8;
};

struct VerifyConfig {
    double horizon = 0.05;
};

struct RunConfig {
    GeometryConfig geometry;
    PerturbationConfig perturbation;
    FlowConfig flow;
    EntropyConfig entropy;
    DiagnosticsConfig diagnostics;
    VerifyConfig verify;
    std::string output_directory = "out";

    static RunConfig from_file(const ConfigFile& file);
    static RunConfig load(const std::string& path);

    /// Canonical form; the hash is its SHA-256 and ignores formatting and comments.
    json to_json() const;
    static RunConfig from_json(const json& j);
    std::string hash() const;

    FlowKind flow_kind() const;
    /// Initial metric including the seeded perturbation.
    Metric initial_metric() const;
    /// Checks cross-field constraints; throws ConfigError naming the field.
    void validate() const;
};

enum class ToleranceProfile { standard, strict };

ToleranceProfile tolerance_profile_from_string(const std::string& name);
/// strict divides every diagnostic tolerance by 10.
void apply_profile(RunConfig& config, ToleranceProfile profile);

}  // namespace tauflow
