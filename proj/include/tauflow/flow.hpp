#pragma once

#include "tauflow/geometry.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tauflow {

/// Which geometric flow is integrated: dg/dt = -2Ric + κ g with
/// κ = 1/τ (τ-flow), κ = 0 (unnormalized Ricci flow) or κ = 2r/n
/// (volume-normalized Ricci flow, r the average scalar curvature).
class FlowKind {
public:
    enum class Type { tau_flow, ricci_unnormalized, ricci_normalized };

    static FlowKind tau_flow(Tau tau) { return FlowKind(Type::tau_flow, tau); }
    static FlowKind unnormalized() { return FlowKind(Type::ricci_unnormalized, std::nullopt); }
    static FlowKind normalized() { return FlowKind(Type::ricci_normalized, std::nullopt); }

    Type type() const noexcept { return type_; }
    const std::optional<Tau>& tau() const noexcept { return tau_; }
    /// κ for this metric.
    double scaling_coefficient(const Metric& m) const;

private:
    FlowKind(Type type, std::optional<Tau> tau) : type_(type), tau_(tau) {}
    Type type_;
    std::optional<Tau> tau_;
};

std::string_view to_string(FlowKind::Type type);
FlowKind::Type flow_type_from_string(std::string_view name);

struct FlowState {
    Metric metric;
    double t = 0.0;
};

enum class StepMethod { rk4, implicit_euler };

std::string_view to_string(StepMethod method);
StepMethod step_method_from_string(std::string_view name);

/// Step-doubling controller bounds.
struct AdaptiveControl {
    double target_error = 1e-10;
    double min_dt = 1e-10;
    double max_dt = 1e-1;
};

struct StepControl {
    double dt = 1e-3;
    StepMethod method = StepMethod::rk4;
    std::optional<AdaptiveControl> adapt;

    void validate() const;
};

/// Non-finite or degenerate unknowns after a step.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, FlowState last_valid)
        : std::runtime_error(what), last_valid_(std::move(last_valid)) {}
    const FlowState& last_valid() const noexcept { return last_valid_; }

private:
    FlowState last_valid_;
};

/// Adaptive step underflow or an implicit solve that failed to converge.
class StiffnessError : public std::runtime_error {
public:
    StiffnessError(const std::string& what, FlowState last_valid)
        : std::runtime_error(what), last_valid_(std::move(last_valid)) {}
    const FlowState& last_valid() const noexcept { return last_valid_; }

private:
    FlowState last_valid_;
};

/// Right-hand side -2Ric + κg in the orthonormal frame.
SymTensor time_derivative(const Metric& m, const FlowKind& kind);

/// The same right-hand side expressed on the reduced unknowns.
std::vector<double> unknowns_rate(const Metric& m, const FlowKind& kind);

/// Largest explicit step allowed by the diffusion gate dt <= 0.4 h² min e^{2u}
/// on the axisymmetric backend; +inf on the ODE backends.
double stable_explicit_step(const Metric& m);

/// One step of size ctl.dt. RK4 steps larger than the stability gate are
/// split into equal sub-steps that satisfy it.
FlowState step(const FlowState& s, const FlowKind& kind, const StepControl& ctl);

struct EvolveOptions {
    /// Rescale to this volume after every step when set.
    std::optional<double> volume_target;
    /// |Rm| above this is treated as a singularity.
    double blowup_curvature = 1e8;
};

enum class Termination { completed, singularity, stiffness };

std::string_view to_string(Termination t);

struct Trajectory {
    FlowKind kind = FlowKind::unnormalized();
    double output_interval = 0.0;
    std::vector<FlowState> samples;
    Termination termination = Termination::completed;
    std::string termination_message;
    /// State reached when the run stopped early.
    std::optional<FlowState> last_valid;
    std::size_t projections = 0;
    double max_projection_deviation = 0.0;
    /// Controller state carried across output intervals (adaptive mode).
    double next_dt = 0.0;

    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }
};

Trajectory evolve(const FlowState& initial, const FlowKind& kind, double horizon, const StepControl& ctl,
                  double output_interval, const EvolveOptions& options = {});

/// Continues a completed trajectory by extra_horizon on the same sample grid.
void extend(Trajectory& traj, double extra_horizon, const StepControl& ctl, const EvolveOptions& options = {});

/// Linear interpolation in the reduced unknowns.
Metric interpolate_linear(const Trajectory& traj, double t);
/// Cubic Hermite interpolation in the reduced unknowns using the flow's rates.
Metric interpolate_hermite(const Trajectory& traj, double t);

/// t(s) = -τ ln(1 - s/τ); throws DomainError for s outside [0, τ).
double rescaled_time(double s, const Tau& tau);
/// s(t) = τ(1 - e^{-t/τ}).
double rescaled_parameter(double t, const Tau& tau);
/// c(s) = 1 - s/τ.
double rescaling_factor(double s, const Tau& tau);

/// ḡ(s) = c(s) g(t(s)) on the uniform grid s_j = j·ds covering the
/// trajectory. Requires a τ-flow trajectory.
Trajectory rescale_to_unnormalized(const Trajectory& traj, double ds);

/// αm with α = (target / Vol)^{2/n}.
Metric volume_projection(const Metric& m, double target);

}  // namespace tauflow
