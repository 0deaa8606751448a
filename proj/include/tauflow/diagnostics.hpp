#pragma once

#include "tauflow/entropy.hpp"
#include "tauflow/flow.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tauflow {

struct TimeSeries {
    std::string name;
    std::string units;
    std::vector<double> t;
    std::vector<double> value;

    TimeSeries() = default;
    TimeSeries(std::string name, std::string units) : name(std::move(name)), units(std::move(units)) {}

    /// Appends (t, v); t must exceed the last time.
    void push(double time, double v);
    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }
    double max() const;
    double min() const;
    double max_abs() const;
};

/// d/dt of samples on an arbitrary increasing grid: three-point centered
/// formula inside, three-point one-sided at both ends.
std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& v);

/// How dR/dt is obtained at a sample.
enum class RateSource {
    /// Directional derivative of the discrete R along the flow velocity
    /// (the exact rate of the semi-discrete solution).
    flow_velocity,
    /// Finite differences across output samples.
    sample_differences,
};

/// dR/dt minus ΔR + 2|Ric|² - κR, max over nodes, per sample.
TimeSeries scalar_evolution_check(const Trajectory& traj, RateSource source = RateSource::flow_velocity);

struct MinScalarReport {
    TimeSeries series;
    bool violated = false;
    std::optional<double> first_violation;
};

/// R̂(t) = min R. Flags a decrease larger than tolerance while R̂ <= 0, or a
/// crossing from R̂ >= 0 to R̂ < -tolerance.
MinScalarReport min_scalar_monitor(const Trajectory& traj, double tolerance = 1e-8);

/// |d/dt ln Vol - (nκ/2 - r)|.
TimeSeries volume_identity_check(const Trajectory& traj);

/// |∫R dV - 8π| / 8π on the axisymmetric backend.
TimeSeries gauss_bonnet_check(const Trajectory& traj);

struct TracelessReport {
    TimeSeries sup_norm;
    TimeSeries l2_squared;
    /// ∫₀ᵗ ∫|T|² dV dt by the trapezoid rule.
    TimeSeries cumulative;
    /// dr/dt - (2/Vol)∫|T|² - r(r - nκ/2); empty when skipped.
    TimeSeries r_inequality;
    bool r_inequality_checked = false;
    std::string r_inequality_note;
    /// Δ|T|² + K|T|² - d|T|²/dt with K = 4|Rm| + (4/n)|R - nκ/2|, min over nodes.
    TimeSeries t_squared_inequality;
    /// max_k sup|T|(t_k) / ‖T‖_{L²}(t_{k-1}) over samples with nonzero L² norm.
    double moser_constant = 0.0;
};

/// The r-inequality is checked only when n = 2 or every sample has
/// 0 <= R <= nκ/2; otherwise it is skipped and noted.
TracelessReport traceless_monitor(const Trajectory& traj);

struct HypothesisBounds {
    double curvature = 1e6;
    double diameter = 1e3;
    double volume_floor = 1e-8;
};

struct HypothesisWitness {
    bool ok = true;
    /// Worst value seen (max for curvature and diameter, min for volume).
    double extremum = 0.0;
    double at_time = 0.0;
    std::optional<double> first_violation;
};

struct HypothesisReport {
    HypothesisBounds bounds;
    HypothesisWitness curvature;
    HypothesisWitness diameter;
    HypothesisWitness volume;

    bool all_ok() const { return curvature.ok && diameter.ok && volume.ok; }
};

HypothesisReport hypothesis_monitor(const Trajectory& traj, const HypothesisBounds& bounds = {});

enum class Verdict { soliton, einstein, diverged, inconclusive };

std::string_view to_string(Verdict v);

struct ClassificationTolerances {
    double soliton_residual = 1e-6;
    double plateau_rate = 1e-4;
    double plateau_fraction = 0.25;
    double traceless = 1e-3;
    double scalar = 1e-3;
};

struct LimitClassification {
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
    /// Max weighted soliton-residual integral over the conjugate window.
    double soliton_residual = 0.0;
    /// Max |Δµ|/Δt over the final plateau window.
    double mu_rate = 0.0;
    double traceless_norm = 0.0;
    /// max |R - n/(2τ)| at the final sample.
    double scalar_deviation = 0.0;
    /// 0 <= R <= n/(2τ) at the final sample.
    bool scalar_gate = false;
    double window_start = 0.0;
    double window_end = 0.0;
    double tau = 0.0;
};

/// τ is the entropy scale used for µ and the conjugate window. The residual
/// check needs the conjugate pair; without it the verdict is at best inconclusive.
LimitClassification classify_limit(const Trajectory& traj, const std::vector<MuSample>& mu,
                                   const std::optional<DwDtCheck>& residual, const HypothesisReport& hypotheses,
                                   const Tau& tau, const ClassificationTolerances& tol = {});

}  // namespace tauflow
