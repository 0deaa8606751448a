#pragma once

#include "tauflow/flow.hpp"
#include "tauflow/geometry.hpp"

#include <cstddef>
#include <vector>

namespace tauflow {

/// ∫ (4πτ)^{-n/2} e^{-f} dV.
double constraint_mass(const Metric& m, const ScalarField& f, const Tau& tau);

/// f + ln(constraint_mass): the shift that makes the weight a probability measure.
ScalarField normalize_f(const Metric& m, const ScalarField& f, const Tau& tau);

/// A normalized potential f with its τ and the cached u = e^{-f/2}.
struct EntropyProbe {
    ScalarField f;
    Tau tau;
    ScalarField u;

    static EntropyProbe normalized(const Metric& m, const ScalarField& f, const Tau& tau);
};

/// Perelman's W(g, f, τ). Throws ConstraintError when the normalization is
/// off by more than 1e-6.
double w_functional(const Metric& m, const ScalarField& f, const Tau& tau);

/// The u-form of W: ∫ [τ(4|∇u|² + Ru²) - 2u² ln u - nu²] (4πτ)^{-n/2} dV,
/// with 0·ln 0 = 0. Equals w_functional at u = e^{-f/2}.
double u_objective(const Metric& m, const ScalarField& u, const Tau& tau);

/// τ(-4Δu + Ru) - 2u ln u - nu - µu pointwise. Throws PositivityError on u <= 0.
ScalarField el_residual(const Metric& m, const ScalarField& u, const Tau& tau, double mu);

struct MuOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    double armijo = 1e-4;
    double positivity_floor = 1e-12;
};

struct MuResult {
    double mu = 0.0;
    ScalarField minimizer_u;
    double el_residual_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double tau = 0.0;
    double tolerance = 0.0;
    /// Objective value after each accepted iteration (starting with the initial guess).
    std::vector<double> objective_history;
};

/// µ(g, τ) = inf W by preconditioned projected gradient descent on the
/// constraint sphere ∫u² dµ = 1, starting from the constant feasible u.
///
/// The search direction is the Sobolev gradient -(τ(-4Δ) + σ)^{-1} r of the
/// EL residual r, projected tangent to the sphere; the step is accepted by
/// Armijo backtracking after renormalization. On homogeneous backends the
/// only representable fields are constants, so the constant is returned.
MuResult solve_mu(const Metric& m, const Tau& tau, const MuOptions& options = {});

struct ConjugateSample {
    double s = 0.0;
    ScalarField f;
    /// ∫ (4πτ)^{-n/2} e^{-f} dV at this s.
    double mass = 1.0;
};

/// Backward conjugate heat flow f_t(s), s ∈ [t - A, t], anchored at a µ minimizer.
struct ConjugatePair {
    double anchor_time = 0.0;
    double window = 0.0;
    double step = 0.0;
    double tau = 0.0;
    /// Ascending in s; the last sample is the anchor.
    std::vector<ConjugateSample> samples;

    double max_constraint_deviation() const;
};

/// Integrates w = e^{-f}, which obeys the linear equation
/// dw/ds = -Δw + (R - n/(2τ)) w, backward from s = anchor_time with
/// Crank–Nicolson steps of size ds. The scheme advances the density w dV, whose
/// rate along the flow is -Δw dV, so the zeroth-order term comes from the
/// change in the volume weights. Metrics between trajectory samples are linear
/// in the reduced unknowns.
ConjugatePair backward_conjugate_flow(const Trajectory& traj, double anchor_time, const MuResult& anchor,
                                      double window, double ds);

struct SolitonResidual {
    SymTensor tensor;
    /// |Ric + Hess f - g/(2τ)|_g pointwise.
    ScalarField pointwise_norm;
    /// (4πτ)^{-n/2} ∫ 2τ |residual|² e^{-f} dV.
    double weighted_integral = 0.0;
    /// ∫ |residual|² dV without the e^{-f} weight; secondary.
    double unweighted_integral = 0.0;
};

SolitonResidual soliton_residual(const Metric& m, const ScalarField& f, const Tau& tau);

struct DwDtCheck {
    std::vector<double> s;
    std::vector<double> w;
    std::vector<double> finite_difference;
    std::vector<double> weighted_integral;
    double max_abs_difference = 0.0;
    double min_value = 0.0;
    /// Trapezoid integral of the weighted residual over the window.
    double integrated_rate = 0.0;
    /// W(t) - W(t - A).
    double w_increment = 0.0;
};

/// Compares the finite-difference dW/ds along the conjugate pair with the
/// weighted soliton-residual integral at every sample.
DwDtCheck dW_dt_check(const Trajectory& traj, const ConjugatePair& pair);

struct MuSample {
    double t = 0.0;
    MuResult result;
};

/// µ(g(t_k), τ) at every sample whose time is a multiple of cadence (and at
/// the final sample).
std::vector<MuSample> mu_series(const Trajectory& traj, const Tau& tau, double cadence,
                                const MuOptions& options = {});

}  // namespace tauflow
