#include "tauflow/entropy.hpp"

#include "tauflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tauflow {

namespace {

double heat_kernel_factor(const Metric& m, const Tau& tau) {
    return std::pow(4.0 * std::numbers::pi * tau.value(), -0.5 * dimension_of(m));
}

// Quadrature weights of the probability-normalized measure (4πτ)^{-n/2} dV.
std::vector<double> measure_weights(const Metric& m, const Tau& tau) {
    std::vector<double> w = volume_form(m).values;
    const double factor = heat_kernel_factor(m, tau);
    for (double& v : w) v *= factor;
    return w;
}

double u_squared_log(double u) { return u > 0.0 ? u * u * std::log(u * u) : 0.0; }

double weighted_dot(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * a[k] * b[k];
    return sum;
}

// E(u) = τ(-4Δu + Ru) - 2u ln u - nu.
std::vector<double> el_operator(const Metric& m, const std::vector<double>& u, const Tau& tau,
                                const ScalarField& curvature) {
    const ScalarField lap = laplace_beltrami(m, {backend_of(m), u});
    const double n = dimension_of(m);
    std::vector<double> out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        out[k] = tau.value() * (-4.0 * lap.values[k] + curvature.values[k] * u[k]) - 2.0 * u[k] * std::log(u[k]) -
                 n * u[k];
    }
    return out;
}

double objective(const Metric& m, const std::vector<double>& u, const Tau& tau, const ScalarField& curvature,
                 const std::vector<double>& weights) {
    const double n = dimension_of(m);
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        sum += weights[k] * (tau.value() * curvature.values[k] * u[k] * u[k] - u_squared_log(u[k]) - n * u[k] * u[k]);
    }
    const double dirichlet = dirichlet_integral(m, {backend_of(m), u}) * heat_kernel_factor(m, tau);
    return sum + 4.0 * tau.value() * dirichlet;
}

void normalize_in_place(std::vector<double>& u, const std::vector<double>& weights) {
    const double norm = std::sqrt(weighted_dot(weights, u, u));
    for (double& v : u) v /= norm;
}

// Solves (τ(-4Δ) + σ) d = r in the weighted form, which is a symmetric
// tridiagonal system on the axisymmetric grid.
std::vector<double> precondition(const AxisymmetricSphereMetric& a, const Tau& tau, double shift,
                                 const std::vector<double>& weights, const std::vector<double>& r,
                                 double kernel_factor) {
    const auto& grid = a.grid();
    const std::size_t n = r.size();
    const auto face = grid.face_weight();
    std::vector<double> diag(n), off(n - 1), rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        diag[k] = shift * weights[k];
        rhs[k] = weights[k] * r[k];
    }
    const double coupling = 4.0 * tau.value() * 2.0 * std::numbers::pi * kernel_factor / grid.spacing();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double c = coupling * face[k];
        off[k] = -c;
        diag[k] += c;
        diag[k + 1] += c;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

}  // namespace

double constraint_mass(const Metric& m, const ScalarField& f, const Tau& tau) {
    ScalarField weight = f;
    for (double& v : weight.values) v = std::exp(-v);
    return heat_kernel_factor(m, tau) * integrate(m, weight);
}

ScalarField normalize_f(const Metric& m, const ScalarField& f, const Tau& tau) {
    const double shift = std::log(constraint_mass(m, f, tau));
    ScalarField out = f;
    for (double& v : out.values) v += shift;
    return out;
}

EntropyProbe EntropyProbe::normalized(const Metric& m, const ScalarField& f, const Tau& tau) {
    ScalarField g = normalize_f(m, f, tau);
    ScalarField u = g;
    for (double& v : u.values) v = std::exp(-0.5 * v);
    return {std::move(g), tau, std::move(u)};
}

double u_objective(const Metric& m, const ScalarField& u, const Tau& tau) {
    if (u.backend != backend_of(m) || u.size() != node_count(m)) {
        throw GridMismatchError("u does not live on this metric's grid");
    }
    return objective(m, u.values, tau, scalar_curvature(m), measure_weights(m, tau));
}

double w_functional(const Metric& m, const ScalarField& f, const Tau& tau) {
    const double mass = constraint_mass(m, f, tau);
    if (!(std::abs(mass - 1.0) <= 1e-6)) {
        throw ConstraintError("W needs a normalized f; constraint mass is " + std::to_string(mass));
    }
    ScalarField u = f;
    for (double& v : u.values) v = std::exp(-0.5 * v);
    const double w = u_objective(m, u, tau);
    if (!std::isfinite(w)) throw ConstraintError("W integrand is not finite");
    return w;
}

ScalarField el_residual(const Metric& m, const ScalarField& u, const Tau& tau, double mu) {
    if (u.backend != backend_of(m) || u.size() != node_count(m)) {
        throw GridMismatchError("u does not live on this metric's grid");
    }
    for (double v : u.values) {
        if (!(v > 0.0)) throw PositivityError("EL residual needs u > 0 at every node");
    }
    std::vector<double> r = el_operator(m, u.values, tau, scalar_curvature(m));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= mu * u.values[k];
    return {u.backend, std::move(r)};
}

MuResult solve_mu(const Metric& m, const Tau& tau, const MuOptions& options) {
    const ScalarField curvature = scalar_curvature(m);
    const std::vector<double> weights = measure_weights(m, tau);
    const double kernel = heat_kernel_factor(m, tau);
    const double n = dimension_of(m);

    std::vector<double> u(node_count(m), 1.0);
    normalize_in_place(u, weights);

    MuResult result;
    result.tau = tau.value();
    result.tolerance = options.tolerance;
    double value = objective(m, u, tau, curvature, weights);
    result.objective_history.push_back(value);

    const auto* axisymmetric = std::get_if<AxisymmetricSphereMetric>(&m);
    for (std::size_t it = 0;; ++it) {
        const std::vector<double> eu = el_operator(m, u, tau, curvature);
        const double mu = weighted_dot(weights, u, eu);
        std::vector<double> r(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) r[k] = eu[k] - mu * u[k];
        const double residual = std::sqrt(weighted_dot(weights, r, r));

        result.mu = value;
        result.el_residual_norm = residual;
        result.iterations = it;
        if (residual <= options.tolerance || axisymmetric == nullptr) {
            result.converged = residual <= options.tolerance;
            break;
        }
        if (it >= options.max_iterations) break;

        // Shift large enough that the preconditioner dominates the
        // zeroth-order part of the second variation.
        double shift = 1.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            shift = std::max(shift, 1.0 + std::abs(tau.value() * curvature.values[k] - 2.0 * std::log(u[k]) - 2.0 -
                                                   n - mu));
        }
        std::vector<double> d = precondition(*axisymmetric, tau, shift, weights, r, kernel);
        const double radial = weighted_dot(weights, d, u);
        for (std::size_t k = 0; k < u.size(); ++k) d[k] = -(d[k] - radial * u[k]);
        const double slope = 2.0 * weighted_dot(weights, r, d);

        const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
        double alpha = 1.0;
        bool accepted = false;
        std::vector<double> trial(u.size());
        double trial_value = value;
        for (int backtrack = 0; backtrack < 60; ++backtrack, alpha *= 0.5) {
            bool positive = true;
            for (std::size_t k = 0; k < u.size(); ++k) {
                trial[k] = u[k] + alpha * d[k];
                positive = positive && trial[k] > options.positivity_floor;
            }
            if (!positive) continue;
            normalize_in_place(trial, weights);
            trial_value = objective(m, trial, tau, curvature, weights);
            const bool armijo = trial_value <= value + options.armijo * alpha * slope;
            // Below rounding resolution the decrease cannot be certified;
            // accept steps that do not measurably increase the objective.
            const bool unresolved = std::abs(alpha * slope) < rounding && trial_value <= value + rounding;
            if (armijo || unresolved) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        u = trial;
        value = trial_value;
        result.objective_history.push_back(value);
    }
    result.minimizer_u = {backend_of(m), std::move(u)};
    return result;
}

double ConjugatePair::max_constraint_deviation() const {
    double worst = 0.0;
    for (const auto& s : samples) worst = std::max(worst, std::abs(s.mass - 1.0));
    return worst;
}

namespace {

// Stiffness of the weak Laplacian, ∫|∇φ|² dV = φᵀKφ. On S² it does not depend
// on the conformal factor; homogeneous backends have no spatial coupling.
struct Stiffness {
    std::vector<double> coupling;  // between node k and k+1
};

Stiffness stiffness(const Metric& m) {
    Stiffness k;
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        const auto& grid = a->grid();
        const auto face = grid.face_weight();
        k.coupling.resize(grid.intervals());
        for (std::size_t i = 0; i < grid.intervals(); ++i) {
            k.coupling[i] = 2.0 * std::numbers::pi * face[i] / grid.spacing();
        }
    }
    return k;
}

std::vector<double> apply_stiffness(const Stiffness& k, const std::vector<double>& x) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < k.coupling.size(); ++i) {
        const double flux = k.coupling[i] * (x[i + 1] - x[i]);
        y[i] -= flux;
        y[i + 1] += flux;
    }
    return y;
}

}  // namespace

ConjugatePair backward_conjugate_flow(const Trajectory& traj, double anchor_time, const MuResult& anchor,
                                      double window, double ds) {
    if (!anchor.converged) throw DomainError("conjugate flow needs a converged anchor minimizer");
    if (!(window >= 0.0) || !(ds > 0.0)) throw DomainError("window must be >= 0 and ds > 0");
    const double eps = 1e-9 * traj.output_interval;
    if (anchor_time - window < traj.start_time() - eps || anchor_time > traj.end_time() + eps) {
        throw DomainError("conjugate window lies outside the trajectory");
    }
    const Tau tau(anchor.tau);
    const auto steps = static_cast<std::size_t>(std::llround(window / ds));
    if (std::abs(static_cast<double>(steps) * ds - window) > 1e-9 * std::max(1.0, window)) {
        throw DomainError("window must be a whole number of steps ds");
    }

    // w = e^{-f} = u², the anchor's density.
    std::vector<double> w = anchor.minimizer_u.values;
    for (double& v : w) v *= v;

    ConjugatePair pair;
    pair.anchor_time = anchor_time;
    pair.window = window;
    pair.step = ds;
    pair.tau = anchor.tau;

    auto record = [&](double s, const Metric& m) {
        ScalarField f{backend_of(m), std::vector<double>(w.size())};
        for (std::size_t k = 0; k < w.size(); ++k) f.values[k] = -std::log(w[k]);
        const double mass = constraint_mass(m, f, tau);
        pair.samples.push_back({s, std::move(f), mass});
    };

    Metric current = interpolate_linear(traj, anchor_time);
    if (node_count(current) != w.size()) throw GridMismatchError("anchor does not match the trajectory grid");
    record(anchor_time, current);
    const Stiffness k = stiffness(current);
    std::vector<double> mass_current = volume_form(current).values;
    const std::size_t n = w.size();
    for (std::size_t j = 1; j <= steps; ++j) {
        const double s = anchor_time - ds * static_cast<double>(j);
        const Metric next = interpolate_linear(traj, s);
        const std::vector<double> mass_next = volume_form(next).values;
        // The density w dV moves only by fluxes, so Σ w dV is kept exactly:
        // (W_next + ds/2 K) w_new = (W_current - ds/2 K) w.
        std::vector<double> rhs = apply_stiffness(k, w);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass_current[i] * w[i] - 0.5 * ds * rhs[i];
        std::vector<double> diag(mass_next), off(k.coupling.size());
        for (std::size_t i = 0; i < k.coupling.size(); ++i) {
            const double c = 0.5 * ds * k.coupling[i];
            off[i] = -c;
            diag[i] += c;
            diag[i + 1] += c;
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double f = off[i - 1] / diag[i - 1];
            diag[i] -= f * off[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        rhs[n - 1] /= diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
        w = std::move(rhs);
        const double lowest = *std::min_element(w.begin(), w.end());
        if (!(lowest > 1e-12)) {
            throw PositivityError("conjugate density fell below the positivity floor at s = " + std::to_string(s));
        }
        record(s, next);
        mass_current = mass_next;
    }
    std::reverse(pair.samples.begin(), pair.samples.end());
    return pair;
}

SolitonResidual soliton_residual(const Metric& m, const ScalarField& f, const Tau& tau) {
    SymTensor tensor = ricci(m) + hessian(m, f);
    const double half_inverse = 0.5 / tau.value();
    for (double& v : tensor.data) v -= half_inverse;
    ScalarField norm_sq = tensor_norm(m, tensor);
    ScalarField integrand = norm_sq;
    for (std::size_t k = 0; k < integrand.size(); ++k) {
        integrand.values[k] = 2.0 * tau.value() * norm_sq.values[k] * std::exp(-f.values[k]);
    }
    const double weighted = heat_kernel_factor(m, tau) * integrate(m, integrand);
    const double unweighted = integrate(m, norm_sq);
    for (double& v : norm_sq.values) v = std::sqrt(v);
    return {std::move(tensor), std::move(norm_sq), weighted, unweighted};
}

DwDtCheck dW_dt_check(const Trajectory& traj, const ConjugatePair& pair) {
    const std::size_t n = pair.samples.size();
    if (n < 3) throw DomainError("dW/dt check needs at least three conjugate samples");
    const Tau tau(pair.tau);
    DwDtCheck out;
    out.s.resize(n);
    out.w.resize(n);
    out.weighted_integral.resize(n);
    out.finite_difference.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& sample = pair.samples[j];
        const Metric m = interpolate_linear(traj, sample.s);
        out.s[j] = sample.s;
        out.w[j] = w_functional(m, sample.f, tau);
        out.weighted_integral[j] = soliton_residual(m, sample.f, tau).weighted_integral;
    }
    const double h = pair.step;
    out.finite_difference[0] = (-3.0 * out.w[0] + 4.0 * out.w[1] - out.w[2]) / (2.0 * h);
    out.finite_difference[n - 1] = (3.0 * out.w[n - 1] - 4.0 * out.w[n - 2] + out.w[n - 3]) / (2.0 * h);
    for (std::size_t j = 1; j + 1 < n; ++j) out.finite_difference[j] = (out.w[j + 1] - out.w[j - 1]) / (2.0 * h);

    out.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        out.max_abs_difference =
            std::max(out.max_abs_difference, std::abs(out.finite_difference[j] - out.weighted_integral[j]));
        out.min_value = std::min({out.min_value, out.finite_difference[j], out.weighted_integral[j]});
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        out.integrated_rate += 0.5 * h * (out.weighted_integral[j] + out.weighted_integral[j + 1]);
    }
    out.w_increment = out.w[n - 1] - out.w[0];
    return out;
}

std::vector<MuSample> mu_series(const Trajectory& traj, const Tau& tau, double cadence, const MuOptions& options) {
    if (!(cadence > 0.0)) throw DomainError("mu cadence must be positive");
    const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(cadence / traj.output_interval)));
    std::vector<MuSample> out;
    const std::size_t last = traj.samples.size() - 1;
    for (std::size_t k = 0; k <= last; k += stride) {
        out.push_back({traj.samples[k].t, solve_mu(traj.samples[k].metric, tau, options)});
        if (k + stride > last && k != last) {
            out.push_back({traj.samples[last].t, solve_mu(traj.samples[last].metric, tau, options)});
        }
    }
    return out;
}

}  // namespace tauflow
