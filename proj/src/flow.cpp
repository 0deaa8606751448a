#include "tauflow/flow.hpp"

#include "tauflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tauflow {

double FlowKind::scaling_coefficient(const Metric& m) const {
    switch (type_) {
        case Type::tau_flow: return 1.0 / tau_->value();
        case Type::ricci_unnormalized: return 0.0;
        case Type::ricci_normalized: return 2.0 * average_scalar_curvature(m) / dimension_of(m);
    }
    return 0.0;
}

std::string_view to_string(FlowKind::Type type) {
    switch (type) {
        case FlowKind::Type::tau_flow: return "tau_flow";
        case FlowKind::Type::ricci_unnormalized: return "ricci_unnormalized";
        case FlowKind::Type::ricci_normalized: return "ricci_normalized";
    }
    return "unknown";
}

FlowKind::Type flow_type_from_string(std::string_view name) {
    if (name == "tau_flow" || name == "tau") return FlowKind::Type::tau_flow;
    if (name == "ricci_unnormalized" || name == "unnormalized") return FlowKind::Type::ricci_unnormalized;
    if (name == "ricci_normalized" || name == "normalized") return FlowKind::Type::ricci_normalized;
    throw ConfigError("unknown flow kind '" + std::string(name) + "'");
}

std::string_view to_string(StepMethod method) {
    return method == StepMethod::rk4 ? "rk4" : "implicit_euler";
}

StepMethod step_method_from_string(std::string_view name) {
    if (name == "rk4") return StepMethod::rk4;
    if (name == "implicit_euler") return StepMethod::implicit_euler;
    throw ConfigError("unknown step method '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::singularity: return "singularity";
        case Termination::stiffness: return "stiffness";
    }
    return "unknown";
}

void StepControl::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (adapt) {
        if (!(adapt->target_error > 0.0)) throw ConfigError("adaptive target error must be positive");
        if (!(adapt->min_dt > 0.0) || !(adapt->min_dt <= adapt->max_dt)) {
            throw ConfigError("adaptive bounds must satisfy 0 < min_dt <= max_dt");
        }
    }
}

SymTensor time_derivative(const Metric& m, const FlowKind& kind) {
    const double kappa = kind.scaling_coefficient(m);
    SymTensor rhs = -2.0 * ricci(m);
    for (double& v : rhs.data) v += kappa;
    return rhs;
}

std::vector<double> unknowns_rate(const Metric& m, const FlowKind& kind) {
    const SymTensor rhs = time_derivative(m, kind);
    std::vector<double> x = reduced_unknowns(m);
    switch (backend_of(m)) {
        case Backend::axisymmetric:
            // dg/dt = 2 u_t g
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.5 * rhs.data[2 * k];
            break;
        case Backend::round_scale:
            x[0] *= rhs.data[0];
            break;
        case Backend::su2:
            for (int i = 0; i < 3; ++i) x[i] *= rhs.data[i];
            break;
    }
    return x;
}

double stable_explicit_step(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        const auto u = a->exponent();
        const double umin = *std::min_element(u.begin(), u.end());
        const double h = a->grid().spacing();
        return 0.4 * h * h * std::exp(2.0 * umin);
    }
    return std::numeric_limits<double>::infinity();
}

namespace {

bool all_finite(const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Metric checked_metric(const Metric& like, const std::vector<double>& x, const FlowState& last, double t) {
    if (!all_finite(x)) {
        throw SingularityError("non-finite unknowns at t = " + std::to_string(t), last);
    }
    try {
        return with_unknowns(like, x);
    } catch (const InvalidMetricError& e) {
        throw SingularityError(std::string("degenerate metric at t = ") + std::to_string(t) + ": " + e.what(),
                               last);
    }
}

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& k) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
    return out;
}

FlowState rk4_step(const FlowState& s, const FlowKind& kind, double dt) {
    const std::vector<double> x = reduced_unknowns(s.metric);
    const auto rate = [&](const std::vector<double>& y) {
        return unknowns_rate(checked_metric(s.metric, y, s, s.t), kind);
    };
    const auto k1 = rate(x);
    const auto k2 = rate(axpy(x, 0.5 * dt, k1));
    const auto k3 = rate(axpy(x, 0.5 * dt, k2));
    const auto k4 = rate(axpy(x, dt, k3));
    std::vector<double> next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return {checked_metric(s.metric, next, s, s.t + dt), s.t + dt};
}

// Thomas algorithm; sub/sup have n-1 entries.
void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i - 1] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

// Solves x - x0 - dt F(x) = 0 by Newton. The axisymmetric Jacobian is the
// tridiagonal local part; the normalized flow's global r term is lagged.
FlowState implicit_euler_step(const FlowState& s, const FlowKind& kind, double dt) {
    const std::vector<double> x0 = reduced_unknowns(s.metric);
    std::vector<double> x = x0;
    const std::size_t n = x.size();
    constexpr int max_newton = 60;
    for (int it = 0; it < max_newton; ++it) {
        const Metric m = checked_metric(s.metric, x, s, s.t + dt);
        const std::vector<double> f = unknowns_rate(m, kind);
        std::vector<double> residual(n);
        for (std::size_t i = 0; i < n; ++i) residual[i] = -(x[i] - x0[i] - dt * f[i]);

        std::vector<double> delta = residual;
        if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
            // F_k = e^{-2u_k} ((Lu)_k - 1) + const
            const auto& grid = a->grid();
            const auto area = grid.cell_area();
            const auto face = grid.face_weight();
            const double h = grid.spacing();
            std::vector<double> lap(n);
            grid.round_laplacian(x, lap);
            std::vector<double> sub(n - 1), diag(n), sup(n - 1);
            for (std::size_t k = 0; k < n; ++k) {
                const double e = std::exp(-2.0 * x[k]);
                const double scale = e / (h * area[k]);
                double d = 0.0;
                if (k > 0) {
                    sub[k - 1] = -dt * scale * face[k - 1];
                    d += face[k - 1];
                }
                if (k + 1 < n) {
                    sup[k] = -dt * scale * face[k];
                    d += face[k];
                }
                diag[k] = 1.0 + dt * scale * d + dt * 2.0 * e * (lap[k] - 1.0);
            }
            solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), delta);
        } else {
            // Dense finite-difference Jacobian for the 1- or 3-unknown ODEs.
            std::vector<double> jac(n * n);
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<double> xp = x;
                const double eps = 1e-7 * std::max(1.0, std::abs(x[j]));
                xp[j] += eps;
                const auto fp = unknowns_rate(checked_metric(s.metric, xp, s, s.t + dt), kind);
                for (std::size_t i = 0; i < n; ++i) {
                    jac[i * n + j] = (i == j ? 1.0 : 0.0) - dt * (fp[i] - f[i]) / eps;
                }
            }
            // Gaussian elimination with partial pivoting.
            for (std::size_t c = 0; c < n; ++c) {
                std::size_t p = c;
                for (std::size_t r = c + 1; r < n; ++r) {
                    if (std::abs(jac[r * n + c]) > std::abs(jac[p * n + c])) p = r;
                }
                if (p != c) {
                    for (std::size_t j = 0; j < n; ++j) std::swap(jac[c * n + j], jac[p * n + j]);
                    std::swap(delta[c], delta[p]);
                }
                for (std::size_t r = c + 1; r < n; ++r) {
                    const double w = jac[r * n + c] / jac[c * n + c];
                    for (std::size_t j = c; j < n; ++j) jac[r * n + j] -= w * jac[c * n + j];
                    delta[r] -= w * delta[c];
                }
            }
            for (std::size_t c = n; c-- > 0;) {
                double acc = delta[c];
                for (std::size_t j = c + 1; j < n; ++j) acc -= jac[c * n + j] * delta[j];
                delta[c] = acc / jac[c * n + c];
            }
        }
        double change = 0.0;
        double size = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += delta[i];
            change = std::max(change, std::abs(delta[i]));
            size = std::max(size, std::abs(x[i]));
        }
        if (!all_finite(x)) break;
        if (change <= 1e-14 * (1.0 + size)) {
            return {checked_metric(s.metric, x, s, s.t + dt), s.t + dt};
        }
    }
    throw StiffnessError("implicit Euler Newton iteration did not converge at t = " + std::to_string(s.t), s);
}

FlowState single_step(const FlowState& s, const FlowKind& kind, StepMethod method, double dt) {
    if (method == StepMethod::implicit_euler) return implicit_euler_step(s, kind, dt);
    const double limit = stable_explicit_step(s.metric);
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(dt / limit - 1e-12)));
    if (substeps == 1) return rk4_step(s, kind, dt);
    const double h = dt / static_cast<double>(substeps);
    FlowState cur = s;
    for (std::size_t i = 0; i < substeps; ++i) cur = rk4_step(cur, kind, h);
    cur.t = s.t + dt;
    return cur;
}

double max_abs_difference(const Metric& a, const Metric& b) {
    const auto xa = reduced_unknowns(a);
    const auto xb = reduced_unknowns(b);
    double d = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) d = std::max(d, std::abs(xa[i] - xb[i]));
    return d;
}

struct Integrator {
    const FlowKind& kind;
    const StepControl& ctl;
    const EvolveOptions& options;
    Trajectory& traj;

    FlowState project(FlowState s) {
        if (!options.volume_target) return s;
        const double alpha = std::pow(*options.volume_target / volume(s.metric), 2.0 / dimension_of(s.metric));
        s.metric = scaled(s.metric, alpha);
        ++traj.projections;
        traj.max_projection_deviation = std::max(traj.max_projection_deviation, std::abs(alpha - 1.0));
        return s;
    }

    void check_blowup(const FlowState& next, const FlowState& prev) {
        if (curvature_norm(next.metric).max() > options.blowup_curvature) {
            throw SingularityError("curvature exceeded blow-up threshold at t = " + std::to_string(next.t), prev);
        }
    }

    // Advances from the current sample to time t_next.
    FlowState advance(FlowState s, double t_next) {
        if (!ctl.adapt) {
            const double span = t_next - s.t;
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / ctl.dt - 1e-9)));
            const double h = span / static_cast<double>(n);
            const double t0 = s.t;
            for (std::size_t i = 0; i < n; ++i) {
                FlowState next = project(step(s, kind, {h, ctl.method, std::nullopt}));
                next.t = (i + 1 == n) ? t_next : t0 + h * static_cast<double>(i + 1);
                check_blowup(next, s);
                s = std::move(next);
            }
            return s;
        }
        const AdaptiveControl& a = *ctl.adapt;
        const double order = ctl.method == StepMethod::rk4 ? 4.0 : 1.0;
        double dt = traj.next_dt > 0.0 ? traj.next_dt : std::clamp(ctl.dt, a.min_dt, a.max_dt);
        while (s.t < t_next) {
            const bool last = s.t + dt >= t_next;
            const double h = last ? t_next - s.t : dt;
            const FlowState full = single_step(s, kind, ctl.method, h);
            const FlowState half = single_step(single_step(s, kind, ctl.method, 0.5 * h), kind, ctl.method, 0.5 * h);
            const double err = max_abs_difference(full.metric, half.metric) / (std::pow(2.0, order) - 1.0);
            const double factor =
                err > 0.0 ? std::clamp(0.9 * std::pow(a.target_error / err, 1.0 / (order + 1.0)), 0.2, 5.0) : 5.0;
            if (err <= a.target_error) {
                FlowState next = project(half);
                next.t = last ? t_next : s.t + h;
                check_blowup(next, s);
                s = std::move(next);
                if (!last) dt = std::clamp(h * factor, a.min_dt, a.max_dt);
            } else {
                if (h <= a.min_dt) {
                    throw StiffnessError("adaptive step fell below min_dt at t = " + std::to_string(s.t), s);
                }
                dt = std::max(a.min_dt, h * factor);
            }
        }
        traj.next_dt = dt;
        return s;
    }

    void run(double horizon) {
        const double t0 = traj.samples.front().t;
        const double dt_out = traj.output_interval;
        const double end = traj.samples.back().t + horizon;
        // Sample k sits at t0 + k·dt_out so that split and straight runs see
        // identical times; only an off-grid horizon adds a final partial sample.
        const double intervals = (end - t0) / dt_out;
        const double nearest = std::round(intervals);
        const bool on_grid = std::abs(intervals - nearest) < 1e-6;
        const auto count = static_cast<std::size_t>(on_grid ? nearest : std::floor(intervals) + 1.0);
        for (std::size_t k = traj.samples.size(); k <= count; ++k) {
            const double tk = (k == count && !on_grid) ? end : t0 + dt_out * static_cast<double>(k);
            if (!(tk > traj.samples.back().t)) continue;
            try {
                traj.samples.push_back(advance(traj.samples.back(), tk));
            } catch (const SingularityError& e) {
                traj.termination = Termination::singularity;
                traj.termination_message = e.what();
                traj.last_valid = e.last_valid();
                return;
            } catch (const StiffnessError& e) {
                traj.termination = Termination::stiffness;
                traj.termination_message = e.what();
                traj.last_valid = e.last_valid();
                return;
            }
        }
    }
};

}  // namespace

FlowState step(const FlowState& s, const FlowKind& kind, const StepControl& ctl) {
    ctl.validate();
    if (!ctl.adapt) return single_step(s, kind, ctl.method, ctl.dt);
    // A single adaptive step: step doubling, retried with smaller dt until accepted.
    const double order = ctl.method == StepMethod::rk4 ? 4.0 : 1.0;
    double h = std::clamp(ctl.dt, ctl.adapt->min_dt, ctl.adapt->max_dt);
    for (;;) {
        const FlowState half = single_step(single_step(s, kind, ctl.method, 0.5 * h), kind, ctl.method, 0.5 * h);
        const FlowState full = single_step(s, kind, ctl.method, h);
        const double err = max_abs_difference(full.metric, half.metric) / (std::pow(2.0, order) - 1.0);
        if (err <= ctl.adapt->target_error) return half;
        if (h <= ctl.adapt->min_dt) {
            throw StiffnessError("adaptive step fell below min_dt at t = " + std::to_string(s.t), s);
        }
        h = std::max(ctl.adapt->min_dt, 0.5 * h);
    }
}

Trajectory evolve(const FlowState& initial, const FlowKind& kind, double horizon, const StepControl& ctl,
                  double output_interval, const EvolveOptions& options) {
    ctl.validate();
    if (!(horizon >= 0.0)) throw DomainError("horizon must be nonnegative");
    if (!(output_interval > 0.0)) throw DomainError("output interval must be positive");
    if (!std::isfinite(initial.t)) throw DomainError("initial time must be finite");
    Trajectory traj;
    traj.kind = kind;
    traj.output_interval = output_interval;
    FlowState first = initial;
    if (options.volume_target) {
        first.metric = volume_projection(first.metric, *options.volume_target);
    }
    traj.samples.push_back(std::move(first));
    Integrator{kind, ctl, options, traj}.run(horizon);
    return traj;
}

void extend(Trajectory& traj, double extra_horizon, const StepControl& ctl, const EvolveOptions& options) {
    ctl.validate();
    if (!(extra_horizon >= 0.0)) throw DomainError("extra horizon must be nonnegative");
    if (traj.termination != Termination::completed) {
        throw DomainError("cannot extend a trajectory that terminated early");
    }
    Integrator{traj.kind, ctl, options, traj}.run(extra_horizon);
}

namespace {

std::size_t bracket(const Trajectory& traj, double t) {
    const auto& s = traj.samples;
    if (s.empty()) throw DomainError("empty trajectory");
    const double eps = 1e-12 * std::max(1.0, std::abs(s.back().t));
    if (t < s.front().t - eps || t > s.back().t + eps) {
        throw DomainError("time " + std::to_string(t) + " outside the sampled range");
    }
    if (s.size() == 1) return 0;
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const FlowState& st) { return v < st.t; });
    std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    return std::min(i, s.size() - 2);
}

}  // namespace

Metric interpolate_linear(const Trajectory& traj, double t) {
    const std::size_t i = bracket(traj, t);
    if (traj.samples.size() == 1) return traj.samples[0].metric;
    const auto& a = traj.samples[i];
    const auto& b = traj.samples[i + 1];
    if (t == a.t) return a.metric;
    if (t == b.t) return b.metric;
    const double w = (t - a.t) / (b.t - a.t);
    const auto xa = reduced_unknowns(a.metric);
    const auto xb = reduced_unknowns(b.metric);
    std::vector<double> x(xa.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = (1.0 - w) * xa[k] + w * xb[k];
    return with_unknowns(a.metric, x);
}

Metric interpolate_hermite(const Trajectory& traj, double t) {
    const std::size_t i = bracket(traj, t);
    if (traj.samples.size() == 1) return traj.samples[0].metric;
    const auto& a = traj.samples[i];
    const auto& b = traj.samples[i + 1];
    if (t == a.t) return a.metric;
    if (t == b.t) return b.metric;
    const double h = b.t - a.t;
    const double w = (t - a.t) / h;
    const double h00 = (1.0 + 2.0 * w) * (1.0 - w) * (1.0 - w);
    const double h10 = w * (1.0 - w) * (1.0 - w);
    const double h01 = w * w * (3.0 - 2.0 * w);
    const double h11 = w * w * (w - 1.0);
    const auto xa = reduced_unknowns(a.metric);
    const auto xb = reduced_unknowns(b.metric);
    const auto va = unknowns_rate(a.metric, traj.kind);
    const auto vb = unknowns_rate(b.metric, traj.kind);
    std::vector<double> x(xa.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = h00 * xa[k] + h10 * h * va[k] + h01 * xb[k] + h11 * h * vb[k];
    }
    return with_unknowns(a.metric, x);
}

double rescaled_time(double s, const Tau& tau) {
    if (!(s >= 0.0) || !(s < tau.value())) {
        throw DomainError("rescaled parameter s must lie in [0, tau)");
    }
    return -tau.value() * std::log1p(-s / tau.value());
}

double rescaled_parameter(double t, const Tau& tau) {
    return -tau.value() * std::expm1(-t / tau.value());
}

double rescaling_factor(double s, const Tau& tau) {
    if (!(s >= 0.0) || !(s < tau.value())) {
        throw DomainError("rescaled parameter s must lie in [0, tau)");
    }
    return 1.0 - s / tau.value();
}

Trajectory rescale_to_unnormalized(const Trajectory& traj, double ds) {
    if (traj.kind.type() != FlowKind::Type::tau_flow) {
        throw DomainError("rescaling needs a tau-flow trajectory");
    }
    if (!(ds > 0.0)) throw DomainError("s spacing must be positive");
    const Tau tau = *traj.kind.tau();
    const double t0 = traj.start_time();
    const double s_end = rescaled_parameter(traj.end_time() - t0, tau);
    Trajectory out;
    out.kind = FlowKind::unnormalized();
    out.output_interval = ds;
    const auto count = static_cast<std::size_t>(std::floor(s_end / ds * (1.0 + 1e-12)));
    for (std::size_t j = 0; j <= count; ++j) {
        const double s = ds * static_cast<double>(j);
        const double t = std::min(t0 + rescaled_time(s, tau), traj.end_time());
        out.samples.push_back({scaled(interpolate_hermite(traj, t), rescaling_factor(s, tau)), s});
    }
    return out;
}

Metric volume_projection(const Metric& m, double target) {
    if (!(target > 0.0)) throw DomainError("volume target must be positive");
    const double ratio = target / volume(m);
    if (ratio == 1.0) return m;
    return scaled(m, std::pow(ratio, 2.0 / dimension_of(m)));
}

}  // namespace tauflow
