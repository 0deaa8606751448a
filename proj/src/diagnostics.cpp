#include "tauflow/diagnostics.hpp"

#include "tauflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tauflow {

void TimeSeries::push(double time, double v) {
    if (!t.empty() && !(time > t.back())) {
        throw DomainError("time series '" + name + "' needs strictly increasing t");
    }
    t.push_back(time);
    value.push_back(v);
}

double TimeSeries::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : value) m = std::max(m, v);
    return m;
}

double TimeSeries::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : value) m = std::min(m, v);
    return m;
}

double TimeSeries::max_abs() const {
    double m = 0.0;
    for (double v : value) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    if (v.size() != n) throw DomainError("differentiate: size mismatch");
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (v[1] - v[0]) / (t[1] - t[0]);
        return d;
    }
    // Derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2).
    auto lagrange = [](double x0, double x1, double x2, double y0, double y1, double y2) {
        const double a = x1 - x0, b = x2 - x0;
        return y0 * (-(a + b) / (a * b)) + y1 * (b / (a * (b - a))) + y2 * (-a / (b * (b - a)));
    };
    d[0] = lagrange(t[0], t[1], t[2], v[0], v[1], v[2]);
    d[n - 1] = lagrange(t[n - 1], t[n - 2], t[n - 3], v[n - 1], v[n - 2], v[n - 3]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double hl = t[k] - t[k - 1], hr = t[k + 1] - t[k];
        d[k] = (hl * hl * v[k + 1] - hr * hr * v[k - 1] + (hr * hr - hl * hl) * v[k]) / (hl * hr * (hl + hr));
    }
    return d;
}

namespace {

std::vector<double> sample_times(const Trajectory& traj) {
    std::vector<double> t;
    t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) t.push_back(s.t);
    return t;
}

// Node-by-node derivative of a per-sample field.
std::vector<std::vector<double>> differentiate_fields(const std::vector<double>& t,
                                                      const std::vector<ScalarField>& fields) {
    const std::size_t nodes = fields.front().size();
    std::vector<std::vector<double>> out(fields.size(), std::vector<double>(nodes));
    std::vector<double> column(fields.size());
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t j = 0; j < fields.size(); ++j) column[j] = fields[j].values[k];
        const auto d = differentiate(t, column);
        for (std::size_t j = 0; j < fields.size(); ++j) out[j][k] = d[j];
    }
    return out;
}

double kappa_of(const Trajectory& traj, const Metric& m) { return traj.kind.scaling_coefficient(m); }

}  // namespace

namespace {

// Fourth-order central difference of F(x + εv) in ε, v the flow velocity in unknowns.
template <class F>
std::vector<double> rate_along_flow(const Trajectory& traj, const Metric& m, F&& f) {
    const auto x = reduced_unknowns(m);
    const auto v = unknowns_rate(m, traj.kind);
    double scale = 0.0;
    for (double a : v) scale = std::max(scale, std::abs(a));
    const double eps = 1e-3 / std::max(scale, 1.0);
    auto shifted = [&](double e) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + e * v[i];
        return f(with_unknowns(m, y));
    };
    const auto p1 = shifted(eps), m1 = shifted(-eps), p2 = shifted(2 * eps), m2 = shifted(-2 * eps);
    std::vector<double> out(p1.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * eps);
    }
    return out;
}

}  // namespace

TimeSeries scalar_evolution_check(const Trajectory& traj, RateSource source) {
    TimeSeries out(source == RateSource::flow_velocity ? "scalar_evolution_residual"
                                                       : "scalar_evolution_sampled_residual",
                   "max |dR/dt - (ΔR + 2|Ric|² - κR)|");
    const auto t = sample_times(traj);
    std::vector<ScalarField> r;
    r.reserve(t.size());
    for (const auto& s : traj.samples) r.push_back(scalar_curvature(s.metric));
    std::vector<std::vector<double>> dr;
    if (source == RateSource::sample_differences) {
        dr = differentiate_fields(t, r);
    } else {
        for (const auto& s : traj.samples) {
            dr.push_back(rate_along_flow(traj, s.metric, [](const Metric& g) { return scalar_curvature(g).values; }));
        }
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
        const Metric& m = traj.samples[j].metric;
        const ScalarField lap = laplace_beltrami(m, r[j]);
        const ScalarField ric2 = tensor_norm(m, ricci(m));
        const double kappa = kappa_of(traj, m);
        double worst = 0.0;
        for (std::size_t k = 0; k < r[j].size(); ++k) {
            const double rhs = lap.values[k] + 2.0 * ric2.values[k] - kappa * r[j].values[k];
            worst = std::max(worst, std::abs(dr[j][k] - rhs));
        }
        out.push(t[j], worst);
    }
    return out;
}

MinScalarReport min_scalar_monitor(const Trajectory& traj, double tolerance) {
    MinScalarReport out;
    out.series = TimeSeries("min_scalar_curvature", "min R");
    for (const auto& s : traj.samples) out.series.push(s.t, scalar_curvature(s.metric).min());
    const auto& v = out.series.value;
    for (std::size_t j = 1; j < v.size(); ++j) {
        const bool decreasing_nonpositive = v[j - 1] <= 0.0 && v[j] < v[j - 1] - tolerance;
        const bool crossed = v[j - 1] >= 0.0 && v[j] < -tolerance;
        if (decreasing_nonpositive || crossed) {
            out.violated = true;
            out.first_violation = out.series.t[j];
            break;
        }
    }
    return out;
}

TimeSeries volume_identity_check(const Trajectory& traj) {
    TimeSeries out("volume_identity_residual", "|d/dt ln Vol - (nκ/2 - r)|");
    const auto t = sample_times(traj);
    std::vector<double> log_volume;
    log_volume.reserve(t.size());
    for (const auto& s : traj.samples) log_volume.push_back(std::log(volume(s.metric)));
    const auto d = differentiate(t, log_volume);
    for (std::size_t j = 0; j < t.size(); ++j) {
        const Metric& m = traj.samples[j].metric;
        const double n = dimension_of(m);
        const double rhs = 0.5 * n * kappa_of(traj, m) - average_scalar_curvature(m);
        out.push(t[j], std::abs(d[j] - rhs));
    }
    return out;
}

TimeSeries gauss_bonnet_check(const Trajectory& traj) {
    TimeSeries out("gauss_bonnet_residual", "|∫R dV - 8π| / 8π");
    const double target = 8.0 * std::numbers::pi;
    for (const auto& s : traj.samples) {
        if (backend_of(s.metric) != Backend::axisymmetric) {
            throw DomainError("Gauss-Bonnet check needs the axisymmetric S² backend");
        }
        out.push(s.t, std::abs(integrate(s.metric, scalar_curvature(s.metric)) - target) / target);
    }
    return out;
}

TracelessReport traceless_monitor(const Trajectory& traj) {
    TracelessReport out;
    out.sup_norm = TimeSeries("traceless_sup_norm", "max |T|");
    out.l2_squared = TimeSeries("traceless_l2_squared", "∫|T|² dV");
    out.cumulative = TimeSeries("traceless_cumulative", "∫∫|T|² dV dt");
    out.t_squared_inequality = TimeSeries("traceless_inequality_residual", "min(Δ|T|² + K|T|² - d|T|²/dt)");

    const auto t = sample_times(traj);
    const std::size_t n_samples = t.size();
    std::vector<ScalarField> t2;
    std::vector<double> r(n_samples), vol(n_samples);
    t2.reserve(n_samples);
    bool gate = true;
    for (std::size_t j = 0; j < n_samples; ++j) {
        const Metric& m = traj.samples[j].metric;
        t2.push_back(tensor_norm(m, traceless_ricci(m)));
        double sup = 0.0;
        for (double v : t2.back().values) sup = std::max(sup, std::sqrt(v));
        out.sup_norm.push(t[j], sup);
        out.l2_squared.push(t[j], integrate(m, t2.back()));
        r[j] = average_scalar_curvature(m);
        vol[j] = volume(m);
        const ScalarField scalar = scalar_curvature(m);
        const double upper = 0.5 * dimension_of(m) * kappa_of(traj, m);
        if (dimension_of(m) != 2 && (scalar.min() < 0.0 || scalar.max() > upper)) gate = false;
    }

    double running = 0.0;
    for (std::size_t j = 0; j < n_samples; ++j) {
        if (j > 0) running += 0.5 * (t[j] - t[j - 1]) * (out.l2_squared.value[j] + out.l2_squared.value[j - 1]);
        out.cumulative.push(t[j], running);
    }

    out.r_inequality_checked = gate;
    if (gate) {
        out.r_inequality = TimeSeries("r_inequality_residual", "dr/dt - (2/Vol)∫|T|² - r(r - nκ/2)");
        for (std::size_t j = 0; j < n_samples; ++j) {
            const Metric& m = traj.samples[j].metric;
            const double dr = rate_along_flow(traj, m, [](const Metric& g) {
                return std::vector<double>{average_scalar_curvature(g)};
            })[0];
            const double half_n_kappa = 0.5 * dimension_of(m) * kappa_of(traj, m);
            const double rhs = 2.0 * out.l2_squared.value[j] / vol[j] + r[j] * (r[j] - half_n_kappa);
            out.r_inequality.push(t[j], dr - rhs);
        }
    } else {
        out.r_inequality_note = "skipped: some sample violates 0 <= R <= nκ/2";
    }

    const auto dt2 = differentiate_fields(t, t2);
    for (std::size_t j = 0; j < n_samples; ++j) {
        const Metric& m = traj.samples[j].metric;
        const ScalarField lap = laplace_beltrami(m, t2[j]);
        const ScalarField rm = curvature_norm(m);
        const ScalarField scalar = scalar_curvature(m);
        const double n = dimension_of(m);
        const double half_n_kappa = 0.5 * n * kappa_of(traj, m);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < t2[j].size(); ++k) {
            const double bound = 4.0 * rm.values[k] + (4.0 / n) * std::abs(scalar.values[k] - half_n_kappa);
            worst = std::min(worst, lap.values[k] + bound * t2[j].values[k] - dt2[j][k]);
        }
        out.t_squared_inequality.push(t[j], worst);
    }

    for (std::size_t j = 1; j < n_samples; ++j) {
        const double lagged = std::sqrt(out.l2_squared.value[j - 1]);
        if (lagged > 1e-150) out.moser_constant = std::max(out.moser_constant, out.sup_norm.value[j] / lagged);
    }
    return out;
}

HypothesisReport hypothesis_monitor(const Trajectory& traj, const HypothesisBounds& bounds) {
    HypothesisReport out;
    out.bounds = bounds;
    out.curvature.extremum = 0.0;
    out.diameter.extremum = 0.0;
    out.volume.extremum = std::numeric_limits<double>::infinity();
    auto visit = [](HypothesisWitness& w, double v, double t, bool larger_is_worse, double bound) {
        const bool worse = larger_is_worse ? v > w.extremum : v < w.extremum;
        if (worse) {
            w.extremum = v;
            w.at_time = t;
        }
        const bool violated = larger_is_worse ? v > bound : v < bound;
        if (violated && w.ok) {
            w.ok = false;
            w.first_violation = t;
        }
    };
    std::vector<const FlowState*> states;
    for (const auto& s : traj.samples) states.push_back(&s);
    // The state where a run stopped early is the worst witness it has.
    if (traj.last_valid && (traj.samples.empty() || traj.last_valid->t > traj.samples.back().t)) {
        states.push_back(&*traj.last_valid);
    }
    for (const FlowState* s : states) {
        visit(out.curvature, curvature_norm(s->metric).max(), s->t, true, bounds.curvature);
        visit(out.diameter, diameter(s->metric), s->t, true, bounds.diameter);
        visit(out.volume, volume(s->metric), s->t, false, bounds.volume_floor);
    }
    return out;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::soliton: return "soliton";
        case Verdict::einstein: return "einstein";
        case Verdict::diverged: return "diverged";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

LimitClassification classify_limit(const Trajectory& traj, const std::vector<MuSample>& mu,
                                   const std::optional<DwDtCheck>& residual, const HypothesisReport& hypotheses,
                                   const Tau& tau, const ClassificationTolerances& tol) {
    LimitClassification out;
    out.tau = tau.value();
    out.window_end = traj.end_time();
    out.window_start = traj.end_time() - tol.plateau_fraction * (traj.end_time() - traj.start_time());

    const Metric& last = traj.samples.back().metric;
    const ScalarField scalar = scalar_curvature(last);
    const double target = 0.5 * dimension_of(last) / tau.value();
    out.scalar_deviation = std::max(std::abs(scalar.max() - target), std::abs(scalar.min() - target));
    out.scalar_gate = scalar.min() >= -tol.scalar && scalar.max() <= target + tol.scalar;
    {
        const ScalarField t2 = tensor_norm(last, traceless_ricci(last));
        out.traceless_norm = std::sqrt(t2.max());
    }

    std::size_t plateau_points = 0;
    for (std::size_t j = 1; j < mu.size(); ++j) {
        if (mu[j - 1].t < out.window_start - 1e-12) continue;
        const double rate = std::abs(mu[j].result.mu - mu[j - 1].result.mu) / (mu[j].t - mu[j - 1].t);
        out.mu_rate = std::max(out.mu_rate, rate);
        ++plateau_points;
    }
    if (residual) {
        for (double v : residual->weighted_integral) out.soliton_residual = std::max(out.soliton_residual, v);
    }

    if (traj.termination != Termination::completed) {
        out.verdict = Verdict::diverged;
        out.reason = "run stopped early: " + std::string(to_string(traj.termination));
        return out;
    }
    if (!hypotheses.all_ok()) {
        out.verdict = Verdict::diverged;
        out.reason = "hypothesis bound violated";
        return out;
    }
    if (!residual) {
        out.reason = "no conjugate window";
        return out;
    }
    if (plateau_points == 0) {
        out.reason = "too few µ samples in the final window";
        return out;
    }
    const bool soliton = out.soliton_residual <= tol.soliton_residual && out.mu_rate <= tol.plateau_rate;
    if (!soliton) {
        out.reason = "soliton residual or µ rate above tolerance";
        return out;
    }
    const bool einstein = out.traceless_norm <= tol.traceless && out.scalar_deviation <= tol.scalar && out.scalar_gate;
    out.verdict = einstein ? Verdict::einstein : Verdict::soliton;
    out.reason = einstein ? "Einstein with R = n/(2τ)" : "soliton residual and µ plateau within tolerance";
    return out;
}

}  // namespace tauflow
