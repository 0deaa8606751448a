#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tauflow/diagnostics.hpp"
#include "tauflow/entropy.hpp"
#include "tauflow/errors.hpp"

#include <cmath>
#include <numbers>

using namespace tauflow;
using std::numbers::pi;

namespace {

AxisymmetricSphereMetric mode(std::size_t m, int l, double a) {
    std::vector<double> u(m + 1);
    for (std::size_t k = 0; k <= m; ++k) u[k] = a * std::cos(l * pi * static_cast<double>(k) / static_cast<double>(m));
    return AxisymmetricSphereMetric(std::move(u));
}

Trajectory run(const Metric& g, const FlowKind& kind, double horizon, double dt, double out) {
    StepControl ctl;
    ctl.dt = dt;
    return evolve({g, 0.0}, kind, horizon, ctl, out);
}

}  // namespace

TEST_CASE("differentiate is exact for quadratics on uneven grids") {
    const std::vector<double> t{0.0, 0.1, 0.25, 0.3, 0.7};
    std::vector<double> v;
    for (double x : t) v.push_back(3 * x * x - x + 2);
    const auto d = differentiate(t, v);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(d[k] == doctest::Approx(6 * t[k] - 1).epsilon(1e-12));
}

TEST_CASE("time series needs increasing times") {
    TimeSeries s("x", "x");
    s.push(0.0, 1.0);
    s.push(1.0, -3.0);
    CHECK_THROWS(s.push(1.0, 2.0));
    CHECK(s.max() == 1.0);
    CHECK(s.min() == -3.0);
    CHECK(s.max_abs() == 3.0);
}

TEST_CASE("scalar evolution identity") {
    const auto su2 = run(HomogeneousSU2Metric(1.3, 1.0, 0.9), FlowKind::normalized(), 1.0, 1e-3, 0.01);
    CHECK(scalar_evolution_check(su2).max_abs() < 1e-8);
    const auto s2 = run(mode(64, 1, 0.05), FlowKind::tau_flow(Tau(0.5)), 0.1, 1e-4, 5e-3);
    CHECK(scalar_evolution_check(s2).max_abs() < 1e-8);
    // Sample differences converge once the output grid is refined.
    const auto coarse = run(HomogeneousSU2Metric(1.3, 1.0, 0.9), FlowKind::normalized(), 1.0, 1e-3, 0.02);
    const double e1 = scalar_evolution_check(coarse, RateSource::sample_differences).max_abs();
    const double e2 = scalar_evolution_check(su2, RateSource::sample_differences).max_abs();
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("volume identity on the shrinking sphere") {
    // ln Vol = (3/2) ln(1 - 4t) has a large third derivative; sample differences converge at second order.
    const double e1 = volume_identity_check(run(RoundScaleMetric(3, 1.0), FlowKind::unnormalized(), 0.1, 1e-4, 1e-3)).max_abs();
    const double e2 = volume_identity_check(run(RoundScaleMetric(3, 1.0), FlowKind::unnormalized(), 0.1, 1e-4, 5e-4)).max_abs();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 < 1e-4);
}

TEST_CASE("Gauss-Bonnet only on the axisymmetric backend") {
    const auto s2 = run(mode(64, 2, 0.1), FlowKind::unnormalized(), 0.02, 1e-4, 0.01);
    CHECK(gauss_bonnet_check(s2).max_abs() < 1e-12);
    const auto s3 = run(RoundScaleMetric(3, 1.0), FlowKind::unnormalized(), 0.02, 1e-3, 0.01);
    CHECK_THROWS_AS(gauss_bonnet_check(s3), DomainError);
}

TEST_CASE("minimum scalar curvature monitor") {
    const auto flow = run(mode(64, 2, 0.1), FlowKind::tau_flow(Tau(0.5)), 0.2, 1e-4, 0.01);
    CHECK_FALSE(min_scalar_monitor(flow).violated);

    // Synthetic history whose negative minimum keeps dropping.
    Trajectory fake;
    fake.kind = FlowKind::unnormalized();
    double t = 0.0;
    for (double a : {0.8, 1.0, 1.2}) {
        fake.samples.push_back({mode(64, 2, a), t});
        t += 0.1;
    }
    REQUIRE(scalar_curvature(fake.samples[0].metric).min() < 0.0);
    const auto report = min_scalar_monitor(fake);
    CHECK(report.violated);
    CHECK(report.first_violation.value() == doctest::Approx(0.1));
}

TEST_CASE("traceless monitor on the SU(2) normalized flow") {
    const auto traj = run(HomogeneousSU2Metric(1.3, 1.0, 0.9), FlowKind::normalized(), 10.0, 1e-3, 0.01);
    const auto rep = traceless_monitor(traj);
    CHECK(rep.sup_norm.value.back() < 1e-3);
    const double total = rep.cumulative.value.back();
    const double three_quarters = rep.cumulative.value[rep.cumulative.value.size() * 3 / 4];
    CHECK(total - three_quarters <= 0.05 * total);
    REQUIRE(rep.r_inequality_checked);
    CHECK(rep.r_inequality.min() >= -1e-6);
}

TEST_CASE("r-inequality is gated") {
    // R above nκ/2 = 3 at τ = 1/2 on the round S³ of scale 1/2.
    const auto traj = run(RoundScaleMetric(3, 0.5), FlowKind::tau_flow(Tau(0.5)), 0.01, 1e-3, 0.005);
    const auto rep = traceless_monitor(traj);
    CHECK_FALSE(rep.r_inequality_checked);
    CHECK_FALSE(rep.r_inequality_note.empty());
}

TEST_CASE("hypothesis monitor") {
    const auto traj = run(RoundScaleMetric(3, 1.0), FlowKind::unnormalized(), 0.2, 1e-4, 0.01);
    CHECK(hypothesis_monitor(traj).all_ok());
    HypothesisBounds tight;
    tight.curvature = 5.0;
    const auto rep = hypothesis_monitor(traj, tight);
    CHECK_FALSE(rep.curvature.ok);
    CHECK(rep.curvature.first_violation.has_value());
    CHECK(rep.diameter.ok);
}

TEST_CASE("classification") {
    const Tau tau(0.5);
    const auto fixed = run(AxisymmetricSphereMetric::round(64), FlowKind::tau_flow(tau), 1.0, 1e-3, 0.01);
    const auto mu = mu_series(fixed, tau, 0.1);
    const auto pair = backward_conjugate_flow(fixed, fixed.end_time(), mu.back().result, 0.5, 1e-2);
    const auto dw = dW_dt_check(fixed, pair);
    const auto hyp = hypothesis_monitor(fixed);
    CHECK(classify_limit(fixed, mu, dw, hyp, tau).verdict == Verdict::einstein);
    CHECK(classify_limit(fixed, mu, std::nullopt, hyp, tau).verdict == Verdict::inconclusive);

    const auto shrink = run(RoundScaleMetric(3, 1.0), FlowKind::unnormalized(), 1.0, 1e-4, 0.01);
    REQUIRE(shrink.termination == Termination::singularity);
    CHECK(classify_limit(shrink, {}, std::nullopt, hypothesis_monitor(shrink), tau).verdict == Verdict::diverged);
    CHECK(to_string(Verdict::soliton) == "soliton");
}
