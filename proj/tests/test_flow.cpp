#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tauflow/errors.hpp"
#include "tauflow/flow.hpp"

#include <cmath>
#include <numbers>

using namespace tauflow;

namespace {

AxisymmetricSphereMetric cosine_profile(std::size_t m, double amplitude) {
    std::vector<double> u(m + 1);
    for (std::size_t k = 0; k <= m; ++k) u[k] = amplitude * std::cos(std::numbers::pi * k / static_cast<double>(m));
    return AxisymmetricSphereMetric(std::move(u));
}

double scale_of(const Metric& m) { return std::get<RoundScaleMetric>(m).scale(); }

}  // namespace

TEST_CASE("round-scale tau flow follows the closed form") {
    for (int n : {2, 3}) {
        // c stays positive on [0, 1] when c0 > 2(n-1)τ(1 - e^{-2}).
        const double fixed = 2.0 * (n - 1) * 0.5;
        for (double c0 : {0.9 * fixed, fixed, 1.6 * fixed}) {
            StepControl ctl;
            ctl.dt = 1e-3;
            const Tau tau(0.5);
            const auto traj = evolve({RoundScaleMetric(n, c0), 0.0}, FlowKind::tau_flow(tau), 1.0, ctl, 0.1);
            REQUIRE(traj.termination == Termination::completed);
            for (const auto& s : traj.samples) {
                CHECK(std::abs(scale_of(s.metric) - oracle::round_scale_tau_flow(s.t, c0, n, 0.5)) < 1e-9);
            }
        }
    }
}

TEST_CASE("unit round S2 is a fixed point of the tau flow at tau = 1/2") {
    StepControl ctl;
    ctl.dt = 1e-3;
    const auto traj =
        evolve({AxisymmetricSphereMetric::round(32), 0.0}, FlowKind::tau_flow(Tau(0.5)), 0.2, ctl, 0.05);
    for (double u : reduced_unknowns(traj.samples.back().metric)) CHECK(std::abs(u) < 1e-12);
}

TEST_CASE("shrinking sphere stops near its singular time") {
    StepControl ctl;
    ctl.dt = 1e-4;
    const auto traj = evolve({RoundScaleMetric(3, 1.0), 0.0}, FlowKind::unnormalized(), 1.0, ctl, 0.01);
    CHECK(traj.termination == Termination::singularity);
    REQUIRE(traj.last_valid.has_value());
    CHECK(traj.last_valid->t == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(traj.end_time() < 0.25);
}

TEST_CASE("normalized flow keeps volume") {
    StepControl ctl;
    ctl.dt = 1e-3;
    const Metric g0 = HomogeneousSU2Metric(1.3, 1.0, 0.9);
    const auto traj = evolve({g0, 0.0}, FlowKind::normalized(), 2.0, ctl, 0.1);
    CHECK(volume(traj.samples.back().metric) == doctest::Approx(volume(g0)).epsilon(1e-10));
}

TEST_CASE("extend continues bit for bit") {
    StepControl ctl;
    ctl.dt = 1e-3;
    const FlowKind kind = FlowKind::tau_flow(Tau(0.5));
    const FlowState start{cosine_profile(32, 0.05), 0.0};
    const auto straight = evolve(start, kind, 0.2, ctl, 0.01);
    auto split = evolve(start, kind, 0.1, ctl, 0.01);
    extend(split, 0.1, ctl);
    REQUIRE(split.samples.size() == straight.samples.size());
    for (std::size_t j = 0; j < split.samples.size(); ++j) {
        CHECK(split.samples[j].t == straight.samples[j].t);
        CHECK(reduced_unknowns(split.samples[j].metric) == reduced_unknowns(straight.samples[j].metric));
    }
    const std::size_t before = split.samples.size();
    extend(split, 0.0, ctl);
    CHECK(split.samples.size() == before);
}

TEST_CASE("step control validation") {
    StepControl ctl;
    ctl.dt = 0.0;
    CHECK_THROWS(ctl.validate());
    ctl.dt = 1e-3;
    ctl.adapt = AdaptiveControl{1e-10, 1e-2, 1e-3};
    CHECK_THROWS(ctl.validate());
}

TEST_CASE("oversized RK4 steps are sub-stepped") {
    const Metric g = cosine_profile(64, 0.05);
    CHECK(stable_explicit_step(g) < 1e-3);
    CHECK(std::isinf(stable_explicit_step(RoundScaleMetric(2, 1.0))));
    StepControl ctl;
    ctl.dt = 1e-2;
    const auto next = step({g, 0.0}, FlowKind::tau_flow(Tau(0.5)), ctl);
    CHECK(next.t == doctest::Approx(1e-2));
    for (double u : reduced_unknowns(next.metric)) CHECK(std::isfinite(u));
}

TEST_CASE("implicit Euler agrees with RK4 to first order") {
    const FlowKind kind = FlowKind::tau_flow(Tau(0.5));
    StepControl rk;
    rk.dt = 1e-4;
    StepControl ie;
    ie.method = StepMethod::implicit_euler;
    double previous = 0.0;
    const auto ref = evolve({cosine_profile(32, 0.1), 0.0}, kind, 0.05, rk, 0.05).samples.back().metric;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        ie.dt = dt;
        const auto got = evolve({cosine_profile(32, 0.1), 0.0}, kind, 0.05, ie, 0.05).samples.back().metric;
        const auto a = reduced_unknowns(got), b = reduced_unknowns(ref);
        double err = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) err = std::max(err, std::abs(a[k] - b[k]));
        if (previous > 0.0) CHECK(previous / err > 1.7);
        previous = err;
    }
}

TEST_CASE("adaptive stepping reaches the closed form") {
    StepControl ctl;
    ctl.dt = 1e-2;
    ctl.adapt = AdaptiveControl{1e-12, 1e-8, 0.05};
    const auto traj = evolve({RoundScaleMetric(2, 1.3), 0.0}, FlowKind::tau_flow(Tau(1.0)), 1.0, ctl, 0.25);
    CHECK(std::abs(scale_of(traj.samples.back().metric) - oracle::round_scale_tau_flow(1.0, 1.3, 2, 1.0)) < 1e-8);
}

TEST_CASE("volume projection") {
    const Metric g = cosine_profile(64, 0.2);
    const Metric p = volume_projection(g, 4 * std::numbers::pi);
    CHECK(volume(p) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
    CHECK_THROWS_AS(volume_projection(g, 0.0), DomainError);
    StepControl ctl;
    ctl.dt = 1e-4;
    EvolveOptions opt;
    opt.volume_target = 4 * std::numbers::pi;
    const auto traj = evolve({g, 0.0}, FlowKind::tau_flow(Tau(0.5)), 0.01, ctl, 0.005, opt);
    CHECK(traj.projections > 0);
    for (const auto& s : traj.samples) CHECK(volume(s.metric) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("rescaled time maps") {
    const Tau tau(0.5);
    for (double t : {0.0, 0.3, 2.0}) CHECK(rescaled_time(rescaled_parameter(t, tau), tau) == doctest::Approx(t));
    CHECK(rescaling_factor(0.25, tau) == doctest::Approx(0.5));
    CHECK_THROWS_AS(rescaled_time(0.5, tau), DomainError);
    CHECK_THROWS_AS(rescaled_time(-0.1, tau), DomainError);
}

TEST_CASE("rescaled round sphere shrinks linearly") {
    // ḡ(s) = c(s) g_round with g fixed: the unnormalized flow from area 4π·(2τ).
    StepControl ctl;
    ctl.dt = 1e-3;
    const Tau tau(0.5);
    const auto traj = evolve({RoundScaleMetric(2, 1.0), 0.0}, FlowKind::tau_flow(tau), 1.0, ctl, 0.05);
    const auto bar = rescale_to_unnormalized(traj, 0.01);
    for (const auto& s : bar.samples) CHECK(scale_of(s.metric) == doctest::Approx(1.0 - 2.0 * s.t).epsilon(1e-12));
    CHECK_THROWS_AS(rescale_to_unnormalized(evolve({RoundScaleMetric(2, 1.0), 0.0}, FlowKind::unnormalized(), 0.1,
                                                   ctl, 0.05),
                                            0.01),
                    DomainError);
}

TEST_CASE("interpolation reproduces samples") {
    StepControl ctl;
    ctl.dt = 1e-3;
    const auto traj = evolve({HomogeneousSU2Metric(1.3, 1.0, 0.9), 0.0}, FlowKind::normalized(), 0.5, ctl, 0.1);
    for (const auto& s : traj.samples) {
        CHECK(reduced_unknowns(interpolate_hermite(traj, s.t)) == reduced_unknowns(s.metric));
        CHECK(reduced_unknowns(interpolate_linear(traj, s.t)) == reduced_unknowns(s.metric));
    }
    CHECK_THROWS_AS(interpolate_linear(traj, 0.6), DomainError);
}

TEST_CASE("flow kind names") {
    CHECK(flow_type_from_string("tau_flow") == FlowKind::Type::tau_flow);
    CHECK(to_string(FlowKind::Type::ricci_normalized) == "ricci_normalized");
    CHECK(FlowKind::tau_flow(Tau(0.25)).scaling_coefficient(RoundScaleMetric(2, 1.0)) == 4.0);
    CHECK(FlowKind::normalized().scaling_coefficient(RoundScaleMetric(3, 2.0)) == doctest::Approx(2.0));
}

TEST_CASE("RK4 observed order on the round-scale ODE") {
    auto error_at = [](double dt) {
        StepControl ctl;
        ctl.dt = dt;
        const auto traj = evolve({RoundScaleMetric(3, 2.6), 0.0}, FlowKind::tau_flow(Tau(0.5)), 1.0, ctl, 1.0);
        return std::abs(scale_of(traj.samples.back().metric) - oracle::round_scale_tau_flow(1.0, 2.6, 3, 0.5));
    };
    const double order = std::log2(error_at(0.1) / error_at(0.05));
    CHECK(order >= 3.8);
}
