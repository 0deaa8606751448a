#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tauflow/errors.hpp"
#include "tauflow/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace tauflow;
using std::numbers::pi;

namespace {

AxisymmetricSphereMetric profile(std::size_t m, double (*u)(double)) {
    std::vector<double> v(m + 1);
    for (std::size_t k = 0; k <= m; ++k) v[k] = u(pi * static_cast<double>(k) / static_cast<double>(m));
    return AxisymmetricSphereMetric(std::move(v));
}

double bump(double theta) { return 0.3 * std::cos(theta) + 0.1 * std::cos(2 * theta); }

// R = e^{-2u}(2 - 2Δ_round u) for g = e^{2u} g_round.
double exact_scalar(double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double up = -0.3 * s - 0.2 * std::sin(2 * theta);
    const double upp = -0.3 * c - 0.4 * std::cos(2 * theta);
    const double lap = s > 1e-12 ? upp + c / s * up : 2 * upp;
    return std::exp(-2 * bump(theta)) * (2 - 2 * lap);
}

}  // namespace

TEST_CASE("tau must be positive and finite") {
    CHECK_THROWS_AS(Tau(0.0), DomainError);
    CHECK_THROWS_AS(Tau(-1.0), DomainError);
    CHECK_THROWS_AS(Tau(std::nan("")), DomainError);
    CHECK(Tau(0.5).value() == 0.5);
}

TEST_CASE("grid cell areas integrate sin theta exactly") {
    for (std::size_t m : {16u, 64u, 257u}) {
        const SphereGrid grid(m);
        double sum = 0.0;
        for (double a : grid.cell_area()) sum += a;
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
        const double h = grid.spacing();
        CHECK(grid.cell_area()[0] == doctest::Approx(1.0 - std::cos(h / 2)).epsilon(1e-14));
        CHECK(grid.cell_area()[m / 2] ==
              doctest::Approx(2.0 * std::sin(grid.theta(m / 2)) * std::sin(h / 2)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(SphereGrid(15), InvalidMetricError);
}

TEST_CASE("round laplacian of cos theta converges at second order") {
    double previous = 0.0;
    for (std::size_t m : {32u, 64u, 128u, 256u}) {
        const SphereGrid grid(m);
        std::vector<double> phi(grid.nodes()), out(grid.nodes());
        for (std::size_t k = 0; k < grid.nodes(); ++k) phi[k] = std::cos(grid.theta(k));
        grid.round_laplacian(phi, out);
        double err = 0.0;
        for (std::size_t k = 0; k < grid.nodes(); ++k) err = std::max(err, std::abs(out[k] + 2.0 * phi[k]));
        if (previous > 0.0) CHECK(previous / err > 3.5);
        previous = err;
    }
    CHECK(previous < 1e-4);
}

TEST_CASE("unit round sphere") {
    const Metric m = AxisymmetricSphereMetric::round(64);
    const auto r = scalar_curvature(m);
    CHECK(r.min() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.max() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(volume(m) == doctest::Approx(4 * pi).epsilon(1e-13));
    CHECK(diameter(m) == doctest::Approx(pi).epsilon(1e-13));
    const auto ric = ricci(m);
    CHECK(ric.component(10, 0) == doctest::Approx(1.0));
    CHECK(ric.component(10, 1) == doctest::Approx(1.0));
    CHECK(tensor_norm(m, traceless_ricci(m)).max() == doctest::Approx(0.0).epsilon(1e-20));
    const Metric big = AxisymmetricSphereMetric::round(64, std::log(2.0));
    CHECK(volume(big) == doctest::Approx(16 * pi).epsilon(1e-13));
    CHECK(average_scalar_curvature(big) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("axisymmetric volume against Gauss-Legendre") {
    const double exact = oracle::axisymmetric_area([](oracle::real t) {
        return 0.3L * std::cos(t) + 0.1L * std::cos(2 * t);
    });
    const double e1 = std::abs(volume(profile(128, bump)) - exact);
    const double e2 = std::abs(volume(profile(256, bump)) - exact);
    CHECK(e2 / exact < 1e-4);
    CHECK(e1 / e2 > 3.5);
}

TEST_CASE("axisymmetric scalar curvature matches the closed form") {
    double previous = 0.0;
    for (std::size_t m : {64u, 128u, 256u}) {
        const Metric g = profile(m, bump);
        const auto r = scalar_curvature(g);
        double err = 0.0;
        for (std::size_t k = 0; k <= m; ++k) {
            err = std::max(err, std::abs(r.values[k] - exact_scalar(pi * static_cast<double>(k) / static_cast<double>(m))));
        }
        if (previous > 0.0) CHECK(previous / err > 3.5);
        previous = err;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("Gauss-Bonnet holds to rounding for any profile") {
    const Metric g = profile(100, bump);
    CHECK(integrate(g, scalar_curvature(g)) == doctest::Approx(8 * pi).epsilon(1e-13));
}

TEST_CASE("axisymmetric metric rejects bad data") {
    CHECK_THROWS_AS(AxisymmetricSphereMetric(std::vector<double>(10, 0.0)), InvalidMetricError);
    std::vector<double> u(33, 0.0);
    u[5] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(AxisymmetricSphereMetric{u}, InvalidMetricError);
}

TEST_CASE("round-scale closed forms") {
    for (int n : {2, 3, 5}) {
        const Metric m = RoundScaleMetric(n, 2.5);
        CHECK(scalar_curvature(m).values[0] == doctest::Approx(n * (n - 1) / 2.5));
        CHECK(ricci(m).component(0, 0) == doctest::Approx((n - 1) / 2.5));
        CHECK(volume(m) == doctest::Approx(std::pow(2.5, 0.5 * n) * unit_sphere_volume(n)));
    }
    CHECK(unit_sphere_volume(2) == doctest::Approx(4 * pi));
    CHECK(unit_sphere_volume(3) == doctest::Approx(2 * pi * pi));
    CHECK_THROWS_AS(RoundScaleMetric(1, 1.0), InvalidMetricError);
    CHECK_THROWS_AS(RoundScaleMetric(3, 0.0), InvalidMetricError);
}

TEST_CASE("SU(2) Ricci against the coordinate-chart oracle") {
    const std::array<std::array<double, 3>, 5> points{
        {{1, 1, 1}, {1.3, 1.0, 0.9}, {2.0, 0.5, 1.0}, {0.7, 0.7, 1.9}, {3.0, 2.0, 1.0}}};
    for (const auto& abc : points) {
        const oracle::Su2Chart chart({abc[0], abc[1], abc[2]});
        const auto expected = chart.ricci_frame({0.3L, -0.2L, 0.5L});
        const auto ric = ricci(HomogeneousSU2Metric(abc));
        for (int i = 0; i < 3; ++i) {
            CHECK(ric.component(0, i) == doctest::Approx(static_cast<double>(expected[i])).epsilon(1e-8));
        }
    }
    const Metric round = HomogeneousSU2Metric(1, 1, 1);
    CHECK(scalar_curvature(round).values[0] == doctest::Approx(6.0));
    CHECK(volume(round) == doctest::Approx(2 * pi * pi));
}

TEST_CASE("SU(2) frozen values") {
    // (1.3, 1.0, 0.9): Ricci triple computed once from the chart oracle.
    const auto ric = ricci(HomogeneousSU2Metric(1.3, 1.0, 0.9));
    CHECK(ric.component(0, 0) == doctest::Approx(2.8717948717948718).epsilon(1e-14));
    CHECK(ric.component(0, 1) == doctest::Approx(1.4358974358974359).epsilon(1e-14));
    CHECK(ric.component(0, 2) == doctest::Approx(1.2307692307692308).epsilon(1e-14));
    CHECK_THROWS_AS(HomogeneousSU2Metric(1, -1, 1), InvalidMetricError);
}

TEST_CASE("homothety scales curvature inversely") {
    const std::vector<Metric> metrics{profile(64, bump), RoundScaleMetric(3, 0.7), HomogeneousSU2Metric(1.3, 1.0, 0.9)};
    for (const auto& m : metrics) {
        const Metric big = scaled(m, 3.0);
        const auto r = scalar_curvature(m), rb = scalar_curvature(big);
        for (std::size_t k = 0; k < r.size(); ++k) CHECK(rb.values[k] == doctest::Approx(r.values[k] / 3.0).epsilon(1e-12));
        CHECK(volume(big) == doctest::Approx(volume(m) * std::pow(3.0, 0.5 * dimension_of(m))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scaled(RoundScaleMetric(2, 1.0), -2.0), DomainError);
}

TEST_CASE("reduced unknowns round-trip") {
    const Metric m = profile(32, bump);
    const auto x = reduced_unknowns(m);
    const Metric back = with_unknowns(m, x);
    CHECK(reduced_unknowns(back) == x);
    CHECK_THROWS_AS(with_unknowns(m, std::vector<double>(5, 0.0)), GridMismatchError);
    CHECK_THROWS_AS(with_unknowns(HomogeneousSU2Metric(1, 1, 1), std::vector<double>{1.0}), GridMismatchError);
}

TEST_CASE("laplacian and hessian trace agree") {
    const Metric m = profile(128, bump);
    ScalarField phi = ScalarField::constant(m, 0.0);
    for (std::size_t k = 0; k < phi.size(); ++k) phi.values[k] = std::cos(pi * static_cast<double>(k) / 128.0);
    const auto lap = laplace_beltrami(m, phi);
    const auto hess = hessian(m, phi);
    for (std::size_t k = 8; k < 120; k += 16) CHECK(hess.trace(k) == doctest::Approx(lap.values[k]).epsilon(1e-3));
}

TEST_CASE("backend names") {
    CHECK(backend_from_string("su2") == Backend::su2);
    CHECK(to_string(Backend::round_scale) == "round_scale");
    CHECK_THROWS_AS(backend_from_string("torus"), ConfigError);
}
