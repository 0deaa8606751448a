#include "tauflow/geometry.hpp"

#include "tauflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace tauflow {

Tau::Tau(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError("tau must be a positive finite number, got " + std::to_string(value));
    }
}

std::string_view to_string(Backend backend) {
    switch (backend) {
        case Backend::axisymmetric: return "axisymmetric";
        case Backend::round_scale: return "round_scale";
        case Backend::su2: return "su2";
    }
    return "unknown";
}

Backend backend_from_string(std::string_view name) {
    if (name == "axisymmetric") return Backend::axisymmetric;
    if (name == "round_scale") return Backend::round_scale;
    if (name == "su2") return Backend::su2;
    throw ConfigError("unknown backend '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// SphereGrid

SphereGrid::SphereGrid(std::size_t intervals)
    : intervals_(intervals), spacing_(std::numbers::pi / static_cast<double>(intervals)) {
    if (intervals < AxisymmetricSphereMetric::min_intervals) {
        throw InvalidMetricError("axisymmetric grid needs M >= 16 intervals");
    }
    const double h = spacing_;
    cell_area_.resize(nodes());
    for (std::size_t k = 1; k < intervals_; ++k) {
        cell_area_[k] = 2.0 * std::sin(theta(k)) * std::sin(0.5 * h);
    }
    cell_area_[0] = cell_area_[intervals_] = 1.0 - std::cos(0.5 * h);
    face_weight_.resize(intervals_);
    for (std::size_t k = 0; k < intervals_; ++k) {
        face_weight_[k] = std::sin(theta(k) + 0.5 * h);
    }
    cot_.assign(nodes(), 0.0);
    for (std::size_t k = 1; k < intervals_; ++k) {
        cot_[k] = std::cos(theta(k)) / std::sin(theta(k));
    }
}

std::shared_ptr<const SphereGrid> SphereGrid::get(std::size_t intervals) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const SphereGrid>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(intervals);
    if (it != cache.end()) return it->second;
    auto grid = std::make_shared<const SphereGrid>(intervals);
    cache.emplace(intervals, grid);
    return grid;
}

void SphereGrid::round_laplacian(std::span<const double> phi, std::span<double> out) const {
    if (phi.size() != nodes() || out.size() != nodes()) {
        throw GridMismatchError("field size does not match the grid");
    }
    std::fill(out.begin(), out.end(), 0.0);
    const double inv_h = 1.0 / spacing_;
    for (std::size_t k = 0; k < intervals_; ++k) {
        const double flux = face_weight_[k] * (phi[k + 1] - phi[k]) * inv_h;
        out[k] += flux;
        out[k + 1] -= flux;
    }
    for (std::size_t k = 0; k < nodes(); ++k) {
        out[k] /= cell_area_[k];
    }
}

void SphereGrid::derivative(std::span<const double> phi, std::span<double> out) const {
    if (phi.size() != nodes() || out.size() != nodes()) {
        throw GridMismatchError("field size does not match the grid");
    }
    const double inv_2h = 0.5 / spacing_;
    out[0] = 0.0;
    out[intervals_] = 0.0;
    for (std::size_t k = 1; k < intervals_; ++k) {
        out[k] = (phi[k + 1] - phi[k - 1]) * inv_2h;
    }
}

double SphereGrid::dirichlet_energy(std::span<const double> phi) const {
    if (phi.size() != nodes()) throw GridMismatchError("field size does not match the grid");
    double sum = 0.0;
    for (std::size_t k = 0; k < intervals_; ++k) {
        const double d = phi[k + 1] - phi[k];
        sum += face_weight_[k] * d * d;
    }
    return sum / spacing_;
}

// ---------------------------------------------------------------------------
// Metrics

AxisymmetricSphereMetric::AxisymmetricSphereMetric(std::vector<double> u) : u_(std::move(u)) {
    if (u_.size() < min_intervals + 1) {
        throw InvalidMetricError("axisymmetric metric needs at least 17 nodes (M >= 16)");
    }
    for (double v : u_) {
        if (!std::isfinite(v)) throw InvalidMetricError("conformal exponent has a non-finite node value");
    }
    grid_ = SphereGrid::get(u_.size() - 1);
}

AxisymmetricSphereMetric AxisymmetricSphereMetric::round(std::size_t intervals, double log_scale) {
    return AxisymmetricSphereMetric(std::vector<double>(intervals + 1, log_scale));
}

RoundScaleMetric::RoundScaleMetric(int dimension, double scale) : dimension_(dimension), scale_(scale) {
    if (dimension < 2) throw InvalidMetricError("round-scale metric needs dimension >= 2");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidMetricError("round-scale metric needs a positive finite scale c");
    }
}

HomogeneousSU2Metric::HomogeneousSU2Metric(double a, double b, double c)
    : HomogeneousSU2Metric(std::array<double, 3>{a, b, c}) {}

HomogeneousSU2Metric::HomogeneousSU2Metric(const std::array<double, 3>& coefficients)
    : coefficients_(coefficients) {
    for (double v : coefficients_) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidMetricError("SU(2) metric coefficients must be positive and finite");
        }
    }
}

Backend backend_of(const Metric& m) {
    switch (m.index()) {
        case 0: return Backend::axisymmetric;
        case 1: return Backend::round_scale;
        default: return Backend::su2;
    }
}

int dimension_of(const Metric& m) {
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) return r->dimension();
    return m.index() == 0 ? 2 : 3;
}

std::size_t node_count(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) return a->nodes();
    return 1;
}

std::vector<double> reduced_unknowns(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        return {a->exponent().begin(), a->exponent().end()};
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) return {r->scale()};
    const auto& s = std::get<HomogeneousSU2Metric>(m).coefficients();
    return {s.begin(), s.end()};
}

Metric with_unknowns(const Metric& like, std::span<const double> x) {
    if (std::holds_alternative<AxisymmetricSphereMetric>(like)) {
        if (x.size() != node_count(like)) throw GridMismatchError("unknown count does not match the grid");
        return AxisymmetricSphereMetric(std::vector<double>(x.begin(), x.end()));
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&like)) {
        if (x.size() != 1) throw GridMismatchError("round-scale metric has one unknown");
        return RoundScaleMetric(r->dimension(), x[0]);
    }
    if (x.size() != 3) throw GridMismatchError("SU(2) metric has three unknowns");
    return HomogeneousSU2Metric(x[0], x[1], x[2]);
}

Metric scaled(const Metric& m, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("scale factor must be positive");
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        std::vector<double> u(a->exponent().begin(), a->exponent().end());
        const double shift = 0.5 * std::log(alpha);
        for (double& v : u) v += shift;
        return AxisymmetricSphereMetric(std::move(u));
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        return RoundScaleMetric(r->dimension(), alpha * r->scale());
    }
    auto c = std::get<HomogeneousSU2Metric>(m).coefficients();
    for (double& v : c) v *= alpha;
    return HomogeneousSU2Metric(c);
}

// ---------------------------------------------------------------------------
// Fields

ScalarField ScalarField::constant(const Metric& m, double value) {
    return {backend_of(m), std::vector<double>(node_count(m), value)};
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

namespace {

int stride_for(const Metric& m) {
    switch (backend_of(m)) {
        case Backend::axisymmetric: return 2;
        case Backend::round_scale: return 1;
        case Backend::su2: return 3;
    }
    return 1;
}

void require_compatible(const Metric& m, const ScalarField& phi) {
    if (phi.backend != backend_of(m) || phi.size() != node_count(m)) {
        throw GridMismatchError("scalar field does not live on this metric's grid");
    }
}

void require_compatible(const SymTensor& a, const SymTensor& b) {
    if (a.backend != b.backend || a.stride != b.stride || a.dimension != b.dimension ||
        a.data.size() != b.data.size()) {
        throw GridMismatchError("tensor layouts differ");
    }
}

// Orthonormal-frame Ricci eigenvalues of a diagonal left-invariant metric
// on SU(2) with Milnor structure constants 2 (Milnor's formula).
std::array<double, 3> su2_ricci_frame(const HomogeneousSU2Metric& g) {
    const auto& c = g.coefficients();
    const double root = std::sqrt(c[0] * c[1] * c[2]);
    const std::array<double, 3> lambda{2.0 * c[0] / root, 2.0 * c[1] / root, 2.0 * c[2] / root};
    const double half_sum = 0.5 * (lambda[0] + lambda[1] + lambda[2]);
    const std::array<double, 3> mu{half_sum - lambda[0], half_sum - lambda[1], half_sum - lambda[2]};
    return {2.0 * mu[1] * mu[2], 2.0 * mu[0] * mu[2], 2.0 * mu[0] * mu[1]};
}

}  // namespace

double SymTensor::component(std::size_t node, int i) const {
    if (stride == 1) return data[node];
    return data[node * static_cast<std::size_t>(stride) + static_cast<std::size_t>(i)];
}

double SymTensor::trace(std::size_t node) const {
    if (stride == 1) return dimension * data[node];
    double sum = 0.0;
    for (int i = 0; i < stride; ++i) sum += component(node, i);
    return sum;
}

double SymTensor::norm_squared(std::size_t node) const {
    if (stride == 1) return dimension * data[node] * data[node];
    double sum = 0.0;
    for (int i = 0; i < stride; ++i) sum += component(node, i) * component(node, i);
    return sum;
}

SymTensor SymTensor::zero(const Metric& m) {
    const int stride = stride_for(m);
    return {backend_of(m), dimension_of(m), stride,
            std::vector<double>(node_count(m) * static_cast<std::size_t>(stride), 0.0)};
}

SymTensor SymTensor::multiple_of_metric(const Metric& m, const ScalarField& lambda) {
    require_compatible(m, lambda);
    SymTensor t = zero(m);
    for (std::size_t k = 0; k < t.nodes(); ++k) {
        for (int i = 0; i < t.stride; ++i) t.data[k * t.stride + i] = lambda.values[k];
    }
    return t;
}

SymTensor operator+(const SymTensor& a, const SymTensor& b) {
    require_compatible(a, b);
    SymTensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

SymTensor operator-(const SymTensor& a, const SymTensor& b) {
    require_compatible(a, b);
    SymTensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

SymTensor operator*(double s, const SymTensor& a) {
    SymTensor out = a;
    for (double& v : out.data) v *= s;
    return out;
}

// ---------------------------------------------------------------------------
// Curvature and operators

ScalarField scalar_curvature(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        const auto u = a->exponent();
        std::vector<double> lap(u.size());
        a->grid().round_laplacian(u, lap);
        ScalarField r{Backend::axisymmetric, std::vector<double>(u.size())};
        for (std::size_t k = 0; k < u.size(); ++k) {
            r.values[k] = std::exp(-2.0 * u[k]) * (2.0 - 2.0 * lap[k]);
        }
        return r;
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        const double n = r->dimension();
        return {Backend::round_scale, {n * (n - 1.0) / r->scale()}};
    }
    const auto rho = su2_ricci_frame(std::get<HomogeneousSU2Metric>(m));
    return {Backend::su2, {rho[0] + rho[1] + rho[2]}};
}

SymTensor ricci(const Metric& m) {
    if (std::holds_alternative<AxisymmetricSphereMetric>(m)) {
        ScalarField half = scalar_curvature(m);
        for (double& v : half.values) v *= 0.5;
        return SymTensor::multiple_of_metric(m, half);
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        return SymTensor::multiple_of_metric(m, {Backend::round_scale, {(r->dimension() - 1.0) / r->scale()}});
    }
    const auto rho = su2_ricci_frame(std::get<HomogeneousSU2Metric>(m));
    return {Backend::su2, 3, 3, {rho[0], rho[1], rho[2]}};
}

ScalarField laplace_beltrami(const Metric& m, const ScalarField& phi) {
    require_compatible(m, phi);
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        ScalarField out{Backend::axisymmetric, std::vector<double>(phi.size())};
        a->grid().round_laplacian(phi.values, out.values);
        const auto u = a->exponent();
        for (std::size_t k = 0; k < u.size(); ++k) out.values[k] *= std::exp(-2.0 * u[k]);
        return out;
    }
    return ScalarField::constant(m, 0.0);
}

SymTensor hessian(const Metric& m, const ScalarField& phi) {
    require_compatible(m, phi);
    SymTensor out = SymTensor::zero(m);
    const auto* a = std::get_if<AxisymmetricSphereMetric>(&m);
    if (a == nullptr) return out;

    // Hess_θθ = φ'' - u'φ', Hess_φφ / sin²θ = (cot θ + u') φ'. The θθ entry
    // is taken as (flux Laplacian) - (φφ entry), so the trace reproduces
    // laplace_beltrami exactly.
    const auto& grid = a->grid();
    const auto u = a->exponent();
    const std::size_t n = u.size();
    std::vector<double> lap(n), dphi(n), du(n);
    grid.round_laplacian(phi.values, lap);
    grid.derivative(phi.values, dphi);
    grid.derivative(u, du);
    for (std::size_t k = 0; k < n; ++k) {
        const double conformal = std::exp(-2.0 * u[k]);
        double azimuthal;
        if (k == 0 || k + 1 == n) {
            azimuthal = 0.5 * lap[k];
        } else {
            azimuthal = (grid.cot(k) + du[k]) * dphi[k];
        }
        out.data[2 * k] = conformal * (lap[k] - azimuthal);
        out.data[2 * k + 1] = conformal * azimuthal;
    }
    return out;
}

double unit_sphere_volume(int n) {
    const double half = 0.5 * (n + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

ScalarField volume_form(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        const auto u = a->exponent();
        const auto area = a->grid().cell_area();
        ScalarField w{Backend::axisymmetric, std::vector<double>(u.size())};
        for (std::size_t k = 0; k < u.size(); ++k) {
            w.values[k] = 2.0 * std::numbers::pi * area[k] * std::exp(2.0 * u[k]);
        }
        return w;
    }
    return ScalarField::constant(m, volume(m));
}

double volume(const Metric& m) {
    if (std::holds_alternative<AxisymmetricSphereMetric>(m)) {
        const ScalarField w = volume_form(m);
        double sum = 0.0;
        for (double v : w.values) sum += v;
        return sum;
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        return std::pow(r->scale(), 0.5 * r->dimension()) * unit_sphere_volume(r->dimension());
    }
    const auto& c = std::get<HomogeneousSU2Metric>(m).coefficients();
    return 2.0 * std::numbers::pi * std::numbers::pi * std::sqrt(c[0] * c[1] * c[2]);
}

double diameter(const Metric& m) {
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        // Meridian length; exact for profiles monotone between the poles.
        const auto u = a->exponent();
        double sum = 0.5 * (std::exp(u.front()) + std::exp(u.back()));
        for (std::size_t k = 1; k + 1 < u.size(); ++k) sum += std::exp(u[k]);
        return sum * a->grid().spacing();
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        return std::numbers::pi * std::sqrt(r->scale());
    }
    const auto& c = std::get<HomogeneousSU2Metric>(m).coefficients();
    return std::numbers::pi * std::sqrt(std::max({c[0], c[1], c[2]}));
}

SymTensor traceless_ricci(const Metric& m) {
    const SymTensor ric = ricci(m);
    ScalarField mean = scalar_curvature(m);
    const double n = dimension_of(m);
    for (double& v : mean.values) v /= n;
    return ric - SymTensor::multiple_of_metric(m, mean);
}

ScalarField tensor_norm(const Metric& m, const SymTensor& s) {
    if (s.backend != backend_of(m) || s.nodes() != node_count(m)) {
        throw GridMismatchError("tensor does not live on this metric's grid");
    }
    ScalarField out{s.backend, std::vector<double>(s.nodes())};
    for (std::size_t k = 0; k < s.nodes(); ++k) out.values[k] = s.norm_squared(k);
    return out;
}

double integrate(const Metric& m, const ScalarField& phi) {
    require_compatible(m, phi);
    const ScalarField w = volume_form(m);
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sum += w.values[k] * phi.values[k];
    return sum;
}

double average_scalar_curvature(const Metric& m) {
    return integrate(m, scalar_curvature(m)) / volume(m);
}

ScalarField curvature_norm(const Metric& m) {
    if (std::holds_alternative<AxisymmetricSphereMetric>(m)) {
        ScalarField r = scalar_curvature(m);
        for (double& v : r.values) v = std::abs(v);
        return r;
    }
    if (const auto* r = std::get_if<RoundScaleMetric>(&m)) {
        const double n = r->dimension();
        return {Backend::round_scale, {std::sqrt(2.0 * n * (n - 1.0)) / r->scale()}};
    }
    // In dimension 3 the sectional curvature of the (i,j) plane is
    // (ρ_i + ρ_j - ρ_k)/2 in a Ricci eigenframe.
    const auto rho = su2_ricci_frame(std::get<HomogeneousSU2Metric>(m));
    const double k12 = 0.5 * (rho[0] + rho[1] - rho[2]);
    const double k13 = 0.5 * (rho[0] + rho[2] - rho[1]);
    const double k23 = 0.5 * (rho[1] + rho[2] - rho[0]);
    return {Backend::su2, {2.0 * std::sqrt(k12 * k12 + k13 * k13 + k23 * k23)}};
}

double dirichlet_integral(const Metric& m, const ScalarField& phi) {
    require_compatible(m, phi);
    if (const auto* a = std::get_if<AxisymmetricSphereMetric>(&m)) {
        // |∇φ|² dV is conformally invariant in dimension 2.
        return 2.0 * std::numbers::pi * a->grid().dirichlet_energy(phi.values);
    }
    return 0.0;
}

}  // namespace tauflow
