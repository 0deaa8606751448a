#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace tauflow {

/// Flow parameter τ > 0. Fixed for the lifetime of a run.
class Tau {
public:
    explicit Tau(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

enum class Backend { axisymmetric, round_scale, su2 };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

/// Uniform colatitude grid θ_k = kπ/M on S² with finite-volume weights.
///
/// Node k owns the dual cell [θ_k - h/2, θ_k + h/2] clipped to [0, π]; its
/// weight is the exact integral of sin θ over that cell, so the weights sum
/// to 2 and constants integrate exactly. The round Laplacian is written in
/// flux form with face weights sin θ_{k+1/2}; the poles carry no flux, which
/// is the regularity condition ∂_θ φ = 0 there.
class SphereGrid {
public:
    explicit SphereGrid(std::size_t intervals);

    /// Shared, immutable grid for a given M.
    static std::shared_ptr<const SphereGrid> get(std::size_t intervals);

    std::size_t intervals() const noexcept { return intervals_; }
    std::size_t nodes() const noexcept { return intervals_ + 1; }
    double spacing() const noexcept { return spacing_; }
    double theta(std::size_t k) const noexcept { return spacing_ * static_cast<double>(k); }

    std::span<const double> cell_area() const noexcept { return cell_area_; }
    std::span<const double> face_weight() const noexcept { return face_weight_; }

    /// φ'' + cot θ φ' in flux form; pole rows give the limit 2φ''(pole).
    void round_laplacian(std::span<const double> phi, std::span<double> out) const;

    /// Central first derivative; zero at the poles.
    void derivative(std::span<const double> phi, std::span<double> out) const;

    /// Σ_faces sin θ_{k+1/2} (φ_{k+1} - φ_k)² / h, i.e. ∫|∂_θ φ|² sin θ dθ.
    double dirichlet_energy(std::span<const double> phi) const;

    /// cot θ_k at interior nodes, 0 at the poles.
    double cot(std::size_t k) const noexcept { return cot_[k]; }

private:
    std::size_t intervals_;
    double spacing_;
    std::vector<double> cell_area_;
    std::vector<double> face_weight_;
    std::vector<double> cot_;
};

/// g = e^{2u(θ)} (dθ² + sin²θ dφ²) on S².
class AxisymmetricSphereMetric {
public:
    static constexpr std::size_t min_intervals = 16;

    /// u has M+1 node values, M >= 16, all finite.
    explicit AxisymmetricSphereMetric(std::vector<double> u);

    /// Constant exponent: the round sphere of area 4π e^{2 log_scale}.
    static AxisymmetricSphereMetric round(std::size_t intervals, double log_scale = 0.0);

    static constexpr int dimension = 2;

    const SphereGrid& grid() const noexcept { return *grid_; }
    std::span<const double> exponent() const noexcept { return u_; }
    std::size_t nodes() const noexcept { return u_.size(); }

private:
    std::shared_ptr<const SphereGrid> grid_;
    std::vector<double> u_;
};

/// g = c · g_round on the unit Sⁿ.
class RoundScaleMetric {
public:
    RoundScaleMetric(int dimension, double scale);

    int dimension() const noexcept { return dimension_; }
    double scale() const noexcept { return scale_; }

private:
    int dimension_;
    double scale_;
};

/// Left-invariant metric on SU(2) = S³, diagonal in a Milnor frame whose
/// structure constants are all 2 ([X₂,X₃] = 2X₁ and cyclic). (1,1,1) is the
/// unit round S³.
class HomogeneousSU2Metric {
public:
    HomogeneousSU2Metric(double a, double b, double c);
    explicit HomogeneousSU2Metric(const std::array<double, 3>& coefficients);

    static constexpr int dimension = 3;
    const std::array<double, 3>& coefficients() const noexcept { return coefficients_; }

private:
    std::array<double, 3> coefficients_;
};

using Metric = std::variant<AxisymmetricSphereMetric, RoundScaleMetric, HomogeneousSU2Metric>;

Backend backend_of(const Metric& m);
int dimension_of(const Metric& m);
/// Spatial sample count: M+1 on the axisymmetric backend, 1 otherwise.
std::size_t node_count(const Metric& m);

/// The backend's reduced unknowns: u per node, {c}, or {A, B, C}.
std::vector<double> reduced_unknowns(const Metric& m);
/// Rebuilds a metric of the same backend (and dimension) from unknowns.
Metric with_unknowns(const Metric& like, std::span<const double> unknowns);

/// The homothetic metric αg.
Metric scaled(const Metric& m, double alpha);

/// Per-node values on the metric's grid (a single value on homogeneous backends).
struct ScalarField {
    Backend backend;
    std::vector<double> values;

    static ScalarField constant(const Metric& m, double value);
    std::size_t size() const noexcept { return values.size(); }
    double min() const;
    double max() const;
};

/// Diagonal symmetric 2-tensor stored as components in the metric's
/// orthonormal frame. Axisymmetric: (θθ, φφ) per node. Round-scale: one λ
/// with S = λg. SU(2): the Milnor-frame triple.
struct SymTensor {
    Backend backend;
    int dimension;
    int stride;
    std::vector<double> data;

    std::size_t nodes() const noexcept { return data.size() / static_cast<std::size_t>(stride); }
    /// Component i (0 <= i < dimension) at a node.
    double component(std::size_t node, int i) const;
    double trace(std::size_t node) const;
    double norm_squared(std::size_t node) const;

    static SymTensor zero(const Metric& m);
    /// λ·g, node by node.
    static SymTensor multiple_of_metric(const Metric& m, const ScalarField& lambda);
};

SymTensor operator+(const SymTensor& a, const SymTensor& b);
SymTensor operator-(const SymTensor& a, const SymTensor& b);
SymTensor operator*(double s, const SymTensor& a);

ScalarField scalar_curvature(const Metric& m);
SymTensor ricci(const Metric& m);
ScalarField laplace_beltrami(const Metric& m, const ScalarField& phi);
SymTensor hessian(const Metric& m, const ScalarField& phi);
double volume(const Metric& m);
/// Quadrature weights: ∫φ dV = Σ_k weight_k φ_k.
ScalarField volume_form(const Metric& m);
double diameter(const Metric& m);
SymTensor traceless_ricci(const Metric& m);
/// |S|²_g pointwise.
ScalarField tensor_norm(const Metric& m, const SymTensor& s);

/// ∫ φ dV.
double integrate(const Metric& m, const ScalarField& phi);
/// r = (1/Vol) ∫ R dV.
double average_scalar_curvature(const Metric& m);
/// |Rm| = (R_ijkl R^ijkl)^{1/2} pointwise.
ScalarField curvature_norm(const Metric& m);
/// ∫ |∇φ|² dV using the grid's edge-based Dirichlet form (0 on homogeneous backends).
double dirichlet_integral(const Metric& m, const ScalarField& phi);

/// Volume of the unit round Sⁿ.
double unit_sphere_volume(int n);

}  // namespace tauflow
