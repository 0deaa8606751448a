#pragma once

// Reference computations that share no code with the library.

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using real = long double;

// c(t) for dc/dt = -2(n-1) + c/τ.
inline double round_scale_tau_flow(double t, double c0, int n, double tau) {
    const double fixed = 2.0 * (n - 1) * tau;
    return fixed + (c0 - fixed) * std::exp(t / tau);
}

// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<real>, std::vector<real>> gauss_legendre(int n) {
    std::vector<real> x(n), w(n);
    const real pi = std::acos(real(-1));
    for (int i = 0; i < n; ++i) {
        real z = std::cos(pi * (i + real(0.75)) / (n + real(0.5)));
        real dp = 0;
        for (int it = 0; it < 100; ++it) {
            real p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const real dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-19L) break;
        }
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return {x, w};
}

// 2π ∫₀^π e^{2u(θ)} sin θ dθ.
inline double axisymmetric_area(const std::function<real(real)>& u, int order = 64) {
    const auto [x, w] = gauss_legendre(order);
    const real pi = std::acos(real(-1));
    real sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const real theta = pi * (x[i] + 1) / 2;
        sum += w[i] * std::exp(2 * u(theta)) * std::sin(theta);
    }
    return static_cast<double>(2 * pi * sum * pi / 2);
}

// Left-invariant metric a₁σ₁² + a₂σ₂² + a₃σ₃² on the unit quaternions in the
// gnomonic chart q = (1, x)/|(1, x)|, where q⁻¹dq = σ₁i + σ₂j + σ₃k. Christoffel
// symbols and curvature come from fourth-order central differences.
class Su2Chart {
public:
    explicit Su2Chart(std::array<real, 3> a, real step = 1e-3L) : a_(a), h_(step) {}

    // Ricci in the orthonormal frame X_i/√a_i with X_i the left translates of i, j, k.
    std::array<real, 3> ricci_frame(const std::array<real, 3>& x) const {
        const auto ric = ricci_coords(x);
        const auto s = sigma(x);
        const auto inv = inverse(s);  // columns are X_i in coordinates
        std::array<real, 3> out{};
        for (int i = 0; i < 3; ++i) {
            real v = 0;
            for (int mu = 0; mu < 3; ++mu)
                for (int nu = 0; nu < 3; ++nu) v += ric[mu][nu] * inv[mu][i] * inv[nu][i];
            out[i] = v / a_[i];
        }
        return out;
    }

private:
    using Mat = std::array<std::array<real, 3>, 3>;
    using Vec = std::array<real, 3>;

    static std::array<real, 4> qmul(const std::array<real, 4>& p, const std::array<real, 4>& q) {
        return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
                p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
                p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
                p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
    }

    // σ_i(∂_μ) as s[i][μ], with ∂_μ q taken analytically.
    static Mat sigma(const Vec& x) {
        const real r2 = 1 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const real r = std::sqrt(r2);
        const std::array<real, 4> q{1 / r, x[0] / r, x[1] / r, x[2] / r};
        const std::array<real, 4> qbar{q[0], -q[1], -q[2], -q[3]};
        const std::array<real, 4> p{1, x[0], x[1], x[2]};
        Mat s{};
        for (int mu = 0; mu < 3; ++mu) {
            std::array<real, 4> dq{};
            for (int c = 0; c < 4; ++c) dq[c] = -p[c] * x[mu] / (r2 * r);
            dq[mu + 1] += 1 / r;
            const auto w = qmul(qbar, dq);
            for (int i = 0; i < 3; ++i) s[i][mu] = w[i + 1];
        }
        return s;
    }

    static Mat inverse(const Mat& m) {
        const real det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        Mat inv{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
                inv[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
            }
        return inv;
    }

    Mat metric(const Vec& x) const {
        const auto s = sigma(x);
        Mat g{};
        for (int mu = 0; mu < 3; ++mu)
            for (int nu = 0; nu < 3; ++nu)
                for (int i = 0; i < 3; ++i) g[mu][nu] += a_[i] * s[i][mu] * s[i][nu];
        return g;
    }

    template <class F>
    auto partial(const F& f, const Vec& x, int dir) const {
        auto at = [&](real e) {
            Vec y = x;
            y[dir] += e;
            return f(y);
        };
        const auto p1 = at(h_), m1 = at(-h_), p2 = at(2 * h_), m2 = at(-2 * h_);
        auto out = p1;
        combine(out, p1, m1, p2, m2);
        return out;
    }

    void combine(Mat& out, const Mat& p1, const Mat& m1, const Mat& p2, const Mat& m2) const {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out[i][j] = (8 * (p1[i][j] - m1[i][j]) - (p2[i][j] - m2[i][j])) / (12 * h_);
    }

    using Gamma = std::array<Mat, 3>;  // Γ^k_ij as g[k][i][j]

    void combine(Gamma& out, const Gamma& p1, const Gamma& m1, const Gamma& p2, const Gamma& m2) const {
        for (int k = 0; k < 3; ++k) combine(out[k], p1[k], m1[k], p2[k], m2[k]);
    }

    Gamma christoffel(const Vec& x) const {
        const Mat g = metric(x);
        const Mat gi = inverse(g);
        std::array<Mat, 3> dg;
        for (int c = 0; c < 3; ++c) dg[c] = partial([this](const Vec& y) { return metric(y); }, x, c);
        Gamma out{};
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    real v = 0;
                    for (int l = 0; l < 3; ++l) v += gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    out[k][i][j] = v / 2;
                }
        return out;
    }

    // R_ij = ∂_k Γ^k_ij - ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij - Γ^k_jl Γ^l_ik.
    Mat ricci_coords(const Vec& x) const {
        const Gamma gam = christoffel(x);
        std::array<Gamma, 3> dgam;
        for (int c = 0; c < 3; ++c) dgam[c] = partial([this](const Vec& y) { return christoffel(y); }, x, c);
        Mat ric{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                real v = 0;
                for (int k = 0; k < 3; ++k) {
                    v += dgam[k][k][i][j] - dgam[j][k][i][k];
                    for (int l = 0; l < 3; ++l) v += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                }
                ric[i][j] = v;
            }
        return ric;
    }

    std::array<real, 3> a_;
    real h_;
};

}  // namespace oracle
