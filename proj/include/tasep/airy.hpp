#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core/numeric.hpp"

namespace tasep {

inline constexpr double airy_min_argument = -40.0;
inline constexpr double airy_max_argument = 120.0;

/// Ai(x) from the Maclaurin series; accurate for |x| <= 5.5.
inline double airy_series(double xd) {
    using ld = long double;
    const ld x = xd;
    const ld c1 = 1.0L / (std::pow(3.0L, 2.0L / 3.0L) * std::tgamma(2.0L / 3.0L));
    const ld c2 = 1.0L / (std::pow(3.0L, 1.0L / 3.0L) * std::tgamma(1.0L / 3.0L));
    const ld x3 = x * x * x;
    ld f = 1, g = x, tf = 1, tg = x;
    for (int k = 1; k < 200; ++k) {
        tf *= x3 / ((3 * k - 1) * (3.0L * k));
        tg *= x3 / ((3.0L * k) * (3 * k + 1));
        f += tf;
        g += tg;
        if (std::fabs(tf) + std::fabs(tg) < 1e-22L * (std::fabs(f) + std::fabs(g))) break;
    }
    return static_cast<double>(c1 * f - c2 * g);
}

/// Ai(x) from its contour integral exp(v^3/3 - x v), deformed through the saddle points
/// +-sqrt(x) (x > 0) or +-i sqrt(-x) (x < 0) and leaving along the rays at angles +-pi/3.
inline double airy_contour(double x) {
    using cd = std::complex<double>;
    const double c = std::sqrt(std::max(x, 0.0)), a = std::sqrt(std::max(-x, 0.0));
    const cd base(c, a), dir = std::polar(1.0, std::numbers::pi / 3);
    const cd f0 = base * base * base / 3.0 - x * base;
    // integrand relative to its value at the saddle point
    auto g = [&](double r) {
        cd d = r * dir;
        cd v = base + d;
        return std::exp(v * v * v / 3.0 - x * v - cd(f0.real(), 0.0));
    };
    double len = 0.25;
    while (std::abs(g(len)) > 1e-22 && len < 64) len += 0.25;
    auto br = uniform_breaks(0.0, len, static_cast<int>(len / 0.25 + 0.5));
    cd ray = integrate_panels([&](double r) -> cd { return g(r) * dir; }, br, 16);
    double seg = 0;
    if (a > 0) {
        int panels = std::max(4, static_cast<int>(std::ceil(a * a * a / 3.0)));
        seg = integrate_panels([&](double y) { return std::cos(y * y * y / 3.0 + x * y); },
                               uniform_breaks(0.0, a, panels), 16);
    }
    return (std::exp(f0.real()) * ray.imag() + seg) / std::numbers::pi;
}

/// Ai(x) on [airy_min_argument, airy_max_argument].
inline double airy(double x) {
    if (!(x >= airy_min_argument && x <= airy_max_argument))
        throw std::domain_error("airy: argument outside the supported range");
    return std::fabs(x) <= 5.5 ? airy_series(x) : airy_contour(x);
}

/// Ray quadrature controls: panels of the given width, Gauss-Legendre order per panel, and the
/// integrand magnitude below which a ray is cut.
struct RayQuadrature {
    double panel_width = 0.25;
    int order = 20;
    double cutoff = 1e-18;
    double max_length = 64;
};

/// Both sides of (1/(-2 pi i)) int_{gamma} exp(v^3/3 + a v^2 + b v) dv = Ai(a^2 - b) exp(2a^3/3 - ab),
/// gamma running from infinity e^{i pi/3} through 0 to infinity e^{-i pi/3}.
inline std::pair<double, double> airy_contour_identity(double a, double b, const RayQuadrature& quad = {}) {
    using ld = long double;
    const cplx up = std::polar(1.0L, std::numbers::pi_v<ld> / 3);
    const cplx down = std::conj(up);
    auto g = [&](cplx v) { return std::exp(v * v * v / 3.0L + static_cast<ld>(a) * v * v + static_cast<ld>(b) * v); };
    auto ray = [&](cplx dir) {
        ld len = quad.panel_width;
        // stop once the magnitude is below the cutoff and decreasing
        while (len < quad.max_length) {
            ld m = std::abs(g(static_cast<ld>(len) * dir));
            ld next = std::abs(g(static_cast<ld>(len + quad.panel_width) * dir));
            if (m < quad.cutoff && next <= m) break;
            len += quad.panel_width;
        }
        if (len >= quad.max_length) throw numerical_failure("airy_contour_identity: truncation radius insufficient");
        auto br = uniform_breaks(0.0, static_cast<double>(len), static_cast<int>(len / quad.panel_width + 0.5L));
        return integrate_panels([&](double r) -> cplx { return g(static_cast<ld>(r) * dir) * dir; }, br, quad.order);
    };
    cplx total = ray(down) - ray(up);
    cplx lhs = total / (-2.0L * std::numbers::pi_v<ld> * cplx(0, 1));
    double rhs = airy(a * a - b) * std::exp(2.0 * a * a * a / 3.0 - a * b);
    return {static_cast<double>(lhs.real()), rhs};
}

/// One-dimensional heat kernel (4 pi du)^{-1/2} exp(-(s2 - s1)^2 / (4 du)).
inline double heat_propagator(double du, double s1, double s2) {
    if (!(du > 0)) throw std::invalid_argument("heat_propagator: du must be positive");
    double d = s2 - s1;
    return std::exp(-d * d / (4 * du)) / std::sqrt(4 * std::numbers::pi * du);
}

struct ScaledPoint {
    double u;
    double s;
};

/// Extended Airy_1 kernel in expanded form.
inline double kernel_f1(ScaledPoint p1, ScaledPoint p2) {
    double du = p2.u - p1.u, ss = p1.s + p2.s;
    double v = airy(ss + du * du) * std::exp(du * ss + 2.0 * du * du * du / 3.0);
    if (du > 0) v -= heat_propagator(du, p1.s, p2.s);
    return v;
}

/// Gauss-Hermite rule for weight e^{-x^2} (Golub-Welsch).
inline const GaussRule& gauss_hermite(int order) {
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    GaussRule rule;
    for (int k = 0; k < order; ++k) {
        rule.nodes.push_back(es.eigenvalues()(k));
        double v0 = es.eigenvectors()(0, k);
        rule.weights.push_back(std::sqrt(std::numbers::pi) * v0 * v0);
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

struct SmoothedIdentity {
    double lhs;
    double rhs;
    double weight_defect;  // |sum of quadrature weights - 1| in each smoothing direction
};

/// Both sides of the heat-smoothed Airy identity: the double integral of
/// p(-u1; s1, x) Ai(x + y) p(u2; y, s2) against exp((2/3)(u2-u1)^3 + (u2-u1)(s1+s2)) Ai(s1+s2+(u2-u1)^2),
/// where p(tau; a, b) is the heat kernel of variance 2 tau.  Requires u1 <= 0 <= u2.
inline SmoothedIdentity smoothed_identity_check(double u1, double u2, double s1, double s2, int order = 96) {
    if (u1 > 0 || u2 < 0) throw std::invalid_argument("smoothed_identity_check: requires u1 <= 0 <= u2");
    const GaussRule& gh = gauss_hermite(order);
    // x = s1 + 2 sqrt(-u1) xi, y = s2 + 2 sqrt(u2) eta with weights e^{-xi^2}/sqrt(pi)
    const double sx = 2 * std::sqrt(-u1), sy = 2 * std::sqrt(u2);
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    std::vector<double> xs, wx, ys, wy;
    auto nodes = [&](double center, double scale, std::vector<double>& pts, std::vector<double>& w) {
        if (scale == 0) { pts = {center}; w = {1.0}; return; }
        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
            pts.push_back(center + scale * gh.nodes[k]);
            w.push_back(gh.weights[k] * norm);
        }
    };
    nodes(s1, sx, xs, wx);
    nodes(s2, sy, ys, wy);
    double wsum_x = 0, wsum_y = 0;
    for (double w : wx) wsum_x += w;
    for (double w : wy) wsum_y += w;
    Accumulator<double> acc;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j) {
            double arg = xs[i] + ys[j];
            double w = wx[i] * wy[j];
            if (arg > airy_max_argument || w < 1e-30) continue;  // |Ai| <= 1, so at most 96^2 * 1e-30 is dropped
            if (arg < airy_min_argument) throw numerical_failure("smoothed_identity_check: quadrature leaves the Airy range");
            acc.add(w * airy(arg));
        }
    double tau = u2 - u1, m = s1 + s2;
    double rhs = std::exp(2.0 / 3.0 * tau * tau * tau + tau * m) * airy(m + tau * tau);
    return {acc.value(), rhs, std::max(std::fabs(wsum_x - 1), std::fabs(wsum_y - 1))};
}

}  // namespace tasep
