#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "airy.hpp"
#include "flat.hpp"

namespace tasep {

/// Lattice point nearest to a scaled point at time t, and the scaled point it actually represents.
struct SnapReport {
    ScaledPoint requested;
    int n;
    long x;
    ScaledPoint effective;
};

/// n = t/4 + u t^{2/3}, x = -2u t^{2/3} - s t^{1/3}, both rounded to the nearest integer.
inline SnapReport snap(double t, ScaledPoint p) {
    const double t13 = std::cbrt(t), t23 = t13 * t13;
    SnapReport r;
    r.requested = p;
    r.n = static_cast<int>(std::lround(t / 4 + p.u * t23));
    r.x = std::lround(-2 * p.u * t23 - p.s * t13);
    double ue = (r.n - t / 4) / t23;
    r.effective = {ue, -(r.x + 2 * ue * t23) / t13};
    return r;
}

struct RescaledValue {
    double value;
    double est_error;
    SnapReport snap1, snap2;
    bool label_collision;  // rounding merged or reordered two distinct times
};

/// t^{1/3} 2^{x2-x1} C(x1-x2-1, n2-n1-1), computed in log space.
inline double rescaled_transfer(double t, int n1, long x1, int n2, long x2) {
    long a = x1 - x2 - 1, b = n2 - n1 - 1;
    if (n1 >= n2 || b < 0 || b > a) return 0.0;
    double lg = std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    return std::exp(lg + (x2 - x1) * std::log(2.0) + std::log(t) / 3);
}

/// t^{1/3} 2^{x2-x1} K_t(n1,x1; n2,x2) for the alternating start, at the lattice points nearest to p1, p2.
inline RescaledValue rescaled_kernel(double t, ScaledPoint p1, ScaledPoint p2) {
    if (!(t >= 16)) throw std::invalid_argument("rescaled_kernel: t must be at least 16");
    RescaledValue out;
    out.snap1 = snap(t, p1);
    out.snap2 = snap(t, p2);
    const auto& a = out.snap1;
    const auto& b = out.snap2;
    int sign_req = (p2.u > p1.u) - (p2.u < p1.u);
    int sign_lat = (b.n > a.n) - (b.n < a.n);
    out.label_collision = sign_req != sign_lat;
    long p = a.x + a.n + b.n + 1;
    long e = b.x + a.n + b.n;
    long double log_scale = (b.x - a.x) * std::log(2.0L) + std::log(static_cast<long double>(t)) / 3;
    auto integral = flat_integral_saddle(p, e, t, log_scale);
    out.value = integral.value - rescaled_transfer(t, a.n, a.x, b.n, b.x);
    out.est_error = integral.est_error;
    return out;
}

struct ConvergenceRow {
    double t;
    ScaledPoint p1, p2;           // requested
    ScaledPoint eff1, eff2;       // implied by the rounded lattice points
    double rescaled;
    double limit;                 // K_F1 at the effective points
    double abs_err;
    bool label_collision;
};

/// Rescaled kernel against its Airy_1 limit for every (t, point pair).
inline std::vector<ConvergenceRow> convergence_scan(const std::vector<double>& t_list,
                                                    const std::vector<std::pair<ScaledPoint, ScaledPoint>>& points) {
    for (std::size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1])) throw std::invalid_argument("convergence_scan: t_list must increase");
    std::vector<ConvergenceRow> rows;
    for (double t : t_list)
        for (auto [p1, p2] : points) {
            auto r = rescaled_kernel(t, p1, p2);
            double lim = kernel_f1(r.snap1.effective, r.snap2.effective);
            rows.push_back({t, p1, p2, r.snap1.effective, r.snap2.effective, r.value, lim, std::fabs(r.value - lim),
                            r.label_collision});
        }
    return rows;
}

/// True when, for each point pair, the error does not grow by more than the slack factor from one t to the next.
inline bool errors_non_increasing(const std::vector<ConvergenceRow>& rows, std::size_t n_points, double slack = 1.1) {
    if (n_points == 0) return true;
    for (std::size_t i = n_points; i < rows.size(); ++i)
        if (rows[i].abs_err > slack * rows[i - n_points].abs_err) return false;
    return true;
}

}  // namespace tasep
