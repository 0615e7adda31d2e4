#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "core/numeric.hpp"
#include "core/types.hpp"

namespace tasep {

namespace detail {

/// [w^m] (1-w)^i e^{tw} for integer i of either sign, as a finite sum.
template <class Real>
FnValue<Real> coefficient_sum(long i, long m, const Real& t, int max_terms) {
    if (m < 0) return {Real(0), Real(0)};
    long last = m;
    if (i >= 0) last = std::min(last, i);
    if (last + 1 > max_terms)
        throw numerical_failure("coefficient extraction needs more terms than series_order allows");
    Accumulator<Real> acc;
    // term_l = binom_series(i, l) (-1)^l t^{m-l} / (m-l)!
    Real power = power_over_factorial(t, m - last);
    std::vector<Real> powers(last + 1);
    powers[last] = power;
    for (long l = last - 1; l >= 0; --l) powers[l] = powers[l + 1] * t / Real(m - l);
    Real coef(1);
    for (long l = 0; l <= last; ++l) {
        acc.add(coef * powers[l]);
        coef = coef * Real(-(i - l)) / Real(l + 1);
    }
    return {acc.value(), acc.rounding_bound()};
}

}  // namespace detail

/// F_n(x,t) for n <= 0 by exact coefficient extraction at w = 0.
template <class Real = double>
FnValue<Real> eval_F_series(long n, long x, const Real& t, int max_terms = 400) {
    using std::exp;
    if (n > 0) {
        // residues at w = 0 and w = 1 are both finite sums
        Real e = exp(-t);
        Accumulator<Real> acc;
        long m0 = x - n;
        if (m0 + 1 > max_terms || n > max_terms)
            throw numerical_failure("residue expansion needs more terms than series_order allows");
        if (m0 >= 0) {
            // (-1)^n e^{-t} sum_j C(n+j-1, j) t^{m0-j}/(m0-j)!
            Real sign = (n % 2) ? Real(-1) : Real(1);
            Real c(1);
            for (long j = 0; j <= m0; ++j) {
                acc.add(sign * e * c * power_over_factorial(t, m0 - j));
                c = c * Real(n + j) / Real(j + 1);
            }
        }
        long a = n - x - 1;
        Real c(1);
        for (long j = 0; j <= n - 1; ++j) {
            acc.add(c * power_over_factorial(t, n - 1 - j));
            c = c * Real(a - j) / Real(j + 1);
        }
        return {acc.value(), acc.rounding_bound()};
    }
    // n <= 0: (-1)^n [w^{x-n}] (1-w)^{-n} e^{t(w-1)}
    long k = -n;
    auto c = detail::coefficient_sum<Real>(k, x + k, t, max_terms);
    Real e = exp(-t);
    Real sign = (k % 2) ? Real(-1) : Real(1);
    return {sign * e * c.value, e * c.est_error};
}

/// F_n(x,t) by the trapezoid rule on |w| = radius; the error estimate compares m and m/2 nodes.
inline FnValue<double> eval_F_quadrature(long n, long x, double t, double radius, int nodes) {
    if (n > 0 && radius <= 1.0)
        throw std::invalid_argument("eval_F: the contour must enclose w = 1 when n > 0");
    auto f = [&](cplx w) {
        return std::pow(w, static_cast<long double>(n - x - 1)) *
               std::pow(1.0L - w, static_cast<long double>(-n)) *
               std::exp(static_cast<long double>(t) * (w - 1.0L));
    };
    long double sign = (n % 2) ? -1.0L : 1.0L;
    cplx full = circle_integral(f, radius, nodes);
    cplx half = circle_integral(f, radius, nodes / 2);
    return {static_cast<double>(sign * full.real()), static_cast<double>(std::abs(full - half))};
}

/// (-1)^n/(2 pi i) times the loop integral of w^{n-x-1} (1-w)^{-n} e^{t(w-1)} around 0 and 1.
inline FnValue<double> eval_F(long n, long x, double t, const ContourSpec& spec) {
    if (!(t >= 0)) throw std::invalid_argument("eval_F: t must be non-negative");
    spec.validate();
    if (spec.mode == ContourMode::series) return eval_F_series<double>(n, x, t, spec.series_order);
    double r = spec.radius;
    if (n > 0 && r <= 1.0) r = 1.5;
    auto v = eval_F_quadrature(n, x, t, r, spec.nodes);
    if (v.est_error > spec.max_error)
        throw numerical_failure("eval_F: quadrature error estimate above tolerance");
    return v;
}

/// Default evaluation: exact coefficients for n <= 0, circle of radius 1.5 for n > 0.
inline FnValue<double> eval_F(long n, long x, double t) {
    if (n <= 0) return eval_F(n, x, t, ContourSpec::series());
    return eval_F(n, x, t, ContourSpec::quadrature(1.5, 256));
}

template <class Real = double>
Real F_value(long n, long x, const Real& t) { return eval_F_series<Real>(n, x, t).value; }

/// det(F_{i-j}(x_{N+1-i} - y_{N+1-j}, t)).
template <class Real = double>
Real transition_probability(const ParticleConfig& y, const ParticleConfig& x, const Real& t) {
    const int n = y.size();
    if (x.size() != n) throw std::invalid_argument("transition_probability: dimension mismatch");
    if (t < 0) throw std::invalid_argument("transition_probability: t must be non-negative");
    Matrix<Real> m(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            m(i - 1, j - 1) = F_value<Real>(i - j, x(n + 1 - i) - y(n + 1 - j), t);
    Real d = determinant(m);
    if (d < Real(-1e-10)) throw numerical_failure("transition_probability: negative probability");
    return d;
}

/// Sum over the interlacing domain of det(F_{-j}(x^N_{i+1} - y_{N-j}, t)), auxiliary variables
/// capped at max(x) + window.
template <class Real = double>
Real decomposition_sum_raw(const ParticleConfig& y, const ParticleConfig& x, const Real& t, long window) {
    const int n = y.size();
    if (x.size() != n) throw std::invalid_argument("decomposition_sum: dimension mismatch");
    if (n > 4) throw std::invalid_argument("decomposition_sum: brute force limited to N <= 4");
    const long cap = x.rightmost() + window;
    // v[j][i] = x_i^j, 1-based; x_1^j fixed to x_j
    std::vector<std::vector<long>> v(n + 1, std::vector<long>(n + 1, 0));
    for (int j = 1; j <= n; ++j) v[j][1] = x(j);
    std::vector<std::pair<int, int>> order;
    for (int j = 2; j <= n; ++j)
        for (int i = 2; i <= j; ++i) order.emplace_back(j, i);

    // F table keyed by (j, argument) is small; cache per column j
    const long lo_arg = x.leftmost() - y.rightmost() - 1;
    const long hi_arg = cap - y.leftmost() + 1;
    std::vector<std::vector<Real>> ftab(n, std::vector<Real>(hi_arg - lo_arg + 1));
    for (int j = 0; j < n; ++j)
        for (long a = lo_arg; a <= hi_arg; ++a) ftab[j][a - lo_arg] = F_value<Real>(-j, a, t);

    Accumulator<Real> acc;
    Matrix<Real> m(n, n);
    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (idx == order.size()) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    m(i, j) = ftab[j][v[n][i + 1] - y(n - j) - lo_arg];
            acc.add(determinant(m));
            return;
        }
        auto [j, i] = order[idx];
        long lo = v[j - 1][i - 1];
        long hi = (i <= j - 1) ? v[j - 1][i] - 1 : cap;
        for (long val = lo; val <= hi; ++val) {
            v[j][i] = val;
            rec(idx + 1);
        }
    };
    rec(0);
    return acc.value();
}

/// Decomposition sum with the window-sufficiency check (window versus window + 10).
template <class Real = double>
Real decomposition_sum(const ParticleConfig& y, const ParticleConfig& x, const Real& t, long window,
                       double tolerance = 1e-10) {
    Real a = decomposition_sum_raw<Real>(y, x, t, window);
    Real b = decomposition_sum_raw<Real>(y, x, t, window + 10);
    if (abs_value(Real(a - b)) > Real(tolerance))
        throw numerical_failure("decomposition_sum: window too small");
    return b;
}

struct DomainSums {
    bigint restricted;  // over D
    bigint relaxed;     // over D'
};

/// Both sums of f(x_1^N, ..., x_N^N) over D and over D' (only x_i^j >= x_{i-1}^{j-1}), with
/// auxiliary variables in [.., hi].
inline DomainSums domain_sums(const std::function<bigint(const std::vector<long>&)>& f,
                              const ParticleConfig& x, long hi) {
    const int n = x.size();
    if (n > 4) throw std::invalid_argument("antisymmetric_domain_check: limited to N <= 4");
    std::vector<std::vector<long>> v(n + 1, std::vector<long>(n + 1, 0));
    for (int j = 1; j <= n; ++j) v[j][1] = x(j);
    std::vector<std::pair<int, int>> order;
    for (int j = 2; j <= n; ++j)
        for (int i = 2; i <= j; ++i) order.emplace_back(j, i);
    DomainSums out{0, 0};
    std::vector<long> args(n);
    std::function<void(std::size_t, bool)> rec = [&](std::size_t idx, bool in_d) {
        if (idx == order.size()) {
            for (int i = 0; i < n; ++i) args[i] = v[n][i + 1];
            bigint val = f(args);
            out.relaxed += val;
            if (in_d) out.restricted += val;
            return;
        }
        auto [j, i] = order[idx];
        long lo = v[j - 1][i - 1];
        for (long val = lo; val <= hi; ++val) {
            v[j][i] = val;
            bool ok = in_d && (i > j - 1 || val < v[j - 1][i]);
            rec(idx + 1, ok);
        }
    };
    rec(0, true);
    return out;
}

/// True iff the sums of f over D and D' agree exactly.
inline bool antisymmetric_domain_check(const std::function<bigint(const std::vector<long>&)>& f,
                                       const ParticleConfig& x, long hi) {
    auto s = domain_sums(f, x, hi);
    return s.restricted == s.relaxed;
}

/// Correlation functions of the signed measure on interlacing arrays, by direct summation.
/// Each entry of point_sets yields the normalized weight of configurations occupying all its points.
template <class Real = double>
std::vector<Real> brute_force_correlations(const ParticleConfig& y, const Real& t,
                                           const std::vector<std::vector<LatticePoint>>& point_sets,
                                           long window, bool prune = true) {
    const int n = y.size();
    if (n > 3) throw std::invalid_argument("brute_force_correlation: limited to N <= 3");
    const long lo = y.leftmost() - window, hi = y.rightmost() + window;
    // level[k] holds x_1^k < ... < x_k^k (sorted ascending)
    std::vector<std::vector<long>> level(n + 1);
    for (int k = 1; k <= n; ++k) level[k].assign(k, 0);

    const long lo_arg = lo - y.rightmost(), hi_arg = hi - y.leftmost();
    std::vector<std::vector<Real>> ftab(n, std::vector<Real>(hi_arg - lo_arg + 1));
    for (int j = 0; j < n; ++j)
        for (long a = lo_arg; a <= hi_arg; ++a) ftab[j][a - lo_arg] = F_value<Real>(-j, a, t);

    Accumulator<Real> z;
    std::vector<Accumulator<Real>> hits(point_sets.size());
    Matrix<Real> fm(n, n);

    auto indicator_det = [&](int k) -> Real {
        // det[1(x_i^{k-1} > x_j^k)]_{i,j<=k}, with x_k^{k-1} = +infinity
        Matrix<Real> a(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                a(i, j) = (i == k - 1 || level[k - 1][i] > level[k][j]) ? Real(1) : Real(0);
        return determinant(a);
    };
    auto finish = [&] {
        Real w(1);
        for (int k = 2; k <= n && w != 0; ++k) w *= indicator_det(k);
        if (w == 0) return;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fm(i, j) = ftab[j][level[n][i] - y(n - j) - lo_arg];
        w *= determinant(fm);
        if (w == 0) return;
        z.add(w);
        for (std::size_t s = 0; s < point_sets.size(); ++s) {
            bool all = true;
            for (const auto& p : point_sets[s]) {
                const auto& row = level[p.n];
                if (std::find(row.begin(), row.end(), p.x) == row.end()) { all = false; break; }
            }
            if (all) hits[s].add(w);
        }
    };
    // enumerate level k given level k+1 (top level first)
    std::function<void(int, int)> fill = [&](int k, int i) {
        if (k == 0) { finish(); return; }
        if (i == k) { fill(k - 1, 0); return; }
        long a, b;
        if (k == n) {
            a = (i == 0) ? lo : level[k][i - 1] + 1;
            b = hi - (k - 1 - i);
        } else if (prune) {
            a = level[k + 1][i] + 1;
            b = level[k + 1][i + 1];
            if (i > 0) a = std::max(a, level[k][i - 1] + 1);
        } else {
            a = (i == 0) ? lo : level[k][i - 1] + 1;
            b = hi - (k - 1 - i);
        }
        for (long val = a; val <= b; ++val) {
            level[k][i] = val;
            fill(k, i + 1);
        }
    };
    fill(n, 0);
    Real norm = z.value();
    if (norm == 0) throw numerical_failure("brute_force_correlation: vanishing normalization");
    std::vector<Real> out;
    for (auto& h : hits) out.push_back(h.value() / norm);
    return out;
}

template <class Real = double>
Real brute_force_correlation(const ParticleConfig& y, const Real& t, const std::vector<LatticePoint>& points,
                             long window, double tolerance = 1e-10) {
    auto a = brute_force_correlations<Real>(y, t, {points}, window);
    auto b = brute_force_correlations<Real>(y, t, {points}, window + 10);
    if (abs_value(Real(a[0] - b[0])) > Real(tolerance))
        throw numerical_failure("brute_force_correlation: window too small");
    return b[0];
}

}  // namespace tasep
