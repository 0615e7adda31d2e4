#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/numeric.hpp"
#include "core/types.hpp"
#include "kernels.hpp"

namespace tasep {

/// Labels of the finite flat start y_i = 2N - 2i seen from the infinite alternating start.
struct FlatEmbedding {
    int N;
    long z(int n, long x) const { return x + 2L * n - 2L * N; }
};

namespace detail {

/// [v^j] e^{-tv} (1+v)^e.
template <class Real>
Real exp_binomial_coefficient(long e, long j, const Real& t) {
    if (j < 0) return Real(0);
    Real s(0), pw(1);
    for (long a = 0; a <= j; ++a) {
        s += pw * binomial_series<Real>(e, j - a);
        pw = pw * (-t) / Real(a + 1);
    }
    return s;
}

}  // namespace detail

/// Psi^n_k(x) of the flat start in terms of z = x + 2n - 2N:
/// (-1)^k [w^z] e^{(w-1)t} ((w-1)w)^k, which equals (-1)^k F_{-k}(z - 2k, t).
template <class Real = double>
Real psi_flat_z(long k, long z, const Real& t, const ContourSpec& spec = {}) {
    using std::exp;
    spec.validate();
    if (spec.mode == ContourMode::quadrature) {
        if (spec.radius >= 1.0) throw std::invalid_argument("psi_flat: radius must be below 1");
        const long double tt = static_cast<long double>(t);
        auto f = [&](cplx w) {
            return std::pow(w, static_cast<long double>(-z - 1)) * std::exp((w - 1.0L) * tt) *
                   std::pow((w - 1.0L) * w, static_cast<long double>(k));
        };
        cplx full = circle_integral(f, spec.radius, spec.nodes);
        cplx half = circle_integral(f, spec.radius, spec.nodes / 2);
        if (std::abs(full - half) > spec.max_error) throw numerical_failure("psi_flat: quadrature error above tolerance");
        long double sign = (k % 2) ? -1.0L : 1.0L;
        return Real(static_cast<double>(sign * full.real()));
    }
    // [w^{z-k}] e^{-t} e^{tw} (1-w)^k after absorbing (-1)^k
    auto c = detail::coefficient_sum<Real>(k, z - k, t, spec.series_order);
    return exp(-t) * c.value;
}

/// Phi^n_k(x) of the flat start in terms of z: (-1)^k [v^k] (1+2v) e^{-vt} (1+v)^{z-1-k}.
template <class Real = double>
Real phi_flat_z(long k, long z, const Real& t, const ContourSpec& spec = {}) {
    if (k < 0) return Real(0);
    spec.validate();
    if (spec.mode == ContourMode::quadrature) {
        if (spec.radius >= 1.0) throw std::invalid_argument("phi_flat: radius must be below 1");
        const long double tt = static_cast<long double>(t);
        auto f = [&](cplx v) {
            return (1.0L + 2.0L * v) * std::exp(-v * tt) * std::pow(1.0L + v, static_cast<long double>(z - 1)) /
                   (v * std::pow(v * (1.0L + v), static_cast<long double>(k)));
        };
        cplx full = circle_integral(f, spec.radius, spec.nodes);
        cplx half = circle_integral(f, spec.radius, spec.nodes / 2);
        if (std::abs(full - half) > spec.max_error) throw numerical_failure("phi_flat: quadrature error above tolerance");
        long double sign = (k % 2) ? -1.0L : 1.0L;
        return Real(static_cast<double>(sign * full.real()));
    }
    long e = z - 1 - k;
    Real q = detail::exp_binomial_coefficient<Real>(e, k, t) + Real(2) * detail::exp_binomial_coefficient<Real>(e, k - 1, t);
    return (k % 2) ? Real(-q) : q;
}

template <class Real = double>
Real psi_flat(const FlatEmbedding& emb, int n, long k, long x, const Real& t, const ContourSpec& spec = {}) {
    return psi_flat_z<Real>(k, emb.z(n, x), t, spec);
}

template <class Real = double>
Real phi_flat(const FlatEmbedding& emb, int n, long k, long x, const Real& t, const ContourSpec& spec = {}) {
    if (k > n - 1) throw std::invalid_argument("phi_flat: k must be at most n - 1");
    return phi_flat_z<Real>(k, emb.z(n, x), t, spec);
}

/// (-1/2 pi i) times the loop integral around 0 of (1+v)^e e^{-t(1+2v)} / (-v)^p, by coefficient extraction.
template <class Real = double>
FnValue<Real> flat_integral_series(long p, long e, const Real& t, int max_terms = 100000) {
    using std::exp;
    if (p <= 0) return {Real(0), Real(0)};
    if (p > max_terms) throw numerical_failure("kernel_flat: pole order exceeds series_order");
    Accumulator<Real> acc;
    Real pw(1);
    for (long a = 0; a <= p - 1; ++a) {
        acc.add(binomial_series<Real>(e, p - 1 - a) * pw);
        pw = pw * Real(-2) * t / Real(a + 1);
    }
    Real scale = exp(-t);
    Real sign = (p % 2) ? Real(1) : Real(-1);
    return {sign * scale * acc.value(), scale * acc.rounding_bound()};
}

/// Same integral by the trapezoid rule on |v| = radius < 1; est_error compares m and m/2 nodes.
inline FnValue<double> flat_integral_circle(long p, long e, double t, double radius, int nodes) {
    if (radius >= 1.0) throw std::invalid_argument("kernel_flat: radius must be below 1");
    if (p <= 0) return {0.0, 0.0};
    const long double tt = t;
    auto f = [&](cplx v) {
        return std::exp(static_cast<long double>(e) * std::log(1.0L + v) - tt * (1.0L + 2.0L * v) -
                        static_cast<long double>(p) * std::log(-v));
    };
    cplx full = circle_integral(f, radius, nodes);
    cplx half = circle_integral(f, radius, nodes / 2);
    return {static_cast<double>(-full.real()), static_cast<double>(std::abs(full - half))};
}

/// exp(log_scale) times the same integral, along the steepest-descent loop through v = -1/2:
/// ray from -1/2 at angle -pi/3, arc |v| = 1/2 through +1/2, ray back at angle +pi/3.
/// Panels are graded on the scale t^{-1/3} around the saddle.
inline FnValue<double> flat_integral_saddle(long p, long e, double t, long double log_scale, int order = 24) {
    if (p <= 0) return {0.0, 0.0};
    using ld = long double;
    const ld pi = std::numbers::pi_v<ld>;
    const ld tt = t;
    auto logg = [&](cplx v) {
        return static_cast<ld>(e) * std::log(1.0L + v) - tt * (1.0L + 2.0L * v) - static_cast<ld>(p) * std::log(-v) + log_scale;
    };
    const ld h = std::min<ld>(0.5L, 0.25L * std::pow(std::max(tt, 1.0L), -1.0L / 3.0L));
    std::vector<double> br{0.0};
    for (ld b = h / 8; b < 0.5L; b *= 1.5L) br.push_back(static_cast<double>(b));
    br.push_back(0.5);
    const cplx down = std::polar(1.0L, -pi / 3), up = std::polar(1.0L, pi / 3);

    auto run = [&](int ord) {
        cplx ray1 = integrate_panels([&](double r) -> cplx {
            cplx v = -0.5L + static_cast<ld>(r) * down;
            return std::exp(logg(v)) * down;
        }, br, ord);
        cplx ray2 = integrate_panels([&](double r) -> cplx {
            cplx v = -0.5L + static_cast<ld>(r) * up;
            return std::exp(logg(v)) * up;
        }, br, ord);
        cplx arc = integrate_panels([&](double th) -> cplx {
            cplx ei = std::polar(1.0L, static_cast<ld>(th));
            cplx v = -0.5L * ei;
            return std::exp(logg(v)) * (-0.5L * cplx(0, 1) * ei);
        }, uniform_breaks(static_cast<double>(pi / 3), static_cast<double>(5 * pi / 3), 48), ord);
        cplx total = ray1 + arc - ray2;
        return -(total / (2.0L * pi * cplx(0, 1)));
    };
    cplx a = run(order), b = run(order + order / 2);
    return {static_cast<double>(b.real()), static_cast<double>(std::abs(a - b))};
}

/// The conjugated kernel 2^{x2-x1} K_t(n1,x1; n2,x2) of the alternating start on whole blocks of sites.
/// The integrand factors as a(n1,x1; v) c(v) b(n2,x2; v) over a fixed set of nodes on the steepest-descent
/// loop, so a block is a single complex matrix product.
class FlatSaddleKernel {
public:
    explicit FlatSaddleKernel(double t, int order = 24) : t_(t) {
        using ld = long double;
        const ld pi = std::numbers::pi_v<ld>;
        const ld h = std::min<ld>(0.5L, 0.25L * std::pow(std::max<ld>(t, 1.0L), -1.0L / 3.0L));
        std::vector<double> br{0.0};
        for (ld b = h / 8; b < 0.5L; b *= 1.5L) br.push_back(static_cast<double>(b));
        br.push_back(0.5);
        const GaussRule& g = gauss_legendre(order);
        const cplx down = std::polar(1.0L, -pi / 3), up = std::polar(1.0L, pi / 3);
        auto add = [&](cplx v, cplx dv) {
            l1_.push_back(std::log(1.0L + v));
            l2_.push_back(std::log(-v));
            // -(1/2 pi i) dv e^{-t(1+2v)}
            w_.push_back(-dv / (2.0L * pi * cplx(0, 1)) * std::exp(-static_cast<ld>(t) * (1.0L + 2.0L * v)));
        };
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            ld mid = 0.5L * (br[p] + br[p + 1]), half = 0.5L * (br[p + 1] - br[p]);
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                ld r = mid + half * g.nodes[k], wt = half * g.weights[k];
                add(-0.5L + r * down, down * wt);
                add(-0.5L + r * up, -up * wt);
            }
        }
        auto arc = uniform_breaks(static_cast<double>(pi / 3), static_cast<double>(5 * pi / 3), 48);
        for (std::size_t p = 0; p + 1 < arc.size(); ++p) {
            ld mid = 0.5L * (arc[p] + arc[p + 1]), half = 0.5L * (arc[p + 1] - arc[p]);
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                cplx ei = std::polar(1.0L, mid + half * g.nodes[k]);
                add(-0.5L * ei, -0.5L * cplx(0, 1) * ei * (half * g.weights[k]));
            }
        }
    }

    double time() const { return t_; }

    /// Rows (n1, xs1[i]), columns (n2, xs2[j]).
    Eigen::MatrixXd block(int n1, const std::vector<long>& xs1, int n2, const std::vector<long>& xs2) const {
        using ld = long double;
        const ld ln2 = std::log(2.0L);
        const Eigen::Index q = static_cast<Eigen::Index>(w_.size());
        Eigen::MatrixXcd a(xs1.size(), q), b(q, xs2.size());
        for (Eigen::Index j = 0; j < q; ++j) {
            cplx half_w = 0.5L * std::log(w_[j]);
            for (std::size_t i = 0; i < xs1.size(); ++i) {
                ld x1 = static_cast<ld>(xs1[i]);
                cplx e = static_cast<ld>(n1) * l1_[j] - (x1 + n1) * l2_[j] - x1 * ln2 + half_w;
                a(i, j) = std::complex<double>(std::exp(e));
            }
            for (std::size_t i = 0; i < xs2.size(); ++i) {
                ld x2 = static_cast<ld>(xs2[i]);
                cplx e = (x2 + n2) * l1_[j] - static_cast<ld>(n2 + 1) * l2_[j] + x2 * ln2 + half_w;
                b(j, i) = std::complex<double>(std::exp(e));
            }
        }
        Eigen::MatrixXd out = (a * b).real();
        for (std::size_t i = 0; i < xs1.size(); ++i)
            for (std::size_t j = 0; j < xs2.size(); ++j) {
                long p = xs1[i] + n1 + n2 + 1;
                if (p <= 0) out(i, j) = 0;  // no pole inside the loop
                long aa = xs1[i] - xs2[j] - 1, bb = n2 - n1 - 1;
                if (n1 < n2 && bb >= 0 && bb <= aa) {
                    ld lg = std::lgamma(aa + 1.0L) - std::lgamma(bb + 1.0L) - std::lgamma(aa - bb + 1.0L);
                    out(i, j) -= static_cast<double>(std::exp(lg + (xs2[j] - xs1[i]) * ln2));
                }
            }
        return out;
    }

    double operator()(LatticePoint p1, LatticePoint p2) const {
        return block(p1.n, {p1.x}, p2.n, {p2.x})(0, 0);
    }

private:
    double t_;
    std::vector<cplx> l1_, l2_, w_;
};

/// Kernel of the alternating start, labels as in n -> -2n initial positions.
template <class Real = double>
Real kernel_flat_value(LatticePoint p1, LatticePoint p2, const Real& t, const ContourSpec& spec = {}) {
    spec.validate();
    long p = p1.x + p1.n + p2.n + 1;
    long e = p2.x + p1.n + p2.n;
    Real integral;
    if (spec.mode == ContourMode::series) {
        integral = flat_integral_series<Real>(p, e, t).value;
    } else {
        auto v = flat_integral_circle(p, e, to_double(t), spec.radius, spec.nodes);
        if (v.est_error > spec.max_error) throw numerical_failure("kernel_flat: quadrature error above tolerance");
        integral = Real(v.value);
    }
    return integral - phi_transfer_real<Real>(p1.n, p2.n, p1.x, p2.x);
}

inline double kernel_flat(LatticePoint p1, LatticePoint p2, double t, const ContourSpec& spec = {}) {
    return kernel_flat_value<double>(p1, p2, t, spec);
}

/// Both evaluation paths; throws numerical_failure if they differ by more than tolerance.
inline double kernel_flat_checked(LatticePoint p1, LatticePoint p2, double t, double tolerance = 1e-10) {
    double a = kernel_flat_value<double>(p1, p2, t, ContourSpec::series());
    double b = kernel_flat_value<double>(p1, p2, t, ContourSpec::quadrature(0.5, 512, 1e-6));
    if (std::abs(a - b) > tolerance) throw numerical_failure("kernel_flat: evaluation paths disagree");
    return a;
}

}  // namespace tasep
