#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

namespace tasep {

/// Wide binary float for sums whose terms exceed the result by many orders of magnitude.
using extended = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<50>,
                                               boost::multiprecision::et_off>;
using bigint = boost::multiprecision::cpp_int;
using cplx = std::complex<long double>;

/// Raised when a computation cannot certify its own result.
class numerical_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Real>
Real machine_epsilon() { return std::numeric_limits<Real>::epsilon(); }

template <class Real>
Real abs_value(const Real& v) { return v < 0 ? Real(-v) : v; }

template <class Real>
double to_double(const Real& v) { return static_cast<double>(v); }

/// Binomial coefficient C(a, b), zero unless 0 <= b <= a.
template <class Real = double>
Real binomial(long a, long b) {
    if (b < 0 || b > a) return Real(0);
    b = std::min(b, a - b);
    Real r(1);
    for (long i = 1; i <= b; ++i) r = r * Real(a - b + i) / Real(i);
    return r;
}

/// Coefficient of v^j in (1+v)^e for any integer exponent e.
template <class Real = double>
Real binomial_series(long e, long j) {
    if (j < 0) return Real(0);
    if (e >= 0 && j > e) return Real(0);
    Real r(1);
    for (long i = 0; i < j; ++i) r = r * Real(e - i) / Real(i + 1);
    return r;
}

inline bigint binomial_exact(long a, long b) {
    if (b < 0 || b > a) return 0;
    b = std::min(b, a - b);
    bigint r = 1;
    for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
}

template <class Real>
Real from_bigint(const bigint& c) {
    if constexpr (std::is_arithmetic_v<Real>)
        return c.convert_to<Real>();
    else
        return Real(c);
}

/// e^{-t} t^m / m!, zero for m < 0.
template <class Real = double>
Real poisson_weight(const Real& t, long m) {
    using std::exp; using std::log; using std::lgamma;
    if (m < 0) return Real(0);
    if (t == 0) return m == 0 ? Real(1) : Real(0);
    return exp(Real(m) * log(t) - t - lgamma(Real(m + 1)));
}

/// t^m / m! without the exponential factor; zero for m < 0.
template <class Real = double>
Real power_over_factorial(const Real& t, long m) {
    using std::exp; using std::log; using std::lgamma;
    if (m < 0) return Real(0);
    if (m == 0) return Real(1);
    if (t == 0) return Real(0);
    if (m <= 40) {
        Real r(1);
        for (long i = 1; i <= m; ++i) r = r * t / Real(i);
        return r;
    }
    Real mag = exp(Real(m) * log(abs_value(t)) - lgamma(Real(m + 1)));
    return (t < 0 && (m % 2)) ? Real(-mag) : mag;
}

/// Compensated (Neumaier) running sum that also tracks the sum of magnitudes.
template <class Real>
class Accumulator {
public:
    void add(const Real& v) {
        Real s = sum_ + v;
        if (abs_value(sum_) >= abs_value(v))
            comp_ += (sum_ - s) + v;
        else
            comp_ += (v - s) + sum_;
        sum_ = s;
        mass_ += abs_value(v);
    }
    Real value() const { return sum_ + comp_; }
    Real mass() const { return mass_; }
    /// Rounding error bound for the sum, a few ulps of the summed magnitudes.
    Real rounding_bound() const { return Real(4) * machine_epsilon<Real>() * mass_; }

private:
    Real sum_{0}, comp_{0}, mass_{0};
};

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order, cached per order.
inline const GaussRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    GaussRule rule;
    auto push = [&](long double x) {
        long double dp = boost::math::legendre_p_prime(order, x);
        rule.nodes.push_back(static_cast<double>(x));
        rule.weights.push_back(static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp)));
    };
    auto zeros = boost::math::legendre_p_zeros<long double>(order);  // non-negative zeros
    for (auto z = zeros.rbegin(); z != zeros.rend(); ++z)
        if (*z != 0) push(-*z);
    for (long double z : zeros) push(z);
    return cache.emplace(order, std::move(rule)).first->second;
}

template <class R>
struct scalar_of { using type = R; };
template <class T>
struct scalar_of<std::complex<T>> { using type = T; };

/// Composite Gauss-Legendre over consecutive breakpoints.
template <class F>
auto integrate_panels(F&& f, const std::vector<double>& breaks, int order) {
    const GaussRule& g = gauss_legendre(order);
    using R = decltype(f(0.0));
    R total{};
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        double a = breaks[p], b = breaks[p + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t k = 0; k < g.nodes.size(); ++k)
            total += f(mid + half * g.nodes[k]) * static_cast<typename scalar_of<R>::type>(half * g.weights[k]);
    }
    return total;
}

inline std::vector<double> uniform_breaks(double a, double b, int panels) {
    std::vector<double> br(panels + 1);
    for (int i = 0; i <= panels; ++i) br[i] = a + (b - a) * i / panels;
    return br;
}

/// (1/2 pi i) times the integral of f over the circle |w| = r, trapezoid rule with m nodes.
template <class F>
cplx circle_integral(F&& f, long double r, int m) {
    cplx total = 0;
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    for (int k = 0; k < m; ++k) {
        cplx w = std::polar(r, two_pi * k / m);
        total += f(w) * w;
    }
    return total / static_cast<long double>(m);
}

template <class Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Determinant by partially pivoted LU.
template <class Real>
Real determinant(const Matrix<Real>& a) {
    if (a.rows() == 0) return Real(1);
    return a.partialPivLu().determinant();
}

/// One-norm condition number computed from an explicit inverse.
template <class Real>
Real condition_number_1(const Matrix<Real>& a, const Matrix<Real>& inv) {
    auto norm1 = [](const Matrix<Real>& m) {
        Real best(0);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            Real s(0);
            for (Eigen::Index i = 0; i < m.rows(); ++i) s += abs_value(m(i, j));
            best = std::max(best, s);
        }
        return best;
    };
    return norm1(a) * norm1(inv);
}

}  // namespace tasep
