#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "core/numeric.hpp"
#include "core/types.hpp"
#include "schuetz.hpp"

namespace tasep {

/// phi^{(n1,n2)}(x1,x2) = C(x1-x2-1, n2-n1-1), zero when n1 >= n2.
inline long phi_transfer(int n1, int n2, long x1, long x2) {
    if (n1 >= n2) return 0;
    long a = x1 - x2 - 1, b = n2 - n1 - 1;
    if (b < 0 || b > a) return 0;
    double v = binomial<double>(a, b);
    if (v > 9.0e18) throw std::overflow_error("phi_transfer: binomial exceeds 64-bit range");
    return std::lround(v);
}

template <class Real = double>
Real phi_transfer_real(int n1, int n2, long x1, long x2) {
    if (n1 >= n2) return Real(0);
    return binomial<Real>(x1 - x2 - 1, n2 - n1 - 1);
}

/// Psi^n_i(x) for initial condition y: [w^{x - y_{n-i} + i}] (1-w)^i e^{t(w-1)}, the loop enclosing only w = 0.
template <class Real = double>
FnValue<Real> psi_general_value(int n, int i, long x, const ParticleConfig& y, const Real& t,
                                const ContourSpec& spec = {}) {
    using std::exp;
    if (n < 1 || n > y.size()) throw std::invalid_argument("psi_general: level out of range");
    if (i > n - 1 || n - i > y.size()) throw std::invalid_argument("psi_general: index out of range");
    spec.validate();
    long m = x - y(n - i) + i;
    if (spec.mode == ContourMode::quadrature) {
        if (spec.radius >= 1.0) throw std::invalid_argument("psi_general: radius must be below 1");
        const long double tt = static_cast<long double>(t);
        auto f = [&](cplx w) {
            return std::pow(w, static_cast<long double>(-m - 1)) *
                   std::pow(1.0L - w, static_cast<long double>(i)) * std::exp(tt * (w - 1.0L));
        };
        cplx full = circle_integral(f, spec.radius, spec.nodes);
        cplx half = circle_integral(f, spec.radius, spec.nodes / 2);
        double err = static_cast<double>(std::abs(full - half));
        if (err > spec.max_error) throw numerical_failure("psi_general: quadrature error above tolerance");
        return {Real(static_cast<double>(full.real())), Real(err)};
    }
    auto c = detail::coefficient_sum<Real>(i, m, t, spec.series_order);
    Real e = exp(-t);
    return {e * c.value, e * c.est_error};
}

template <class Real = double>
Real psi_general(int n, int i, long x, const ParticleConfig& y, const Real& t, const ContourSpec& spec = {}) {
    return psi_general_value<Real>(n, i, x, y, t, spec).value;
}

/// The family Psi^n_i for fixed level n.
template <class Real = double>
struct PsiFamily {
    int n;
    ParticleConfig y;
    Real t;

    Real operator()(int i, long x) const { return psi_general<Real>(n, i, x, y, t); }
    /// First site where some Psi^n_i (i >= 0) can be non-zero.
    long support_begin() const { return y(n); }
};

/// Polynomials Phi^n_k, k = 0..n-1, stored in the basis p_m(x) = C(x - center, m).
template <class Real = extended>
class PhiFamily {
public:
    PhiFamily(int n, long center, Matrix<Real> coef, Real condition, Real residual)
        : n_(n), center_(center), coef_(std::move(coef)), condition_(condition), residual_(residual) {}

    int level() const { return n_; }
    long center() const { return center_; }
    /// Column k holds the basis coefficients of Phi^n_k.
    const Matrix<Real>& coefficients() const { return coef_; }
    Real condition() const { return condition_; }
    Real residual() const { return residual_; }

    std::vector<Real> basis(long x) const {
        std::vector<Real> p(n_);
        Real d = Real(x - center_);
        p[0] = Real(1);
        for (int m = 1; m < n_; ++m) p[m] = p[m - 1] * (d - Real(m - 1)) / Real(m);
        return p;
    }
    /// All Phi^n_k(x) for k = 0..n-1.
    std::vector<Real> values(long x) const {
        auto p = basis(x);
        std::vector<Real> out(n_, Real(0));
        for (int k = 0; k < n_; ++k) {
            Real s(0);
            for (int m = 0; m <= k; ++m) s += coef_(m, k) * p[m];
            out[k] = s;
        }
        return out;
    }
    Real operator()(int k, long x) const {
        if (k < 0 || k >= n_) throw std::out_of_range("PhiFamily: index out of range");
        return values(x)[k];
    }

private:
    int n_;
    long center_;
    Matrix<Real> coef_;
    Real condition_, residual_;
};

/// Moment matrix M_{jm} = sum_x Psi^n_j(x) C(x - y_n, m).  Summation by parts turns each moment into
/// (-1)^j E[C(y_{n-j} - j - y_n + P, m - j)] with P ~ Poisson(t), a finite sum of non-negative terms.
template <class Real = extended>
Matrix<Real> phi_moment_matrix(int n, const ParticleConfig& y, const Real& t) {
    Matrix<Real> m = Matrix<Real>::Zero(n, n);
    const long c = y(n);
    for (int j = 0; j < n; ++j) {
        long a = y(n - j) - j - c;  // >= 0 for strictly decreasing y
        Real sign = (j % 2) ? Real(-1) : Real(1);
        for (int col = j; col < n; ++col) {
            long r = col - j;
            Real s(0), pw(1);
            for (long q = 0; q <= r; ++q) {
                s += binomial<Real>(a, r - q) * pw;
                pw = pw * t / Real(q + 1);
            }
            m(j, col) = sign * s;
        }
    }
    return m;
}

/// Condition threshold for the moment system, scaled from 1e12 at double precision to the working precision.
template <class Real>
Real phi_condition_limit() {
    return Real(1e12) * Real(std::numeric_limits<double>::epsilon()) / machine_epsilon<Real>();
}

/// Biorthogonal polynomials Phi^n_k for a general initial condition, from the moment system.
template <class Real = extended>
PhiFamily<Real> build_phi_general(int n, const ParticleConfig& y, const Real& t) {
    if (n < 1 || n > y.size()) throw std::invalid_argument("build_phi_general: level out of range");
    Matrix<Real> m = phi_moment_matrix<Real>(n, y, t);
    auto lu = m.partialPivLu();
    if (lu.determinant() == 0) throw numerical_failure("build_phi_general: singular moment system");
    Matrix<Real> inv = lu.inverse();
    Real cond = condition_number_1(m, inv);
    if (cond > phi_condition_limit<Real>())
        throw numerical_failure("build_phi_general: moment system ill-conditioned (condition " +
                                std::to_string(to_double(cond)) + ")");
    Matrix<Real> check = m * inv - Matrix<Real>::Identity(n, n);
    Real res(0);
    for (Eigen::Index i = 0; i < check.rows(); ++i)
        for (Eigen::Index j = 0; j < check.cols(); ++j) res = std::max(res, abs_value(check(i, j)));
    return PhiFamily<Real>(n, y(n), std::move(inv), cond, res);
}

/// Summation window [y_n - 1, y_1 + ceil(10 t + 20 sqrt t)] used for sums against Psi^n.
inline std::pair<long, long> psi_window(int n, const ParticleConfig& y, double t) {
    return {y(n) - 1, y.rightmost() + static_cast<long>(std::ceil(10 * t + 20 * std::sqrt(t)))};
}

/// max_{i,j} |sum_x Psi^n_i(x) Phi^n_j(x) - delta_ij| over the window, with the window-sufficiency check.
template <class Real = extended>
Real biorthogonality_residual(const PhiFamily<Real>& phi, const ParticleConfig& y, const Real& t) {
    const int n = phi.level();
    auto [lo, hi0] = psi_window(n, y, to_double(t));
    auto gram_over = [&](long a, long b) {
        Matrix<Real> g = Matrix<Real>::Zero(n, n);
        for (long x = a; x <= b; ++x) {
            auto ph = phi.values(x);
            for (int i = 0; i < n; ++i) {
                Real ps = psi_general<Real>(n, i, x, y, t);
                if (ps == 0) continue;
                for (int j = 0; j < n; ++j) g(i, j) += ps * ph[j];
            }
        }
        return g;
    };
    long hi = hi0;
    Matrix<Real> g = gram_over(lo, hi);
    for (;;) {
        Matrix<Real> tail = gram_over(hi + 1, hi + 10);
        Real worst(0);
        for (Eigen::Index i = 0; i < tail.size(); ++i) worst = std::max(worst, abs_value(tail(i)));
        g += tail;
        hi += 10;
        if (worst < Real(1e-14)) break;
        if (hi - hi0 > 2000) throw numerical_failure("biorthogonality_residual: window does not stabilize");
    }
    Real res(0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            res = std::max(res, abs_value(Real(g(i, j) - (i == j ? Real(1) : Real(0)))));
    return res;
}

/// Extended kernel of the determinantal process for a general finite initial condition.
/// Phi families are built per level on first use and cached.
class GeneralKernel {
public:
    GeneralKernel(ParticleConfig y, double t, const std::vector<int>& levels = {})
        : y_(std::move(y)), t_(t), te_(t) {
        if (!(t > 0)) throw std::invalid_argument("GeneralKernel: t must be positive");
        for (int n : levels) phi(n);
    }

    const ParticleConfig& initial() const { return y_; }
    double time() const { return t_; }

    const PhiFamily<extended>& phi(int n) const {
        std::lock_guard<std::mutex> lock(*mtx_);
        auto it = cache_.find(n);
        if (it == cache_.end())
            it = cache_.emplace(n, std::make_shared<PhiFamily<extended>>(build_phi_general<extended>(n, y_, te_))).first;
        return *it->second;
    }

    extended value_extended(LatticePoint p1, LatticePoint p2) const {
        const int n = y_.size();
        if (p1.n < 1 || p1.n > n || p2.n < 1 || p2.n > n)
            throw std::invalid_argument("kernel_general: label out of range");
        const auto& ph = phi(p2.n);
        auto vals = ph.values(p2.x);
        extended s(0);
        for (int i = 0; i < p2.n; ++i) {
            int j = p1.n - p2.n + i;
            s += psi_general<extended>(p1.n, j, p1.x, y_, te_) * vals[i];
        }
        return s - phi_transfer_real<extended>(p1.n, p2.n, p1.x, p2.x);
    }
    double operator()(LatticePoint p1, LatticePoint p2) const {
        return static_cast<double>(value_extended(p1, p2));
    }

private:
    ParticleConfig y_;
    double t_;
    extended te_;
    mutable std::map<int, std::shared_ptr<PhiFamily<extended>>> cache_;
    std::shared_ptr<std::mutex> mtx_ = std::make_shared<std::mutex>();
};

inline double kernel_general(LatticePoint p1, LatticePoint p2, const ParticleConfig& y, double t) {
    return GeneralKernel(y, t)(p1, p2);
}

}  // namespace tasep
