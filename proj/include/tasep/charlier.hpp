#pragma once

#include <stdexcept>
#include <vector>

#include "core/numeric.hpp"

namespace tasep {

/// Charlier polynomial C_n(x,t) = n! [v^n] e^v (1 - v/t)^x.
template <class Real = double>
Real charlier(long n, long x, const Real& t) {
    if (n < 0) throw std::invalid_argument("charlier: degree must be non-negative");
    // sum_j n!/(n-j)! C(x, j) (-1/t)^j
    Real s(0), falling(1), tp(1);
    for (long j = 0; j <= n; ++j) {
        s += falling * binomial_series<Real>(x, j) * tp;
        falling = falling * Real(n - j);
        tp = tp * Real(-1) / t;
    }
    return s;
}

/// Poisson weight w_t(z) = e^{-t} t^z / z!.
template <class Real = double>
Real charlier_weight(long z, const Real& t) { return poisson_weight<Real>(t, z); }

/// The change-of-basis matrices between shifted Poisson weights and Charlier polynomials.
class CharlierTable {
public:
    explicit CharlierTable(int n) : n_(n) {
        if (n < 1) throw std::invalid_argument("CharlierTable: size must be positive");
        if (n > 64) throw std::invalid_argument("CharlierTable: size limited to 64");
        s_.assign(n, std::vector<bigint>(n, 0));
        inv_.assign(n, std::vector<bigint>(n, 0));
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) s_[k][l] = s_entry(k, l);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) inv_[i][j] = s_inverse_entry(i, j);
    }

    int size() const { return n_; }

    /// S_{k,l} = (-1)^{l-k} C(k, l-k), defined for 0 <= l <= 2k.
    static bigint s_entry(long k, long l) {
        bigint c = binomial_exact(k, l - k);
        return ((l - k) % 2 != 0) ? bigint(-c) : c;
    }
    /// C(2j - i, j - i) i / (2j - i), with (0,0) -> 1 and zero when i > j.
    static bigint s_inverse_entry(long i, long j) {
        if (i > j) return 0;
        if (i == 0) return j == 0 ? 1 : 0;
        bigint num = binomial_exact(2 * j - i, j - i) * i;
        bigint den = 2 * j - i;
        if (num % den != 0) throw std::logic_error("CharlierTable: non-integral inverse entry");
        return num / den;
    }

    const std::vector<std::vector<bigint>>& s() const { return s_; }
    const std::vector<std::vector<bigint>>& s_inverse() const { return inv_; }

    /// Exact check that the square truncation times the inverse is the identity.
    bool product_is_identity() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                bigint acc = 0;
                for (int l = 0; l < n_; ++l) acc += s_[i][l] * inv_[l][j];
                if (acc != (i == j ? 1 : 0)) return false;
            }
        return true;
    }

private:
    int n_;
    std::vector<std::vector<bigint>> s_, inv_;
};

inline CharlierTable s_matrix(int n) { return CharlierTable(n); }

/// Phi^N_k(z) = sum_{l < N} C_l(z,t) t^l / l! Sinv_{l,k}.
template <class Real = double>
Real phi_via_charlier(int n, long k, long z, const Real& t) {
    if (k < 0 || k > n - 1) throw std::invalid_argument("phi_via_charlier: k out of range");
    Real s(0), pw(1);
    for (long l = 0; l <= k; ++l) {
        bigint c = CharlierTable::s_inverse_entry(l, k);
        if (c != 0) s += charlier<Real>(l, z, t) * pw * from_bigint<Real>(c);
        pw = pw * t / Real(l + 1);
    }
    return s;
}

/// Psi^N_k(z) = w_t(z) sum_{l <= 2k} S_{k,l} C_l(z,t).
template <class Real = double>
Real psi_via_charlier(long k, long z, const Real& t) {
    if (k < 0) throw std::invalid_argument("psi_via_charlier: k must be non-negative");
    if (z < 0) return Real(0);
    Real s(0);
    for (long l = k; l <= 2 * k; ++l)
        s += from_bigint<Real>(CharlierTable::s_entry(k, l)) * charlier<Real>(l, z, t);
    return charlier_weight<Real>(z, t) * s;
}

}  // namespace tasep
