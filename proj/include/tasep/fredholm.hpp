#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "airy.hpp"
#include "core/numeric.hpp"
#include "core/types.hpp"

namespace tasep {

/// Particle labels sigma(1) < ... < sigma(m) with integer thresholds a_k.
struct ThresholdSpec {
    std::vector<int> labels;
    std::vector<long> thresholds;

    ThresholdSpec(std::vector<int> l, std::vector<long> a) : labels(std::move(l)), thresholds(std::move(a)) {
        if (labels.size() != thresholds.size()) throw std::invalid_argument("ThresholdSpec: length mismatch");
        if (labels.empty()) throw std::invalid_argument("ThresholdSpec: empty selection");
        for (std::size_t i = 1; i < labels.size(); ++i)
            if (labels[i] <= labels[i - 1]) throw std::invalid_argument("ThresholdSpec: labels must increase");
    }
    std::size_t size() const { return labels.size(); }
};

/// Times u_1 < ... < u_m with real thresholds s_k.
struct ContinuumThresholds {
    std::vector<double> u;
    std::vector<double> s;

    ContinuumThresholds(std::vector<double> uu, std::vector<double> ss) : u(std::move(uu)), s(std::move(ss)) {
        if (u.size() != s.size()) throw std::invalid_argument("ContinuumThresholds: length mismatch");
        if (u.empty() || u.size() > 4) throw std::invalid_argument("ContinuumThresholds: between 1 and 4 times");
        for (std::size_t i = 1; i < u.size(); ++i)
            if (u[i] <= u[i - 1]) throw std::invalid_argument("ContinuumThresholds: times must increase");
    }
};

struct KernelMatrix {
    Eigen::MatrixXd entries;         // the cut kernel, already weighted in the continuum case
    std::vector<long> block_begin;   // first row of each block
    std::vector<long> x_min;         // lowest site per block (discrete)
    int quad_order = 0;              // nodes per block (continuum)
};

struct DetResult {
    double value = 0;
    double stabilization_delta = 0;
    std::size_t matrix_size = 0;
    bool flagged = false;
};

struct TruncationPolicy {
    long safety = 5;           // sites kept below the initial position
    long step = 10;            // extra sites for the stabilization check
    double tolerance = 1e-10;  // largest acceptable stabilization delta
};

using LatticeKernel = std::function<double(LatticePoint, LatticePoint)>;
using InitialPosition = std::function<long(int)>;

/// Kernel evaluated on a whole block: rows (n1, xs1[i]), columns (n2, xs2[j]).
using BlockKernel = std::function<Eigen::MatrixXd(int, const std::vector<long>&, int, const std::vector<long>&)>;

inline BlockKernel as_block_kernel(const LatticeKernel& kernel) {
    return [kernel](int n1, const std::vector<long>& xs1, int n2, const std::vector<long>& xs2) {
        Eigen::MatrixXd m(xs1.size(), xs2.size());
        for (std::size_t a = 0; a < xs1.size(); ++a)
            for (std::size_t b = 0; b < xs2.size(); ++b) m(a, b) = kernel({n1, xs1[a]}, {n2, xs2[b]});
        return m;
    };
}

/// chi_a K chi_a on the sites [x_min_k, a_k) of each block.
inline KernelMatrix discrete_kernel_matrix(const BlockKernel& kernel, const InitialPosition& initial,
                                           const ThresholdSpec& spec, long safety) {
    KernelMatrix km;
    std::vector<std::vector<long>> sites(spec.size());
    long total = 0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        long lo = initial(spec.labels[k]) - safety;
        km.x_min.push_back(lo);
        km.block_begin.push_back(total);
        for (long x = lo; x < spec.thresholds[k]; ++x) sites[k].push_back(x);
        total += static_cast<long>(sites[k].size());
    }
    km.entries.resize(total, total);
    for (std::size_t j = 0; j < spec.size(); ++j)
        for (std::size_t k = 0; k < spec.size(); ++k) {
            if (sites[j].empty() || sites[k].empty()) continue;
            km.entries.block(km.block_begin[j], km.block_begin[k], sites[j].size(), sites[k].size()) =
                kernel(spec.labels[j], sites[j], spec.labels[k], sites[k]);
        }
    return km;
}

inline double fredholm_det(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - a;
    return m.partialPivLu().determinant();
}

/// P(x_{sigma(k)}(t) >= a_k for all k) = det(1 - chi_a K chi_a).
inline DetResult joint_distribution_discrete(const BlockKernel& kernel, const InitialPosition& initial,
                                             const ThresholdSpec& spec, const TruncationPolicy& policy = {}) {
    auto km = discrete_kernel_matrix(kernel, initial, spec, policy.safety);
    double v = fredholm_det(km.entries);
    double w = fredholm_det(discrete_kernel_matrix(kernel, initial, spec, policy.safety + policy.step).entries);
    DetResult r;
    r.value = v;
    r.stabilization_delta = std::fabs(v - w);
    r.matrix_size = static_cast<std::size_t>(km.entries.rows());
    r.flagged = r.stabilization_delta > policy.tolerance || v < -1e-8 || v > 1 + 1e-8;
    return r;
}

inline DetResult joint_distribution_discrete(const LatticeKernel& kernel, const InitialPosition& initial,
                                             const ThresholdSpec& spec, const TruncationPolicy& policy = {}) {
    return joint_distribution_discrete(as_block_kernel(kernel), initial, spec, policy);
}

struct TruncationRow {
    long safety;
    double value;
    double delta_vs_previous;
};

/// Determinant as the lower cutoff moves down by the given safety margins.
inline std::vector<TruncationRow> truncation_report(const BlockKernel& kernel, const InitialPosition& initial,
                                                    const ThresholdSpec& spec, const std::vector<long>& safeties) {
    std::vector<TruncationRow> rows;
    for (long s : safeties) {
        double v = fredholm_det(discrete_kernel_matrix(kernel, initial, spec, s).entries);
        rows.push_back({s, v, rows.empty() ? 0.0 : std::fabs(v - rows.back().value)});
    }
    return rows;
}

/// Nodes x = s - scale ln(1 - xi) and weights for (s, infinity), xi Gauss-Legendre on (0, 1).
inline std::pair<std::vector<double>, std::vector<double>> half_line_rule(double s, int order, double scale = 3.0) {
    const GaussRule& g = gauss_legendre(order);
    std::vector<double> x, w;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        double xi = 0.5 * (g.nodes[k] + 1);
        x.push_back(s - scale * std::log1p(-xi));
        w.push_back(0.5 * g.weights[k] * scale / (1 - xi));
    }
    return {x, w};
}

using ContinuumKernel = std::function<double(ScaledPoint, ScaledPoint)>;

inline KernelMatrix continuum_kernel_matrix(const ContinuumKernel& kernel, const ContinuumThresholds& th, int order) {
    const std::size_t m = th.u.size();
    KernelMatrix km;
    km.quad_order = order;
    std::vector<std::vector<double>> xs(m), ws(m);
    for (std::size_t k = 0; k < m; ++k) {
        auto [x, w] = half_line_rule(th.s[k], order);
        xs[k] = std::move(x);
        ws[k] = std::move(w);
        km.block_begin.push_back(static_cast<long>(k) * order);
    }
    km.entries.resize(m * order, m * order);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            for (int a = 0; a < order; ++a)
                for (int b = 0; b < order; ++b) {
                    double kv = 0;
                    double arg = xs[j][a] + xs[k][b];
                    if (arg <= airy_max_argument - 10) kv = kernel({th.u[j], xs[j][a]}, {th.u[k], xs[k][b]});
                    km.entries(j * order + a, k * order + b) = std::sqrt(ws[j][a]) * kv * std::sqrt(ws[k][b]);
                }
    return km;
}

/// det(1 - chi_s K_F1 chi_s) on {u_1..u_m} x R with chi_s(u_k, x) = 1(x > s_k).
/// The stabilization delta compares the given order with one and a half times as many nodes.
inline DetResult joint_distribution_continuum(const ContinuumThresholds& th, int quad_order = 40,
                                              double tolerance = 1e-8) {
    if (quad_order < 20) throw std::invalid_argument("joint_distribution_continuum: quad_order must be at least 20");
    double v = fredholm_det(continuum_kernel_matrix(kernel_f1, th, quad_order).entries);
    double w = fredholm_det(continuum_kernel_matrix(kernel_f1, th, quad_order + quad_order / 2).entries);
    DetResult r;
    r.value = v;
    r.stabilization_delta = std::fabs(v - w);
    r.matrix_size = th.u.size() * quad_order;
    r.flagged = r.stabilization_delta > tolerance || v < -1e-8 || v > 1 + 1e-8;
    return r;
}

/// det(1 - B_0) on (s, infinity) with B_0(x, y) = Ai(x + y).
inline DetResult f1_marginal_result(double s, int quad_order = 40) {
    if (s < -6 || s > 4) throw std::invalid_argument("f1_marginal: s must lie in [-6, 4]");
    return joint_distribution_continuum(ContinuumThresholds({0.0}, {s}), quad_order);
}

inline double f1_marginal(double s, int quad_order = 40) {
    auto r = f1_marginal_result(s, quad_order);
    if (r.flagged) throw numerical_failure("f1_marginal: quadrature did not converge");
    return r.value;
}

}  // namespace tasep
