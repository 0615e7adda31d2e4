#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tasep {

/// Strictly decreasing particle positions; label k (1-based) sits at positions[k-1].
class ParticleConfig {
public:
    ParticleConfig() = default;
    explicit ParticleConfig(std::vector<long> positions) : pos_(std::move(positions)) {
        for (std::size_t i = 1; i < pos_.size(); ++i)
            if (pos_[i] >= pos_[i - 1])
                throw std::invalid_argument("ParticleConfig: positions must be strictly decreasing");
    }

    int size() const { return static_cast<int>(pos_.size()); }
    long operator()(int label) const {
        if (label < 1 || label > size()) throw std::out_of_range("ParticleConfig: label out of range");
        return pos_[label - 1];
    }
    const std::vector<long>& positions() const { return pos_; }
    long rightmost() const { return pos_.front(); }
    long leftmost() const { return pos_.back(); }

    /// y_i = -i, i = 1..n.
    static ParticleConfig step(int n) {
        std::vector<long> p(n);
        for (int i = 0; i < n; ++i) p[i] = -(i + 1);
        return ParticleConfig(std::move(p));
    }
    /// 2N particles at y_i = 2N - 2i, i = 1..2N.
    static ParticleConfig flat(int n) {
        std::vector<long> p(2 * n);
        for (int i = 1; i <= 2 * n; ++i) p[i - 1] = 2L * n - 2L * i;
        return ParticleConfig(std::move(p));
    }

    bool operator==(const ParticleConfig&) const = default;

private:
    std::vector<long> pos_;
};

/// Space-time point (label n, site x).
struct LatticePoint {
    int n;
    long x;
    bool operator==(const LatticePoint&) const = default;
};

enum class ContourMode { series, quadrature };

/// How a contour integral is evaluated: exact expansion or trapezoid rule on a circle.
struct ContourSpec {
    ContourMode mode = ContourMode::series;
    int series_order = 400;   // cap on expansion terms
    double radius = 0.5;
    int nodes = 256;
    double max_error = 1e-9;  // quadrature results with a larger error estimate are rejected

    static ContourSpec series(int order = 400) {
        ContourSpec c;
        c.series_order = order;
        return c;
    }
    static ContourSpec quadrature(double radius, int nodes = 256, double max_error = 1e-9) {
        ContourSpec c;
        c.mode = ContourMode::quadrature;
        c.radius = radius;
        c.nodes = nodes;
        c.max_error = max_error;
        return c;
    }

    void validate() const {
        if (mode == ContourMode::quadrature) {
            if (!(radius > 0)) throw std::invalid_argument("ContourSpec: radius must be positive");
            if (nodes < 16) throw std::invalid_argument("ContourSpec: at least 16 nodes required");
        } else if (series_order < 1) {
            throw std::invalid_argument("ContourSpec: series order must be positive");
        }
    }
};

template <class Real = double>
struct FnValue {
    Real value;
    Real est_error;
};

}  // namespace tasep
