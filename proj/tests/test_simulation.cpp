#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <tasep/simulation.hpp>

using namespace tasep;

namespace {

// Two-sample Kolmogorov-Smirnov p-value (asymptotic; conservative for lattice data).
double ks_p_value(std::vector<long> a, std::vector<long> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::set<long> support(a.begin(), a.end());
    support.insert(b.begin(), b.end());
    double d = 0;
    for (long v : support) {
        double fa = double(std::upper_bound(a.begin(), a.end(), v) - a.begin()) / a.size();
        double fb = double(std::upper_bound(b.begin(), b.end(), v) - b.begin()) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    double ne = double(a.size()) * b.size() / (a.size() + b.size());
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    if (lambda < 0.2) return 1.0;
    double q = 0;
    for (int k = 1; k <= 100; ++k) q += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(q, 0.0, 1.0);
}

}  // namespace

TEST(CounterRng, ReproducibleAndIndependentStreams) {
    CounterRng a(5, 3), b(5, 3), c(5, 4), d(6, 3);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
        EXPECT_NE(x, d.next());
    }
    EXPECT_EQ(a.counter(), 100u);
}

TEST(CounterRng, UniformInOpenInterval) {
    CounterRng r(1, 0);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST(Simulate, SingleParticleJumpsArePoisson) {
    const double t = 3.0;
    SimConfig c = SimConfig::finite(ParticleConfig({0}), t, 99, 100000);
    auto s = sample_final_positions(c);
    double mean = 0, m2 = 0;
    std::map<long, long> counts;
    for (const auto& p : s.positions) {
        mean += p[0];
        m2 += double(p[0]) * p[0];
        ++counts[p[0]];
    }
    const double n = c.replicas;
    mean /= n;
    double var = m2 / n - mean * mean;
    EXPECT_LT(std::fabs(mean - t), 4 * std::sqrt(t / n));
    // variance of the sample variance of Poisson(t) is about (t + 2t^2)/n
    EXPECT_LT(std::fabs(var - t), 4 * std::sqrt((t + 2 * t * t) / n));

    // chi-square goodness of fit, bins 0..9 and a tail bin
    double chi2 = 0, tail_p = 1;
    long tail_obs = c.replicas;
    for (long k = 0; k <= 9; ++k) {
        double p = std::exp(-t + k * std::log(t) - std::lgamma(k + 1.0));
        double e = p * n;
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
        tail_p -= p;
        tail_obs -= counts[k];
    }
    chi2 += (tail_obs - tail_p * n) * (tail_obs - tail_p * n) / (tail_p * n);
    boost::math::chi_squared dist(10);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(Simulate, NoTimeNoMotion) {
    SimConfig c = SimConfig::finite(ParticleConfig({3, 1, -4}), 0.0, 1, 10);
    for (long r = 0; r < 10; ++r) {
        auto rec = simulate(c, r);
        EXPECT_TRUE(rec.events.empty());
        EXPECT_EQ(rec.final_positions, rec.initial);
    }
}

TEST(Simulate, EventInvariants) {
    SimConfig c = SimConfig::finite(ParticleConfig::step(12), 5.0, 3, 200);
    for (long r = 0; r < c.replicas; ++r) {
        auto rec = simulate(c, r);
        std::vector<long> pos = rec.initial;
        double last = 0;
        for (const auto& e : rec.events) {
            ASSERT_GT(e.time, last);
            ASSERT_LE(e.time, c.horizon);
            last = e.time;
            int k = e.label - 1;
            ASSERT_EQ(pos[k], e.from);
            ASSERT_TRUE(k == 0 || pos[k - 1] > e.from + 1) << "target occupied";
            pos[k] = e.from + 1;
            for (std::size_t i = 1; i < pos.size(); ++i) ASSERT_GT(pos[i - 1], pos[i]);
        }
        EXPECT_EQ(pos, rec.final_positions);
    }
}

TEST(Simulate, FollowerNeverPassesLeader) {
    SimConfig c = SimConfig::finite(ParticleConfig({0, -1}), 2.0, 8, 1000000);
    auto s = sample_final_positions(c);
    long violations = 0;
    double mean = 0;
    for (const auto& p : s.positions) {
        violations += p[0] <= p[1];
        mean += p[0];
    }
    EXPECT_EQ(violations, 0);
    mean /= c.replicas;
    EXPECT_LT(std::fabs(mean - 2.0), 4 * std::sqrt(2.0 / c.replicas));
}

TEST(Simulate, SeedDeterminismAcrossThreads) {
    SimConfig c = SimConfig::flat_window(10.0, {1, 3}, 42, 3000);
    auto a = sample_final_positions(c);
    c.threads = 3;
    auto b = sample_final_positions(c);
    EXPECT_EQ(a.positions, b.positions);
    auto r1 = simulate(c, 17), r2 = simulate(c, 17);
    EXPECT_EQ(r1.final_positions, r2.final_positions);
    ASSERT_EQ(r1.events.size(), r2.events.size());
    for (std::size_t i = 0; i < r1.events.size(); ++i) EXPECT_EQ(r1.events[i].time, r2.events[i].time);
}

TEST(Simulate, ConfigValidation) {
    SimConfig c{FlatWindow{3}, 10.0, 1, 10, {1}};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    SimConfig d{FlatWindow{100}, 1.0, 1, 10, {}};
    EXPECT_THROW(d.validate(), std::invalid_argument);
    SimConfig e = SimConfig::finite(ParticleConfig({0}), 1.0, 1, 0);
    EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(Simulate, WindowDoublingInvisible) {
    const double t = 20;
    auto c = SimConfig::flat_window(t, {1, 4}, 5, 20000);
    auto a = sample_final_positions(c);
    c.initial = FlatWindow{2 * std::get<FlatWindow>(c.initial).half_width};
    c.seed = 6;
    auto b = sample_final_positions(c);
    for (std::size_t j = 0; j < 2; ++j) {
        std::vector<long> xa, xb;
        for (const auto& p : a.positions) xa.push_back(p[j]);
        for (const auto& p : b.positions) xb.push_back(p[j]);
        EXPECT_GT(ks_p_value(xa, xb), 0.001) << j;
    }
}

TEST(Current, ZeroAtTimeZeroAndMonotone) {
    SimConfig c = SimConfig::finite(ParticleConfig::step(8), 4.0, 12, 20);
    for (long r = 0; r < c.replicas; ++r) {
        auto rec = simulate(c, r);
        for (long x = -8; x <= 4; ++x) {
            EXPECT_EQ(current(rec, x, 0.0), 0);
            long prev = 0;
            for (double tt = 0.25; tt <= 4.0; tt += 0.25) {
                long j = current(rec, x, tt);
                EXPECT_GE(j, prev);
                prev = j;
            }
        }
    }
}

TEST(Current, PathwiseIdentity) {
    SimConfig c = SimConfig::finite(ParticleConfig({3, 1, 0, -2, -3, -4, -7, -9}), 3.0, 21, 5000);
    const auto& y = std::get<ParticleConfig>(c.initial);
    long violations = 0;
    for (long r = 0; r < c.replicas; ++r) {
        auto rec = simulate(c, r);
        for (long x = -8; x <= 4; ++x) {
            long j = current(rec, x, c.horizon);
            // s-th particle among those starting at or left of x
            int first = 1;
            while (first <= y.size() && y(first) > x) ++first;
            for (int s = 1; first + s - 1 <= y.size(); ++s) {
                bool lhs = j >= s;
                bool rhs = rec.final_positions[first + s - 2] >= x + 1;
                violations += lhs != rhs;
            }
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(EmpiricalJoint, TrivialThresholdIsExactlyOne) {
    SimConfig c = SimConfig::finite(ParticleConfig({0, -2}), 1.0, 4, 10000);
    auto e = empirical_joint(c, {1, 2}, {-1000, -1000});
    EXPECT_EQ(e.value, 1.0);
    EXPECT_EQ(e.stderr_, 0.0);
    EXPECT_EQ(e.replicas, 10000);
}

TEST(EmpiricalJoint, BitIdenticalForSameSeed) {
    auto c = SimConfig::flat_window(2.0, {2}, 314, 20000);
    auto a = empirical_joint(c, {2}, {1});
    auto b = empirical_joint(c, {2}, {1});
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_NEAR(a.stderr_, std::sqrt(a.value * (1 - a.value) / a.replicas), 1e-15);
}

TEST(RescaledSamples, TightAndCorrelated) {
    auto s = rescaled_samples(400, {0.0, 0.5}, 2718, 2000);
    ASSERT_EQ(s.size(), 2u);
    ASSERT_GT(s[0].size(), 1900u);
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    double m0 = mean(s[0]), m1 = mean(s[1]);
    EXPECT_LT(std::fabs(m0), 3.0);
    double cov = 0, v0 = 0, v1 = 0;
    for (std::size_t i = 0; i < s[0].size(); ++i) {
        cov += (s[0][i] - m0) * (s[1][i] - m1);
        v0 += (s[0][i] - m0) * (s[0][i] - m0);
        v1 += (s[1][i] - m1) * (s[1][i] - m1);
    }
    EXPECT_GT(cov / std::sqrt(v0 * v1), 0.0);
    EXPECT_THROW(rescaled_samples(20, {0.0}, 1, 10), std::invalid_argument);
}
