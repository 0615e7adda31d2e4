#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "core/types.hpp"

namespace tasep {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the k-th draw of a replica depends only on (seed, replica, k).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t replica)
        : key_(splitmix64(seed ^ splitmix64(replica ^ 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next() { return splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_); }
    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Particles on every even site of [-M, M], label i at -2(i-1).
struct FlatWindow {
    long half_width;
};

struct SimConfig {
    std::variant<ParticleConfig, FlatWindow> initial;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    long replicas = 1;
    std::vector<int> tracked;  // flat mode: observed labels; particles to their left are not simulated
    int threads = 1;

    bool flat() const { return std::holds_alternative<FlatWindow>(initial); }

    /// Smallest admissible half-width for the tracked labels at this horizon.
    static long required_half_width(double t, const std::vector<int>& tracked) {
        long range = 0;
        for (int i : tracked) range = std::max(range, std::labs(2L * (i - 1)));
        return static_cast<long>(std::ceil(2 * t + 10 * std::sqrt(t))) + range;
    }
    static SimConfig finite(ParticleConfig y, double t, std::uint64_t seed, long replicas) {
        return SimConfig{std::move(y), t, seed, replicas, {}};
    }
    static SimConfig flat_window(double t, std::vector<int> tracked, std::uint64_t seed, long replicas) {
        SimConfig c{FlatWindow{required_half_width(t, tracked)}, t, seed, replicas, std::move(tracked)};
        return c;
    }

    void validate() const {
        if (!(horizon >= 0)) throw std::invalid_argument("SimConfig: horizon must be non-negative");
        if (replicas < 1) throw std::invalid_argument("SimConfig: at least one replica");
        if (flat()) {
            if (tracked.empty()) throw std::invalid_argument("SimConfig: flat mode needs tracked labels");
            long m = std::get<FlatWindow>(initial).half_width;
            if (m < required_half_width(horizon, tracked))
                throw std::invalid_argument("SimConfig: half-width below 2t + 10 sqrt(t) + observation range");
        } else if (std::get<ParticleConfig>(initial).size() < 1) {
            throw std::invalid_argument("SimConfig: empty configuration");
        }
    }
};

struct JumpEvent {
    double time;
    int label;
    long from;
};

struct TrajectoryRecord {
    std::vector<int> labels;       // simulated labels, right to left
    std::vector<long> initial;
    std::vector<long> final_positions;
    std::vector<JumpEvent> events;
    bool valid = true;

    long position(int label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw std::out_of_range("TrajectoryRecord: label not simulated");
        return final_positions[it - labels.begin()];
    }
};

namespace detail {

/// Labels and initial positions actually simulated for a configuration.
inline void initial_state(const SimConfig& c, std::vector<int>& labels, std::vector<long>& pos) {
    labels.clear();
    pos.clear();
    if (c.flat()) {
        long m = std::get<FlatWindow>(c.initial).half_width;
        int first = 1 - static_cast<int>(m / 2);
        int last = *std::max_element(c.tracked.begin(), c.tracked.end());
        for (int i = first; i <= last; ++i) {
            labels.push_back(i);
            pos.push_back(-2L * (i - 1));
        }
    } else {
        const auto& y = std::get<ParticleConfig>(c.initial);
        for (int i = 1; i <= y.size(); ++i) {
            labels.push_back(i);
            pos.push_back(y(i));
        }
    }
}

/// Gillespie run over the enabled-jump set. on_jump(index, from, time) is called per event.
/// Returns the index of the deepest particle reached by the boundary-influence front (flat mode), or -1.
template <class OnJump>
int run_dynamics(std::vector<long>& pos, double horizon, CounterRng& rng, bool track_front, OnJump&& on_jump) {
    const int n = static_cast<int>(pos.size());
    std::vector<int> enabled;
    std::vector<int> where(n, -1);
    enabled.reserve(n);
    auto can_jump = [&](int k) { return k == 0 || pos[k - 1] > pos[k] + 1; };
    auto set_enabled = [&](int k, bool on) {
        if (on && where[k] < 0) {
            where[k] = static_cast<int>(enabled.size());
            enabled.push_back(k);
        } else if (!on && where[k] >= 0) {
            int last = enabled.back();
            enabled[where[k]] = last;
            where[last] = where[k];
            enabled.pop_back();
            where[k] = -1;
        }
    };
    for (int k = 0; k < n; ++k) set_enabled(k, can_jump(k));
    int front = track_front ? 0 : -1;
    double time = 0;
    while (!enabled.empty()) {
        time += rng.exponential(static_cast<double>(enabled.size()));
        if (time > horizon) break;
        int k = enabled[rng.below(enabled.size())];
        long from = pos[k];
        pos[k] = from + 1;
        on_jump(k, from, time);
        if (track_front && k == front + 1) front = k;
        set_enabled(k, can_jump(k));
        if (k + 1 < n) set_enabled(k + 1, true);
    }
    return front;
}

inline bool tracked_contaminated(const SimConfig& c, const std::vector<int>& labels, int front) {
    if (!c.flat() || front < 0) return false;
    int deepest = labels[front];
    for (int l : c.tracked)
        if (l <= deepest) return true;
    return false;
}

/// Runs body(replica) for every replica, split over the configured number of threads.
template <class Body>
void for_each_replica(const SimConfig& c, Body&& body) {
    int threads = std::max(1, c.threads);
    if (threads == 1) {
        for (long r = 0; r < c.replicas; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (long r = w; r < c.replicas; r += threads) body(r);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// One realization of the dynamics up to the horizon, with every jump recorded.
inline TrajectoryRecord simulate(const SimConfig& config, long replica_index) {
    config.validate();
    TrajectoryRecord rec;
    detail::initial_state(config, rec.labels, rec.initial);
    rec.final_positions = rec.initial;
    CounterRng rng(config.seed, static_cast<std::uint64_t>(replica_index));
    int front = detail::run_dynamics(rec.final_positions, config.horizon, rng, config.flat(),
                                     [&](int k, long from, double time) { rec.events.push_back({time, rec.labels[k], from}); });
    rec.valid = !detail::tracked_contaminated(config, rec.labels, front);
    return rec;
}

/// Number of jumps from site x to x+1 up to time t.
inline long current(const TrajectoryRecord& record, long x, double t) {
    long count = 0;
    for (const auto& e : record.events) {
        if (e.time > t) break;
        if (e.from == x) ++count;
    }
    return count;
}

/// Final positions of the observed labels for every replica (flat mode: the tracked labels;
/// otherwise all particles in label order). Invalid replicas are marked in `valid`.
struct TrackedSamples {
    std::vector<int> labels;
    std::vector<std::vector<long>> positions;  // [replica][label index]
    std::vector<char> valid;
    long invalid = 0;
};

inline TrackedSamples sample_final_positions(const SimConfig& config) {
    config.validate();
    TrackedSamples out;
    std::vector<int> labels;
    std::vector<long> init;
    detail::initial_state(config, labels, init);
    std::vector<int> idx;
    if (config.flat()) {
        out.labels = config.tracked;
        for (int l : config.tracked) idx.push_back(static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
    } else {
        out.labels = labels;
        for (std::size_t i = 0; i < labels.size(); ++i) idx.push_back(static_cast<int>(i));
    }
    out.positions.assign(config.replicas, std::vector<long>(idx.size()));
    out.valid.assign(config.replicas, 1);
    detail::for_each_replica(config, [&](long r) {
        std::vector<long> pos = init;
        CounterRng rng(config.seed, static_cast<std::uint64_t>(r));
        int front = detail::run_dynamics(pos, config.horizon, rng, config.flat(), [](int, long, double) {});
        for (std::size_t j = 0; j < idx.size(); ++j) out.positions[r][j] = pos[idx[j]];
        out.valid[r] = !detail::tracked_contaminated(config, labels, front);
    });
    for (char v : out.valid) out.invalid += !v;
    if (config.flat() && out.invalid * 100 > config.replicas)
        throw std::runtime_error("empirical sampling: more than 1% of replicas reached the window boundary; enlarge the half-width");
    return out;
}

struct EstimateWithError {
    double value;
    double stderr_;
    long replicas;
};

inline EstimateWithError indicator_estimate(long hits, long n) {
    double p = n ? static_cast<double>(hits) / n : 0.0;
    return {p, n ? std::sqrt(p * (1 - p) / n) : 0.0, n};
}

/// Fraction of valid replicas with x_{label_k}(t) >= a_k for all k.
inline EstimateWithError empirical_joint(const TrackedSamples& s, const std::vector<int>& labels,
                                         const std::vector<long>& thresholds) {
    if (labels.size() != thresholds.size()) throw std::invalid_argument("empirical_joint: length mismatch");
    std::vector<int> col;
    for (int l : labels) {
        auto it = std::find(s.labels.begin(), s.labels.end(), l);
        if (it == s.labels.end()) throw std::invalid_argument("empirical_joint: label not observed");
        col.push_back(static_cast<int>(it - s.labels.begin()));
    }
    long hits = 0, n = 0;
    for (std::size_t r = 0; r < s.positions.size(); ++r) {
        if (!s.valid[r]) continue;
        ++n;
        bool ok = true;
        for (std::size_t k = 0; k < col.size() && ok; ++k) ok = s.positions[r][col[k]] >= thresholds[k];
        hits += ok;
    }
    return indicator_estimate(hits, n);
}

inline EstimateWithError empirical_joint(const SimConfig& config, const std::vector<int>& labels,
                                         const std::vector<long>& thresholds) {
    SimConfig c = config;
    if (c.flat()) c.tracked = labels;
    return empirical_joint(sample_final_positions(c), labels, thresholds);
}

/// Label observed at scaled time-like coordinate u: the integer part of t/4 + u t^{2/3}, shifted by
/// label_offset (1 when particle k is taken to start at -2k, 0 when it starts at -2(k-1)).
inline int rescaled_label(double t, double u, int label_offset = 1) {
    return static_cast<int>(std::floor(t / 4 + u * std::pow(t, 2.0 / 3.0))) + label_offset;
}

/// x^resc = -t^{-1/3} (x + 2u t^{2/3}) for each valid replica and each u.
inline std::vector<std::vector<double>> rescaled_samples(double t, const std::vector<double>& u, std::uint64_t seed,
                                                         long replicas, int threads = 1, int label_offset = 1) {
    if (t < 50) throw std::invalid_argument("rescaled_samples: t must be at least 50");
    std::vector<int> labels;
    for (double uu : u) labels.push_back(rescaled_label(t, uu, label_offset));
    std::vector<int> tracked = labels;
    std::sort(tracked.begin(), tracked.end());
    tracked.erase(std::unique(tracked.begin(), tracked.end()), tracked.end());
    SimConfig c = SimConfig::flat_window(t, tracked, seed, replicas);
    c.threads = threads;
    auto s = sample_final_positions(c);
    const double t13 = std::cbrt(t), t23 = t13 * t13;
    std::vector<std::vector<double>> out(u.size());
    for (std::size_t r = 0; r < s.positions.size(); ++r) {
        if (!s.valid[r]) continue;
        for (std::size_t j = 0; j < u.size(); ++j) {
            long x = s.positions[r][std::find(tracked.begin(), tracked.end(), labels[j]) - tracked.begin()];
            out[j].push_back(-(x + 2 * u[j] * t23) / t13);
        }
    }
    return out;
}

}  // namespace tasep
