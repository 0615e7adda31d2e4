// Distribution of one particle of the alternating start at t = 2: exact determinant next to simulation.

#include <cstdio>

#include <tasep/tasep.hpp>

int main() {
    using namespace tasep;
    const double t = 2.0;
    auto kernel = as_block_kernel([t](LatticePoint p, LatticePoint q) { return kernel_flat(p, q, t); });
    InitialPosition start = [](int n) { return -2L * n; };

    // kernel label 1 starts at -2, which is simulator label 2
    auto samples = sample_final_positions(SimConfig::flat_window(t, {2}, 2024, 50000));

    std::printf("%4s %12s %12s %10s\n", "a", "exact", "simulated", "se");
    for (long a = -2; a <= 4; ++a) {
        auto exact = joint_distribution_discrete(kernel, start, ThresholdSpec({1}, {a}));
        auto mc = empirical_joint(samples, {2}, {a});
        std::printf("%4ld %12.6f %12.6f %10.6f\n", a, exact.value, mc.value, mc.stderr_);
    }
}
