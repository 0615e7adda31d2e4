#include <gtest/gtest.h>

#include <cmath>

#include <tasep/charlier.hpp>
#include <tasep/flat.hpp>
#include <tasep/kernels.hpp>
#include <tasep/schuetz.hpp>

using namespace tasep;

namespace {

double poisson_pmf(long k, double t) { return k < 0 ? 0.0 : std::exp(-t + k * std::log(t) - std::lgamma(k + 1.0)); }

}  // namespace

TEST(PsiGeneral, IndexZeroIsPoisson) {
    ParticleConfig y({0, -3, -4, -7});
    for (int n = 1; n <= 4; ++n)
        for (long x = y(n) - 3; x <= y(n) + 12; ++x) {
            double v = psi_general<double>(n, 0, x, y, 1.7);
            EXPECT_NEAR(v, poisson_pmf(x - y(n), 1.7), 1e-15);
            EXPECT_NEAR(v, eval_F(0, x - y(n), 1.7).value, 1e-15);
        }
}

TEST(PsiGeneral, IndexZeroSumsToOne) {
    ParticleConfig y = ParticleConfig::step(5);
    for (int n = 1; n <= 5; ++n) {
        double s = 0;
        for (long x = y(n); x <= y(n) + 80; ++x) s += psi_general<double>(n, 0, x, y, 4.0);
        EXPECT_NEAR(s, 1.0, 1e-13);
    }
}

TEST(PsiGeneral, HigherIndicesSumToZero) {
    ParticleConfig y({0, -3, -4, -7});
    for (int n = 2; n <= 4; ++n)
        for (int j = 1; j < n; ++j) {
            double s = 0;
            for (long x = y(n - j) - j; x <= 80; ++x) s += psi_general<double>(n, j, x, y, 2.0);
            EXPECT_NEAR(s, 0.0, 1e-12) << n << " " << j;
        }
}

TEST(PsiGeneral, QuadratureMatchesSeries) {
    ParticleConfig y({0, -3, -4, -7});
    for (int i = 0; i < 4; ++i)
        for (long x = -8; x <= 10; ++x) {
            double a = psi_general<double>(4, i, x, y, 1.0);
            double b = psi_general<double>(4, i, x, y, 1.0, ContourSpec::quadrature(0.5, 256));
            EXPECT_NEAR(a, b, 1e-12) << i << " " << x;
        }
    EXPECT_THROW(psi_general<double>(4, 1, 0, y, 1.0, ContourSpec::quadrature(1.2, 64)), std::invalid_argument);
}

TEST(PsiGeneral, CompositionGeneral) {
    // sum_{z<x} Psi^{n+1}_{n+1-k}(z) = Psi^n_{n-k}(x); y_k is only defined for k >= 1
    ParticleConfig y({0, -3, -4, -7, -8, -12});
    for (int n = 1; n <= 5; ++n)
        for (int k = 1; k <= n; ++k)
            for (long x = -14; x <= 6; ++x) {
                int i = n + 1 - k;
                double s = 0;
                for (long z = y(k) - i; z < x; ++z) s += psi_general<double>(n + 1, i, z, y, 1.0);
                EXPECT_NEAR(s, psi_general<double>(n, n - k, x, y, 1.0), 1e-10) << n << " " << k << " " << x;
            }
}

TEST(PsiFlat, CompositionIncludingNegativeIndices) {
    FlatEmbedding emb{20};
    for (int n = 1; n <= 8; ++n)
        for (int k = -3; k <= n; ++k)
            for (long x = -10; x <= 8; ++x) {
                long i = n + 1 - k;
                long lo = -2L * (n + 1) + 2L * emb.N + i - 40;  // z' - i >= 0 comfortably covered
                double s = 0;
                for (long z = lo; z < x; ++z) s += psi_flat<double>(emb, n + 1, i, z, 1.0);
                EXPECT_NEAR(s, psi_flat<double>(emb, n, n - k, x, 1.0), 1e-10) << n << " " << k << " " << x;
            }
}

TEST(PsiFlat, VanishesForNegativeZ) {
    for (long k = 0; k <= 6; ++k)
        for (long z = -10; z < 0; ++z) EXPECT_EQ(psi_flat_z<double>(k, z, 2.0), 0.0);
}

TEST(PsiFlat, EqualsSignedF) {
    for (long k = 0; k <= 6; ++k)
        for (long z = 0; z <= 20; ++z) {
            double f = eval_F(-k, z - 2 * k, 1.5).value;
            EXPECT_NEAR(psi_flat_z<double>(k, z, 1.5), (k % 2 ? -f : f), 1e-14) << k << " " << z;
        }
}

TEST(PsiFlat, QuadratureMatchesSeries) {
    for (long k = -2; k <= 5; ++k)
        for (long z = -2; z <= 15; ++z)
            EXPECT_NEAR(psi_flat_z<double>(k, z, 1.0), psi_flat_z<double>(k, z, 1.0, ContourSpec::quadrature(0.5, 256)), 1e-12);
}

TEST(PhiFlat, IndexZeroIsOne) {
    for (long z = -10; z <= 30; ++z) EXPECT_NEAR(phi_flat_z<double>(0, z, 3.0), 1.0, 1e-15);
}

TEST(PhiFlat, QuadratureMatchesSeries) {
    for (long k = 0; k <= 6; ++k)
        for (long z = 0; z <= 15; ++z)
            EXPECT_NEAR(phi_flat_z<double>(k, z, 1.0), phi_flat_z<double>(k, z, 1.0, ContourSpec::quadrature(0.5, 512)), 1e-9);
}

TEST(PhiFlat, RejectsIndexAboveLevel) {
    EXPECT_THROW(phi_flat<double>(FlatEmbedding{5}, 3, 3, 0, 1.0), std::invalid_argument);
}

TEST(FlatFamilies, Biorthogonal) {
    const extended t(2);
    const int n = 10;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            extended s(0);
            for (long z = 0; z <= 2 * n + 60; ++z) s += psi_flat_z<extended>(i, z, t) * phi_flat_z<extended>(j, z, t);
            EXPECT_NEAR(to_double(s), i == j ? 1.0 : 0.0, 1e-12) << i << " " << j;
        }
}

TEST(BuildPhi, LevelOneIsConstant) {
    for (double t : {0.5, 3.0}) {
        auto phi = build_phi_general<extended>(1, ParticleConfig({4, 1, -6}), extended(t));
        for (long x = -10; x <= 10; ++x) EXPECT_NEAR(to_double(phi(0, x)), 1.0, 1e-30);
    }
}

TEST(BuildPhi, MatchesFlatClosedForm) {
    const int N = 8;
    ParticleConfig y = ParticleConfig::flat(N);
    FlatEmbedding emb{N};
    auto phi = build_phi_general<extended>(2 * N, y, extended(1.0));
    // levels 1..2N of the finite flat start; check the top level n = N and n = 2N
    for (int n : {N, 2 * N}) {
        auto ph = build_phi_general<extended>(n, y, extended(1.0));
        for (int k = 0; k < n; ++k)
            for (long x = -6; x <= 6; ++x) {
                double a = to_double(ph(k, x));
                double b = to_double(phi_flat<extended>(emb, n, k, x, extended(1.0)));
                EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::fabs(b))) << n << " " << k << " " << x;
            }
    }
    EXPECT_EQ(phi.level(), 2 * N);
}

TEST(BuildPhi, StepResidual) {
    auto y = ParticleConfig::step(3);
    auto phi = build_phi_general<extended>(3, y, extended(1));
    EXPECT_LT(to_double(biorthogonality_residual(phi, y, extended(1))), 1e-10);
}

TEST(BuildPhi, IrregularResidual) {
    ParticleConfig y({0, -3, -4, -7});
    for (double t : {1.0, 4.0}) {
        auto phi = build_phi_general<extended>(4, y, extended(t));
        EXPECT_LT(to_double(biorthogonality_residual(phi, y, extended(t))), 1e-10);
    }
}

TEST(BuildPhi, RejectsBadLevel) {
    EXPECT_THROW(build_phi_general<extended>(0, ParticleConfig({0}), extended(1)), std::invalid_argument);
    EXPECT_THROW(build_phi_general<extended>(2, ParticleConfig({0}), extended(1)), std::invalid_argument);
}

TEST(PhiTransfer, NeighbouringLevelsGiveIndicator) {
    for (long x1 = -5; x1 <= 5; ++x1)
        for (long x2 = -5; x2 <= 5; ++x2) EXPECT_EQ(phi_transfer(3, 4, x1, x2), x1 > x2 ? 1 : 0);
}

TEST(PhiTransfer, ZeroWhenLevelsDoNotIncrease) {
    for (int n1 = 1; n1 <= 4; ++n1)
        for (int n2 = 1; n2 <= n1; ++n2) EXPECT_EQ(phi_transfer(n1, n2, 7, -3), 0);
}

TEST(PhiTransfer, TwoStepConvolution) {
    for (long x = -6; x <= 6; ++x)
        for (long y = -6; y <= 6; ++y) {
            long count = 0;
            for (long z = -20; z <= 20; ++z) count += (x > z) && (z > y);
            EXPECT_EQ(phi_transfer(1, 3, x, y), count);
            if (x > y) {
                EXPECT_EQ(phi_transfer(1, 3, x, y), x - y - 1);
            }
        }
}

TEST(KernelGeneral, DiagonalAtStartNearOne) {
    ParticleConfig y({0, -2, -5});
    GeneralKernel k(y, 1e-9);
    for (int n = 1; n <= 3; ++n) EXPECT_NEAR(k({n, y(n)}, {n, y(n)}), 1.0, 1e-7);
}

TEST(KernelGeneral, TwoPointDeterminantsMatchBruteForce) {
    ParticleConfig y({0, -2});
    GeneralKernel k(y, 1.0);
    std::vector<std::vector<LatticePoint>> sets;
    for (long a = -1; a <= 2; ++a)
        for (long b = -2; b <= 1; ++b) sets.push_back({{1, a}, {2, b}});
    auto bf = brute_force_correlations<double>(y, 1.0, sets, 16);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        auto p = sets[i][0], q = sets[i][1];
        double det = k(p, p) * k(q, q) - k(p, q) * k(q, p);
        EXPECT_NEAR(bf[i], det, 1e-8) << p.x << " " << q.x;
    }
}

TEST(KernelGeneral, FlatFiniteIndependentOfSize) {
    // kernel label n of the alternating start is label N + n of the finite 2N start
    GeneralKernel k30(ParticleConfig::flat(30), 1.0), k40(ParticleConfig::flat(40), 1.0);
    for (int n1 : {-2, 0, 2})
        for (int n2 : {-1, 0, 1})
            for (long x1 : {-6L, 0L, 5L})
                for (long x2 : {-4L, 1L, 6L}) {
                    double a = k30({30 + n1, x1}, {30 + n2, x2});
                    double b = k40({40 + n1, x1}, {40 + n2, x2});
                    EXPECT_NEAR(a, b, 1e-9);
                    EXPECT_NEAR(a, kernel_flat({n1, x1}, {n2, x2}, 1.0), 1e-9);
                }
}

TEST(KernelFlat, EvaluationPathsAgreeOnGrid) {
    int count = 0;
    for (int n1 = -2; n1 <= 2; ++n1)
        for (int n2 = -2; n2 <= 2; n2 += 2)
            for (long x1 = -6; x1 <= 6; x1 += 3)
                for (long x2 = -6; x2 <= 6; x2 += 4) {
                    for (double t : {1.0, 3.0}) {
                        double a = kernel_flat({n1, x1}, {n2, x2}, t, ContourSpec::series());
                        double b = kernel_flat({n1, x1}, {n2, x2}, t, ContourSpec::quadrature(0.5, 512, 1e-6));
                        EXPECT_NEAR(a, b, 1e-10);
                        ++count;
                    }
                }
    EXPECT_GE(count, 200);
}

TEST(KernelFlat, NoPoleLeavesTransferOnly) {
    // pole order x1 + n1 + n2 + 1 <= 0
    EXPECT_EQ(flat_integral_series<double>(0, 5, 1.0).value, 0.0);
    EXPECT_EQ(flat_integral_circle(-3, 5, 1.0, 0.5, 64).value, 0.0);
    LatticePoint p1{1, -6}, p2{4, -9};
    EXPECT_EQ(kernel_flat(p1, p2, 2.0), -static_cast<double>(phi_transfer(1, 4, -6, -9)));
}

TEST(KernelFlat, SaddlePathMatchesSeries) {
    for (double t : {20.0, 60.0})
        for (long x1 : {-3L, 2L})
            for (long x2 : {-2L, 4L}) {
                int n1 = 2, n2 = 4;
                long p = x1 + n1 + n2 + 1, e = x2 + n1 + n2;
                double s = flat_integral_series<extended>(p, e, extended(t)).value.convert_to<double>();
                double q = flat_integral_saddle(p, e, t, 0.0L).value;
                EXPECT_NEAR(s, q, 1e-10 * std::max(1.0, std::fabs(s)));
            }
}

TEST(KernelFlat, BlockMatchesPointwise) {
    FlatSaddleKernel k(12.0);
    std::vector<long> xs1{-4, -1, 3}, xs2{-2, 0, 5};
    auto b = k.block(1, xs1, 3, xs2);
    for (std::size_t i = 0; i < xs1.size(); ++i)
        for (std::size_t j = 0; j < xs2.size(); ++j) {
            double direct = kernel_flat({1, xs1[i]}, {3, xs2[j]}, 12.0) * std::pow(2.0, xs2[j] - xs1[i]);
            EXPECT_NEAR(b(i, j), direct, 1e-10);
        }
}

TEST(Charlier, LowDegrees) {
    for (long x = -3; x <= 10; ++x) {
        EXPECT_EQ(charlier<double>(0, x, 2.5), 1.0);
        EXPECT_NEAR(charlier<double>(1, x, 2.5), 1.0 - x / 2.5, 1e-15);
    }
}

TEST(Charlier, Orthogonality) {
    for (double tt : {1.0, 4.0}) {
        extended t(tt);
        long zmax = static_cast<long>(40 + 10 * tt);
        for (int n = 0; n <= 12; ++n)
            for (int m = 0; m <= 12; ++m) {
                extended s(0);
                for (long z = 0; z <= zmax; ++z)
                    s += charlier<extended>(n, z, t) * charlier<extended>(m, z, t) * charlier_weight<extended>(z, t);
                extended expect(0);
                if (n == m) expect = boost::multiprecision::tgamma(extended(n + 1)) / boost::multiprecision::pow(t, n);
                EXPECT_NEAR(to_double(s), to_double(expect), 1e-10) << n << " " << m << " " << tt;
            }
    }
}

TEST(Charlier, Recurrence) {
    for (double t : {1.0, 4.0})
        for (int n = 0; n <= 12; ++n)
            for (long x = -5; x <= 25; ++x) {
                extended tt(t);
                extended lhs = extended(x) / tt * charlier<extended>(n, x - 1, tt);
                extended rhs = charlier<extended>(n, x, tt) - charlier<extended>(n + 1, x, tt);
                EXPECT_LT(to_double(abs_value(extended(lhs - rhs))), 1e-12);
            }
}

TEST(SMatrix, KnownEntries) {
    EXPECT_EQ(CharlierTable::s_inverse_entry(1, 2), 1);
    EXPECT_EQ(CharlierTable::s_inverse_entry(0, 0), 1);
    EXPECT_EQ(CharlierTable::s_entry(2, 3), -2);
    EXPECT_EQ(CharlierTable::s_entry(3, 3), 1);
    EXPECT_EQ(CharlierTable::s_entry(2, 5), 0);
    for (int i = 1; i < 12; ++i)
        for (int j = 0; j < i; ++j) EXPECT_EQ(CharlierTable::s_inverse_entry(i, j), 0);
}

TEST(SMatrix, ExactInverse) {
    for (int n : {1, 2, 5, 30, 64}) EXPECT_TRUE(s_matrix(n).product_is_identity()) << n;
    EXPECT_THROW(CharlierTable(65), std::invalid_argument);
}

TEST(PhiViaCharlier, IndexZeroIsOne) {
    for (long z = 0; z <= 20; ++z) EXPECT_NEAR(phi_via_charlier<double>(6, 0, z, 1.3), 1.0, 1e-15);
}

TEST(PhiViaCharlier, MatchesContourForm) {
    for (int N : {5, 15})
        for (int k = 0; k < N; ++k)
            for (long z = 0; z <= 30; z += 3) {
                double a = to_double(phi_via_charlier<extended>(N, k, z, extended(1.0)));
                double b = to_double(phi_flat_z<extended>(k, z, extended(1.0)));
                EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::fabs(b))) << N << " " << k << " " << z;
            }
}

TEST(PsiViaCharlier, MatchesContourForm) {
    for (long k = 0; k <= 10; ++k)
        for (long z = 0; z <= 30; ++z)
            EXPECT_NEAR(to_double(psi_via_charlier<extended>(k, z, extended(2.0))),
                        to_double(psi_flat_z<extended>(k, z, extended(2.0))), 1e-10);
}
