#include "dicke/kernels.hpp"
#include "dicke/spectral.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>
#include <omp.h>

using namespace dicke;

TEST(Kernel, MatchesSparseHamiltonian) {
    for (auto norm : {SpinNormalization::HalfSpin, SpinNormalization::FullPauli}) {
        auto p = fixtures::params(7, -1.0, 40, norm);
        p.b_z = 0.4;
        const DickeKernel k(p, 3.3);
        const auto psi = fixtures::random_state(p.dim(), 1);
        QuantumState out;
        k.apply(psi, out);
        const QuantumState ref = build_hamiltonian(p, 3.3) * psi;
        EXPECT_LT((out - ref).norm(), 1e-12 * ref.norm());
    }
}

TEST(Kernel, ParallelMatchesSerialAboveThreshold) {
    const auto p = fixtures::params(40, -1.0, 200); // dim > 4096 triggers the parallel path
    ASSERT_GT(p.dim(), 4096u);
    const DickeKernel k(p, 5.0);
    const auto psi = fixtures::random_state(p.dim(), 2);
    QuantumState a, b;
    k.apply(psi, a);
    k.apply_serial(psi, b);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Kernel, NormBoundDominatesSpectrum) {
    const auto p = fixtures::params(4, -4.0, 12);
    const DickeKernel k(p, 9.0);
    const auto ev = oracle::hamiltonian(p, 9.0).selfadjointView<Eigen::Lower>().eigenvalues();
    EXPECT_GE(k.norm_bound(), ev.cwiseAbs().maxCoeff());
}

TEST(Kernel, Expectation) {
    const auto p = fixtures::params(3, -4.0, 10);
    const DickeKernel k(p, 1.2);
    const auto psi = fixtures::random_state(p.dim(), 3);
    const double ref = (psi.adjoint() * oracle::hamiltonian(p, 1.2) * psi)(0).real();
    EXPECT_NEAR(k.expectation(psi), ref, 1e-10 * std::abs(ref));
}

TEST(ReducedDensity, ParallelSerialAndTrace) {
    const auto p = fixtures::params(30, -1.0, 150);
    const Basis basis(p);
    const auto psi = fixtures::random_state(p.dim(), 4);
    const auto a = reduced_spin_density(psi, basis);
    const auto b = reduced_spin_density_serial(psi, basis);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(a.trace().real(), 1.0, 1e-12);
    EXPECT_LT((a - a.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Parity, InvolutionAndSymmetry) {
    const auto p = fixtures::params(5, -1.0, 20);
    const Basis basis(p);
    const auto psi = fixtures::random_state(p.dim(), 5);
    EXPECT_LT((apply_parity(apply_parity(psi, basis), basis) - psi).norm(), 1e-14);

    // [H, Pi] = 0 for b_z = 0
    const auto h = build_hamiltonian(p, 2.5);
    const QuantumState lhs = h * apply_parity(psi, basis);
    const QuantumState rhs = apply_parity(h * psi, basis);
    EXPECT_LT((lhs - rhs).norm(), 1e-10);

    const auto even = project_parity(psi, basis, +1);
    const auto odd = project_parity(psi, basis, -1);
    EXPECT_LT((even + odd - psi).norm(), 1e-14);
    EXPECT_NEAR(std::abs(even.dot(odd)), 0.0, 1e-14);
    EXPECT_NEAR(parity_of(even.normalized(), basis).real(), 1.0, 1e-12);
    EXPECT_NEAR(parity_of(odd.normalized(), basis).real(), -1.0, 1e-12);
}

TEST(Parity, PhononDistributionSumsToOne) {
    const auto p = fixtures::params(3, -1.0, 15);
    const auto pn = phonon_distribution(fixtures::random_state(p.dim(), 6), Basis(p));
    EXPECT_EQ(pn.size(), 16);
    EXPECT_NEAR(pn.sum(), 1.0, 1e-12);
    EXPECT_GE(pn.minCoeff(), 0.0);
}
