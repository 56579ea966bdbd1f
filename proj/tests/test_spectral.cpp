#include "dicke/errors.hpp"
#include "dicke/spectral.hpp"
#include "dicke/metrology.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>
#include <omp.h>

using namespace dicke;

namespace {

// e^{-i pi N/2} exp(-i pi (n + Sx)), normalized so |0>|-N/2>_x has eigenvalue +1.
Eigen::MatrixXcd parity_oracle(int n_spins, int n_max) {
    const auto s = oracle::spin_matrices(n_spins);
    Eigen::MatrixXcd ph = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) ph(n, n) = n % 2 ? -1.0 : 1.0;
    const cplx norm = std::exp(cplx(0, -M_PI * n_spins / 2.0));
    return norm * oracle::kron(oracle::expm_hermitian(s.x, M_PI), ph);
}

} // namespace

TEST(States, CoherentAmplitudesMatchClosedForm) {
    for (double a : {0.0, 0.7, -1.3, 5.0}) {
        const auto c = coherent_amplitudes(a, 80);
        for (int n = 0; n <= 80; ++n) EXPECT_NEAR(c[n], oracle::coherent(a, n), 1e-13) << a << " " << n;
        EXPECT_NEAR(c.squaredNorm(), 1.0, 1e-12);
    }
}

TEST(States, XPolarizedSpinIsLowestSxEigenvector) {
    for (int n : {1, 4, 7, 30}) {
        const auto v = x_polarized_spin(n);
        const Eigen::VectorXcd vc = v.cast<cplx>();
        const auto s = oracle::spin_matrices(n);
        EXPECT_NEAR(v.norm(), 1.0, 1e-13);
        EXPECT_LT((s.x * vc + 0.5 * n * vc).norm(), 1e-12) << n;
    }
}

TEST(States, CatIsNormalizedAndEven) {
    for (int n : {3, 4, 10}) {
        const auto p = fixtures::params(n, -4.0);
        const auto cat = cat_state(p);
        EXPECT_NEAR(cat.norm(), 1.0, 1e-12);
        EXPECT_NEAR(parity_of(cat, Basis(p)).real(), 1.0, 1e-9) << n;
    }
}

TEST(Parity, MatchesMatrixExponentialOracle) {
    for (int n : {3, 4}) {
        const auto p = fixtures::params(n, -4.0, 8);
        const Basis basis(p);
        const auto pi = parity_oracle(n, 8);
        const auto psi = fixtures::random_state(p.dim(), 10 + n);
        EXPECT_LT((apply_parity(psi, basis) - pi * psi).norm(), 1e-12);
        const auto cat = cat_state(p);
        EXPECT_NEAR((cat.adjoint() * pi * cat)(0).real(), 1.0, 1e-9);
        const auto x0 = x_polarized_state(p);
        EXPECT_NEAR(parity_of(x0, basis).real(), 1.0, 1e-12);
        EXPECT_NEAR(parity_of(x_polarized_state(p, 1), basis).real(), -1.0, 1e-12);
    }
}

TEST(Parity, SectorBasisIsOrthonormalPartition) {
    const Basis basis(5, 6);
    const Eigen::MatrixXd e = Eigen::MatrixXd(sector_basis(basis, +1));
    const Eigen::MatrixXd o = Eigen::MatrixXd(sector_basis(basis, -1));
    EXPECT_EQ(e.cols() + o.cols(), static_cast<Eigen::Index>(basis.size()));
    EXPECT_LT((e.transpose() * e - Eigen::MatrixXd::Identity(e.cols(), e.cols())).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((e.transpose() * o).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Eigensolver, LanczosMatchesDenseLowestFive) {
    for (int n : {2, 5, 6}) {
        const auto p = fixtures::params(n, -4.0, 8);
        for (double b : {0.0, 0.3 * p.coupling_j(), 3.0 * p.coupling_j()}) {
            const DickeKernel h(p, b);
            EigensolverOptions no_fallback;
            no_fallback.dense_fallback = false;
            for (int sign : {+1, -1, 0}) {
                const auto ev = sign == 0 ? dense_spectrum(p, b) : dense_sector_spectrum(p, b, sign);
                const auto pairs = lowest_in_sector(h, sign, 5, no_fallback);
                ASSERT_EQ(pairs.size(), 5u);
                for (int k = 0; k < 5; ++k)
                    EXPECT_NEAR(pairs[k].energy, ev[k], 1e-9 * std::max(1.0, std::abs(ev[k])))
                        << "N=" << n << " b=" << b << " sign=" << sign << " k=" << k;
            }
        }
    }
}

TEST(Eigensolver, ShiftInvertMatchesDenseLowestFive) {
    EigensolverOptions si;
    si.method = EigenMethod::ShiftInvert;
    for (int n : {1, 4, 6}) {
        auto p = fixtures::params(n, -4.0, 8);
        for (double bz : {0.0, 0.05}) {
            p.b_z = bz * p.coupling_j();
            for (double b : {0.0, 0.3 * p.coupling_j(), 3.0 * p.coupling_j()}) {
                const DickeKernel h(p, b);
                for (int sign : {+1, -1, 0}) {
                    if (bz != 0.0 && sign != 0) continue;
                    const auto ev = sign == 0 ? dense_spectrum(p, b) : dense_sector_spectrum(p, b, sign);
                    const auto pairs = lowest_in_sector(h, sign, 5, si);
                    ASSERT_EQ(pairs.size(), 5u);
                    for (int k = 0; k < 5; ++k) {
                        EXPECT_NEAR(pairs[k].energy, ev[k], 1e-9 * std::max(1.0, std::abs(ev[k])))
                            << "N=" << n << " b=" << b << " sign=" << sign << " k=" << k;
                        EXPECT_NEAR(pairs[k].state.norm(), 1.0, 1e-12);
                    }
                }
            }
        }
    }
}

TEST(Eigensolver, ShiftInvertAgreesWithLanczosOnLargerSectors) {
    const auto p = fixtures::params(30, -1.0);
    EigensolverOptions lz, si;
    lz.method = EigenMethod::Lanczos;
    si.method = EigenMethod::ShiftInvert;
    const Basis basis(p);
    for (double b : {0.0, 0.26 * p.coupling_j(), p.coupling_j()}) {
        const DickeKernel h(p, b);
        const auto a = lowest_in_sector(h, +1, 2, lz);
        const auto c = lowest_in_sector(h, +1, 2, si);
        for (int k = 0; k < 2; ++k) {
            EXPECT_NEAR(a[k].energy, c[k].energy, 1e-9 * std::abs(a[k].energy)) << "b=" << b << " k=" << k;
            EXPECT_NEAR(std::abs(a[k].state.dot(c[k].state)), 1.0, 1e-8);
            EXPECT_NEAR(parity_of(c[k].state, basis).real(), 1.0, 1e-12);
        }
    }
}

TEST(Eigensolver, DenseOracleAgreesWithKronecker) {
    const auto p = fixtures::params(4, -4.0, 8);
    const auto ev = dense_spectrum(p, 1.1);
    const auto ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(oracle::hamiltonian(p, 1.1)).eigenvalues();
    EXPECT_LT((ev - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GroundState, StrongFieldIsXPolarizedVacuum) {
    const auto p = fixtures::params(10, -1.0);
    const auto gs = ground_state(p, khz_to_rad(50.0));
    EXPECT_GE(std::norm(x_polarized_state(p).dot(gs.state)), 0.99);
    EXPECT_EQ(gs.parity, +1);
}

TEST(GroundState, ZeroFieldIsEvenCat) {
    for (auto norm : {SpinNormalization::HalfSpin, SpinNormalization::FullPauli}) {
        const auto p = fixtures::params(10, -1.0, -1, norm);
        const double s = p.operator_scale();
        const double expect = -s * s * p.g * p.g * 10 / (4 * std::abs(p.delta));
        const auto gs = ground_state(p, 0.0);
        EXPECT_NEAR(gs.energy, expect, 1e-8 * std::abs(expect));
        EXPECT_EQ(gs.parity, +1);
        EXPECT_GE(fidelity_to_cat(gs.state, p), 1.0 - 1e-6);
        EXPECT_NEAR(gs.state.norm(), 1.0, 1e-12);
    }
}

TEST(Gap, MatchesDenseSectorSpectrum) {
    const auto p = fixtures::params(6, -4.0, 8);
    for (double b : {0.1, 0.5, 1.0, 2.0}) {
        const double bx = b * p.coupling_j();
        const auto ev = dense_sector_spectrum(p, bx, ground_state(p, bx).parity);
        EXPECT_NEAR(gap_in_sector(p, bx), ev[1] - ev[0], 1e-8);
        EXPECT_GT(gap_in_sector(p, bx), 0.0);
    }
}

TEST(Gap, RefusesLongitudinalField) {
    auto p = fixtures::params(4, -4.0);
    p.b_z = 0.1;
    EXPECT_THROW(gap_in_sector(p, 1.0), ValidationError);
}

TEST(Gap, ScanIsIndependentOfThreadCount) {
    const auto p = fixtures::params(8, -4.0);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = gap_scan(p, p.b_x0, 24);
    omp_set_num_threads(4);
    const auto b = gap_scan(p, p.b_x0, 24);
    omp_set_num_threads(saved);
    ASSERT_EQ(a.b_x.size(), 24u);
    EXPECT_EQ(a.b_x.front(), 0.0);
    EXPECT_DOUBLE_EQ(a.b_x.back(), p.b_x0);
    EXPECT_EQ(a.gap, b.gap);
    EXPECT_EQ(a.ground_energy, b.ground_energy);
}

TEST(Gap, MinimumRefinesCoarseScan) {
    const auto p = fixtures::params(8, -4.0);
    const auto scan = gap_scan(p, 2 * p.coupling_j(), 81);
    const double coarse = *std::min_element(scan.gap.begin(), scan.gap.end());
    const auto m = find_gap_minimum(p, 0.0, 2 * p.coupling_j());
    EXPECT_LE(m.gap, coarse + 1e-9);
    EXPECT_NEAR(gap_in_sector(p, m.b_x), m.gap, 1e-9);
}

TEST(Spectrum, SliceLabelsParity) {
    const auto p = fixtures::params(4, -4.0, 8);
    const double b = 0.7 * p.coupling_j();
    const auto slice = spectrum_slice(p, b, 6);
    ASSERT_EQ(slice.energies.size(), 6u);
    const auto all = dense_spectrum(p, b);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(slice.energies[k], all[k], 1e-9);
    const auto even = dense_sector_spectrum(p, b, +1);
    for (int k = 0; k < 6; ++k) {
        const bool in_even = (even.array() - slice.energies[k]).abs().minCoeff() < 1e-8;
        EXPECT_EQ(slice.parities[k] == Parity::Even, in_even) << k;
    }
}
