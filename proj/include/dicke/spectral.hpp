#pragma once

#include "dicke/kernels.hpp"
#include "dicke/model.hpp"

#include <vector>

namespace dicke {

// ---- reference states -------------------------------------------------------

/// <n|alpha> for n = 0..n_max, real alpha, by upward recurrence.
Eigen::VectorXd coherent_amplitudes(double alpha, int n_max);

/// Spin-factor amplitudes of |-N/2>_x in the Sz basis (m ascending).
Eigen::VectorXd x_polarized_spin(int n_spins);

/// spin (x) phonon product state.
QuantumState product_state(const Eigen::VectorXcd& spin, const Eigen::VectorXcd& phonon);

/// |n>_ph (x) |-N/2>_x, the strong-field ground state when n = 0.
QuantumState x_polarized_state(const ModelParams& params, int phonon_number = 0);

/// Normalized spin-phonon cat (|alpha>|N/2> + (-1)^N |-alpha>|-N/2>)/sqrt 2.
/// The relative sign places it in the parity sector of |0>|-N/2>_x for every N.
QuantumState cat_state(const ModelParams& params);

// ---- parity -----------------------------------------------------------------

/// <psi| Pi |psi>; +1 for |0>|-N/2>_x.
cplx parity_of(const QuantumState& psi, const Basis& basis);

/// Orthonormal basis (columns) of one parity sector.
Eigen::SparseMatrix<double> sector_basis(const Basis& basis, int sign);

// ---- eigensolvers -----------------------------------------------------------

struct Eigenpair {
    double energy = 0.0;
    QuantumState state;
};

enum class EigenMethod {
    Auto,        // ShiftInvert once the sector dimension reaches kShiftInvertDim
    Lanczos,     // matrix-free, full reorthogonalization
    ShiftInvert, // Lanczos on (H - sigma)^-1 via sparse LDL^T, sigma below the spectrum
};

struct EigensolverOptions {
    double residual_tol = 1e-10; // relative to max(1, |E|)
    int max_iterations = 800;
    bool dense_fallback = true;  // below kDenseFallbackDim
    EigenMethod method = EigenMethod::Auto;
};

inline constexpr std::size_t kDenseFallbackDim = 2000;
inline constexpr std::size_t kShiftInvertDim = 4000;

/// Lowest `count` eigenpairs of H restricted to the parity sector `sign`
/// (+1 or -1; 0 means no restriction). With sign 0 and b_z = 0 both sectors
/// are solved and merged.
///
/// Plain Lanczos re-projects every Krylov vector into the sector. Shift-invert
/// works in sector coordinates; the shift is lowered until the LDL^T inertia
/// shows no eigenvalue beneath it, and every returned pair passes an explicit
/// residual check against H.
std::vector<Eigenpair> lowest_in_sector(const DickeKernel& h, int sign, int count,
                                        const EigensolverOptions& opts = {});

/// Dense oracle: all eigenvalues of the sector block, ascending.
Eigen::VectorXd dense_sector_spectrum(const ModelParams& params, double b_x, int sign);
/// Dense oracle on the full space, ascending.
Eigen::VectorXd dense_spectrum(const ModelParams& params, double b_x);

struct GroundState {
    double energy = 0.0;
    QuantumState state;
    int parity = +1;
};

/// Lowest eigenpair. A degenerate manifold (e.g. b_x = b_z = 0) resolves to
/// the +1 sector.
GroundState ground_state(const ModelParams& params, double b_x, const EigensolverOptions& opts = {});

/// Gap to the first excited state in the ground state's parity sector.
double gap_in_sector(const ModelParams& params, double b_x, const EigensolverOptions& opts = {});

enum class Parity { Even, Odd };

struct SpectrumSlice {
    double b_x = 0.0;
    std::vector<double> energies;
    std::vector<Parity> parities;
    double gap_same_sector = 0.0;
};

SpectrumSlice spectrum_slice(const ModelParams& params, double b_x, int count,
                             const EigensolverOptions& opts = {});

struct GapScan {
    std::vector<double> b_x;
    std::vector<double> gap;
    std::vector<double> ground_energy;
    std::vector<int> parity;
};

/// Same-sector gap sampled uniformly on [0, b_max] (inclusive). Samples are
/// computed in parallel and stored by index.
GapScan gap_scan(const ModelParams& params, double b_max, int samples = 400,
                 const EigensolverOptions& opts = {});

struct GapMinimum {
    double b_x = 0.0;
    double gap = 0.0;
};

/// Coarse scan on [lo, hi] followed by golden-section refinement.
GapMinimum find_gap_minimum(const ModelParams& params, double lo, double hi, int coarse = 40,
                            double tol = 1e-6);

} // namespace dicke
