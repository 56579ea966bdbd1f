#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dicke {

using cplx = std::complex<double>;
using QuantumState = Eigen::VectorXcd;
using OperatorMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// User-facing frequencies are "kHz over 2pi"; internally everything is rad/ms.
constexpr double khz_to_rad(double khz) { return kTwoPi * khz; }
constexpr double rad_to_khz(double w) { return w / kTwoPi; }
constexpr double per_second_to_per_ms(double rate) { return rate * 1e-3; }

/// How the collective operators entering the Hamiltonian are normalized.
/// HalfSpin: S = sum sigma/2, eigenvalues of Sz in {-N/2..N/2}.
/// FullPauli: S = sum sigma; the Hamiltonian sees 2x the half-spin operators.
/// Observables (expectations, QFI, distributions) are always reported in
/// half-spin units.
///
/// The default (FullPauli, transverse_factor 2) is the calibration used for
/// the bang-bang fidelity landscapes. HalfSpin with factor 1 is the textbook
/// spin-half Dicke model.
enum class SpinNormalization { HalfSpin, FullPauli };

struct ModelParams {
    int n_spins = 1;
    double g = 0.0;             // rad/ms
    double delta = -1.0;        // rad/ms, must be < 0
    double b_x0 = 0.0;          // rad/ms
    double b_z = 0.0;           // rad/ms
    double gamma_dephase = 0.0; // 1/ms
    double nbar = 0.0;
    int n_max = 20;
    SpinNormalization normalization = SpinNormalization::FullPauli;
    /// Extra multiplier on the transverse-field term only.
    double transverse_factor = 2.0;

    double spin() const { return 0.5 * n_spins; }
    int spin_dim() const { return n_spins + 1; }
    int phonon_dim() const { return n_max + 1; }
    std::size_t dim() const { return static_cast<std::size_t>(spin_dim()) * phonon_dim(); }

    /// Factor multiplying the half-spin operators inside the Hamiltonian.
    double operator_scale() const { return normalization == SpinNormalization::FullPauli ? 2.0 : 1.0; }
    /// Coefficient of b_x Sx (half-spin Sx) in the Hamiltonian.
    double field_scale() const { return operator_scale() * transverse_factor; }
    /// Effective coupling J = g^2/|delta|.
    double coupling_j() const;
    /// B_c = J/4.
    double critical_field() const { return 0.25 * coupling_j(); }
    /// Spin-conditioned coherent displacement of the cat components.
    double alpha() const;

    std::vector<std::string> validation_errors() const;
    void validate() const;
};

/// Smallest Fock cutoff covering the displacement +-alpha and the thermal tail.
int auto_n_max(int n_spins, double g, double delta, double nbar,
               SpinNormalization normalization = SpinNormalization::FullPauli);

/// Builds parameters from lab units (kHz/2pi, s^-1). n_max < 0 selects auto.
ModelParams params_from_lab_units(int n_spins, double g_khz, double delta_khz, double bx0_khz,
                                  double bz_khz = 0.0, double gamma_per_s = 0.0,
                                  double nbar = 0.0, int n_max = -1,
                                  SpinNormalization normalization = SpinNormalization::FullPauli,
                                  double transverse_factor = 2.0);

struct BasisIndex {
    double m; // Sz eigenvalue
    int n;    // phonon number
};

/// Product basis |m>_z (x) |n>, flat index (m + N/2)(n_max+1) + n.
class Basis {
public:
    Basis(int n_spins, int n_max) : n_spins_(n_spins), n_max_(n_max) {}
    explicit Basis(const ModelParams& p) : Basis(p.n_spins, p.n_max) {}

    std::size_t size() const { return static_cast<std::size_t>(n_spins_ + 1) * (n_max_ + 1); }
    std::size_t flat(int spin_index, int n) const {
        return static_cast<std::size_t>(spin_index) * (n_max_ + 1) + n;
    }
    std::size_t flat(BasisIndex b) const;
    BasisIndex index(std::size_t flat) const;
    double m_of(int spin_index) const { return spin_index - 0.5 * n_spins_; }

    int n_spins() const { return n_spins_; }
    int n_max() const { return n_max_; }

private:
    int n_spins_;
    int n_max_;
};

struct SpinOperators {
    OperatorMatrix sx, sy, sz;
};

struct BosonOperators {
    OperatorMatrix a, a_dag, n;
};

/// Dense spin-factor matrices, (N+1)x(N+1), half-spin units, ordered m ascending.
struct SpinFactor {
    Eigen::MatrixXcd sx, sy, sz;
};

SpinFactor spin_factor_ops(int n_spins);

/// Collective spin operators on the full product space (half-spin units).
SpinOperators build_collective_spin_ops(const ModelParams& params);
BosonOperators build_boson_ops(const ModelParams& params);

/// H = -delta a^dag a - (s g/sqrt N)(a^dag + a) Sz + s f b_x Sx + s b_z Sz, with s
/// the operator scale of the chosen normalization and f the transverse factor.
OperatorMatrix build_hamiltonian(const ModelParams& params, double b_x);

/// max |H - H^dag| over entries.
double max_hermiticity_defect(const OperatorMatrix& h);

} // namespace dicke
