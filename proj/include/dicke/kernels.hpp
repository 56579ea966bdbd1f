#pragma once

// Matrix-free kernels on the spin x phonon product basis. Each parallel kernel
// has a serial twin with identical arithmetic; tests compare the pair and the
// benchmark target times them against each other.

#include "dicke/model.hpp"

#include <vector>

namespace dicke {

/// Matrix-free Dicke Hamiltonian at a fixed transverse field.
class DickeKernel {
public:
    DickeKernel(const ModelParams& params, double b_x);

    void set_field(double b_x);
    double field() const { return b_x_; }

    /// out = H * in (OpenMP over spin blocks).
    void apply(const QuantumState& in, QuantumState& out) const;
    /// Same as apply() on a single thread.
    void apply_serial(const QuantumState& in, QuantumState& out) const;

    /// Upper bound on the spectral radius (Gershgorin).
    double norm_bound() const;
    double expectation(const QuantumState& psi) const;

    std::size_t dim() const { return dim_; }
    const ModelParams& params() const { return params_; }

private:
    template <bool Parallel>
    void apply_impl(const QuantumState& in, QuantumState& out) const;

    ModelParams params_;
    std::size_t dim_;
    int nb_;
    double b_x_ = 0.0;
    std::vector<double> diag_;      // per flat index, field independent
    std::vector<double> coupling_;  // per spin index: -scale g m / sqrt N
    std::vector<double> sqrt_n_;    // sqrt(n), n = 0..n_max+1
    std::vector<double> ladder_;    // per spin index i: field_scale * <i+1|Sx|i>
};

/// rho_ij = sum_n psi(i,n) conj(psi(j,n)); phonons traced out.
Eigen::MatrixXcd reduced_spin_density(const QuantumState& psi, const Basis& basis);
Eigen::MatrixXcd reduced_spin_density_serial(const QuantumState& psi, const Basis& basis);

/// Parity operator: |n, m>_z -> (-1)^(n+N) |n, -m>_z. Equal to the conserved
/// exp[-i pi (n + Sx)] up to a global phase fixed so |0>|-N/2>_x is +1.
QuantumState apply_parity(const QuantumState& psi, const Basis& basis);

/// Projects onto the sector with parity eigenvalue `sign` (+1 or -1).
QuantumState project_parity(const QuantumState& psi, const Basis& basis, int sign);

/// Weight in each phonon number, spin traced out.
Eigen::VectorXd phonon_distribution(const QuantumState& psi, const Basis& basis);

} // namespace dicke
