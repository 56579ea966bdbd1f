#pragma once

#include "dicke/model.hpp"

#include <vector>

namespace dicke {

enum class Axis { X, Y, Z };

/// P(m) for m = -N/2..N/2 along one collective axis, phonons traced out.
struct SpinDistribution {
    Axis axis = Axis::Z;
    Eigen::VectorXd probs;

    double m_of(Eigen::Index k) const { return k - 0.5 * (probs.size() - 1); }
    /// sum_m |m| P(m)
    double abs_mean() const;
};

/// First and symmetrized second moments of (Sx, Sy, Sz).
struct SpinMoments {
    Eigen::Vector3d mean;
    Eigen::Matrix3d covariance; // 1/2<SiSj + SjSi> - <Si><Sj>
};

/// An incoherent mixture of pure states.
struct MixedState {
    std::vector<double> weights;
    std::vector<QuantumState> states;
};

struct CoherenceRecord {
    cplx value{0.0, 0.0};      // <N/2|<alpha| rho |-alpha>|-N/2>
    double gamma_applied = 0.0;
};

enum class DephasingLaw {
    Linear,  // exp(-|m_i - m_j| Gamma t)
    Squared, // exp(-(m_i - m_j)^2 Gamma t)
};

SpinMoments spin_moments(const Eigen::MatrixXcd& rho_spin);

double fidelity_to_cat(const QuantumState& psi, const QuantumState& cat);
double fidelity_to_cat(const QuantumState& psi, const ModelParams& params);

/// 4 * largest eigenvalue of the spin covariance matrix. Pure states only.
double qfi(const QuantumState& psi, const Basis& basis);
/// Density-matrix overload; throws ValidationError unless Tr(rho^2) = 1.
double qfi(const Eigen::MatrixXcd& rho, const Basis& basis);

CoherenceRecord coherence_extremal(const QuantumState& psi, const ModelParams& params);
CoherenceRecord coherence_extremal(const MixedState& rho, const ModelParams& params);
CoherenceRecord coherence_extremal(const Eigen::MatrixXcd& rho, const ModelParams& params);

/// Multiplies the cat coherence by the collective-dephasing factor for a spin
/// separation of N after time t at B^x = 0.
CoherenceRecord dephase_coherence(const CoherenceRecord& c, int n_spins, double gamma, double t,
                                  DephasingLaw law = DephasingLaw::Linear);

/// Damps Sz-basis coherences of a reduced spin density matrix. Valid for
/// B^x = 0 only; passing b_x != 0 emits a warning.
Eigen::MatrixXcd apply_collective_dephasing(const Eigen::MatrixXcd& rho_spin, double gamma, double t,
                                            DephasingLaw law = DephasingLaw::Linear, double b_x = 0.0);

/// <Sx> e^{-Gamma t}; reporting-layer correction only.
double sx_depolarization(double sx_value, double gamma, double t);

SpinDistribution spin_distribution(const Eigen::MatrixXcd& rho_spin, Axis axis);
SpinDistribution spin_distribution(const QuantumState& psi, const Basis& basis, Axis axis);

} // namespace dicke
