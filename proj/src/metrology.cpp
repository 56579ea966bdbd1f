#include "dicke/metrology.hpp"
#include "dicke/errors.hpp"
#include "dicke/kernels.hpp"
#include "dicke/spectral.hpp"

#include <cmath>
#include <sstream>

namespace dicke {

double SpinDistribution::abs_mean() const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) acc += std::abs(m_of(k)) * probs[k];
    return acc;
}

SpinMoments spin_moments(const Eigen::MatrixXcd& rho_spin) {
    const int n_spins = static_cast<int>(rho_spin.rows()) - 1;
    const SpinFactor f = spin_factor_ops(n_spins);
    const Eigen::MatrixXcd* ops[3] = {&f.sx, &f.sy, &f.sz};
    Eigen::MatrixXcd rs[3];
    SpinMoments out;
    for (int i = 0; i < 3; ++i) {
        rs[i] = rho_spin * (*ops[i]);
        out.mean[i] = rs[i].trace().real();
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            // Re Tr(rho Si Sj) = 1/2 <SiSj + SjSi> for Hermitian rho
            const double second = (rs[i].cwiseProduct(ops[j]->transpose())).sum().real();
            out.covariance(i, j) = second - out.mean[i] * out.mean[j];
            out.covariance(j, i) = out.covariance(i, j);
        }
    }
    return out;
}

double fidelity_to_cat(const QuantumState& psi, const QuantumState& cat) {
    return std::norm(cat.dot(psi));
}

double fidelity_to_cat(const QuantumState& psi, const ModelParams& params) {
    return fidelity_to_cat(psi, cat_state(params));
}

namespace {

double top_variance(const SpinMoments& mom) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(mom.covariance, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[2];
}

} // namespace

double qfi(const QuantumState& psi, const Basis& basis) {
    return 4.0 * top_variance(spin_moments(reduced_spin_density(psi, basis)));
}

double qfi(const Eigen::MatrixXcd& rho, const Basis& basis) {
    const double purity = (rho * rho).trace().real();
    if (std::abs(purity - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "qfi: variance formula needs a pure state, got purity " << purity;
        throw ValidationError({os.str()});
    }
    const int ns = basis.n_spins() + 1;
    const int nb = basis.n_max() + 1;
    Eigen::MatrixXcd rs = Eigen::MatrixXcd::Zero(ns, ns);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
            for (int n = 0; n < nb; ++n) rs(i, j) += rho(basis.flat(i, n), basis.flat(j, n));
    return 4.0 * top_variance(spin_moments(rs));
}

namespace {

// Normalized truncated |+alpha>|N/2> and |-alpha>|-N/2> amplitudes.
struct CatComponents {
    Eigen::VectorXd plus, minus;
};

CatComponents cat_components(const ModelParams& params) {
    CatComponents c;
    c.plus = coherent_amplitudes(params.alpha(), params.n_max);
    c.plus.normalize();
    c.minus = c.plus;
    for (int n = 1; n <= params.n_max; n += 2) c.minus[n] = -c.minus[n];
    return c;
}

cplx project_up(const QuantumState& psi, const Basis& basis, const Eigen::VectorXd& amp) {
    cplx acc = 0.0;
    for (int n = 0; n <= basis.n_max(); ++n) acc += amp[n] * psi[basis.flat(basis.n_spins(), n)];
    return acc;
}

cplx project_down(const QuantumState& psi, const Basis& basis, const Eigen::VectorXd& amp) {
    cplx acc = 0.0;
    for (int n = 0; n <= basis.n_max(); ++n) acc += amp[n] * psi[basis.flat(0, n)];
    return acc;
}

} // namespace

CoherenceRecord coherence_extremal(const QuantumState& psi, const ModelParams& params) {
    const Basis basis(params);
    const auto c = cat_components(params);
    return {project_up(psi, basis, c.plus) * std::conj(project_down(psi, basis, c.minus)), 0.0};
}

CoherenceRecord coherence_extremal(const MixedState& rho, const ModelParams& params) {
    if (rho.weights.size() != rho.states.size())
        throw ValidationError({"mixture weights and states differ in length"});
    CoherenceRecord out;
    for (std::size_t k = 0; k < rho.states.size(); ++k)
        out.value += rho.weights[k] * coherence_extremal(rho.states[k], params).value;
    return out;
}

CoherenceRecord coherence_extremal(const Eigen::MatrixXcd& rho, const ModelParams& params) {
    const Basis basis(params);
    const auto c = cat_components(params);
    QuantumState up = QuantumState::Zero(static_cast<Eigen::Index>(basis.size()));
    QuantumState down = up;
    for (int n = 0; n <= params.n_max; ++n) {
        up[basis.flat(params.n_spins, n)] = c.plus[n];
        down[basis.flat(0, n)] = c.minus[n];
    }
    return {up.dot(rho * down), 0.0};
}

namespace {

double dephasing_factor(double dm, double gamma, double t, DephasingLaw law) {
    const double k = law == DephasingLaw::Linear ? std::abs(dm) : dm * dm;
    return std::exp(-k * gamma * t);
}

} // namespace

CoherenceRecord dephase_coherence(const CoherenceRecord& c, int n_spins, double gamma, double t,
                                  DephasingLaw law) {
    return {c.value * dephasing_factor(double(n_spins), gamma, t, law), c.gamma_applied + gamma};
}

Eigen::MatrixXcd apply_collective_dephasing(const Eigen::MatrixXcd& rho_spin, double gamma, double t,
                                            DephasingLaw law, double b_x) {
    if (b_x != 0.0) warn("collective dephasing model applied while B^x != 0 (valid only at B^x = 0)");
    Eigen::MatrixXcd out = rho_spin;
    const Eigen::Index d = rho_spin.rows();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (i != j) out(i, j) *= dephasing_factor(double(i - j), gamma, t, law);
    return out;
}

double sx_depolarization(double sx_value, double gamma, double t) { return sx_value * std::exp(-gamma * t); }

SpinDistribution spin_distribution(const Eigen::MatrixXcd& rho_spin, Axis axis) {
    SpinDistribution dist;
    dist.axis = axis;
    const Eigen::Index d = rho_spin.rows();
    if (axis == Axis::Z) {
        dist.probs = rho_spin.diagonal().real();
        return dist;
    }
    const SpinFactor f = spin_factor_ops(static_cast<int>(d) - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(axis == Axis::X ? f.sx : f.sy);
    dist.probs.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto v = es.eigenvectors().col(k);
        dist.probs[k] = v.dot(rho_spin * v).real();
    }
    return dist;
}

SpinDistribution spin_distribution(const QuantumState& psi, const Basis& basis, Axis axis) {
    return spin_distribution(reduced_spin_density(psi, basis), axis);
}

} // namespace dicke
