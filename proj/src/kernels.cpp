#include "dicke/kernels.hpp"

#include <cmath>

namespace dicke {

DickeKernel::DickeKernel(const ModelParams& params, double b_x)
    : params_(params), dim_(params.dim()), nb_(params.phonon_dim()), b_x_(b_x) {
    params_.validate();
    const Basis basis(params_);
    const double scale = params_.operator_scale();
    const double s = params_.spin();
    const double c = scale * params_.g / std::sqrt(double(params_.n_spins));
    diag_.resize(dim_);
    coupling_.resize(params_.spin_dim());
    ladder_.assign(params_.spin_dim(), 0.0);
    sqrt_n_.resize(nb_ + 1);
    for (int n = 0; n <= nb_; ++n) sqrt_n_[n] = std::sqrt(double(n));
    for (int i = 0; i < params_.spin_dim(); ++i) {
        const double m = basis.m_of(i);
        coupling_[i] = -c * m;
        if (i + 1 < params_.spin_dim())
            ladder_[i] = params_.field_scale() * 0.5 * std::sqrt(s * (s + 1.0) - m * (m + 1.0));
        for (int n = 0; n < nb_; ++n)
            diag_[basis.flat(i, n)] = -params_.delta * n + scale * params_.b_z * m;
    }
}

void DickeKernel::set_field(double b_x) { b_x_ = b_x; }

template <bool Parallel>
void DickeKernel::apply_impl(const QuantumState& in, QuantumState& out) const {
    out.resize(static_cast<Eigen::Index>(dim_));
    const int ns = params_.spin_dim();
    const int nb = nb_;
    const cplx* x = in.data();
    cplx* y = out.data();
    const double bx = b_x_;

#pragma omp parallel for schedule(static) if (Parallel && dim_ > 4096)
    for (int i = 0; i < ns; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * nb;
        const double ci = coupling_[i];
        const double up = i + 1 < ns ? bx * ladder_[i] : 0.0;
        const double dn = i > 0 ? bx * ladder_[i - 1] : 0.0;
        for (int n = 0; n < nb; ++n) {
            const std::size_t k = base + n;
            cplx acc = diag_[k] * x[k];
            if (n > 0) acc += ci * sqrt_n_[n] * x[k - 1];
            if (n + 1 < nb) acc += ci * sqrt_n_[n + 1] * x[k + 1];
            if (up != 0.0) acc += up * x[k + nb];
            if (dn != 0.0) acc += dn * x[k - nb];
            y[k] = acc;
        }
    }
}

void DickeKernel::apply(const QuantumState& in, QuantumState& out) const { apply_impl<true>(in, out); }

void DickeKernel::apply_serial(const QuantumState& in, QuantumState& out) const {
    apply_impl<false>(in, out);
}

double DickeKernel::norm_bound() const {
    const int ns = params_.spin_dim();
    double worst = 0.0;
    for (int i = 0; i < ns; ++i) {
        const double up = i + 1 < ns ? std::abs(b_x_ * ladder_[i]) : 0.0;
        const double dn = i > 0 ? std::abs(b_x_ * ladder_[i - 1]) : 0.0;
        for (int n = 0; n < nb_; ++n) {
            const std::size_t k = static_cast<std::size_t>(i) * nb_ + n;
            double row = std::abs(diag_[k]) + up + dn;
            if (n > 0) row += std::abs(coupling_[i]) * sqrt_n_[n];
            if (n + 1 < nb_) row += std::abs(coupling_[i]) * sqrt_n_[n + 1];
            worst = std::max(worst, row);
        }
    }
    return worst;
}

double DickeKernel::expectation(const QuantumState& psi) const {
    QuantumState hpsi;
    apply(psi, hpsi);
    return psi.dot(hpsi).real();
}

namespace {

template <bool Parallel>
Eigen::MatrixXcd reduced_spin_density_impl(const QuantumState& psi, const Basis& basis) {
    const int ns = basis.n_spins() + 1;
    const int nb = basis.n_max() + 1;
    Eigen::MatrixXcd rho(ns, ns);
    const cplx* x = psi.data();
#pragma omp parallel for schedule(dynamic) if (Parallel && ns * ns * nb > 200000)
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j <= i; ++j) {
            cplx acc = 0.0;
            const cplx* a = x + static_cast<std::size_t>(i) * nb;
            const cplx* b = x + static_cast<std::size_t>(j) * nb;
            for (int n = 0; n < nb; ++n) acc += a[n] * std::conj(b[n]);
            rho(i, j) = acc;
            rho(j, i) = std::conj(acc);
        }
    }
    return rho;
}

} // namespace

Eigen::MatrixXcd reduced_spin_density(const QuantumState& psi, const Basis& basis) {
    return reduced_spin_density_impl<true>(psi, basis);
}

Eigen::MatrixXcd reduced_spin_density_serial(const QuantumState& psi, const Basis& basis) {
    return reduced_spin_density_impl<false>(psi, basis);
}

QuantumState apply_parity(const QuantumState& psi, const Basis& basis) {
    const int ns = basis.n_spins() + 1;
    const int nb = basis.n_max() + 1;
    QuantumState out(psi.size());
    const bool odd_n_spins = basis.n_spins() % 2 != 0;
    for (int i = 0; i < ns; ++i) {
        const int mirror = ns - 1 - i;
        for (int n = 0; n < nb; ++n) {
            const bool negative = ((n % 2 != 0) != odd_n_spins);
            const cplx v = psi[basis.flat(mirror, n)];
            out[basis.flat(i, n)] = negative ? -v : v;
        }
    }
    return out;
}

QuantumState project_parity(const QuantumState& psi, const Basis& basis, int sign) {
    return 0.5 * (psi + double(sign) * apply_parity(psi, basis));
}

Eigen::VectorXd phonon_distribution(const QuantumState& psi, const Basis& basis) {
    const int ns = basis.n_spins() + 1;
    const int nb = basis.n_max() + 1;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(nb);
    for (int i = 0; i < ns; ++i)
        for (int n = 0; n < nb; ++n) p[n] += std::norm(psi[basis.flat(i, n)]);
    return p;
}

} // namespace dicke
