#include "dicke/krylov.hpp"
#include "dicke/errors.hpp"

#include <cmath>
#include <vector>

namespace dicke {

namespace {

struct SmallExp {
    Eigen::VectorXd theta;
    Eigen::MatrixXd vecs;

    // exp(-i tau T) e1
    Eigen::VectorXcd apply(double tau) const {
        const Eigen::Index m = theta.size();
        Eigen::VectorXcd c(m);
        for (Eigen::Index l = 0; l < m; ++l)
            c[l] = std::exp(cplx(0.0, -tau * theta[l])) * vecs(0, l);
        return vecs.cast<cplx>() * c;
    }
};

SmallExp diagonalize(const std::vector<double>& diag, const std::vector<double>& off, int m) {
    SmallExp s;
    if (m == 1) {
        s.theta = Eigen::VectorXd::Constant(1, diag[0]);
        s.vecs = Eigen::MatrixXd::Identity(1, 1);
        return s;
    }
    Eigen::VectorXd d(m), e(m - 1);
    for (int i = 0; i < m; ++i) d[i] = diag[i];
    for (int i = 0; i < m - 1; ++i) e[i] = off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    s.theta = es.eigenvalues();
    s.vecs = es.eigenvectors();
    return s;
}

} // namespace

KrylovStats krylov_evolve(const DickeKernel& h, double tau, QuantumState& psi, const KrylovOptions& opts) {
    KrylovStats stats;
    if (tau == 0.0) return stats;
    const double dir = tau < 0.0 ? -1.0 : 1.0;
    const double scale = std::max(1.0, h.norm_bound());
    double remaining = std::abs(tau);
    double trial = remaining;
    std::vector<QuantumState> vs;
    vs.reserve(opts.max_dim + 1);
    std::vector<double> diag, off;
    QuantumState w;

    while (remaining > 1e-15 * std::abs(tau)) {
        const double beta0 = psi.norm();
        if (beta0 == 0.0) return stats;
        vs.clear();
        diag.clear();
        off.clear();
        vs.push_back(psi / beta0);
        const double target = std::min(trial, remaining);

        int m = 0;
        double beta_m = 0.0;
        bool breakdown = false;
        for (int j = 0; j < opts.max_dim; ++j) {
            h.apply(vs[j], w);
            ++stats.matvecs;
            const double a = vs[j].dot(w).real();
            diag.push_back(a);
            w -= a * vs[j];
            if (j > 0) w -= off[j - 1] * vs[j - 1];
            if (opts.reorthogonalize)
                for (const auto& u : vs) w -= u.dot(w) * u;
            beta_m = w.norm();
            m = j + 1;
            if (beta_m <= 1e-13 * scale) {
                breakdown = true;
                break;
            }
            if (m >= 6 && m % 3 == 0) {
                const auto se = diagonalize(diag, off, m);
                if (beta0 * beta_m * std::abs(se.apply(dir * target)[m - 1]) <= opts.tol) break;
            }
            if (j + 1 < opts.max_dim) {
                off.push_back(beta_m);
                vs.push_back(w / beta_m);
            }
        }

        const auto se = diagonalize(diag, off, m);
        auto error_at = [&](double s) { return beta0 * beta_m * std::abs(se.apply(dir * s)[m - 1]); };
        double step = target;
        double err = 0.0;
        if (!breakdown && (err = error_at(step)) > opts.tol) {
            // Halve until acceptable, then bisect towards the largest acceptable step.
            double bad = step;
            for (int shrink = 0; err > opts.tol; ++shrink) {
                if (shrink > 60) throw NumericalError("Krylov step size underflow");
                bad = step;
                step *= 0.5;
                err = error_at(step);
            }
            for (int k = 0; k < 8; ++k) {
                const double mid = 0.5 * (step + bad);
                const double e = error_at(mid);
                if (e <= opts.tol) {
                    step = mid;
                    err = e;
                } else {
                    bad = mid;
                }
            }
        }
        const Eigen::VectorXcd y = se.apply(dir * step);
        QuantumState next = QuantumState::Zero(psi.size());
        for (int i = 0; i < m; ++i) next += y[i] * vs[i];
        psi = beta0 * next;

        remaining -= step;
        ++stats.substeps;
        stats.max_error_estimate = std::max(stats.max_error_estimate, err);
        trial = step == target ? 2.0 * step : step;
    }
    return stats;
}

} // namespace dicke
