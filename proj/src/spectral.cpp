#include "dicke/spectral.hpp"
#include "dicke/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dicke {

Eigen::VectorXd coherent_amplitudes(double alpha, int n_max) {
    Eigen::VectorXd c(n_max + 1);
    c[0] = std::exp(-0.5 * alpha * alpha);
    for (int n = 1; n <= n_max; ++n) c[n] = c[n - 1] * alpha / std::sqrt(double(n));
    return c;
}

Eigen::VectorXd x_polarized_spin(int n_spins) {
    // |-N/2>_x = sum_m (-1)^(N/2 - m) sqrt(C(N, m + N/2)) / 2^(N/2) |m>_z
    Eigen::VectorXd v(n_spins + 1);
    const double log_n_fact = std::lgamma(n_spins + 1.0);
    for (int k = 0; k <= n_spins; ++k) {
        const double log_binom = log_n_fact - std::lgamma(k + 1.0) - std::lgamma(n_spins - k + 1.0);
        const double mag = std::exp(0.5 * log_binom - 0.5 * n_spins * std::log(2.0));
        v[k] = ((n_spins - k) % 2 == 0) ? mag : -mag;
    }
    return v;
}

QuantumState product_state(const Eigen::VectorXcd& spin, const Eigen::VectorXcd& phonon) {
    QuantumState out(spin.size() * phonon.size());
    for (Eigen::Index i = 0; i < spin.size(); ++i)
        out.segment(i * phonon.size(), phonon.size()) = spin[i] * phonon;
    return out;
}

QuantumState x_polarized_state(const ModelParams& params, int phonon_number) {
    if (phonon_number < 0 || phonon_number > params.n_max)
        throw ValidationError({"phonon number outside [0, n_max]"});
    Eigen::VectorXcd ph = Eigen::VectorXcd::Zero(params.phonon_dim());
    ph[phonon_number] = 1.0;
    return product_state(x_polarized_spin(params.n_spins).cast<cplx>(), ph);
}

QuantumState cat_state(const ModelParams& params) {
    const double a = params.alpha();
    const Eigen::VectorXd plus = coherent_amplitudes(a, params.n_max);
    const double leaked = std::max(0.0, 1.0 - plus.squaredNorm());
    if (leaked > 1e-8) {
        std::ostringstream os;
        os << "cat state: coherent weight beyond n_max=" << params.n_max << " is " << leaked;
        warn(os.str());
    }
    Eigen::VectorXd minus = plus;
    for (int n = 1; n <= params.n_max; n += 2) minus[n] = -minus[n];

    const Basis basis(params);
    QuantumState psi = QuantumState::Zero(static_cast<Eigen::Index>(basis.size()));
    const double rel = params.n_spins % 2 == 0 ? 1.0 : -1.0;
    for (int n = 0; n <= params.n_max; ++n) {
        psi[basis.flat(params.n_spins, n)] = plus[n];
        psi[basis.flat(0, n)] += rel * minus[n];
    }
    psi.normalize();
    return psi;
}

cplx parity_of(const QuantumState& psi, const Basis& basis) {
    return psi.dot(apply_parity(psi, basis));
}

Eigen::SparseMatrix<double> sector_basis(const Basis& basis, int sign) {
    const int ns = basis.n_spins() + 1;
    const int nb = basis.n_max() + 1;
    std::vector<Eigen::Triplet<double>> trips;
    int col = 0;
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < ns; ++i) {
        const int mirror = ns - 1 - i;
        if (mirror < i) break;
        for (int n = 0; n < nb; ++n) {
            // Pi|i,n> = eps |mirror,n>, eps = (-1)^(n+N)
            const int eps = ((n + basis.n_spins()) % 2 == 0) ? 1 : -1;
            if (mirror == i) {
                if (eps == sign) trips.emplace_back(basis.flat(i, n), col++, 1.0);
            } else {
                trips.emplace_back(basis.flat(i, n), col, r);
                trips.emplace_back(basis.flat(mirror, n), col, sign * eps * r);
                ++col;
            }
        }
    }
    Eigen::SparseMatrix<double> p(static_cast<Eigen::Index>(basis.size()), col);
    p.setFromTriplets(trips.begin(), trips.end());
    return p;
}

namespace {

// Deterministic start vector with support on every basis state.
QuantumState start_vector(std::size_t dim) {
    QuantumState v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k)
        v[k] = cplx(1.0 + 0.5 * std::sin(1.7 * double(k) + 0.3), 0.25 * std::cos(0.9 * double(k)));
    return v;
}

struct Tridiagonal {
    std::vector<double> diag, off;
};

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve_tridiagonal(const Tridiagonal& t, std::size_t m) {
    Eigen::VectorXd d(m), e(m > 1 ? m - 1 : 1);
    for (std::size_t i = 0; i < m; ++i) d[i] = t.diag[i];
    for (std::size_t i = 0; i + 1 < m; ++i) e[i] = t.off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (m == 1) {
        Eigen::MatrixXd one(1, 1);
        one(0, 0) = d[0];
        es.compute(one);
    } else {
        es.computeFromTridiagonal(d, e.head(m - 1), Eigen::ComputeEigenvectors);
    }
    return es;
}

std::vector<Eigenpair> dense_sector_pairs(const DickeKernel& h, int sign, int count) {
    const ModelParams& p = h.params();
    const Basis basis(p);
    Eigen::SparseMatrix<double> proj;
    if (sign == 0) {
        proj.resize(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
        proj.setIdentity();
    } else {
        proj = sector_basis(basis, sign);
    }
    const OperatorMatrix hs = build_hamiltonian(p, h.field());
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(proj.transpose().cast<cplx>() * hs * proj.cast<cplx>());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    std::vector<Eigenpair> out;
    const int k = std::min<int>(count, static_cast<int>(dense.rows()));
    for (int j = 0; j < k; ++j) {
        QuantumState v = proj.cast<cplx>() * es.eigenvectors().col(j);
        v.normalize();
        out.push_back({es.eigenvalues()[j], std::move(v)});
    }
    return out;
}

using RealSparse = Eigen::SparseMatrix<double>;

Eigen::VectorXd real_start_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = 1.0 + 0.5 * std::sin(1.7 * double(k) + 0.3);
    return v.normalized();
}

// Lowest Ritz value of a short run without reorthogonalization. Only used as
// a starting guess for the shift, so its accuracy does not matter.
double rough_ground_energy(const RealSparse& a, int steps) {
    Eigen::VectorXd v = real_start_vector(a.rows());
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(a.rows()), w;
    std::vector<double> d, e;
    double beta = 0.0;
    for (int j = 0; j < steps && j < a.rows(); ++j) {
        w = a * v - beta * prev;
        const double alpha = v.dot(w);
        w -= alpha * v;
        d.push_back(alpha);
        beta = w.norm();
        if (beta <= 1e-12 * std::max(1.0, std::abs(alpha))) break;
        e.push_back(beta);
        prev = v;
        v = w / beta;
    }
    const auto m = static_cast<Eigen::Index>(d.size());
    if (m == 1) return d[0];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(Eigen::Map<const Eigen::VectorXd>(d.data(), m),
                              Eigen::Map<const Eigen::VectorXd>(e.data(), m - 1), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

std::vector<Eigenpair> shift_invert_pairs(const DickeKernel& h, const RealSparse& proj, int count,
                                          const EigensolverOptions& opts) {
    const RealSparse full = build_hamiltonian(h.params(), h.field()).real();
    const RealSparse a = RealSparse(proj.transpose() * full * proj);
    const Eigen::Index n = a.rows();
    if (n == 0) throw NumericalError("parity sector is empty");
    const int want = std::min<int>(count, static_cast<int>(n));
    RealSparse eye(n, n);
    eye.setIdentity();

    const double guess = rough_ground_energy(a, 60);
    Eigen::SimplicialLDLT<RealSparse> ldlt;
    ldlt.analyzePattern(RealSparse(a + eye));
    double sigma = 0.0;
    bool below = false;
    for (double margin = std::max(1.0, 1e-4 * std::abs(guess)); !below && margin < 1e30; margin *= 2.0) {
        sigma = guess - margin;
        ldlt.factorize(RealSparse(a - sigma * eye));
        below = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
    }
    if (!below) throw NumericalError("shift-invert: no shift below the spectrum");

    const int m_cap = static_cast<int>(std::min<Eigen::Index>(n, opts.max_iterations));
    std::vector<Eigen::VectorXd> vs{real_start_vector(n)};
    Tridiagonal t;
    Eigen::VectorXd w;
    double worst = std::numeric_limits<double>::infinity(), top = 0.0;
    for (int j = 0; j < m_cap; ++j) {
        w = ldlt.solve(vs[j]);
        const double alpha = vs[j].dot(w);
        t.diag.push_back(alpha);
        w -= alpha * vs[j];
        if (j > 0) w -= t.off[j - 1] * vs[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : vs) w -= u.dot(w) * u;
        const double beta = w.norm();
        const int m = j + 1;
        top = std::max(top, std::abs(alpha));
        const bool invariant = beta <= 1e-14 * top;

        if (m >= want && (invariant || m == m_cap || m % 4 == 0)) {
            // Largest Ritz values of (H - sigma)^-1 are the lowest levels of H.
            auto es = solve_tridiagonal(t, static_cast<std::size_t>(m));
            std::vector<Eigenpair> out;
            worst = 0.0;
            for (int l = m - 1; l >= m - want; --l) {
                Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
                for (int i = 0; i < m; ++i) x += es.eigenvectors()(i, l) * vs[i];
                x.normalize();
                const Eigen::VectorXd ax = a * x;
                const double e = x.dot(ax);
                worst = std::max(worst, (ax - e * x).norm() / std::max(1.0, std::abs(e)));
                out.push_back({e, (proj * x).cast<cplx>()});
            }
            if (worst <= opts.residual_tol) {
                std::stable_sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.energy < q.energy; });
                return out;
            }
            if (invariant) break;
        }
        if (j + 1 < m_cap) {
            t.off.push_back(beta);
            vs.push_back(w / beta);
        }
    }
    std::ostringstream os;
    os << "shift-invert Lanczos did not converge: relative residual " << worst;
    throw NumericalError(os.str());
}

} // namespace

std::vector<Eigenpair> lowest_in_sector(const DickeKernel& h, int sign, int count,
                                        const EigensolverOptions& opts) {
    if (sign == 0 && h.params().b_z == 0.0) {
        // Sectors can be exactly degenerate, which one Krylov space cannot resolve.
        auto pairs = lowest_in_sector(h, +1, count, opts);
        auto odd = lowest_in_sector(h, -1, count, opts);
        pairs.insert(pairs.end(), std::make_move_iterator(odd.begin()), std::make_move_iterator(odd.end()));
        std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
        if (pairs.size() > static_cast<std::size_t>(count)) pairs.resize(count);
        return pairs;
    }
    const Basis basis(h.params());
    const std::size_t dim = h.dim();
    Eigen::SparseMatrix<double> proj;
    if (sign == 0) {
        proj.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        proj.setIdentity();
    } else {
        proj = sector_basis(basis, sign);
    }
    const auto sector_dim = static_cast<std::size_t>(proj.cols());
    if (opts.method == EigenMethod::ShiftInvert ||
        (opts.method == EigenMethod::Auto && sector_dim >= kShiftInvertDim))
        return shift_invert_pairs(h, proj, count, opts);

    auto restrict = [&](const QuantumState& x) { return sign == 0 ? x : project_parity(x, basis, sign); };
    QuantumState v = restrict(start_vector(dim));
    double nrm = v.norm();
    if (nrm == 0.0) throw NumericalError("parity sector is empty");
    v /= nrm;

    const std::size_t m_cap = std::min<std::size_t>(sector_dim, static_cast<std::size_t>(opts.max_iterations));
    const int want = std::min<int>(count, static_cast<int>(sector_dim));

    std::vector<QuantumState> vs;
    vs.reserve(m_cap);
    vs.push_back(v);
    Tridiagonal t;
    QuantumState w;
    double worst_residual = 0.0;
    bool converged = false;
    std::size_t m = 0;

    for (std::size_t j = 0; j < m_cap; ++j) {
        h.apply(vs[j], w);
        const double a = vs[j].dot(w).real();
        t.diag.push_back(a);
        w -= a * vs[j];
        if (j > 0) w -= t.off[j - 1] * vs[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : vs) w -= u.dot(w) * u;
        w = restrict(w);
        const double b = w.norm();
        m = j + 1;

        const bool invariant = b <= 1e-12 * std::max(1.0, std::abs(a));
        const bool check = invariant || m == m_cap || (static_cast<int>(m) >= want && m % 4 == 0);
        if (check) {
            auto es = solve_tridiagonal(t, m);
            worst_residual = 0.0;
            for (int l = 0; l < std::min<int>(want, static_cast<int>(m)); ++l) {
                const double theta = es.eigenvalues()[l];
                const double r = b * std::abs(es.eigenvectors()(static_cast<Eigen::Index>(m) - 1, l));
                worst_residual = std::max(worst_residual, r / std::max(1.0, std::abs(theta)));
            }
            if ((static_cast<int>(m) >= want && worst_residual <= opts.residual_tol) || invariant) {
                converged = static_cast<int>(m) >= want || invariant;
                if (converged) break;
            }
        }
        if (j + 1 < m_cap) {
            t.off.push_back(b);
            vs.push_back(w / b);
        }
    }

    if (!converged) {
        if (opts.dense_fallback && dim < kDenseFallbackDim) return dense_sector_pairs(h, sign, count);
        std::ostringstream os;
        os << "Lanczos did not converge: relative residual " << worst_residual << " after " << m
           << " iterations";
        throw NumericalError(os.str());
    }

    auto es = solve_tridiagonal(t, m);
    std::vector<Eigenpair> out;
    for (int l = 0; l < std::min<int>(want, static_cast<int>(m)); ++l) {
        QuantumState x = QuantumState::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < m; ++i) x += es.eigenvectors()(static_cast<Eigen::Index>(i), l) * vs[i];
        x.normalize();
        out.push_back({es.eigenvalues()[l], std::move(x)});
    }
    return out;
}

Eigen::VectorXd dense_sector_spectrum(const ModelParams& params, double b_x, int sign) {
    const Basis basis(params);
    const Eigen::SparseMatrix<double> proj = sector_basis(basis, sign);
    const OperatorMatrix h = build_hamiltonian(params, b_x);
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(proj.transpose().cast<cplx>() * h * proj.cast<cplx>());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dense, Eigen::EigenvaluesOnly).eigenvalues();
}

Eigen::VectorXd dense_spectrum(const ModelParams& params, double b_x) {
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(build_hamiltonian(params, b_x));
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dense, Eigen::EigenvaluesOnly).eigenvalues();
}

namespace {

bool parity_symmetric(const ModelParams& p) { return p.b_z == 0.0; }

constexpr double kDegenerateTol = 1e-10;

} // namespace

GroundState ground_state(const ModelParams& params, double b_x, const EigensolverOptions& opts) {
    const DickeKernel h(params, b_x);
    if (!parity_symmetric(params)) {
        auto pairs = lowest_in_sector(h, 0, 1, opts);
        GroundState gs{pairs[0].energy, std::move(pairs[0].state), 0};
        gs.parity = parity_of(gs.state, Basis(params)).real() >= 0.0 ? +1 : -1;
        return gs;
    }
    const auto even = lowest_in_sector(h, +1, 1, opts);
    const auto odd = lowest_in_sector(h, -1, 1, opts);
    const double scale = std::max(1.0, std::abs(even[0].energy));
    if (odd.empty() || even[0].energy <= odd[0].energy + kDegenerateTol * scale)
        return {even[0].energy, even[0].state, +1};
    return {odd[0].energy, odd[0].state, -1};
}

double gap_in_sector(const ModelParams& params, double b_x, const EigensolverOptions& opts) {
    if (!parity_symmetric(params))
        throw ValidationError({"gap_in_sector requires b_z = 0 (parity must be conserved)"});
    const DickeKernel h(params, b_x);
    const auto even = lowest_in_sector(h, +1, 2, opts);
    const auto odd = lowest_in_sector(h, -1, 2, opts);
    const bool use_even = odd.empty() || even[0].energy <= odd[0].energy + kDegenerateTol * std::max(1.0, std::abs(even[0].energy));
    const auto& sec = use_even ? even : odd;
    if (sec.size() < 2) throw NumericalError("fewer than two states in the ground-state sector");
    const double gap = sec[1].energy - sec[0].energy;
    if (gap <= kDegenerateTol * std::max(1.0, std::abs(sec[0].energy))) {
        std::ostringstream os;
        os << "degenerate levels in the ground-state sector at b_x=" << b_x << " (gap " << gap << ")";
        warn(os.str());
    }
    return std::max(gap, 0.0);
}

SpectrumSlice spectrum_slice(const ModelParams& params, double b_x, int count,
                             const EigensolverOptions& opts) {
    const DickeKernel h(params, b_x);
    const auto even = lowest_in_sector(h, +1, count, opts);
    const auto odd = lowest_in_sector(h, -1, count, opts);
    std::vector<std::pair<double, Parity>> all;
    for (const auto& e : even) all.emplace_back(e.energy, Parity::Even);
    for (const auto& e : odd) all.emplace_back(e.energy, Parity::Odd);
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; });
    SpectrumSlice s;
    s.b_x = b_x;
    for (int i = 0; i < std::min<int>(count, static_cast<int>(all.size())); ++i) {
        s.energies.push_back(all[i].first);
        s.parities.push_back(all[i].second);
    }
    const bool use_even = odd.empty() || even[0].energy <= odd[0].energy + kDegenerateTol * std::max(1.0, std::abs(even[0].energy));
    const auto& sec = use_even ? even : odd;
    s.gap_same_sector = sec.size() >= 2 ? std::max(0.0, sec[1].energy - sec[0].energy) : 0.0;
    return s;
}

GapScan gap_scan(const ModelParams& params, double b_max, int samples, const EigensolverOptions& opts) {
    if (samples < 2) throw ValidationError({"gap scan needs at least 2 samples"});
    if (!parity_symmetric(params))
        throw ValidationError({"gap scan requires b_z = 0 (parity must be conserved)"});
    GapScan scan;
    scan.b_x.resize(samples);
    scan.gap.resize(samples);
    scan.ground_energy.resize(samples);
    scan.parity.resize(samples);
    for (int k = 0; k < samples; ++k) scan.b_x[k] = b_max * k / (samples - 1);

    std::vector<std::string> failures(samples);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < samples; ++k) {
        try {
            const DickeKernel h(params, scan.b_x[k]);
            const auto even = lowest_in_sector(h, +1, 2, opts);
            const auto odd = lowest_in_sector(h, -1, 1, opts);
            const bool use_even = even[0].energy <= odd[0].energy + kDegenerateTol * std::max(1.0, std::abs(even[0].energy));
            if (use_even) {
                scan.gap[k] = even.size() > 1 ? std::max(0.0, even[1].energy - even[0].energy) : 0.0;
                scan.ground_energy[k] = even[0].energy;
                scan.parity[k] = +1;
            } else {
                const auto odd2 = lowest_in_sector(h, -1, 2, opts);
                scan.gap[k] = odd2.size() > 1 ? std::max(0.0, odd2[1].energy - odd2[0].energy) : 0.0;
                scan.ground_energy[k] = odd2[0].energy;
                scan.parity[k] = -1;
            }
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    }
    for (int k = 0; k < samples; ++k)
        if (!failures[k].empty())
            throw NumericalError("gap scan sample " + std::to_string(k) + ": " + failures[k]);
    return scan;
}

GapMinimum find_gap_minimum(const ModelParams& params, double lo, double hi, int coarse, double tol) {
    auto f = [&](double b) { return gap_in_sector(params, b); };
    int best = 0;
    double best_gap = f(lo);
    for (int k = 1; k <= coarse; ++k) {
        const double g = f(lo + (hi - lo) * k / coarse);
        if (g < best_gap) {
            best_gap = g;
            best = k;
        }
    }
    const double step = (hi - lo) / coarse;
    double a = std::max(lo, lo + (best - 1) * step);
    double b = std::min(hi, lo + (best + 1) * step);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(b))) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a); fd = f(d);
        }
    }
    const double bx = 0.5 * (a + b);
    GapMinimum out{bx, f(bx)};
    if (best_gap < out.gap) out = {lo + best * step, best_gap};
    return out;
}

} // namespace dicke
