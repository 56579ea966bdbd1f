#include "dicke/model.hpp"
#include "dicke/errors.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

namespace dicke {

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

constexpr double kThermalEpsilon = 1e-4;

std::string join(const std::vector<std::string>& parts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) os << "; ";
        os << parts[i];
    }
    return os.str();
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error("invalid input: " + join(problems)), problems_(std::move(problems)) {}

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(g_warn_mutex);
    std::swap(handler, g_warn_handler);
    return handler;
}

void warn(std::string_view message) {
    std::lock_guard lock(g_warn_mutex);
    if (g_warn_handler) {
        g_warn_handler(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

double ModelParams::coupling_j() const { return g * g / std::abs(delta); }

double ModelParams::alpha() const {
    return operator_scale() * g * std::sqrt(static_cast<double>(n_spins)) / (2.0 * std::abs(delta));
}

std::vector<std::string> ModelParams::validation_errors() const {
    std::vector<std::string> errs;
    if (n_spins < 1) errs.push_back("n_spins must be a positive integer");
    if (!(delta < 0.0)) errs.push_back("delta must be strictly negative (delta < 0)");
    if (!std::isfinite(g) || !std::isfinite(b_x0) || !std::isfinite(b_z))
        errs.push_back("frequencies must be finite");
    if (gamma_dephase < 0.0) errs.push_back("gamma_dephase must be >= 0");
    if (nbar < 0.0) errs.push_back("nbar must be >= 0");
    if (n_max < 0) errs.push_back("n_max must be >= 0");
    if (!(transverse_factor > 0.0) || !std::isfinite(transverse_factor))
        errs.push_back("transverse_factor must be positive");
    if (errs.empty()) {
        const double a = alpha();
        const int need = static_cast<int>(
            std::ceil(a * a + 6.0 * a + nbar * std::log(1.0 / kThermalEpsilon) - 1e-9));
        if (n_max < need) {
            errs.push_back("n_max=" + std::to_string(n_max) + " too small for alpha=" +
                           std::to_string(a) + " and nbar=" + std::to_string(nbar) +
                           " (need >= " + std::to_string(need) + ")");
        }
    }
    return errs;
}

void ModelParams::validate() const {
    auto errs = validation_errors();
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

int auto_n_max(int n_spins, double g, double delta, double nbar, SpinNormalization normalization) {
    const double scale = normalization == SpinNormalization::FullPauli ? 2.0 : 1.0;
    const double a = scale * g * std::sqrt(static_cast<double>(n_spins)) / (2.0 * std::abs(delta));
    // Quench dynamics swing the phonon out to about twice the static displacement.
    const int displaced = static_cast<int>(std::ceil(4.0 * a * a + 12.0 * a));
    const int thermal = static_cast<int>(std::ceil(4.0 * (nbar + 1.0)));
    const int invariant =
        static_cast<int>(std::ceil(a * a + 6.0 * a + nbar * std::log(1.0 / kThermalEpsilon)));
    return std::max({20, displaced + thermal, invariant});
}

ModelParams params_from_lab_units(int n_spins, double g_khz, double delta_khz, double bx0_khz,
                                  double bz_khz, double gamma_per_s, double nbar, int n_max,
                                  SpinNormalization normalization, double transverse_factor) {
    ModelParams p;
    p.n_spins = n_spins;
    p.g = khz_to_rad(g_khz);
    p.delta = khz_to_rad(delta_khz);
    p.b_x0 = khz_to_rad(bx0_khz);
    p.b_z = khz_to_rad(bz_khz);
    p.gamma_dephase = per_second_to_per_ms(gamma_per_s);
    p.nbar = nbar;
    p.normalization = normalization;
    p.transverse_factor = transverse_factor;
    p.n_max = n_max >= 0 ? n_max : auto_n_max(n_spins, p.g, p.delta, nbar, normalization);
    return p;
}

std::size_t Basis::flat(BasisIndex b) const {
    const int spin_index = static_cast<int>(std::lround(b.m + 0.5 * n_spins_));
    return flat(spin_index, b.n);
}

BasisIndex Basis::index(std::size_t f) const {
    const auto nb = static_cast<std::size_t>(n_max_ + 1);
    return {m_of(static_cast<int>(f / nb)), static_cast<int>(f % nb)};
}

SpinFactor spin_factor_ops(int n_spins) {
    const int d = n_spins + 1;
    const double s = 0.5 * n_spins;
    Eigen::MatrixXcd splus = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = i - s;
        sz(i, i) = m;
        if (i + 1 < d) splus(i + 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
    const Eigen::MatrixXcd sminus = splus.adjoint();
    SpinFactor f;
    f.sx = 0.5 * (splus + sminus);
    f.sy = cplx(0.0, -0.5) * (splus - sminus);
    f.sz = sz;
    return f;
}

namespace {

// A (x) I_phonon for a dense spin-factor matrix A.
OperatorMatrix lift_spin(const Eigen::MatrixXcd& a, int phonon_dim) {
    const int d = static_cast<int>(a.rows());
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (a(i, j) != cplx(0.0))
                for (int n = 0; n < phonon_dim; ++n)
                    trips.emplace_back(i * phonon_dim + n, j * phonon_dim + n, a(i, j));
    OperatorMatrix out(d * phonon_dim, d * phonon_dim);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace

SpinOperators build_collective_spin_ops(const ModelParams& params) {
    params.validate();
    const auto f = spin_factor_ops(params.n_spins);
    return {lift_spin(f.sx, params.phonon_dim()), lift_spin(f.sy, params.phonon_dim()),
            lift_spin(f.sz, params.phonon_dim())};
}

BosonOperators build_boson_ops(const ModelParams& params) {
    if (params.n_max < 0) throw ValidationError({"n_max must be >= 0"});
    const Basis basis(params);
    std::vector<Eigen::Triplet<cplx>> ta, tn;
    for (int i = 0; i < params.spin_dim(); ++i) {
        for (int n = 0; n <= params.n_max; ++n) {
            if (n > 0)
                ta.emplace_back(basis.flat(i, n - 1), basis.flat(i, n), std::sqrt(double(n)));
            tn.emplace_back(basis.flat(i, n), basis.flat(i, n), double(n));
        }
    }
    const auto d = static_cast<Eigen::Index>(basis.size());
    BosonOperators ops;
    ops.a.resize(d, d);
    ops.a.setFromTriplets(ta.begin(), ta.end());
    ops.a_dag = ops.a.adjoint();
    ops.n.resize(d, d);
    ops.n.setFromTriplets(tn.begin(), tn.end());
    return ops;
}

OperatorMatrix build_hamiltonian(const ModelParams& params, double b_x) {
    params.validate();
    const Basis basis(params);
    const double s = params.spin();
    const double scale = params.operator_scale();
    const double coupling = scale * params.g / std::sqrt(double(params.n_spins));
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(basis.size() * 5);
    for (int i = 0; i < params.spin_dim(); ++i) {
        const double m = basis.m_of(i);
        for (int n = 0; n <= params.n_max; ++n) {
            const auto row = basis.flat(i, n);
            const double diag = -params.delta * n + scale * params.b_z * m;
            if (diag != 0.0) trips.emplace_back(row, row, diag);
            if (n < params.n_max && m != 0.0) {
                const double v = -coupling * m * std::sqrt(double(n + 1));
                trips.emplace_back(row, basis.flat(i, n + 1), v);
                trips.emplace_back(basis.flat(i, n + 1), row, v);
            }
            if (i + 1 < params.spin_dim() && b_x != 0.0) {
                const double v = params.field_scale() * b_x * 0.5 * std::sqrt(s * (s + 1.0) - m * (m + 1.0));
                trips.emplace_back(row, basis.flat(i + 1, n), v);
                trips.emplace_back(basis.flat(i + 1, n), row, v);
            }
        }
    }
    const auto d = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix h(d, d);
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
}

double max_hermiticity_defect(const OperatorMatrix& h) {
    const OperatorMatrix diff = h - OperatorMatrix(h.adjoint());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (OperatorMatrix::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

} // namespace dicke
