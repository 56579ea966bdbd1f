#include "dicke/dynamics.hpp"
#include "dicke/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

// Boost 1.74's pchip.hpp calls unqualified isnan.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

namespace dicke {

// ---- schedules ----------------------------------------------------------------

RampSchedule RampSchedule::constant(double b_x, double duration) {
    if (!(duration >= 0.0)) throw ValidationError({"constant schedule duration must be >= 0"});
    RampSchedule s;
    s.kind_ = Kind::Constant;
    s.duration_ = duration;
    s.b_hold_ = b_x;
    s.b_final_ = b_x;
    return s;
}

RampSchedule RampSchedule::bang_bang(double b_hold, double t_hold, double b_final) {
    if (!(t_hold >= 0.0)) throw ValidationError({"bang-bang t_hold must be >= 0"});
    RampSchedule s;
    s.kind_ = Kind::BangBang;
    s.duration_ = t_hold;
    s.b_hold_ = b_hold;
    s.b_final_ = b_final;
    return s;
}

RampSchedule RampSchedule::tabulated(std::vector<double> times, std::vector<double> fields) {
    std::vector<std::string> errs;
    if (times.size() != fields.size()) errs.push_back("tabulated schedule: times and fields differ in length");
    if (times.size() < 2) errs.push_back("tabulated schedule needs at least two samples");
    if (!times.empty() && times.front() != 0.0) errs.push_back("tabulated schedule must start at t = 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) {
            errs.push_back("tabulated schedule times must be strictly increasing");
            break;
        }
    if (!errs.empty()) throw ValidationError(std::move(errs));
    RampSchedule s;
    s.kind_ = Kind::Tabulated;
    s.duration_ = times.back();
    s.b_hold_ = fields.front();
    s.b_final_ = fields.back();
    s.times_ = std::move(times);
    s.fields_ = std::move(fields);
    return s;
}

RampSchedule RampSchedule::locally_adiabatic(double tau_ramp, std::vector<double> times,
                                             std::vector<double> fields) {
    RampSchedule s = tabulated(std::move(times), std::move(fields));
    std::vector<std::string> errs;
    if (std::abs(s.duration_ - tau_ramp) > 1e-12 * std::max(1.0, tau_ramp))
        errs.push_back("LA table must end at tau_ramp");
    for (std::size_t k = 1; k < s.fields_.size(); ++k)
        if (s.fields_[k] > s.fields_[k - 1]) {
            errs.push_back("LA table must be non-increasing");
            break;
        }
    if (s.fields_.back() > 1e-6 * std::abs(s.fields_.front()))
        errs.push_back("LA table must end at B <= 1e-6 B(0)");
    if (!errs.empty()) throw ValidationError(std::move(errs));
    s.kind_ = Kind::LocallyAdiabatic;
    return s;
}

RampSchedule RampSchedule::with_duration(double duration) const {
    if (kind_ != Kind::Tabulated && kind_ != Kind::LocallyAdiabatic)
        throw ValidationError({"only tabulated and LA schedules can be stretched"});
    if (!(duration > 0.0)) throw ValidationError({"stretched duration must be > 0"});
    RampSchedule s = *this;
    const double k = duration / duration_;
    for (auto& t : s.times_) t *= k;
    s.times_.back() = duration;
    s.duration_ = duration;
    return s;
}

double RampSchedule::field_at(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return b_hold_;
    case Kind::BangBang:
        return t < duration_ ? b_hold_ : b_final_;
    case Kind::Tabulated:
    case Kind::LocallyAdiabatic: {
        if (t <= times_.front()) return fields_.front();
        if (t >= times_.back()) return fields_.back();
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto k = static_cast<std::size_t>(it - times_.begin());
        const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
        return (1.0 - w) * fields_[k - 1] + w * fields_[k];
    }
    }
    return 0.0;
}

bool RampSchedule::constant_on(double t0, double t1) const {
    switch (kind_) {
    case Kind::Constant:
        return true;
    case Kind::BangBang:
        return !(t0 < duration_ && duration_ < t1);
    default:
        return false;
    }
}

std::string to_string(RampSchedule::Kind kind) {
    switch (kind) {
    case RampSchedule::Kind::Constant: return "constant";
    case RampSchedule::Kind::BangBang: return "bang_bang";
    case RampSchedule::Kind::LocallyAdiabatic: return "locally_adiabatic";
    case RampSchedule::Kind::Tabulated: return "tabulated";
    }
    return "unknown";
}

// ---- locally adiabatic ramp ---------------------------------------------------

RampSchedule la_schedule_from_gap(const std::function<double(double)>& gap, double b_x0, double tau_ramp,
                                  int table_points) {
    std::vector<std::string> errs;
    if (!(tau_ramp > 0.0)) errs.push_back("tau_ramp must be > 0");
    if (!(b_x0 > 0.0)) errs.push_back("b_x0 must be > 0 for an LA ramp");
    if (table_points < 3) errs.push_back("LA table needs at least 3 points");
    if (!errs.empty()) throw ValidationError(std::move(errs));

    // weight(B) = 1/Delta(B)^2; cumulative Simpson integral from b_x0 downwards.
    auto weight = [&](double b) {
        const double d = gap(b);
        if (!(d > 0.0)) {
            std::ostringstream os;
            os << "LA ramp: gap vanishes at B=" << b << " (Delta=" << d
               << "); a true level crossing cannot be traversed adiabatically";
            throw NumericalError(os.str());
        }
        return 1.0 / (d * d);
    };
    const int n = table_points;
    std::vector<double> b(n), cumulative(n, 0.0);
    for (int k = 0; k < n; ++k) b[k] = b_x0 * (1.0 - double(k) / (n - 1));
    double prev = weight(b[0]);
    for (int k = 1; k < n; ++k) {
        const double mid = weight(0.5 * (b[k - 1] + b[k]));
        const double cur = weight(b[k]);
        cumulative[k] = cumulative[k - 1] + (b[k - 1] - b[k]) * (prev + 4.0 * mid + cur) / 6.0;
        prev = cur;
    }
    const double total = cumulative.back();
    std::vector<double> times(n);
    for (int k = 0; k < n; ++k) times[k] = tau_ramp * cumulative[k] / total;
    times.front() = 0.0;
    times.back() = tau_ramp;
    b.back() = 0.0;
    return RampSchedule::locally_adiabatic(tau_ramp, std::move(times), std::move(b));
}

std::function<double(double)> interpolate_gap(const GapScan& scan) {
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    auto x = scan.b_x;
    auto y = scan.gap;
    auto spline = std::make_shared<Pchip>(std::move(x), std::move(y));
    const double lo = scan.b_x.front(), hi = scan.b_x.back();
    return [spline, lo, hi](double b) { return (*spline)(std::clamp(b, lo, hi)); };
}

RampSchedule la_schedule(const ModelParams& params, double tau_ramp, int gap_samples) {
    const GapScan scan = gap_scan(params, params.b_x0, gap_samples);
    return la_schedule_from_gap(interpolate_gap(scan), params.b_x0, tau_ramp);
}

// ---- propagation ----------------------------------------------------------------

TrajectoryRecord observe(const QuantumState& psi, const ModelParams& params, const DickeKernel& h,
                         const QuantumState& cat, double t, bool with_qfi, bool with_distribution) {
    const Basis basis(params);
    const Eigen::MatrixXcd rho = reduced_spin_density(psi, basis);
    const SpinMoments mom = spin_moments(rho);
    TrajectoryRecord r;
    r.t = t;
    r.b_x = h.field();
    r.sx = mom.mean[0];
    r.sy = mom.mean[1];
    r.sz = mom.mean[2];
    const SpinDistribution pz = spin_distribution(rho, Axis::Z);
    r.abs_sz = pz.abs_mean();
    r.parity = parity_of(psi, basis).real();
    const Eigen::VectorXd ph = phonon_distribution(psi, basis);
    for (Eigen::Index n = 0; n < ph.size(); ++n) r.nph += double(n) * ph[n];
    r.energy = h.expectation(psi);
    r.fidelity = fidelity_to_cat(psi, cat);
    r.coherence = coherence_extremal(psi, params).value;
    if (with_qfi) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(mom.covariance, Eigen::EigenvaluesOnly);
        r.qfi = 4.0 * es.eigenvalues()[2];
    }
    if (with_distribution) r.sz_distribution = pz.probs;
    return r;
}

std::vector<double> output_grid(const RampSchedule& schedule, const PropagationOptions& opts) {
    std::vector<double> out;
    if (!opts.output_times.empty()) {
        out = opts.output_times;
        std::sort(out.begin(), out.end());
        for (double t : out)
            if (t < 0.0 || t > schedule.duration() * (1.0 + 1e-12))
                throw ValidationError({"output time outside the schedule duration"});
        return out;
    }
    const int n = std::max(1, opts.output_points);
    if (n == 1 || schedule.duration() == 0.0) return {schedule.duration()};
    out.resize(n);
    for (int k = 0; k < n; ++k) out[k] = schedule.duration() * k / (n - 1);
    return out;
}

namespace {

void check_boundary(const QuantumState& psi, const ModelParams& params, double t, double tol) {
    const Basis basis(params);
    double w = 0.0;
    for (int i = 0; i < params.spin_dim(); ++i) w += std::norm(psi[basis.flat(i, params.n_max)]);
    if (w > tol) {
        std::ostringstream os;
        os << "phonon weight " << w << " at the Fock cutoff n_max=" << params.n_max << " at t=" << t
           << " ms; raise n_max";
        throw TruncationError(os.str(), w);
    }
}

void advance(QuantumState& psi, DickeKernel& h, const RampSchedule& schedule, double t0, double t1,
             const PropagationOptions& opts) {
    if (t1 <= t0) return;
    if (schedule.constant_on(t0, t1)) {
        h.set_field(schedule.field_at(0.5 * (t0 + t1)));
        krylov_evolve(h, t1 - t0, psi, opts.krylov);
        return;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opts.dt - 1e-9)));
    const double dt = (t1 - t0) / steps;
    for (int s = 0; s < steps; ++s) {
        const double mid = t0 + (s + 0.5) * dt;
        h.set_field(schedule.field_at(mid));
        krylov_evolve(h, dt, psi, opts.krylov);
    }
}

} // namespace

Trajectory propagate(const QuantumState& initial, const ModelParams& params, const RampSchedule& schedule,
                     const PropagationOptions& opts) {
    params.validate();
    if (initial.size() != static_cast<Eigen::Index>(params.dim()))
        throw ValidationError({"initial state dimension does not match the model"});
    if (std::abs(initial.norm() - 1.0) > 1e-10) throw ValidationError({"initial state must be normalized"});
    if (!(opts.dt > 0.0)) throw ValidationError({"dt must be > 0"});

    const QuantumState cat = cat_state(params);
    DickeKernel h(params, schedule.field_at(0.0));
    QuantumState psi = initial;
    Trajectory traj;
    double t = 0.0;
    for (double t_out : output_grid(schedule, opts)) {
        advance(psi, h, schedule, t, t_out, opts);
        t = std::max(t, t_out);
        check_boundary(psi, params, t, opts.boundary_tol);
        h.set_field(schedule.field_at(t));
        traj.records.push_back(observe(psi, params, h, cat, t, opts.compute_qfi, opts.record_distribution));
    }
    advance(psi, h, schedule, t, schedule.duration(), opts);
    traj.final_state = std::move(psi);
    return traj;
}

ThermalEnsemble thermal_ensemble(double nbar, double epsilon) {
    if (nbar < 0.0) throw ValidationError({"nbar must be >= 0"});
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError({"thermal epsilon must lie in (0, 1)"});
    ThermalEnsemble e;
    e.epsilon = epsilon;
    if (nbar == 0.0) {
        e.n = {0};
        e.p = {1.0};
        return e;
    }
    const double ratio = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    double cumulative = 0.0;
    for (int n = 0;; ++n) {
        e.n.push_back(n);
        e.p.push_back(p);
        cumulative += p;
        if (cumulative >= 1.0 - epsilon) break;
        p *= ratio;
    }
    for (auto& w : e.p) w /= cumulative;
    return e;
}

int member_n_max(const ModelParams& params, int n) {
    const double r = std::sqrt(double(n)) + 2.0 * params.alpha();
    return std::max(params.n_max, static_cast<int>(std::ceil(r * r + 6.0 * r)) + 4);
}

Trajectory propagate_thermal(const ThermalEnsemble& ensemble, const ModelParams& params,
                             const RampSchedule& schedule, const PropagationOptions& opts) {
    params.validate();
    const std::size_t members = ensemble.n.size();
    if (members == 0 || ensemble.p.size() != members) throw ValidationError({"malformed thermal ensemble"});

    std::vector<Trajectory> runs(members);
    std::vector<std::string> failures(members);
    PropagationOptions member_opts = opts;
    member_opts.compute_qfi = opts.compute_qfi && members == 1;

#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < members; ++k) {
        try {
            ModelParams mp = params;
            mp.n_max = member_n_max(params, ensemble.n[k]);
            runs[k] = propagate(x_polarized_state(mp, ensemble.n[k]), mp, schedule, member_opts);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < members; ++k)
        if (!failures[k].empty())
            throw NumericalError("thermal member n=" + std::to_string(ensemble.n[k]) + ": " + failures[k]);

    if (members == 1) return runs.front();

    Trajectory avg;
    avg.records = runs.front().records;
    for (std::size_t r = 0; r < avg.records.size(); ++r) {
        TrajectoryRecord acc = runs.front().records[r];
        acc.sx = acc.sy = acc.sz = acc.abs_sz = acc.parity = acc.nph = acc.energy = acc.fidelity = 0.0;
        acc.qfi.reset();
        cplx coh = 0.0;
        Eigen::VectorXd dist;
        for (std::size_t k = 0; k < members; ++k) {
            const auto& x = runs[k].records[r];
            const double w = ensemble.p[k];
            acc.sx += w * x.sx;
            acc.sy += w * x.sy;
            acc.sz += w * x.sz;
            acc.abs_sz += w * x.abs_sz;
            acc.parity += w * x.parity;
            acc.nph += w * x.nph;
            acc.energy += w * x.energy;
            acc.fidelity += w * x.fidelity;
            if (x.coherence) coh += w * *x.coherence;
            if (x.sz_distribution) dist = dist.size() ? Eigen::VectorXd(dist + w * *x.sz_distribution)
                                                      : Eigen::VectorXd(w * *x.sz_distribution);
        }
        acc.coherence = coh;
        if (dist.size()) acc.sz_distribution = dist;
        avg.records[r] = std::move(acc);
    }
    return avg;
}

} // namespace dicke
