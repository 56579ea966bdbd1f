#pragma once

#include "dicke/krylov.hpp"
#include "dicke/metrology.hpp"
#include "dicke/model.hpp"
#include "dicke/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dicke {

/// Transverse field B^x(t) on [0, duration].
class RampSchedule {
public:
    enum class Kind { Constant, BangBang, LocallyAdiabatic, Tabulated };

    static RampSchedule constant(double b_x, double duration);
    /// Quench to b_hold at t=0, hold for t_hold, quench to b_final.
    static RampSchedule bang_bang(double b_hold, double t_hold, double b_final = 0.0);
    /// Piecewise-linear through (t, B) samples; times strictly increasing from 0.
    static RampSchedule tabulated(std::vector<double> times, std::vector<double> fields);
    static RampSchedule locally_adiabatic(double tau_ramp, std::vector<double> times,
                                          std::vector<double> fields);

    Kind kind() const { return kind_; }
    double duration() const { return duration_; }
    double field_at(double t) const;
    /// True when B is constant on the open interval (t0, t1).
    bool constant_on(double t0, double t1) const;
    /// Tabulated and LA ramps: the same profile stretched to a new duration.
    RampSchedule with_duration(double duration) const;

    double b_hold() const { return b_hold_; }
    double t_hold() const { return duration_; }
    double b_final() const { return b_final_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& fields() const { return fields_; }

private:
    Kind kind_ = Kind::Constant;
    double duration_ = 0.0;
    double b_hold_ = 0.0;
    double b_final_ = 0.0;
    std::vector<double> times_, fields_;
};

std::string to_string(RampSchedule::Kind kind);

/// Locally adiabatic ramp dB/dt = -Delta(B)^2 / gamma from B(0) = b_x0 down to
/// B(tau) = 0, gamma = tau / int_0^{b_x0} dB / Delta^2. `gap` must be positive
/// on [0, b_x0].
RampSchedule la_schedule_from_gap(const std::function<double(double)>& gap, double b_x0,
                                  double tau_ramp, int table_points = 4001);

/// Gap sampled on a uniform grid (400 points by default) with monotone cubic
/// interpolation between samples.
std::function<double(double)> interpolate_gap(const GapScan& scan);

RampSchedule la_schedule(const ModelParams& params, double tau_ramp, int gap_samples = 400);

struct PropagationOptions {
    double dt = 0.001;            // ms, integration step on continuous ramps
    int output_points = 200;
    std::vector<double> output_times; // overrides output_points when non-empty
    KrylovOptions krylov{};
    bool compute_qfi = true;
    bool record_distribution = false;
    double boundary_tol = 1e-6;   // max weight at n = n_max before aborting
};

struct TrajectoryRecord {
    double t = 0.0;
    double b_x = 0.0;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double abs_sz = 0.0;
    double parity = 0.0;
    double nph = 0.0;
    double energy = 0.0;
    double fidelity = 0.0;
    std::optional<double> qfi;
    std::optional<cplx> coherence;
    std::optional<Eigen::VectorXd> sz_distribution;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    QuantumState final_state; // empty for ensemble averages
};

/// Records the observables of one pure state.
TrajectoryRecord observe(const QuantumState& psi, const ModelParams& params, const DickeKernel& h,
                         const QuantumState& cat, double t, bool with_qfi, bool with_distribution);

/// Output grid: uniform from 0 to duration unless opts.output_times is set.
std::vector<double> output_grid(const RampSchedule& schedule, const PropagationOptions& opts);

/// Unitary evolution under H(B(t)), piecewise constant with midpoint sampling
/// on continuous ramps and exact holds on constant stretches.
Trajectory propagate(const QuantumState& initial, const ModelParams& params,
                     const RampSchedule& schedule, const PropagationOptions& opts = {});

struct ThermalEnsemble {
    std::vector<int> n;
    std::vector<double> p;
    double epsilon = 1e-4;
};

/// Bose-Einstein weights p_n = nbar^n/(nbar+1)^(n+1), cut once the cumulative
/// weight reaches 1 - epsilon, then renormalized.
ThermalEnsemble thermal_ensemble(double nbar, double epsilon = 1e-4);

/// Fock cutoff for an initial |n> displaced by up to 2 alpha (a quench from
/// the vacuum overshoots the ground-state displacement by a factor two).
int member_n_max(const ModelParams& params, int n);

/// Evolves |n>|-N/2>_x for each ensemble member and averages observables with
/// the thermal weights. Fidelity is sum_n p_n |<CAT|psi_n>|^2; QFI is not
/// reported for mixtures.
Trajectory propagate_thermal(const ThermalEnsemble& ensemble, const ModelParams& params,
                             const RampSchedule& schedule, const PropagationOptions& opts = {});

} // namespace dicke
