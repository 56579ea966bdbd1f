#pragma once

#include "dicke/dynamics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dicke {

struct SweepGrid {
    std::vector<double> b_hold_values; // rad/ms
    std::vector<double> t_hold_values; // ms

    std::vector<std::string> validation_errors() const;
    void validate() const;
};

/// b_hold in [0.05J, 1.0J] (20 values), t_hold in [0.05, 2.0] ms (40 values).
SweepGrid default_sweep_grid(const ModelParams& params);

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

enum class Objective { Fidelity, AbsSz };

struct SweepCell {
    int row = 0; // b_hold index
    int col = 0; // t_hold index
    double b_hold = 0.0;
    double t_hold = 0.0;
    double value = 0.0;
};

struct SweepResult {
    SweepGrid grid;
    Eigen::MatrixXd fidelity; // rows b_hold, columns t_hold
    Eigen::MatrixXd abs_sz;   // <|Sz|>/N
    Eigen::MatrixXd qfi;      // NaN for thermal ensembles
    SweepCell argmax_fidelity;
    SweepCell argmax_abs_sz;

    const SweepCell& best(Objective objective) const {
        return objective == Objective::Fidelity ? argmax_fidelity : argmax_abs_sz;
    }
};

struct SweepOptions {
    PropagationOptions propagation{};
    /// Completed cells are appended here as they finish; an existing file for
    /// the same model and grid is resumed. Empty disables checkpointing.
    std::string checkpoint_path;
};

/// Bang-bang quench sweep. Each b_hold row is one constant-field evolution
/// sampled at every t_hold, since the final quench leaves the state unchanged.
/// Vacuum phonons when nbar = 0, otherwise the thermal ensemble.
SweepResult sweep_bang_bang(const ModelParams& params, const SweepGrid& grid,
                            const SweepOptions& opts = {});

/// Fidelity of the t = 0 state (vacuum or thermal average).
double initial_fidelity(const ModelParams& params);

struct ComparisonRow {
    double tau = 0.0;
    double f_bang_bang = 0.0; // best over the bang-bang grid with t_hold <= tau
    double b_hold = 0.0;      // arg of f_bang_bang, 0 when no hold beats t = 0
    double t_hold = 0.0;
    double f_la = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    /// First tau where LA overtakes bang-bang, linearly interpolated.
    std::optional<double> crossover;
};

struct CompareOptions {
    /// Bang-bang candidates; t_hold values above the largest tau are unused.
    /// Empty selects the default b_hold axis and a 0.005 ms t_hold axis.
    SweepGrid grid;
    Objective objective = Objective::Fidelity;
    PropagationOptions propagation{};
    int gap_samples = 400;
};

Comparison compare_protocols(const ModelParams& params, const std::vector<double>& tau_values,
                             const CompareOptions& opts = {});

struct ScalingRow {
    int n_spins = 0;
    std::string protocol; // "bang_bang" or "la"
    double tau = 0.0;     // ramp time; for bang-bang the optimal hold
    double b_hold = 0.0;  // bang-bang only
    double fidelity = 0.0;
    double qfi = 0.0;
};

struct ScalingOptions {
    Objective objective = Objective::Fidelity;
    PropagationOptions propagation{};
    int gap_samples = 400;
    std::size_t max_dim = 4'000'000;
};

/// Per N: n_max re-derived, bang-bang optimized on the default grid, and one
/// LA ramp per tau. g and delta are kept fixed.
std::vector<ScalingRow> scaling_study(const std::vector<int>& n_values, const ModelParams& templ,
                                      const std::vector<double>& tau_values,
                                      const ScalingOptions& opts = {});

struct LabeledSchedule {
    std::string label;
    RampSchedule schedule;
};

struct RobustnessSample {
    double b_z = 0.0;
    std::string protocol;
    double t = 0.0;
    double coherence_abs = 0.0;
    double parity = 0.0;
    double fidelity = 0.0;
};

/// Coherence along each schedule with a longitudinal field b_z added for the
/// whole evolution. The last sample of each (b_z, protocol) is the final value.
std::vector<RobustnessSample> longitudinal_robustness(const ModelParams& params,
                                                      const std::vector<double>& b_z_values,
                                                      const std::vector<LabeledSchedule>& protocols,
                                                      const PropagationOptions& opts = {});

/// Final coherence per (b_z, protocol), in input order.
std::vector<RobustnessSample> final_samples(const std::vector<RobustnessSample>& samples);

} // namespace dicke
