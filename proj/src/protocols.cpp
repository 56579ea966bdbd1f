#include "dicke/protocols.hpp"

#include "dicke/errors.hpp"
#include "dicke/hash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

namespace dicke {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] > v[k - 1])) return false;
    return true;
}

Trajectory run(const ModelParams& params, const RampSchedule& schedule, const PropagationOptions& opts) {
    if (params.nbar > 0.0) return propagate_thermal(thermal_ensemble(params.nbar), params, schedule, opts);
    return propagate(x_polarized_state(params), params, schedule, opts);
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string sweep_key(const ModelParams& p, const SweepGrid& grid, const PropagationOptions& po) {
    std::ostringstream s;
    s << p.n_spins << ' ' << fmt17(p.g) << ' ' << fmt17(p.delta) << ' ' << fmt17(p.b_z) << ' '
      << fmt17(p.nbar) << ' ' << p.n_max << ' ' << static_cast<int>(p.normalization) << ' '
      << fmt17(p.transverse_factor) << ' ' << fmt17(po.dt) << ' ' << fmt17(po.krylov.tol) << ' '
      << po.compute_qfi << '|';
    for (double b : grid.b_hold_values) s << fmt17(b) << ' ';
    s << '|';
    for (double t : grid.t_hold_values) s << fmt17(t) << ' ';
    return hex64(fnv1a64(s.str()));
}

const char* kCheckpointTag = "# dicke-sweep-checkpoint ";

// Loads complete rows from a checkpoint written for the same key.
std::vector<char> load_checkpoint(const std::string& path, const std::string& key, SweepResult& res) {
    const auto rows = static_cast<int>(res.grid.b_hold_values.size());
    const auto cols = static_cast<int>(res.grid.t_hold_values.size());
    std::vector<char> done(rows, 0);
    std::ifstream in(path);
    if (!in) return done;
    std::string line;
    if (!std::getline(in, line)) return done;
    if (line != kCheckpointTag + key)
        throw ValidationError({"checkpoint " + path + " belongs to a different model or grid"});
    std::vector<int> seen(rows, 0);
    while (std::getline(in, line)) {
        int r = -1, c = -1;
        char f[64], a[64], q[64];
        if (std::sscanf(line.c_str(), "%d,%d,%63[^,],%63[^,],%63s", &r, &c, f, a, q) != 5) continue;
        if (r < 0 || r >= rows || c < 0 || c >= cols) continue;
        res.fidelity(r, c) = std::strtod(f, nullptr);
        res.abs_sz(r, c) = std::strtod(a, nullptr);
        res.qfi(r, c) = std::strtod(q, nullptr);
        ++seen[r];
    }
    for (int r = 0; r < rows; ++r) done[r] = seen[r] >= cols;
    return done;
}

void locate_maxima(SweepResult& res) {
    auto arg = [&](const Eigen::MatrixXd& m) {
        SweepCell best;
        best.value = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                if (m(r, c) > best.value) {
                    best.row = r;
                    best.col = c;
                    best.value = m(r, c);
                }
        best.b_hold = res.grid.b_hold_values[best.row];
        best.t_hold = res.grid.t_hold_values[best.col];
        return best;
    };
    res.argmax_fidelity = arg(res.fidelity);
    res.argmax_abs_sz = arg(res.abs_sz);
}

} // namespace

std::vector<std::string> SweepGrid::validation_errors() const {
    std::vector<std::string> errs;
    if (b_hold_values.empty()) errs.push_back("b_hold axis is empty");
    if (t_hold_values.empty()) errs.push_back("t_hold axis is empty");
    if (!strictly_increasing(b_hold_values)) errs.push_back("b_hold axis must be strictly increasing");
    if (!strictly_increasing(t_hold_values)) errs.push_back("t_hold axis must be strictly increasing");
    if (!t_hold_values.empty() && t_hold_values.front() < 0.0) errs.push_back("t_hold values must be >= 0");
    return errs;
}

void SweepGrid::validate() const {
    auto errs = validation_errors();
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count == 1) return {lo};
    std::vector<double> v(std::max(count, 0));
    for (int k = 0; k < count; ++k) v[k] = lo + (hi - lo) * k / (count - 1);
    return v;
}

SweepGrid default_sweep_grid(const ModelParams& params) {
    const double j = params.coupling_j();
    return {linspace(0.05 * j, 1.0 * j, 20), linspace(0.05, 2.0, 40)};
}

SweepResult sweep_bang_bang(const ModelParams& params, const SweepGrid& grid, const SweepOptions& opts) {
    params.validate();
    grid.validate();
    const auto rows = static_cast<int>(grid.b_hold_values.size());
    const auto cols = static_cast<int>(grid.t_hold_values.size());

    SweepResult res;
    res.grid = grid;
    res.fidelity = Eigen::MatrixXd::Constant(rows, cols, kNaN);
    res.abs_sz = Eigen::MatrixXd::Constant(rows, cols, kNaN);
    res.qfi = Eigen::MatrixXd::Constant(rows, cols, kNaN);

    PropagationOptions po = opts.propagation;
    po.output_times = grid.t_hold_values;
    po.record_distribution = false;

    std::vector<char> done(rows, 0);
    std::ofstream journal;
    std::mutex journal_mutex;
    if (!opts.checkpoint_path.empty()) {
        const std::string key = sweep_key(params, grid, po);
        const bool resume = std::filesystem::exists(opts.checkpoint_path);
        if (resume) done = load_checkpoint(opts.checkpoint_path, key, res);
        journal.open(opts.checkpoint_path, std::ios::app);
        if (!journal) throw ValidationError({"cannot write checkpoint " + opts.checkpoint_path});
        if (!resume) journal << kCheckpointTag << key << '\n' << std::flush;
    }

    const double tmax = grid.t_hold_values.back();
    std::vector<std::string> failures(rows);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < rows; ++r) {
        if (done[r]) continue;
        const double b = grid.b_hold_values[r];
        try {
            const Trajectory tr = run(params, RampSchedule::constant(b, tmax), po);
            std::ostringstream lines;
            for (int c = 0; c < cols; ++c) {
                const auto& rec = tr.records[c];
                res.fidelity(r, c) = rec.fidelity;
                res.abs_sz(r, c) = rec.abs_sz / params.n_spins;
                res.qfi(r, c) = rec.qfi ? *rec.qfi : kNaN;
                lines << r << ',' << c << ',' << fmt17(res.fidelity(r, c)) << ','
                      << fmt17(res.abs_sz(r, c)) << ',' << fmt17(res.qfi(r, c)) << '\n';
            }
            if (journal.is_open()) {
                std::lock_guard lock(journal_mutex);
                journal << lines.str() << std::flush;
            }
        } catch (const std::exception& e) {
            failures[r] = "sweep row b_hold=" + fmt17(rad_to_khz(b)) + " kHz: " + e.what();
        }
    }
    for (const auto& f : failures)
        if (!f.empty()) throw NumericalError(f);

    locate_maxima(res);
    return res;
}

double initial_fidelity(const ModelParams& params) {
    PropagationOptions po;
    po.compute_qfi = false;
    return run(params, RampSchedule::constant(params.b_x0, 0.0), po).records.front().fidelity;
}

Comparison compare_protocols(const ModelParams& params, const std::vector<double>& tau_values,
                             const CompareOptions& opts) {
    params.validate();
    if (tau_values.empty()) throw ValidationError({"no ramp times given"});
    for (double tau : tau_values)
        if (!(tau >= 0.0)) throw ValidationError({"ramp times must be >= 0"});
    const double tmax = *std::max_element(tau_values.begin(), tau_values.end());

    PropagationOptions po = opts.propagation;
    po.compute_qfi = false;

    Comparison out;
    const double f0 = initial_fidelity(params);

    std::optional<SweepResult> sweep;
    if (tmax > 0.0) {
        SweepGrid grid = opts.grid;
        if (grid.b_hold_values.empty()) grid.b_hold_values = default_sweep_grid(params).b_hold_values;
        if (grid.t_hold_values.empty()) {
            const int steps = static_cast<int>(std::ceil(tmax / 0.005 - 1e-9));
            for (int k = 1; k <= steps; ++k) grid.t_hold_values.push_back(0.005 * k);
        }
        SweepOptions so;
        so.propagation = po;
        sweep = sweep_bang_bang(params, grid, so);
    }

    std::optional<RampSchedule> la_base;
    if (tmax > 0.0) la_base = la_schedule(params, tmax, opts.gap_samples);

    for (double tau : tau_values) {
        ComparisonRow row;
        row.tau = tau;
        row.f_bang_bang = f0;
        row.f_la = f0;
        if (tau > 0.0) {
            const auto& s = *sweep;
            const Eigen::MatrixXd& score = opts.objective == Objective::Fidelity ? s.fidelity : s.abs_sz;
            double best = -1.0;
            for (int c = 0; c < score.cols(); ++c) {
                if (s.grid.t_hold_values[c] > tau * (1.0 + 1e-12)) break;
                for (int r = 0; r < score.rows(); ++r)
                    if (score(r, c) > best) {
                        best = score(r, c);
                        row.b_hold = s.grid.b_hold_values[r];
                        row.t_hold = s.grid.t_hold_values[c];
                        row.f_bang_bang = s.fidelity(r, c);
                    }
            }
            if (opts.objective == Objective::Fidelity && row.f_bang_bang < f0) {
                row.f_bang_bang = f0;
                row.b_hold = row.t_hold = 0.0;
            }
            PropagationOptions lo = po;
            lo.output_times = {tau};
            row.f_la = run(params, la_base->with_duration(tau), lo).records.back().fidelity;
        }
        out.rows.push_back(row);
    }

    std::vector<ComparisonRow> sorted = out.rows;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.tau < b.tau; });
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double d1 = sorted[k].f_la - sorted[k].f_bang_bang;
        if (d1 <= 0.0) continue;
        if (k == 0) {
            out.crossover = sorted[k].tau;
        } else {
            const double d0 = sorted[k - 1].f_la - sorted[k - 1].f_bang_bang;
            out.crossover = sorted[k - 1].tau + (sorted[k].tau - sorted[k - 1].tau) * (-d0) / (d1 - d0);
        }
        break;
    }
    return out;
}

std::vector<ScalingRow> scaling_study(const std::vector<int>& n_values, const ModelParams& templ,
                                      const std::vector<double>& tau_values, const ScalingOptions& opts) {
    std::vector<std::string> errs;
    std::vector<ModelParams> instances;
    for (int n : n_values) {
        ModelParams p = templ;
        p.n_spins = n;
        if (n < 1) {
            errs.push_back("n_spins must be positive (got " + std::to_string(n) + ")");
            continue;
        }
        p.n_max = auto_n_max(n, p.g, p.delta, p.nbar, p.normalization);
        if (p.dim() > opts.max_dim)
            errs.push_back("N=" + std::to_string(n) + " needs Hilbert dimension " + std::to_string(p.dim()) +
                           " above the cap " + std::to_string(opts.max_dim));
        instances.push_back(p);
    }
    for (double tau : tau_values)
        if (!(tau > 0.0)) errs.push_back("LA ramp times must be > 0");
    if (!errs.empty()) throw ValidationError(std::move(errs));

    std::vector<ScalingRow> rows;
    for (const auto& p : instances) {
        SweepOptions so;
        so.propagation = opts.propagation;
        so.propagation.compute_qfi = true;
        const SweepResult s = sweep_bang_bang(p, default_sweep_grid(p), so);
        const SweepCell& best = s.best(opts.objective);
        rows.push_back({p.n_spins, "bang_bang", best.t_hold, best.b_hold, s.fidelity(best.row, best.col),
                        s.qfi(best.row, best.col)});

        if (tau_values.empty()) continue;
        const double tmax = *std::max_element(tau_values.begin(), tau_values.end());
        const RampSchedule base = la_schedule(p, tmax, opts.gap_samples);
        for (double tau : tau_values) {
            PropagationOptions po = opts.propagation;
            po.compute_qfi = true;
            po.output_times = {tau};
            const auto rec = run(p, base.with_duration(tau), po).records.back();
            rows.push_back({p.n_spins, "la", tau, 0.0, rec.fidelity, rec.qfi ? *rec.qfi : kNaN});
        }
    }
    return rows;
}

std::vector<RobustnessSample> longitudinal_robustness(const ModelParams& params,
                                                      const std::vector<double>& b_z_values,
                                                      const std::vector<LabeledSchedule>& protocols,
                                                      const PropagationOptions& opts) {
    params.validate();
    if (b_z_values.empty() || protocols.empty()) throw ValidationError({"robustness needs b_z values and protocols"});
    const std::size_t np = protocols.size();
    const std::size_t jobs = b_z_values.size() * np;
    std::vector<std::vector<RobustnessSample>> parts(jobs);
    std::vector<std::string> failures(jobs);
    PropagationOptions po = opts;
    po.compute_qfi = false;

#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < jobs; ++k) {
        ModelParams p = params;
        p.b_z = b_z_values[k / np];
        const auto& proto = protocols[k % np];
        try {
            const Trajectory tr = run(p, proto.schedule, po);
            for (const auto& rec : tr.records)
                parts[k].push_back({p.b_z, proto.label, rec.t, rec.coherence ? std::abs(*rec.coherence) : kNaN,
                                    rec.parity, rec.fidelity});
        } catch (const std::exception& e) {
            failures[k] = proto.label + " at b_z=" + fmt17(rad_to_khz(p.b_z)) + " kHz: " + e.what();
        }
    }
    for (const auto& f : failures)
        if (!f.empty()) throw NumericalError(f);

    std::vector<RobustnessSample> out;
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

std::vector<RobustnessSample> final_samples(const std::vector<RobustnessSample>& samples) {
    std::vector<RobustnessSample> out;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const bool last = k + 1 == samples.size() || samples[k + 1].b_z != samples[k].b_z ||
                          samples[k + 1].protocol != samples[k].protocol;
        if (last) out.push_back(samples[k]);
    }
    return out;
}

} // namespace dicke
