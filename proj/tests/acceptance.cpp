// Acceptance criteria P1-P9. Run with one criterion name (P1..P9) or none for
// all. Each prints a single "P# PASS|FAIL: ..." line; the exit code is the
// number of failures. CSV side products go to $DICKE_ACCEPTANCE_OUT (default
// ./acceptance_out).

#include "dicke/config.hpp"
#include "dicke/emit.hpp"
#include "dicke/errors.hpp"
#include "dicke/protocols.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dicke;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (ok ? "" : " [x]");
    }
};

std::string num(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

ModelParams lab(int n, double delta_khz, double nbar = 0.0,
                SpinNormalization norm = SpinNormalization::FullPauli, double factor = 2.0) {
    return params_from_lab_units(n, 0.935, delta_khz, 7.0, 0.0, 0.0, nbar, -1, norm, factor);
}

std::filesystem::path out_dir() {
    const char* env = std::getenv("DICKE_ACCEPTANCE_OUT");
    std::filesystem::path dir = env && *env ? env : "acceptance_out";
    std::filesystem::create_directories(dir);
    return dir;
}

void save(const std::string& name, const std::string& content) { write_file((out_dir() / name).string(), content); }

void within_budget(Outcome& o, double seconds, double budget) {
    o.check(seconds < budget, "runtime " + num(seconds, 3) + " s < " + num(budget, 3) + " s");
}

// ---- P1 ---------------------------------------------------------------------

void limit_states(Outcome& o, const ModelParams& p, const std::string& tag, double expected_energy) {
    const double strong = khz_to_rad(50.0);
    const auto gs = ground_state(p, strong);
    const double overlap = std::norm(x_polarized_state(p).dot(gs.state));
    o.check(overlap >= 0.99, tag + " overlap(|0>|-N/2>_x) " + num(overlap, 6) + " >= 0.99");

    EigensolverOptions eo;
    eo.residual_tol = 1e-12;
    const auto even = lowest_in_sector(DickeKernel(p, 0.0), +1, 1, eo).front();
    const double f = std::norm(cat_state(p).dot(even.state));
    o.check(f >= 1.0 - 1e-6, tag + " cat fidelity 1-" + num(1.0 - f, 3));
    const double rel = std::abs(even.energy - expected_energy) / std::abs(expected_energy);
    o.check(rel <= 1e-8, tag + " E0 rel err " + num(rel, 3));
}

void p1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    // Spin-half operators with unit transverse coefficient: E0 = -g^2 N / (4|delta|).
    const auto half = lab(10, -1.0, 0.0, SpinNormalization::HalfSpin, 1.0);
    limit_states(o, half, "half-spin", -half.g * half.g * 10 / (4.0 * std::abs(half.delta)));
    // Default convention doubles the collective operators: E0 = -(2g)^2 N / (4|delta|).
    const auto pauli = lab(10, -1.0);
    const double s = pauli.operator_scale();
    limit_states(o, pauli, "default", -s * s * pauli.g * pauli.g * 10 / (4.0 * std::abs(pauli.delta)));
    within_budget(o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
}

// ---- P2 ---------------------------------------------------------------------

void p2(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(20240611);
    std::uniform_int_distribution<int> pick_n(2, 20), pick_kind(0, 2), pick_knots(2, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double deltas[] = {-1.0, -2.0, -4.0};
    double norm_drift = 0.0, parity_drift = 0.0, energy_drift = 0.0;
    int constant_runs = 0;
    for (int k = 0; k < 20; ++k) {
        const auto p = lab(pick_n(rng), deltas[k % 3]);
        const double j = p.coupling_j();
        const double duration = 0.1 + 0.9 * unit(rng);
        const int kind = pick_kind(rng);
        RampSchedule s = RampSchedule::constant(0.0, 0.0);
        if (kind == 0) {
            s = RampSchedule::constant(j * unit(rng), duration);
        } else if (kind == 1) {
            s = RampSchedule::bang_bang(j * unit(rng), duration);
        } else {
            const int knots = pick_knots(rng);
            std::vector<double> t, b;
            for (int q = 0; q < knots; ++q) {
                t.push_back(duration * q / (knots - 1));
                b.push_back(q + 1 == knots ? 0.0 : p.b_x0 * unit(rng));
            }
            s = RampSchedule::tabulated(t, b);
        }
        PropagationOptions po;
        po.output_points = 25;
        po.compute_qfi = false;
        const auto traj = propagate(x_polarized_state(p), p, s, po);
        norm_drift = std::max(norm_drift, std::abs(traj.final_state.norm() - 1.0));
        const double pi0 = traj.records.front().parity;
        for (const auto& r : traj.records) parity_drift = std::max(parity_drift, std::abs(r.parity - pi0));
        if (kind != 2) {
            ++constant_runs;
            // The last bang-bang record is already evaluated with the post-quench field.
            const std::size_t held = traj.records.size() - (kind == 1 ? 1 : 0);
            const double e0 = traj.records.front().energy;
            for (std::size_t r = 0; r < held; ++r)
                energy_drift = std::max(energy_drift, std::abs(traj.records[r].energy - e0) / std::abs(e0));
        }
    }
    o.check(norm_drift <= 1e-8, "norm drift " + num(norm_drift, 3));
    o.check(parity_drift <= 1e-6, "parity drift " + num(parity_drift, 3));
    o.check(energy_drift <= 1e-8, "energy drift " + num(energy_drift, 3) + " over " +
                                      std::to_string(constant_runs) + " constant-H runs");
    within_budget(o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 120.0);
}

// ---- P3 ---------------------------------------------------------------------

void p3(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    double prop_err = 0.0, eig_err = 0.0;
    for (int n = 1; n <= 6; ++n) {
        auto p = lab(n, -4.0);
        p.n_max = 8;
        const double j = p.coupling_j();
        const auto psi0 = x_polarized_state(p);
        PropagationOptions po;
        po.output_points = 2;
        po.compute_qfi = false;

        const auto bb = RampSchedule::bang_bang(0.55 * j, 0.45);
        const auto want_bb = oracle::evolve(oracle::hamiltonian(p, bb.b_hold()), 0.45, psi0);
        prop_err = std::max(prop_err, (propagate(psi0, p, bb, po).final_state - want_bb).norm());

        const auto ramp = RampSchedule::tabulated({0.0, 0.1, 0.3}, {p.b_x0, 0.2 * p.b_x0, 0.0});
        const auto want_ramp = oracle::evolve_midpoint(p, ramp, 300, psi0);
        prop_err = std::max(prop_err, (propagate(psi0, p, ramp, po).final_state - want_ramp).norm());

        EigensolverOptions eo;
        eo.dense_fallback = false;
        for (double b : {0.0, 0.25 * j, j}) {
            const auto dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(oracle::hamiltonian(p, b)).eigenvalues();
            const auto lz = lowest_in_sector(DickeKernel(p, b), 0, 5, eo);
            for (int k = 0; k < 5 && k < int(lz.size()); ++k)
                eig_err = std::max(eig_err, std::abs(lz[k].energy - dense[k]) / std::max(1.0, std::abs(dense[k])));
        }
    }
    o.check(prop_err <= 1e-8, "propagator vs dense exp " + num(prop_err, 3));
    o.check(eig_err <= 1e-9, "Lanczos vs dense lowest 5 rel " + num(eig_err, 3));
    within_budget(o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
}

// ---- P4 ---------------------------------------------------------------------

SweepResult run_sweep(const ModelParams& p, const std::string& csv_name) {
    const auto res = sweep_bang_bang(p, default_sweep_grid(p));
    save(csv_name, sweep_csv(res, p));
    return res;
}

void p4(Outcome& o) {
    {
        const auto p = lab(20, -4.0);
        const auto res = run_sweep(p, "p4_n20_delta4.csv");
        const auto& best = res.argmax_fidelity;
        const double bj = best.b_hold / p.coupling_j();
        o.check(std::abs(best.value - 0.45) <= 0.05, "N=20 d=-4 max F " + num(best.value) + " in 0.45+-0.05");
        o.check(std::abs(bj - 0.5) <= 0.15, "at b_hold " + num(bj, 3) + "J in 0.5+-0.15");
        o.check(std::abs(best.t_hold - 0.5) <= 0.2 + 1e-12, "at t_hold " + num(best.t_hold, 3) + " ms in 0.5+-0.2");
    }
    {
        const auto p = lab(20, -1.0);
        const auto res = run_sweep(p, "p4_n20_delta1.csv");
        o.check(std::abs(res.argmax_fidelity.value - 0.14) <= 0.04,
                "N=20 d=-1 max F " + num(res.argmax_fidelity.value) + " in 0.14+-0.04");
        o.check(res.argmax_abs_sz.value >= 0.35, "max <|Sz|>/N " + num(res.argmax_abs_sz.value) + " >= 0.35");
    }
    {
        const auto p = lab(80, -1.0);
        const auto res = run_sweep(p, "p4_n80_delta1.csv");
        o.check(res.argmax_fidelity.value <= 0.05, "N=80 d=-1 max F " + num(res.argmax_fidelity.value) + " <= 0.05");
    }
}

// ---- P5 ---------------------------------------------------------------------

void p5(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = lab(20, -4.0);
    const auto cmp = compare_protocols(p, {0.25, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 1.75, 2.0});
    save("p5_compare.csv", comparison_csv(cmp));
    bool bb_early = true, la_late = true;
    std::ostringstream early, late;
    for (const auto& r : cmp.rows) {
        if (r.tau <= 0.7 + 1e-12) {
            bb_early = bb_early && r.f_bang_bang > r.f_la;
            early << ' ' << num(r.tau, 3) << ':' << num(r.f_bang_bang, 3) << '/' << num(r.f_la, 3);
        }
        if (r.tau >= 1.1 - 1e-12) {
            la_late = la_late && r.f_la > r.f_bang_bang;
            late << ' ' << num(r.tau, 3) << ':' << num(r.f_bang_bang, 3) << '/' << num(r.f_la, 3);
        }
    }
    o.check(bb_early, "BB > LA for tau <= 0.7 (bb/la" + early.str() + ")");
    o.check(la_late, "LA > BB for tau >= 1.1 (bb/la" + late.str() + ")");
    o.detail << "; crossover " << (cmp.crossover ? num(*cmp.crossover, 3) + " ms" : std::string("none"));
    within_budget(o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 600.0);
}

// ---- P6 ---------------------------------------------------------------------

void p6(Outcome& o) {
    const auto p20 = lab(20, -4.0);
    const double q_cat = qfi(cat_state(p20), Basis(p20));
    o.check(std::abs(q_cat - 400.0) <= 400.0 * 1e-6, "QFI(cat, N=20) " + num(q_cat, 12));
    const double q_x = qfi(x_polarized_state(p20), Basis(p20));
    o.check(std::abs(q_x - 20.0) <= 20.0 * 1e-9, "QFI(|-N/2>_x) " + num(q_x, 12));

    for (int n : {60, 80}) {
        const auto p = lab(n, -4.0);
        const auto res = sweep_bang_bang(p, default_sweep_grid(p));
        const auto& best = res.argmax_fidelity;
        const double ratio = res.qfi(best.row, best.col) / (double(n) * n);
        o.check(ratio >= 0.55, "N=" + std::to_string(n) + " BB QFI/N^2 " + num(ratio, 3) + " at F-optimal (" +
                                   num(best.b_hold / p.coupling_j(), 3) + "J, " + num(best.t_hold, 3) + " ms)");
    }

    auto p6 = lab(6, -4.0);
    p6.n_max = 8;
    const auto s = oracle::spin_matrices(6);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(9, 9);
    std::mt19937 rng(6);
    std::normal_distribution<double> nd;
    QuantumState psi(static_cast<Eigen::Index>(p6.dim()));
    for (auto& x : psi) x = {nd(rng), nd(rng)};
    psi.normalize();
    const double q0 = qfi(psi, Basis(p6));
    double worst = 0.0;
    for (double th : {0.4, 1.3, 2.2}) {
        const Eigen::MatrixXcd u = oracle::kron(oracle::expm_hermitian(s.y, th) * oracle::expm_hermitian(s.z, 0.7 * th), id);
        worst = std::max(worst, std::abs(qfi(QuantumState(u * psi), Basis(p6)) - q0));
    }
    o.check(worst <= 1e-9, "rotation invariance at N=6 " + num(worst, 3));
}

// ---- P7 ---------------------------------------------------------------------

void p7(Outcome& o) {
    double worst = 0.0;
    int samples = 0;
    for (int n : {4, 10, 20}) {
        const auto p = lab(n, -4.0);
        PropagationOptions po;
        po.output_points = 21;
        po.compute_qfi = false;
        for (double bj : {0.3, 0.6}) {
            const auto traj = propagate(x_polarized_state(p), p, RampSchedule::bang_bang(bj * p.coupling_j(), 1.0), po);
            for (const auto& r : traj.records) {
                worst = std::max(worst, std::abs(std::abs(*r.coherence) - 0.5 * r.fidelity));
                ++samples;
            }
        }
        const auto la = propagate(x_polarized_state(p), p, la_schedule(p, 1.0, 100), po);
        for (const auto& r : la.records) {
            worst = std::max(worst, std::abs(std::abs(*r.coherence) - 0.5 * r.fidelity));
            ++samples;
        }
    }
    o.check(worst <= 1e-9, "| |coh| - F/2 | max " + num(worst, 3) + " over " + std::to_string(samples) + " outputs");
    const auto d = dephase_coherence({{1.0, 0.0}, 0.0}, 20, 0.06, 1.0);
    o.check(std::abs(d.value.real() - std::exp(-1.2)) <= 1e-15, "dephasing factor " + num(d.value.real(), 12));
}

// ---- P8 ---------------------------------------------------------------------

void p8(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = lab(20, -4.0);
    const double j = p.coupling_j();
    const double hold = 0.485;
    SweepGrid grid{default_sweep_grid(p).b_hold_values, {hold}};
    const double b_hold = sweep_bang_bang(p, grid).argmax_fidelity.b_hold;

    std::vector<double> bz;
    for (double x : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1}) bz.push_back(x * j);
    PropagationOptions po;
    po.output_points = 50;
    const auto samples = longitudinal_robustness(
        p, bz, {{"la", la_schedule(p, 2.0)}, {"bang_bang", RampSchedule::bang_bang(b_hold, hold)}}, po);
    save("p8_robustness.csv", robustness_csv(samples));
    const auto fin = final_samples(samples);
    bool ordered = true;
    std::ostringstream list;
    for (std::size_t k = 0; k + 1 < fin.size(); k += 2) {
        const double la = fin[k].coherence_abs, bb = fin[k + 1].coherence_abs;
        ordered = ordered && bb >= la;
        list << ' ' << num(fin[k].b_z / j, 2) << "J:" << num(bb, 3) << '/' << num(la, 3);
    }
    o.check(ordered, "BB >= LA coherence at b_hold " + num(b_hold / j, 3) + "J (bb/la" + list.str() + ")");
    within_budget(o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 600.0);
}

// ---- P9 ---------------------------------------------------------------------

void p9(Outcome& o) {
    const auto p = lab(75, -1.0, 6.0);
    const auto ens = thermal_ensemble(p.nbar);
    PropagationOptions po;
    po.output_points = 81;
    po.compute_qfi = false;
    const auto bb = propagate_thermal(ens, p, RampSchedule::constant(0.4 * p.coupling_j(), 2.0), po);
    save("p9_bang_bang.csv", trajectory_csv(bb));

    std::vector<double> t, z;
    for (const auto& r : bb.records) {
        t.push_back(r.t);
        z.push_back(r.abs_sz / p.n_spins);
    }
    const auto peak = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    double rival = 0.0;
    for (std::size_t k = 1; k + 1 < z.size(); ++k)
        if (k != peak && z[k] > z[k - 1] && z[k] >= z[k + 1] && std::abs(t[k] - t[peak]) > 0.3)
            rival = std::max(rival, z[k]);
    o.check(t[peak] >= 0.7 && t[peak] <= 1.4, "BB <|Sz|>/N peak " + num(z[peak], 3) + " at " + num(t[peak], 3) + " ms");
    o.check(rival < 0.75 * z[peak], "largest other local max " + num(rival, 3));

    double at_1ms = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::abs(t[k] - 1.0) < 1e-9) at_1ms = z[k];
    const auto p76 = lab(76, -1.0, 6.0);
    PropagationOptions lo;
    lo.output_points = 41;
    lo.compute_qfi = false;
    const auto la = propagate_thermal(thermal_ensemble(p76.nbar), p76, la_schedule(p76, 2.0), lo);
    save("p9_la.csv", trajectory_csv(la));
    const double la_final = la.records.back().abs_sz / p76.n_spins;
    o.check(la_final > at_1ms, "LA(N=76, 2 ms) final " + num(la_final, 3) + " > BB at 1 ms " + num(at_1ms, 3));
}

} // namespace

int main(int argc, char** argv) {
    const std::map<std::string, std::function<void(Outcome&)>> criteria = {
        {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4}, {"P5", p5},
        {"P6", p6}, {"P7", p7}, {"P8", p8}, {"P9", p9}};
    std::vector<std::string> wanted;
    for (int k = 1; k < argc; ++k) wanted.push_back(argv[k]);
    if (wanted.empty())
        for (const auto& [name, fn] : criteria) wanted.push_back(name);

    set_warning_handler([](std::string_view) {});
    int failures = 0;
    for (const auto& name : wanted) {
        const auto it = criteria.find(name);
        if (it == criteria.end()) {
            std::printf("%s FAIL: unknown criterion\n", name.c_str());
            ++failures;
            continue;
        }
        Outcome o;
        try {
            it->second(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures;
}
