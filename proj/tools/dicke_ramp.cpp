// dicke_ramp: command-line front end for the ramp simulations.

#include "dicke/config.hpp"
#include "dicke/emit.hpp"
#include "dicke/errors.hpp"
#include "dicke/protocols.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace dicke;

namespace {

int parse_int(const std::string& s, const char* what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError({std::string(what) + ": '" + s + "' is not an integer"});
    return v;
}

struct ModelFlags {
    std::string params_path;
    std::string preset;
    int n_spins = 0;
    double g_khz = 0, delta_khz = 0, bx0_khz = 0, bz_khz = 0, gamma_per_s = 0, nbar = 0, transverse_factor = 0;
    std::string n_max, normalization, label;
    std::vector<std::pair<std::string, CLI::Option*>> opts;

    void attach(CLI::App* app) {
        app->add_option("--params", params_path, "JSON config file");
        opts = {
            {"preset", app->add_option("--preset", preset, "named parameter set (fig3, fig5)")},
            {"n_spins", app->add_option("--n-spins", n_spins)},
            {"g_khz", app->add_option("--g-khz", g_khz)},
            {"delta_khz", app->add_option("--delta-khz", delta_khz)},
            {"bx0_khz", app->add_option("--bx0-khz", bx0_khz)},
            {"bz_khz", app->add_option("--bz-khz", bz_khz)},
            {"gamma_per_s", app->add_option("--gamma-per-s", gamma_per_s)},
            {"nbar", app->add_option("--nbar", nbar)},
            {"n_max", app->add_option("--n-max", n_max, "integer or auto")},
            {"normalization", app->add_option("--normalization", normalization, "pauli or half_spin")},
            {"transverse_factor", app->add_option("--transverse-factor", transverse_factor)},
            {"label", app->add_option("--label", label)},
        };
    }

    RunConfig resolve() const {
        json base = params_path.empty() ? json::object() : read_json_file(params_path);
        json over = json::object();
        for (const auto& [key, opt] : opts) {
            if (!opt->count()) continue;
            if (key == "preset") over[key] = preset;
            else if (key == "n_spins") over[key] = n_spins;
            else if (key == "n_max") over[key] = n_max == "auto" ? json("auto") : json(parse_int(n_max, "--n-max"));
            else if (key == "normalization") over[key] = normalization;
            else if (key == "label") over[key] = label;
            else over[key] = std::stod(opt->as<std::string>());
        }
        return parse_config(base, over);
    }
};

struct OutputFlags {
    std::string out = "-";
    std::string summary;
    bool wall_time = false;

    void attach(CLI::App* app, const char* what) {
        app->add_option("--out", out, std::string(what) + " (- for stdout)");
        app->add_option("--summary", summary, "JSON summary sidecar");
        app->add_flag("--wall-time", wall_time, "record wall time in the summary");
    }
};

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError({std::string(what) + ": '" + item + "' is not a number"});
        }
    }
    return v;
}

std::vector<double> parse_axis(const std::string& s, const char* what) {
    const auto v = parse_list(s, what);
    if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2]))
        throw ValidationError({std::string(what) + " expects lo,hi,count"});
    return linspace(v[0], v[1], static_cast<int>(v[2]));
}

Objective parse_objective(const std::string& s) {
    if (s == "fidelity") return Objective::Fidelity;
    if (s == "abs_sz") return Objective::AbsSz;
    throw ValidationError({"objective must be fidelity or abs_sz"});
}

void emit_text(const std::string& path, const std::string& content) {
    if (path == "-") std::cout << content << std::flush;
    else write_file(path, content);
}

using Clock = std::chrono::steady_clock;

void emit_summary(const OutputFlags& of, const std::string& command, const RunConfig& cfg, const std::string& csv,
                  json results, Clock::time_point start) {
    if (of.summary.empty()) return;
    json j;
    j["command"] = command;
    j["version"] = DICKE_VERSION;
    j["config"] = cfg.to_json();
    j["params_hash"] = params_hash(cfg);
    j["output"] = {{"path", of.out}, {"content_hash", content_hash(csv)}};
    j["results"] = std::move(results);
    if (of.wall_time) j["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_file(of.summary, dump_json(j));
}

json cell_json(const SweepCell& c, const ModelParams& p) {
    return {{"b_hold_khz", rad_to_khz(c.b_hold)},
            {"b_hold_over_j", c.b_hold / p.coupling_j()},
            {"t_hold_ms", c.t_hold},
            {"value", c.value}};
}

json nullable(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

RampSchedule schedule_from_json(const json& j, const ModelParams& p) {
    std::vector<std::string> errs;
    if (!j.is_object() || j.size() != 1)
        throw ValidationError({"schedule must be an object with one of constant, bang_bang, la, tabulated"});
    const auto& [kind, body] = *j.items().begin();
    auto num = [&](const char* key) {
        if (!body.contains(key) || !body[key].is_number()) {
            errs.push_back("schedule." + kind + "." + key + " must be a number");
            return 0.0;
        }
        return body[key].get<double>();
    };
    if (kind == "constant") {
        const double b = num("bx_khz"), d = num("duration_ms");
        if (errs.empty()) return RampSchedule::constant(khz_to_rad(b), d);
    } else if (kind == "bang_bang") {
        const double b = num("b_hold_khz"), t = num("t_hold_ms");
        const double bf = body.contains("b_final_khz") ? num("b_final_khz") : 0.0;
        if (errs.empty()) return RampSchedule::bang_bang(khz_to_rad(b), t, khz_to_rad(bf));
    } else if (kind == "la") {
        const double tau = num("tau_ms");
        if (errs.empty()) return la_schedule(p, tau);
    } else if (kind == "tabulated") {
        if (!body.contains("t_ms") || !body.contains("bx_khz"))
            errs.push_back("schedule.tabulated needs t_ms and bx_khz arrays");
        else {
            auto times = body["t_ms"].get<std::vector<double>>();
            auto fields = body["bx_khz"].get<std::vector<double>>();
            for (auto& f : fields) f = khz_to_rad(f);
            return RampSchedule::tabulated(std::move(times), std::move(fields));
        }
    } else {
        errs.push_back("unknown schedule kind '" + kind + "'");
    }
    throw ValidationError(std::move(errs));
}

int report_validation(const std::vector<std::string>& problems) {
    std::cerr << json{{"error", "validation"}, {"problems", problems}}.dump() << '\n';
    return 2;
}

int report_numerical(const std::string& message) {
    std::cerr << json{{"error", "numerical"}, {"message", message}}.dump() << '\n';
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ramp protocols for the trapped-ion Dicke model"};
    app.require_subcommand(1);
    std::optional<int> threads;
    app.add_option("--threads", threads, "worker threads (default: DICKE_RAMP_THREADS or all cores)");
    app.set_version_flag("--version", std::string(DICKE_VERSION));

    // gap
    auto* gap = app.add_subcommand("gap", "same-sector gap and ground energy versus b_x");
    ModelFlags gap_m;
    gap_m.attach(gap);
    OutputFlags gap_o;
    gap_o.attach(gap, "gap CSV");
    double gap_bmax = -1.0;
    int gap_samples = 400;
    gap->add_option("--b-max-khz", gap_bmax, "upper end of the scan (default bx0)");
    gap->add_option("--samples", gap_samples)->check(CLI::PositiveNumber);

    // evolve
    auto* evolve = app.add_subcommand("evolve", "propagate one schedule and record observables");
    ModelFlags ev_m;
    ev_m.attach(evolve);
    OutputFlags ev_o;
    ev_o.attach(evolve, "trajectory CSV");
    std::string ev_bb, ev_schedule, ev_state_out;
    double ev_la = 0, ev_const = 0, ev_duration = 2.0, ev_dt = 0.001;
    int ev_points = 200;
    bool ev_no_qfi = false;
    auto* o_bb = evolve->add_option("--bang-bang", ev_bb, "bhold_khz,thold_ms[,bfinal_khz]");
    auto* o_la = evolve->add_option("--la", ev_la, "locally adiabatic ramp of this duration (ms)");
    auto* o_const = evolve->add_option("--constant", ev_const, "constant field (kHz) for --duration");
    auto* o_sched = evolve->add_option("--schedule", ev_schedule, "schedule JSON file");
    o_bb->excludes(o_la)->excludes(o_const)->excludes(o_sched);
    o_la->excludes(o_const)->excludes(o_sched);
    o_const->excludes(o_sched);
    evolve->add_option("--duration", ev_duration, "ms, for --constant");
    evolve->add_option("--dt", ev_dt, "integration step on continuous ramps (ms)");
    evolve->add_option("--output-points", ev_points);
    evolve->add_flag("--no-qfi", ev_no_qfi);
    evolve->add_option("--save-state", ev_state_out, "write the final pure state");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "bang-bang grid over (b_hold, t_hold)");
    ModelFlags sw_m;
    sw_m.attach(sweep);
    OutputFlags sw_o;
    sw_o.attach(sweep, "sweep CSV");
    std::string sw_b = "0.05,1.0,20", sw_t = "0.05,2.0,40", sw_checkpoint, sw_objective = "fidelity";
    sweep->add_option("--b-hold", sw_b, "lo,hi,count in units of J");
    sweep->add_option("--t-hold", sw_t, "lo,hi,count in ms");
    sweep->add_option("--checkpoint", sw_checkpoint, "resumable cell journal (default <out>.partial)");
    sweep->add_option("--objective", sw_objective, "fidelity or abs_sz (summary argmax)");

    // compare
    auto* compare = app.add_subcommand("compare", "LA versus optimized bang-bang by ramp time");
    ModelFlags cmp_m;
    cmp_m.attach(compare);
    OutputFlags cmp_o;
    cmp_o.attach(compare, "comparison CSV");
    std::string cmp_tau = "0,0.25,0.5,0.7,0.9,1.1,1.3,1.5,1.75,2.0", cmp_objective = "fidelity";
    compare->add_option("--tau", cmp_tau, "comma-separated ramp times (ms)");
    compare->add_option("--objective", cmp_objective);

    // scaling
    auto* scaling = app.add_subcommand("scaling", "fidelity and QFI versus N");
    ModelFlags sc_m;
    sc_m.attach(scaling);
    OutputFlags sc_o;
    sc_o.attach(scaling, "scaling CSV");
    std::string sc_n = "20,40,60,80", sc_tau = "1.5", sc_objective = "fidelity";
    std::size_t sc_max_dim = 4'000'000;
    scaling->add_option("--n", sc_n, "comma-separated N values");
    scaling->add_option("--tau", sc_tau, "LA ramp times (ms); empty for none");
    scaling->add_option("--max-dim", sc_max_dim, "refuse Hilbert dimensions above this");
    scaling->add_option("--objective", sc_objective);

    // robustness
    auto* robust = app.add_subcommand("robustness", "cat coherence under a longitudinal field");
    ModelFlags rb_m;
    rb_m.attach(robust);
    OutputFlags rb_o;
    rb_o.attach(robust, "robustness CSV");
    std::string rb_bz_khz, rb_bz_j = "0,0.001,0.002,0.005,0.01,0.02,0.05,0.1";
    double rb_la_tau = 2.0, rb_bb_hold = 0.485, rb_bb_b = -1.0;
    int rb_points = 50;
    auto* o_bzk = robust->add_option("--bz-values-khz", rb_bz_khz, "comma-separated b_z values (kHz)");
    robust->add_option("--bz-values-over-j", rb_bz_j, "comma-separated b_z values in units of J")->excludes(o_bzk);
    robust->add_option("--la-tau", rb_la_tau, "LA ramp time (ms)");
    robust->add_option("--bb-hold", rb_bb_hold, "bang-bang hold (ms)");
    robust->add_option("--bb-b-khz", rb_bb_b, "bang-bang hold field (default: best fidelity at that hold)");
    robust->add_option("--output-points", rb_points);

    // measure
    auto* measure = app.add_subcommand("measure", "metrics of a saved state");
    std::string ms_state, ms_out = "-", ms_dist, ms_axis = "z";
    measure->add_option("--state", ms_state, "file written by evolve --save-state")->required();
    measure->add_option("--out", ms_out, "metrics JSON (- for stdout)");
    measure->add_option("--distribution", ms_dist, "spin distribution CSV (m,p)");
    measure->add_option("--axis", ms_axis, "x, y or z")->check(CLI::IsMember({"x", "y", "z"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_validation({e.what()});
    }

    const auto start = Clock::now();
    try {
        omp_set_num_threads(resolve_threads(threads));

        if (*gap) {
            const RunConfig cfg = gap_m.resolve();
            const double bmax = gap_bmax >= 0 ? khz_to_rad(gap_bmax) : cfg.params.b_x0;
            const GapScan scan = gap_scan(cfg.params, bmax, gap_samples);
            const std::string csv = gap_csv(scan);
            emit_text(gap_o.out, csv);
            std::size_t kmin = 0;
            for (std::size_t k = 1; k < scan.gap.size(); ++k)
                if (scan.gap[k] < scan.gap[kmin]) kmin = k;
            emit_summary(gap_o, "gap", cfg, csv,
                         {{"min_gap_khz", rad_to_khz(scan.gap[kmin])}, {"at_b_x_khz", rad_to_khz(scan.b_x[kmin])}},
                         start);
        } else if (*evolve) {
            const RunConfig cfg = ev_m.resolve();
            RampSchedule sched = RampSchedule::constant(0.0, 0.0);
            if (o_bb->count()) {
                const auto v = parse_list(ev_bb, "--bang-bang");
                if (v.size() < 2 || v.size() > 3)
                    throw ValidationError({"--bang-bang expects bhold_khz,thold_ms[,bfinal_khz]"});
                sched = RampSchedule::bang_bang(khz_to_rad(v[0]), v[1], v.size() == 3 ? khz_to_rad(v[2]) : 0.0);
            } else if (o_la->count()) {
                sched = la_schedule(cfg.params, ev_la);
            } else if (o_const->count()) {
                sched = RampSchedule::constant(khz_to_rad(ev_const), ev_duration);
            } else if (o_sched->count()) {
                sched = schedule_from_json(read_json_file(ev_schedule), cfg.params);
            } else {
                throw ValidationError({"evolve needs one of --bang-bang, --la, --constant, --schedule"});
            }
            PropagationOptions po;
            po.dt = ev_dt;
            po.output_points = ev_points;
            po.compute_qfi = !ev_no_qfi;
            const bool thermal = cfg.params.nbar > 0.0;
            if (thermal && !ev_state_out.empty())
                throw ValidationError({"--save-state needs a pure state (nbar = 0)"});
            const Trajectory tr = thermal ? propagate_thermal(thermal_ensemble(cfg.params.nbar), cfg.params, sched, po)
                                          : propagate(x_polarized_state(cfg.params), cfg.params, sched, po);
            const std::string csv = trajectory_csv(tr);
            emit_text(ev_o.out, csv);
            if (!ev_state_out.empty()) write_file(ev_state_out, serialize_state(tr.final_state, cfg));
            const auto& last = tr.records.back();
            emit_summary(ev_o, "evolve", cfg, csv,
                         {{"schedule", to_string(sched.kind())},
                          {"duration_ms", sched.duration()},
                          {"final_fidelity", last.fidelity},
                          {"final_abs_sz_per_n", last.abs_sz / cfg.params.n_spins},
                          {"final_qfi", last.qfi ? json(*last.qfi) : json(nullptr)}},
                         start);
        } else if (*sweep) {
            const RunConfig cfg = sw_m.resolve();
            const Objective objective = parse_objective(sw_objective);
            SweepGrid grid;
            for (double b : parse_axis(sw_b, "--b-hold")) grid.b_hold_values.push_back(b * cfg.params.coupling_j());
            grid.t_hold_values = parse_axis(sw_t, "--t-hold");
            SweepOptions so;
            so.checkpoint_path = !sw_checkpoint.empty() ? sw_checkpoint : sw_o.out != "-" ? sw_o.out + ".partial" : "";
            const SweepResult res = sweep_bang_bang(cfg.params, grid, so);
            const std::string csv = sweep_csv(res, cfg.params);
            emit_text(sw_o.out, csv);
            emit_summary(sw_o, "sweep", cfg, csv,
                         {{"objective", sw_objective},
                          {"best", cell_json(res.best(objective), cfg.params)},
                          {"argmax_fidelity", cell_json(res.argmax_fidelity, cfg.params)},
                          {"argmax_abs_sz_per_n", cell_json(res.argmax_abs_sz, cfg.params)},
                          {"rows", res.fidelity.size()}},
                         start);
            if (!so.checkpoint_path.empty()) std::filesystem::remove(so.checkpoint_path);
        } else if (*compare) {
            const RunConfig cfg = cmp_m.resolve();
            CompareOptions co;
            co.objective = parse_objective(cmp_objective);
            const Comparison cmp = compare_protocols(cfg.params, parse_list(cmp_tau, "--tau"), co);
            const std::string csv = comparison_csv(cmp);
            emit_text(cmp_o.out, csv);
            emit_summary(cmp_o, "compare", cfg, csv,
                         {{"crossover_ms", cmp.crossover ? json(*cmp.crossover) : json(nullptr)}}, start);
        } else if (*scaling) {
            const RunConfig cfg = sc_m.resolve();
            std::vector<int> ns;
            for (double n : parse_list(sc_n, "--n")) {
                if (n != std::floor(n)) throw ValidationError({"--n values must be integers"});
                ns.push_back(static_cast<int>(n));
            }
            ScalingOptions so;
            so.objective = parse_objective(sc_objective);
            so.max_dim = sc_max_dim;
            const auto rows = scaling_study(ns, cfg.params, sc_tau.empty() ? std::vector<double>{}
                                                                           : parse_list(sc_tau, "--tau"), so);
            const std::string csv = scaling_csv(rows);
            emit_text(sc_o.out, csv);
            json res = json::array();
            for (const auto& r : rows)
                res.push_back({{"n_spins", r.n_spins}, {"protocol", r.protocol}, {"tau_ms", r.tau},
                               {"fidelity", r.fidelity}, {"qfi_over_n2", nullable(r.qfi / (double(r.n_spins) * r.n_spins))}});
            emit_summary(sc_o, "scaling", cfg, csv, {{"rows", res}}, start);
        } else if (*robust) {
            const RunConfig cfg = rb_m.resolve();
            ModelParams base = cfg.params;
            base.b_z = 0.0;
            std::vector<double> bz;
            if (o_bzk->count())
                for (double b : parse_list(rb_bz_khz, "--bz-values-khz")) bz.push_back(khz_to_rad(b));
            else
                for (double b : parse_list(rb_bz_j, "--bz-values-over-j")) bz.push_back(b * base.coupling_j());
            double b_hold = khz_to_rad(rb_bb_b);
            if (rb_bb_b < 0) {
                const SweepResult s = sweep_bang_bang(base, {default_sweep_grid(base).b_hold_values, {rb_bb_hold}});
                b_hold = s.argmax_fidelity.b_hold;
            }
            PropagationOptions po;
            po.output_points = rb_points;
            const std::vector<LabeledSchedule> protocols = {
                {"la", la_schedule(base, rb_la_tau)},
                {"bang_bang", RampSchedule::bang_bang(b_hold, rb_bb_hold)},
            };
            const auto samples = longitudinal_robustness(base, bz, protocols, po);
            const std::string csv = robustness_csv(samples);
            emit_text(rb_o.out, csv);
            json fin = json::array();
            for (const auto& s : final_samples(samples))
                fin.push_back({{"bz_khz", rad_to_khz(s.b_z)}, {"protocol", s.protocol}, {"coherence_abs", s.coherence_abs}});
            emit_summary(rb_o, "robustness", cfg, csv, {{"bang_bang_b_hold_khz", rad_to_khz(b_hold)}, {"final", fin}},
                         start);
        } else if (*measure) {
            std::ifstream in(ms_state);
            if (!in) throw ValidationError({"cannot read " + ms_state});
            std::stringstream buf;
            buf << in.rdbuf();
            const LoadedState st = deserialize_state(buf.str());
            const ModelParams& p = st.config.params;
            const Basis basis(p);
            const json m = {
                {"fidelity", fidelity_to_cat(st.psi, p)},
                {"qfi", qfi(st.psi, basis)},
                {"coherence_abs", std::abs(coherence_extremal(st.psi, p).value)},
                {"abs_sz", spin_distribution(st.psi, basis, Axis::Z).abs_mean()},
                {"parity", parity_of(st.psi, basis).real()},
            };
            emit_text(ms_out, dump_json(m));
            if (!ms_dist.empty()) {
                const Axis axis = ms_axis == "x" ? Axis::X : ms_axis == "y" ? Axis::Y : Axis::Z;
                write_file(ms_dist, distribution_csv(spin_distribution(st.psi, basis, axis)));
            }
        }
    } catch (const ValidationError& e) {
        return report_validation(e.problems());
    } catch (const NumericalError& e) {
        return report_numerical(e.what());
    } catch (const json::exception& e) {
        return report_validation({e.what()});
    } catch (const std::exception& e) {
        return report_numerical(e.what());
    }
    return 0;
}
