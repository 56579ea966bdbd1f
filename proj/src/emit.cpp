#include "dicke/emit.hpp"

#include "dicke/errors.hpp"
#include "dicke/hash.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dicke {

std::string fmt12(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x); // no "-0"
    return buf;
}

namespace {

template <typename... Ts>
void row(std::ostringstream& out, const Ts&... fields) {
    bool first = true;
    ((out << (first ? "" : ",") << fields, first = false), ...);
    out << '\n';
}

} // namespace

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << kTrajectoryHeader << '\n';
    for (const auto& r : traj.records)
        row(out, fmt12(r.t), fmt12(rad_to_khz(r.b_x)), fmt12(r.sx), fmt12(r.sy), fmt12(r.sz), fmt12(r.abs_sz),
            fmt12(r.parity), fmt12(r.nph), fmt12(rad_to_khz(r.energy)), fmt12(r.fidelity),
            r.qfi ? fmt12(*r.qfi) : std::string());
    return out.str();
}

std::string gap_csv(const GapScan& scan) {
    std::ostringstream out;
    out << "b_x_khz,gap_khz,ground_energy_khz,parity\n";
    for (std::size_t k = 0; k < scan.b_x.size(); ++k)
        row(out, fmt12(rad_to_khz(scan.b_x[k])), fmt12(rad_to_khz(scan.gap[k])),
            fmt12(rad_to_khz(scan.ground_energy[k])), scan.parity[k]);
    return out.str();
}

std::string sweep_csv(const SweepResult& res, const ModelParams& params) {
    std::ostringstream out;
    out << "b_hold_khz,b_hold_over_j,t_hold_ms,fidelity,abs_sz_per_n,qfi\n";
    const double j = params.coupling_j();
    for (std::size_t r = 0; r < res.grid.b_hold_values.size(); ++r)
        for (std::size_t c = 0; c < res.grid.t_hold_values.size(); ++c) {
            const double b = res.grid.b_hold_values[r];
            row(out, fmt12(rad_to_khz(b)), fmt12(b / j), fmt12(res.grid.t_hold_values[c]),
                fmt12(res.fidelity(r, c)), fmt12(res.abs_sz(r, c)), fmt12(res.qfi(r, c)));
        }
    return out.str();
}

std::string comparison_csv(const Comparison& cmp) {
    std::ostringstream out;
    out << "tau_ms,f_bang_bang,b_hold_khz,t_hold_ms,f_la\n";
    for (const auto& r : cmp.rows)
        row(out, fmt12(r.tau), fmt12(r.f_bang_bang), fmt12(rad_to_khz(r.b_hold)), fmt12(r.t_hold), fmt12(r.f_la));
    return out.str();
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::ostringstream out;
    out << "n_spins,protocol,tau_ms,b_hold_khz,fidelity,qfi,qfi_over_n2\n";
    for (const auto& r : rows) {
        const double n2 = double(r.n_spins) * r.n_spins;
        row(out, r.n_spins, r.protocol, fmt12(r.tau), fmt12(rad_to_khz(r.b_hold)), fmt12(r.fidelity),
            fmt12(r.qfi), fmt12(r.qfi / n2));
    }
    return out.str();
}

std::string robustness_csv(const std::vector<RobustnessSample>& samples) {
    std::ostringstream out;
    out << "bz_khz,protocol,t_ms,coherence_abs,parity,fidelity\n";
    for (const auto& s : samples)
        row(out, fmt12(rad_to_khz(s.b_z)), s.protocol, fmt12(s.t), fmt12(s.coherence_abs), fmt12(s.parity),
            fmt12(s.fidelity));
    return out.str();
}

std::string distribution_csv(const SpinDistribution& dist) {
    std::ostringstream out;
    out << "m,p\n";
    for (Eigen::Index k = 0; k < dist.probs.size(); ++k) row(out, fmt12(dist.m_of(int(k))), fmt12(dist.probs[k]));
    return out.str();
}

std::string params_hash(const RunConfig& cfg) { return hex64(fnv1a64(cfg.to_json().dump())); }

std::string content_hash(const std::string& content) { return hex64(fnv1a64(content)); }

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError({"cannot write " + path});
        out << content;
        if (!out.flush()) throw ValidationError({"cannot write " + path});
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw ValidationError({"cannot write " + path + ": " + ec.message()});
}

std::string serialize_state(const QuantumState& psi, const RunConfig& cfg) {
    json j;
    j["format"] = "dicke-state/1";
    j["params"] = cfg.to_json();
    std::vector<double> re(psi.size()), im(psi.size());
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        re[k] = psi[k].real();
        im[k] = psi[k].imag();
    }
    j["re"] = re;
    j["im"] = im;
    return j.dump() + "\n";
}

LoadedState deserialize_state(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("state file: ") + e.what()});
    }
    if (!j.is_object() || j.value("format", "") != "dicke-state/1" || !j.contains("params") ||
        !j["re"].is_array() || !j["im"].is_array())
        throw ValidationError({"state file is not in dicke-state/1 format"});
    LoadedState s;
    s.config = parse_config(j["params"]);
    const auto& re = j["re"];
    const auto& im = j["im"];
    if (re.size() != im.size() || re.size() != s.config.params.dim())
        throw ValidationError({"state length " + std::to_string(re.size()) + " does not match dimension " +
                               std::to_string(s.config.params.dim())});
    s.psi.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t k = 0; k < re.size(); ++k) s.psi[k] = cplx(re[k].get<double>(), im[k].get<double>());
    return s;
}

} // namespace dicke
