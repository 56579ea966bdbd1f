#include "dicke/config.hpp"

#include "dicke/errors.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <set>

namespace dicke {

namespace {

const std::set<std::string> kKnownKeys = {
    "n_spins", "g_khz",  "delta_khz", "bx0_khz",       "bz_khz",            "gamma_per_s",
    "nbar",    "n_max",  "label",     "normalization", "transverse_factor", "preset",
};

const char* to_string(SpinNormalization n) { return n == SpinNormalization::FullPauli ? "pauli" : "half_spin"; }

} // namespace

json RunConfig::to_json() const {
    const ModelParams& p = params;
    json j = json::object();
    j["n_spins"] = p.n_spins;
    j["g_khz"] = rad_to_khz(p.g);
    j["delta_khz"] = rad_to_khz(p.delta);
    j["bx0_khz"] = rad_to_khz(p.b_x0);
    j["bz_khz"] = rad_to_khz(p.b_z);
    j["gamma_per_s"] = p.gamma_dephase * 1e3;
    j["nbar"] = p.nbar;
    j["n_max"] = p.n_max;
    j["normalization"] = to_string(p.normalization);
    j["transverse_factor"] = p.transverse_factor;
    if (!label.empty()) j["label"] = label;
    if (!preset.empty()) j["preset"] = preset;
    return j;
}

std::optional<json> preset_config(const std::string& name) {
    if (name == "fig3")
        return json{{"n_spins", 75}, {"g_khz", 0.935}, {"delta_khz", -1.0}, {"bx0_khz", 7.0},
                    {"nbar", 6.0},   {"gamma_per_s", 60.0}};
    if (name == "fig5")
        return json{{"n_spins", 20}, {"g_khz", 0.935}, {"delta_khz", -4.0}, {"bx0_khz", 7.0}};
    return std::nullopt;
}

RunConfig parse_config(const json& base, const json& overrides) {
    std::vector<std::string> errs;
    if (!base.is_object()) throw ValidationError({"config must be a JSON object"});
    if (!overrides.is_object()) throw ValidationError({"overrides must be a JSON object"});

    json merged = json::object();
    std::string preset;
    const json* preset_src = overrides.contains("preset") ? &overrides : base.contains("preset") ? &base : nullptr;
    if (preset_src) {
        const json& v = (*preset_src)["preset"];
        if (!v.is_string()) {
            errs.push_back("preset must be a string");
        } else if (auto p = preset_config(v.get<std::string>())) {
            preset = v.get<std::string>();
            merged = *p;
        } else {
            errs.push_back("unknown preset '" + v.get<std::string>() + "'");
        }
    }
    for (const json* src : {&base, &overrides})
        for (const auto& [k, v] : src->items()) {
            if (!kKnownKeys.count(k)) {
                errs.push_back("unknown key '" + k + "'");
                continue;
            }
            if (k != "preset") merged[k] = v;
        }

    auto number = [&](const char* key, std::optional<double> fallback) -> double {
        if (!merged.contains(key)) {
            if (!fallback) errs.push_back(std::string("missing required key '") + key + "'");
            return fallback.value_or(0.0);
        }
        const json& v = merged[key];
        if (!v.is_number()) {
            errs.push_back(std::string(key) + " must be a number");
            return 0.0;
        }
        return v.get<double>();
    };

    RunConfig cfg;
    cfg.preset = preset;
    int n_spins = 1;
    if (!merged.contains("n_spins")) {
        errs.push_back("missing required key 'n_spins'");
    } else if (!merged["n_spins"].is_number_integer()) {
        errs.push_back("n_spins must be an integer");
    } else {
        n_spins = merged["n_spins"].get<int>();
    }
    const double g = number("g_khz", std::nullopt);
    const double delta = number("delta_khz", std::nullopt);
    const double bx0 = number("bx0_khz", std::nullopt);
    const double bz = number("bz_khz", 0.0);
    const double gamma = number("gamma_per_s", 0.0);
    const double nbar = number("nbar", 0.0);
    const double tfactor = number("transverse_factor", 2.0);

    SpinNormalization norm = SpinNormalization::FullPauli;
    if (merged.contains("normalization")) {
        const json& v = merged["normalization"];
        if (v == "pauli") norm = SpinNormalization::FullPauli;
        else if (v == "half_spin") norm = SpinNormalization::HalfSpin;
        else errs.push_back("normalization must be \"pauli\" or \"half_spin\"");
    }

    int n_max = -1;
    if (merged.contains("n_max")) {
        const json& v = merged["n_max"];
        if (v.is_number_integer()) {
            n_max = v.get<int>();
            if (n_max < 0) errs.push_back("n_max must be >= 0");
        } else if (v != "auto") {
            errs.push_back("n_max must be an integer or \"auto\"");
        }
    }
    if (merged.contains("label")) {
        if (merged["label"].is_string()) cfg.label = merged["label"].get<std::string>();
        else errs.push_back("label must be a string");
    }

    if (n_max < 0 && delta < 0.0 && n_spins >= 1)
        n_max = auto_n_max(n_spins, khz_to_rad(g), khz_to_rad(delta), nbar, norm);
    cfg.params = params_from_lab_units(n_spins, g, delta, bx0, bz, gamma, nbar, std::max(n_max, 0), norm, tfactor);
    for (auto& e : cfg.params.validation_errors()) errs.push_back(std::move(e));
    if (!errs.empty()) throw ValidationError(std::move(errs));
    return cfg;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot read " + path});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({path + ": " + e.what()});
    }
}

int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw ValidationError({"--threads must be >= 1"});
        return *flag;
    }
    if (const char* env = std::getenv("DICKE_RAMP_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) throw ValidationError({"DICKE_RAMP_THREADS must be a positive integer"});
        return static_cast<int>(v);
    }
    return omp_get_num_procs();
}

} // namespace dicke
