// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "qmem/analysis.hpp"
#include "qmem/log.hpp"

namespace qmem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ----------------------------------------------------------------- checker

// Pulls typed values out of a JSON object, filling defaults back in so the
// fully resolved config can be serialized, and collecting every violation.
struct Checker {
    json& root;
    std::vector<std::string>& errors;

    void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

    json* section(const std::string& key, bool create = true) {
        if (!root.contains(key)) {
            if (!create) return nullptr;
            root[key] = json::object();
        }
        if (!root[key].is_object()) {
            fail(key, "must be an object");
            return nullptr;
        }
        return &root[key];
    }

    void allow_keys(const json& obj, const std::string& path,
                    const std::vector<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
        }
    }

    double num(json& obj, const std::string& path, const std::string& key, double def, double lo,
               double hi) {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_number()) {
            fail(path + "." + key, "must be a number");
            return def;
        }
        double v = obj[key].get<double>();
        if (v < lo || v > hi) {
            fail(path + "." + key, "value " + format_double(v) + " outside [" +
                                       format_double(lo) + ", " + format_double(hi) + "]");
            return def;
        }
        return v;
    }

    int integer(json& obj, const std::string& path, const std::string& key, int def, int lo,
                int hi) {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_number_integer()) {
            fail(path + "." + key, "must be an integer");
            return def;
        }
        int v = obj[key].get<int>();
        if (v < lo || v > hi) {
            fail(path + "." + key, "value " + std::to_string(v) + " outside [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return def;
        }
        return v;
    }

    bool flag(json& obj, const std::string& path, const std::string& key, bool def) {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_boolean()) {
            fail(path + "." + key, "must be a boolean");
            return def;
        }
        return obj[key].get<bool>();
    }

    std::string choice(json& obj, const std::string& path, const std::string& key,
                       const std::string& def, const std::vector<std::string>& allowed) {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_string()) {
            fail(path + "." + key, "must be a string");
            return def;
        }
        std::string v = obj[key].get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            fail(path + "." + key, "'" + v + "' is not one of {" + opts + "}");
            return def;
        }
        return v;
    }
};

const std::vector<std::string> kScenarioNames = {
    "store-release",  "cat-entangle", "single-photon", "algebra-check",
    "adiabatic-scan", "propagate-1d", "pulse-matching", "bandwidth-scan"};

ScenarioId scenario_from_string(const std::string& s) {
    for (size_t i = 0; i < kScenarioNames.size(); ++i)
        if (kScenarioNames[i] == s) return static_cast<ScenarioId>(i);
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

bool is_fock_scenario(ScenarioId id) {
    return id == ScenarioId::StoreRelease || id == ScenarioId::CatEntangle ||
           id == ScenarioId::SinglePhoton || id == ScenarioId::AlgebraCheck ||
           id == ScenarioId::AdiabaticScan;
}

std::vector<std::pair<std::string, double>> default_tolerances(ScenarioId id, bool transit) {
    switch (id) {
        case ScenarioId::StoreRelease:
            return {{"release_fidelity_min", 0.99},
                    {"stored_outside_c_max", 1e-2},
                    {"norm_drift_max", 1e-10}};
        case ScenarioId::CatEntangle:
            return {{"release_fidelity_min", 0.99},
                    {"entropy_abs_err_max", 1e-3},
                    {"norm_drift_max", 1e-10}};
        case ScenarioId::SinglePhoton:
            return {{"release_fidelity_min", 0.999}, {"norm_drift_max", 1e-10}};
        case ScenarioId::AlgebraCheck:
            return {{"dark_residual_max", 1e-10},
                    {"commutator_residual_max", 1e-10},
                    {"degeneracy_rel_err_max", 1e-9},
                    {"no_mixing_max", 1e-6}};
        case ScenarioId::AdiabaticScan:
            return {{"monotone_min", 1.0}, {"best_infidelity_max", 1e-2}};
        case ScenarioId::Propagate1d:
            return transit ? std::vector<std::pair<std::string, double>>{
                                 {"velocity_rel_err_max", 0.02}}
                           : std::vector<std::pair<std::string, double>>{
                                 {"split_rel_err_max", 0.02}};
        case ScenarioId::PulseMatching:
            return {{"ratio_rel_err_max", 0.01}, {"fit_rel_err_max", 0.10}};
        case ScenarioId::BandwidthScan:
            return {{"band1_rel_err_max", 0.05}, {"narrowband_transmission_min", 0.95}};
    }
    return {};
}

}  // namespace

std::string to_string(ScenarioId id) { return kScenarioNames[static_cast<size_t>(id)]; }

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        result.errors.push_back(std::string("invalid JSON: ") + e.what());
        return result;
    }
    if (!root.is_object()) {
        result.errors.push_back("top level must be a JSON object");
        return result;
    }

    ScenarioConfig cfg;
    Checker ck{root, result.errors};

    std::string scen = ck.choice(root, "", "scenario", "store-release", kScenarioNames);
    cfg.scenario = scenario_from_string(scen);
    const bool fock = is_fock_scenario(cfg.scenario);

    if (!root.contains("seed")) root["seed"] = 1;
    if (!root["seed"].is_number_integer() || root["seed"].get<std::int64_t>() < 0)
        ck.fail("seed", "must be a non-negative integer");
    else
        cfg.seed = root["seed"].get<std::uint64_t>();

    if (auto* out = ck.section("output")) {
        ck.allow_keys(*out, "output", {"write_csv", "write_binary"});
        cfg.write_csv = ck.flag(*out, "output", "write_csv", true);
        cfg.write_binary = ck.flag(*out, "output", "write_binary", false);
    }

    std::vector<std::string> allowed_root = {"scenario", "seed", "output", "tolerances"};

    // ------------------------------------------------ fock-engine sections
    if (fock) {
        allowed_root.insert(allowed_root.end(), {"coupling", "fock"});
        if (auto* cp = ck.section("coupling")) {
            ck.allow_keys(*cp, "coupling",
                          {"g1_rad_per_s", "g2_rad_per_s", "atom_count", "gamma_rad_per_s"});
            cfg.coupling.g1 = ck.num(*cp, "coupling", "g1_rad_per_s", 1e5, 1e-12, 1e15);
            cfg.coupling.g2 = ck.num(*cp, "coupling", "g2_rad_per_s", 1e5, 1e-12, 1e15);
            cfg.coupling.atom_count = ck.num(*cp, "coupling", "atom_count", 1e8, 1.0, 1e15);
            cfg.coupling.gamma = ck.num(*cp, "coupling", "gamma_rad_per_s", 0.0, 0.0, 1e15);
        }
        int default_cutoff = 12;
        if (cfg.scenario == ScenarioId::CatEntangle) default_cutoff = 10;
        if (cfg.scenario == ScenarioId::SinglePhoton) default_cutoff = 4;
        if (cfg.scenario == ScenarioId::AlgebraCheck) default_cutoff = 8;
        if (auto* fk = ck.section("fock")) {
            ck.allow_keys(*fk, "fock", {"cutoff"});
            cfg.cutoff = ck.integer(*fk, "fock", "cutoff", default_cutoff, 0,
                                    FockSpace::kMaxCutoff);
        }
    }

    const double gref = std::sqrt(cfg.coupling.gn1() * cfg.coupling.gn2());

    if (fock && cfg.scenario != ScenarioId::AlgebraCheck) {
        allowed_root.push_back("protocol");
        if (auto* pr = ck.section("protocol")) {
            ck.allow_keys(*pr, "protocol",
                          {"input", "release_angle_rad", "control_max_rad_per_s",
                           "ramp_duration_s", "hold_duration_s", "dt_s", "samples_per_segment"});
            if (!pr->contains("input")) (*pr)["input"] = json::object();
            json& in = (*pr)["input"];
            if (!in.is_object()) {
                ck.fail("protocol.input", "must be an object");
            } else {
                ck.allow_keys(in, "protocol.input", {"alpha_re", "alpha_im", "mode", "cat_sign"});
                double are = ck.num(in, "protocol.input", "alpha_re", 1.0, -8.0, 8.0);
                double aim = ck.num(in, "protocol.input", "alpha_im", 0.0, -8.0, 8.0);
                cfg.protocol.input.alpha = Complex(are, aim);
                cfg.protocol.input.mode = ck.integer(in, "protocol.input", "mode", 2, 1, 2);
                std::string sign =
                    ck.choice(in, "protocol.input", "cat_sign", "minus", {"plus", "minus"});
                cfg.protocol.input.cat_sign = sign == "plus" ? CatSign::Plus : CatSign::Minus;
            }
            switch (cfg.scenario) {
                case ScenarioId::CatEntangle:
                    cfg.protocol.input.kind = InputKind::Cat;
                    break;
                case ScenarioId::SinglePhoton:
                    cfg.protocol.input.kind = InputKind::SinglePhoton;
                    break;
                default:
                    cfg.protocol.input.kind = InputKind::Coherent;
                    break;
            }

            cfg.protocol.release_angle =
                ck.num(*pr, "protocol", "release_angle_rad", kPi / 4.0, 0.0, kHalfPi);
            double omax_def = (cfg.scenario == ScenarioId::SinglePhoton ? 80.0 : 25.0) * gref;
            cfg.protocol.omega_max =
                ck.num(*pr, "protocol", "control_max_rad_per_s", omax_def, 1e-12, 1e18);
            double ramp_def = (cfg.scenario == ScenarioId::SinglePhoton ? 200.0 : 150.0) / gref;
            cfg.protocol.ramp_duration =
                ck.num(*pr, "protocol", "ramp_duration_s", ramp_def, 1e-300, 1e6);
            cfg.protocol.hold_duration =
                ck.num(*pr, "protocol", "hold_duration_s", 20.0 / gref, 0.0, 1e6);
            cfg.protocol.dt = ck.num(*pr, "protocol", "dt_s", 0.0, 0.0, 1e6);
            cfg.protocol.samples_per_segment =
                ck.integer(*pr, "protocol", "samples_per_segment", 24, 2, 4096);

            // Parameter-level physics checks, reported with the rest.
            double theta0 = std::atan2(gref, cfg.protocol.omega_max);
            if (theta0 > 0.05)
                ck.fail("protocol.control_max_rad_per_s",
                        "controls too weak for the storage protocol: theta(0) = " +
                            format_double(theta0) + " exceeds 0.05 rad");
            if (cfg.scenario != ScenarioId::SinglePhoton) {
                double leak = coherent_truncation_leakage(cfg.protocol.input.alpha, cfg.cutoff);
                if (leak > 1e-6)
                    ck.fail("protocol.input.alpha_re",
                            "coherent amplitude too large for fock.cutoff: truncation leakage " +
                                format_double(leak) + " > 1e-6");
            }
        }
    }

    if (cfg.scenario == ScenarioId::AlgebraCheck) {
        allowed_root.push_back("algebra");
        if (auto* al = ck.section("algebra")) {
            ck.allow_keys(*al, "algebra", {"draws", "max_class_total", "fd_step"});
            cfg.algebra_draws = ck.integer(*al, "algebra", "draws", 20, 1, 500);
            cfg.algebra_max_class_total =
                ck.integer(*al, "algebra", "max_class_total", 4, 0, cfg.cutoff - 2);
            cfg.algebra_fd_step = ck.num(*al, "algebra", "fd_step", 1e-4, 1e-6, 1e-3);
        }
    }

    if (cfg.scenario == ScenarioId::AdiabaticScan) {
        allowed_root.push_back("scan");
        if (auto* sc = ck.section("scan")) {
            ck.allow_keys(*sc, "scan", {"ramp_multipliers"});
            if (!sc->contains("ramp_multipliers"))
                (*sc)["ramp_multipliers"] = json::array({1.0, 2.0, 4.0});
            const json& arr = (*sc)["ramp_multipliers"];
            if (!arr.is_array() || arr.size() < 2) {
                ck.fail("scan.ramp_multipliers", "must be an array of at least 2 values");
            } else {
                double prev = 0.0;
                for (const auto& v : arr) {
                    if (!v.is_number() || v.get<double>() <= prev) {
                        ck.fail("scan.ramp_multipliers",
                                "must be strictly increasing positive numbers");
                        break;
                    }
                    prev = v.get<double>();
                    cfg.ramp_multipliers.push_back(prev);
                }
            }
        }
    }

    // ------------------------------------------------ continuum sections
    if (!fock) {
        allowed_root.insert(allowed_root.end(), {"continuum", "grid", "pulse"});
        if (auto* cn = ck.section("continuum")) {
            ck.allow_keys(*cn, "continuum",
                          {"gn1_rad_per_s", "gn2_rad_per_s", "gamma_rad_per_s",
                           "light_speed_m_per_s", "medium_length_m", "atom_count"});
            cfg.continuum.gn1 = ck.num(*cn, "continuum", "gn1_rad_per_s", 1e9, 1e-12, 1e18);
            cfg.continuum.gn2 = ck.num(*cn, "continuum", "gn2_rad_per_s", 1e9, 1e-12, 1e18);
            cfg.continuum.gamma = ck.num(*cn, "continuum", "gamma_rad_per_s", 1e8, 0.0, 1e18);
            cfg.continuum.light_speed =
                ck.num(*cn, "continuum", "light_speed_m_per_s", 299792458.0, 1e-6, 1e12);
            cfg.continuum.medium_length =
                ck.num(*cn, "continuum", "medium_length_m", 120.0, 1e-9, 1e9);
            cfg.continuum.atom_count = ck.num(*cn, "continuum", "atom_count", 1e8, 1.0, 1e18);
        }
        if (auto* gr = ck.section("grid")) {
            ck.allow_keys(*gr, "grid", {"cells", "pad_length_m"});
            cfg.cells = ck.integer(*gr, "grid", "cells", 2000, 64, 400000);
            cfg.pad_length = ck.num(*gr, "grid", "pad_length_m", 6.0, 0.0, 1e9);
        }
        if (auto* pu = ck.section("pulse")) {
            ck.allow_keys(*pu, "pulse", {"field", "peak", "center_s", "sigma_s"});
            cfg.pulse.field = ck.integer(*pu, "pulse", "field", 1, 1, 2);
            cfg.pulse.peak = ck.num(*pu, "pulse", "peak", 1e-3, 1e-12, 10.0);
            cfg.pulse.center = ck.num(*pu, "pulse", "center_s", 0.0, 0.0, 1e6);
            cfg.pulse.sigma = ck.num(*pu, "pulse", "sigma_s", 0.0, 0.0, 1e6);
        }
    }

    if (cfg.scenario == ScenarioId::Propagate1d) {
        allowed_root.push_back("run");
        if (auto* rn = ck.section("run")) {
            ck.allow_keys(*rn, "run",
                          {"mode", "theta_rad", "theta_on_rad", "phi_e_rad", "off_at_s", "on_at_s",
                           "ramp_s", "measure_at_s", "duration_s"});
            std::string mode = ck.choice(*rn, "run", "mode", "transit", {"transit",
                                                                         "store-release"});
            cfg.transit_mode = mode == "transit";
            cfg.theta = ck.num(*rn, "run", "theta_rad", kPi / 4.0, 1e-3, kHalfPi - 1e-3);
            cfg.theta_on = ck.num(*rn, "run", "theta_on_rad", 0.35, 1e-3, kHalfPi - 1e-3);
            cfg.phi_e = ck.num(*rn, "run", "phi_e_rad", kPi / 4.0, 0.0, kHalfPi);
            cfg.off_at = ck.num(*rn, "run", "off_at_s", 0.0, 0.0, 1e6);
            cfg.on_at = ck.num(*rn, "run", "on_at_s", 0.0, 0.0, 1e6);
            cfg.ramp = ck.num(*rn, "run", "ramp_s", 0.0, 0.0, 1e6);
            cfg.measure_at = ck.num(*rn, "run", "measure_at_s", 0.0, 0.0, 1e6);
            cfg.duration = ck.num(*rn, "run", "duration_s", 0.0, 0.0, 1e6);
        }
    }

    if (cfg.scenario == ScenarioId::PulseMatching) {
        allowed_root.push_back("matching");
        if (auto* ma = ck.section("matching")) {
            ck.allow_keys(*ma, "matching",
                          {"omega1_rad_per_s", "omega2_rad_per_s", "fit_t0_s", "fit_t1_s",
                           "measure_at_s", "duration_s"});
            cfg.match_omega1 = ck.num(*ma, "matching", "omega1_rad_per_s", 2.5e7, 0.0, 1e18);
            cfg.match_omega2 = ck.num(*ma, "matching", "omega2_rad_per_s", 2.5e7, 0.0, 1e18);
            cfg.fit_t0 = ck.num(*ma, "matching", "fit_t0_s", 0.0, 0.0, 1e6);
            cfg.fit_t1 = ck.num(*ma, "matching", "fit_t1_s", 0.0, 0.0, 1e6);
            cfg.ratio_at = ck.num(*ma, "matching", "measure_at_s", 0.0, 0.0, 1e6);
            cfg.duration = ck.num(*ma, "matching", "duration_s", 0.0, 0.0, 1e6);
            if (cfg.match_omega1 + cfg.match_omega2 <= 0.0)
                ck.fail("matching.omega1_rad_per_s", "controls must not both vanish");
        }
    }

    if (cfg.scenario == ScenarioId::BandwidthScan) {
        allowed_root.push_back("bandwidth");
        if (auto* bw = ck.section("bandwidth")) {
            ck.allow_keys(*bw, "bandwidth",
                          {"theta_before_rad", "theta_after_rad", "cells", "narrow_fraction",
                           "broad_fraction", "pulse_peak"});
            cfg.bandwidth.theta_before =
                ck.num(*bw, "bandwidth", "theta_before_rad", kPi / 6.0, 1e-3, kHalfPi - 1e-3);
            cfg.bandwidth.theta_after =
                ck.num(*bw, "bandwidth", "theta_after_rad", kPi / 3.0, 1e-3, kHalfPi - 1e-3);
            cfg.bandwidth.cells = ck.integer(*bw, "bandwidth", "cells", 3000, 64, 400000);
            cfg.bandwidth.narrow_fraction =
                ck.num(*bw, "bandwidth", "narrow_fraction", 0.1, 1e-3, 1.0);
            cfg.bandwidth.broad_fraction =
                ck.num(*bw, "bandwidth", "broad_fraction", 2.0, 1.0, 10.0);
            cfg.bandwidth.pulse_peak = ck.num(*bw, "bandwidth", "pulse_peak", 1e-3, 1e-12, 10.0);
            cfg.bandwidth.pad_length = cfg.pad_length;
        }
    }

    // ------------------------------------------------ tolerances
    {
        bool transit = cfg.transit_mode;
        auto defaults = default_tolerances(cfg.scenario, transit);
        if (auto* tol = ck.section("tolerances")) {
            std::vector<std::string> names;
            for (const auto& [k, v] : defaults) names.push_back(k);
            ck.allow_keys(*tol, "tolerances", names);
            for (const auto& [k, v] : defaults)
                cfg.tolerances.emplace_back(k, ck.num(*tol, "tolerances", k, v, 0.0, 1e300));
        }
    }

    ck.allow_keys(root, "", allowed_root);

    if (!result.errors.empty()) return result;
    cfg.resolved = root;
    result.config = cfg;
    return result;
}

std::string serialize_config(const ScenarioConfig& config) { return config.resolved.dump(2); }

std::uint64_t config_hash(const ScenarioConfig& config) {
    const std::string text = config.resolved.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json RunSummary::to_json(const json& resolved_config) const {
    json out;
    out["scenario"] = scenario;
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    out["config_hash"] = hex;
    out["pass"] = pass;
    json ms = json::array();
    for (const auto& m : metrics) {
        json j;
        j["name"] = m.name;
        j["value"] = m.value;
        j["kind"] = m.kind;
        if (m.kind != "report") j["threshold"] = m.threshold;
        j["pass"] = m.pass;
        ms.push_back(j);
    }
    out["metrics"] = ms;
    out["resolved_config"] = resolved_config;
    return out;
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

namespace {

class MetricSet {
public:
    explicit MetricSet(const std::vector<std::pair<std::string, double>>& tolerances)
        : tolerances_(tolerances) {}

    // Records a value; when a matching "<name>_min"/"<name>_max" tolerance
    // was declared, attach threshold and verdict.
    void add(const std::string& base_name, double value) {
        Metric m;
        m.name = base_name;
        m.value = value;
        m.kind = "report";
        for (const auto& [tname, threshold] : tolerances_) {
            if (tname == base_name + "_min") {
                m.kind = "min";
                m.threshold = threshold;
                m.pass = value >= threshold;
            } else if (tname == base_name + "_max") {
                m.kind = "max";
                m.threshold = threshold;
                m.pass = value <= threshold;
            }
        }
        metrics_.push_back(m);
    }

    std::vector<Metric> take() { return std::move(metrics_); }

private:
    const std::vector<std::pair<std::string, double>>& tolerances_;
    std::vector<Metric> metrics_;
};

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << contents;
}

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    row += '\n';
    return row;
}

void write_trace_csv(const std::string& path, const ScenarioTrace& trace) {
    std::string text = "t_s,energy_e1,energy_e2,energy_atoms,s_norm,psi_norm,phi_norm,peak_z_m\n";
    for (size_t i = 0; i < trace.times.size(); ++i)
        text += csv_row({trace.times[i], trace.energy_e1[i], trace.energy_e2[i],
                         trace.energy_atoms[i], trace.s_norm[i], trace.psi_norm[i],
                         trace.phi_norm[i], trace.psi_peak_z[i]});
    write_text_file(path, text);
}

void write_spacetime_csv(const std::string& path, const std::vector<Snapshot>& snapshots,
                         double dz) {
    std::string text = "t_s,z_m,e1_re,e1_im,e2_re,e2_im,sigma_bc_re,sigma_bc_im\n";
    for (const auto& snap : snapshots) {
        for (int j = 0; j < snap.e1.size(); ++j) {
            text += csv_row({snap.time, j * dz, snap.e1[j].real(), snap.e1[j].imag(),
                             snap.e2[j].real(), snap.e2[j].imag(), snap.sigma_bc[j].real(),
                             snap.sigma_bc[j].imag()});
        }
    }
    write_text_file(path, text);
}

// Compact binary record: magic, counts, dz, then per snapshot the time
// followed by (e1, e2, sigma_bc) interleaved re/im doubles per cell.
void write_spacetime_binary(const std::string& path, const std::vector<Snapshot>& snapshots,
                            double dz) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const char magic[8] = {'Q', 'M', 'E', 'M', '1', 'D', 'B', '1'};
    out.write(magic, 8);
    std::uint64_t n_snap = snapshots.size();
    std::uint64_t cells = snapshots.empty() ? 0 : static_cast<std::uint64_t>(snapshots[0].e1.size());
    out.write(reinterpret_cast<const char*>(&n_snap), 8);
    out.write(reinterpret_cast<const char*>(&cells), 8);
    out.write(reinterpret_cast<const char*>(&dz), 8);
    for (const auto& snap : snapshots) {
        out.write(reinterpret_cast<const char*>(&snap.time), 8);
        auto dump = [&](const Vector& v) {
            for (int j = 0; j < v.size(); ++j) {
                double re = v[j].real(), im = v[j].imag();
                out.write(reinterpret_cast<const char*>(&re), 8);
                out.write(reinterpret_cast<const char*>(&im), 8);
            }
        };
        dump(snap.e1);
        dump(snap.e2);
        dump(snap.sigma_bc);
    }
}

// ------------------------------------------------------------ fock family

RunSummary run_protocol_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
    FockSpace space(cfg.cutoff);
    ProtocolResult res = cfg.scenario == ScenarioId::CatEntangle
                             ? run_cat_protocol(space, cfg.coupling, cfg.protocol)
                             : run_storage_release(space, cfg.coupling, cfg.protocol);

    MetricSet metrics(cfg.tolerances);
    metrics.add("release_fidelity", res.release_fidelity.value_or(0.0));
    metrics.add("stored_outside_c", res.diagnostics.stored_population_outside_c);
    metrics.add("norm_drift", res.diagnostics.max_norm_drift);
    metrics.add("excitation_drift", res.diagnostics.max_excitation_drift);
    metrics.add("min_dark_population", res.diagnostics.min_dark_population);

    if (cfg.scenario == ScenarioId::CatEntangle) {
        double entropy =
            entanglement_entropy(reduce(space, res.final_state, {Mode::ProbeOne}));
        double expected = entanglement_vs_release_angle(std::abs(cfg.protocol.input.alpha),
                                                        cfg.protocol.input.cat_sign,
                                                        {cfg.protocol.release_angle})[0]
                              .entropy_bits;
        metrics.add("entropy_bits", entropy);
        metrics.add("entropy_expected_bits", expected);
        metrics.add("entropy_abs_err", std::abs(entropy - expected));
    }

    if (!out_dir.empty() && cfg.write_csv) {
        std::string text = "t_s,theta_rad,phi_rad,dark_population\n";
        const auto& d = res.diagnostics;
        for (size_t i = 0; i < d.times.size(); ++i)
            text += csv_row({d.times[i], d.theta[i], d.phi[i], d.dark_population[i]});
        write_text_file(out_dir + "/diagnostics.csv", text);
    }

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

RunSummary run_algebra_check(const ScenarioConfig& cfg, const std::string& out_dir) {
    FockSpace space(cfg.cutoff);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int restrict_total = cfg.cutoff - 1;
    double dark_residual = 0.0;
    double commutator_residual = 0.0;
    double degeneracy_err = 0.0;
    double no_mixing = 0.0;

    std::string log_rows = "draw,check,value\n";
    for (int draw = 0; draw < cfg.algebra_draws; ++draw) {
        // Independent couplings for the dark-state part.
        CouplingParams p;
        p.g1 = cfg.coupling.g1 * (0.5 + 1.5 * unit(rng));
        p.g2 = cfg.coupling.g2 * (0.5 + 1.5 * unit(rng));
        p.atom_count = std::floor(25.0 + 375.0 * unit(rng));
        double gref = std::sqrt(p.gn1() * p.gn2());
        double o1 = 3.0 * gref * unit(rng);
        double o2 = 3.0 * gref * unit(rng);
        if (o1 == 0.0 && o2 == 0.0) o1 = gref;

        SparseMatrix v = build_hamiltonian(space, p, o1, o2);
        auto angles = mixing_angles(p, o1, o2);
        double vnorm = cfg.cutoff * polariton_energies(p, o1, o2).eps1;
        for (int n = 0; n <= 3 && n <= cfg.cutoff; ++n) {
            StateVector dn = dark_state(space, n, angles);
            double r = (v * dn.amplitudes).norm() / vnorm;
            dark_residual = std::max(dark_residual, r);
        }
        auto set_any = polariton_set(space, p, o1, o2);
        {
            SparseMatrix r = restrict_columns(
                space, commutator(v, adjoint(set_any.dark)), restrict_total);
            commutator_residual = std::max(commutator_residual, max_abs_entry(r));
        }

        // Equal couplings for the ladder relations and the degeneracy class.
        CouplingParams q = p;
        q.g2 = q.g1;
        SparseMatrix vq = build_hamiltonian(space, q, o1, o2);
        auto set = polariton_set(space, q, o1, o2);
        auto ladder_residual = [&](const SparseMatrix& op, double shift) {
            SparseMatrix opd = adjoint(op);
            SparseMatrix r = commutator(vq, opd) - shift * opd;
            return max_abs_entry(restrict_columns(space, r, restrict_total));
        };
        commutator_residual = std::max(
            {commutator_residual, ladder_residual(set.q_plus, set.eps1),
             ladder_residual(set.q_minus, -set.eps1), ladder_residual(set.p_plus, set.eps2),
             ladder_residual(set.p_minus, -set.eps2)});
        for (const SparseMatrix* a : {&set.p_plus, &set.p_minus})
            for (const SparseMatrix* b : {&set.q_plus, &set.q_minus}) {
                SparseMatrix r = commutator(adjoint(*a), adjoint(*b));
                commutator_residual =
                    std::max(commutator_residual, max_abs_entry(restrict_columns(
                                                      space, r, restrict_total)));
            }

        // Degeneracy spectrum over all index tuples within the class budget.
        const int budget = cfg.algebra_max_class_total;
        for (int i = 0; i <= budget; ++i)
            for (int j = 0; i + j <= budget; ++j)
                for (int k = 0; i + j + k <= budget; ++k)
                    for (int l = 0; i + j + k + l <= budget; ++l)
                        for (int n = 0; i + j + k + l + n <= budget; ++n) {
                            DegeneracyIndex idx{i, j, k, l, n};
                            auto st = degeneracy_state(space, set, idx);
                            double scale = std::max(set.eps2, std::abs(st.eigenvalue));
                            double r = (vq * st.state.amplitudes -
                                        st.eigenvalue * st.state.amplitudes)
                                           .norm() /
                                       scale;
                            degeneracy_err = std::max(degeneracy_err, r);
                        }

        log_rows += std::to_string(draw) + ",dark_residual," + format_double(dark_residual) + "\n";
        log_rows += std::to_string(draw) + ",commutator_residual," +
                    format_double(commutator_residual) + "\n";

        // Finite-difference no-mixing across zero-eigenvalue sectors
        // (three draws keep the runtime in seconds).
        if (draw < 3) {
            std::vector<DegeneracyIndex> zero_class;
            for (int i = 0; 2 * i <= cfg.cutoff - 2; ++i)
                for (int k = 0; 2 * i + 2 * k <= cfg.cutoff - 2; ++k)
                    for (int n = 0; 2 * i + 2 * k + n <= cfg.cutoff - 2; ++n)
                        zero_class.push_back(DegeneracyIndex{i, i, k, k, n});
            for (AngleId which : {AngleId::Theta, AngleId::Phi}) {
                Matrix mix = adiabatic_mixing_matrix(space, set, zero_class, which,
                                                     cfg.algebra_fd_step);
                for (size_t r = 0; r < zero_class.size(); ++r)
                    for (size_t c = 0; c < zero_class.size(); ++c) {
                        if (zero_class[r].i == zero_class[c].i &&
                            zero_class[r].k == zero_class[c].k)
                            continue;
                        no_mixing = std::max(no_mixing, std::abs(mix(r, c)));
                    }
            }
        }
    }

    MetricSet metrics(cfg.tolerances);
    metrics.add("dark_residual", dark_residual);
    metrics.add("commutator_residual", commutator_residual);
    metrics.add("degeneracy_rel_err", degeneracy_err);
    metrics.add("no_mixing", no_mixing);

    if (!out_dir.empty() && cfg.write_csv) write_text_file(out_dir + "/residuals.csv", log_rows);

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

RunSummary run_adiabatic_scan(const ScenarioConfig& cfg, const std::string& out_dir) {
    FockSpace space(cfg.cutoff);
    std::vector<double> infidelities;
    std::string rows = "ramp_multiplier,ramp_duration_s,infidelity\n";
    for (double mult : cfg.ramp_multipliers) {
        ProtocolSpec spec = cfg.protocol;
        spec.ramp_duration = cfg.protocol.ramp_duration * mult;
        auto res = run_storage_release(space, cfg.coupling, spec);
        double infid = 1.0 - res.release_fidelity.value_or(0.0);
        infidelities.push_back(infid);
        rows += csv_row({mult, spec.ramp_duration, infid});
    }
    bool monotone = true;
    for (size_t i = 1; i < infidelities.size(); ++i)
        if (!(infidelities[i] < infidelities[i - 1])) monotone = false;

    MetricSet metrics(cfg.tolerances);
    metrics.add("monotone", monotone ? 1.0 : 0.0);
    metrics.add("best_infidelity", infidelities.back());
    metrics.add("worst_infidelity", infidelities.front());
    if (!out_dir.empty() && cfg.write_csv) write_text_file(out_dir + "/scan.csv", rows);

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

// ------------------------------------------------------- continuum family

RunSummary run_propagate_1d(const ScenarioConfig& cfg, const std::string& out_dir) {
    const ContinuumParams& cp = cfg.continuum;
    const double c = cp.light_speed;
    MetricSet metrics(cfg.tolerances);
    StorageScenarioResult result;

    if (cfg.transit_mode) {
        const double omega_on = cp.gn1 / std::tan(cfg.theta);
        const double ct2 = std::pow(std::cos(cfg.theta), 2);
        const double v_expected = c * ct2;
        double sigma = cfg.pulse.sigma;
        if (sigma <= 0.0)
            sigma = cp.gamma > 0.0
                        ? 12.0 / transparency_window(cp, omega_on, cp.medium_length)
                        : cp.medium_length / (10.0 * c);
        double center = cfg.pulse.center > 0.0 ? cfg.pulse.center : 5.0 * sigma;
        double fit_t0 = center + std::max(3.0 * sigma, 0.15 * cp.medium_length / v_expected);
        double fit_t1 = center + 0.7 * cp.medium_length / v_expected;
        if (fit_t1 <= fit_t0) fit_t1 = fit_t0 + 0.2 * cp.medium_length / v_expected;
        double duration = cfg.duration > 0.0 ? cfg.duration : fit_t1 + 2.0 * sigma;

        ControlSegment seg;
        seg.t_start = 0.0;
        seg.t_end = duration * (1.0 + 1e-9);
        seg.profile = ProfileKind::Constant;
        seg.omega1_start = seg.omega1_end = omega_on;
        StorageScenarioConfig scfg;
        scfg.options.pad_length = cfg.pad_length;
        scfg.options.cells = cfg.cells;
        scfg.options.duration = duration;
        scfg.options.pulse = cfg.pulse;
        scfg.options.pulse.sigma = sigma;
        scfg.options.pulse.center = center;
        scfg.options.trace_stride = 16;
        scfg.options.snapshot_stride =
            cfg.write_csv || cfg.write_binary ? std::max(1, cfg.cells / 8) : 0;
        scfg.velocity_fit_t0 = fit_t0;
        scfg.velocity_fit_t1 = fit_t1;
        result = run_storage_scenario(cp, ControlSchedule({seg}), scfg);

        metrics.add("velocity_m_per_s", result.summary.velocity);
        metrics.add("velocity_expected_m_per_s", v_expected);
        metrics.add("velocity_rel_err",
                    std::abs(result.summary.velocity - v_expected) / v_expected);
    } else {
        const double gref = std::sqrt(cp.gn1 * cp.gn2);
        const double omega_scale = gref / std::tan(cfg.theta_on);
        const double o1_on = omega_scale * cp.gn1 / gref;  // phi = 0 on the way in
        const double o1_rel = omega_scale * std::cos(cfg.phi_e) * cp.gn1 / gref;
        const double o2_rel = omega_scale * std::sin(cfg.phi_e) * cp.gn2 / gref;
        const double v_on = c * std::pow(std::cos(cfg.theta_on), 2);

        double sigma = cfg.pulse.sigma;
        if (sigma <= 0.0)
            sigma = cp.gamma > 0.0 ? 10.0 / transparency_window(cp, o1_on, cp.medium_length)
                                   : cp.medium_length / (20.0 * c);
        double center = cfg.pulse.center > 0.0 ? cfg.pulse.center : 5.0 * sigma;
        double off_at = cfg.off_at > 0.0
                            ? cfg.off_at
                            : center + 3.0 * sigma + 0.25 * cp.medium_length / v_on;
        double ramp = cfg.ramp > 0.0 ? cfg.ramp : 2.0 * sigma;
        double on_at = cfg.on_at > 0.0 ? cfg.on_at : off_at + ramp + 10.0 * ramp;
        double measure_at = cfg.measure_at > 0.0 ? cfg.measure_at : on_at + ramp + 4.0 * sigma;
        double duration = cfg.duration > 0.0 ? cfg.duration : measure_at + 2.0 * sigma;

        std::vector<ControlSegment> segs(5);
        segs[0] = {0.0, off_at, ProfileKind::Constant, o1_on, o1_on, 0.0, 0.0};
        segs[1] = {off_at, off_at + ramp, ProfileKind::CosineRamp, o1_on, 0.0, 0.0, 0.0};
        segs[2] = {off_at + ramp, on_at, ProfileKind::Constant, 0.0, 0.0, 0.0, 0.0};
        segs[3] = {on_at, on_at + ramp, ProfileKind::CosineRamp, 0.0, o1_rel, 0.0, o2_rel};
        segs[4] = {on_at + ramp, duration * (1.0 + 1e-9), ProfileKind::Constant, o1_rel, o1_rel,
                   o2_rel, o2_rel};

        StorageScenarioConfig scfg;
        scfg.options.pad_length = cfg.pad_length;
        scfg.options.cells = cfg.cells;
        scfg.options.duration = duration;
        scfg.options.pulse = cfg.pulse;
        scfg.options.pulse.sigma = sigma;
        scfg.options.pulse.center = center;
        scfg.options.trace_stride = 16;
        scfg.options.snapshot_stride =
            cfg.write_csv || cfg.write_binary ? std::max(1, cfg.cells / 8) : 0;
        scfg.stored_snapshot_time = 0.5 * (off_at + ramp + on_at);
        scfg.measure_time = measure_at;
        result = run_storage_scenario(cp, ControlSchedule(std::move(segs)), scfg);

        const double e1 = result.summary.split_e1, e2 = result.summary.split_e2;
        const double cf2 = std::pow(std::cos(cfg.phi_e), 2);
        const double sf2 = std::pow(std::sin(cfg.phi_e), 2);
        double split_err;
        if (std::min(cf2, sf2) >= 0.05)
            split_err = std::abs((e1 / e2) * (sf2 / cf2) - 1.0);
        else
            split_err = std::abs(e1 / (e1 + e2) - cf2);
        metrics.add("split_e1", e1);
        metrics.add("split_e2", e2);
        metrics.add("split_rel_err", split_err);
        metrics.add("released_fraction", result.summary.released_fraction);
        metrics.add("stored_spin_energy", result.summary.stored_spin_energy);
    }

    metrics.add("low_excitation_ok", result.scenario.low_excitation_ok ? 1.0 : 0.0);

    if (!out_dir.empty()) {
        if (cfg.write_csv) {
            write_trace_csv(out_dir + "/trace.csv", result.scenario.trace);
            if (!result.scenario.snapshots.empty())
                write_spacetime_csv(out_dir + "/spacetime.csv", result.scenario.snapshots,
                                    result.scenario.final_grid.dz);
        }
        if (cfg.write_binary && !result.scenario.snapshots.empty())
            write_spacetime_binary(out_dir + "/spacetime.bin", result.scenario.snapshots,
                                   result.scenario.final_grid.dz);
    }

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

RunSummary run_pulse_matching(const ScenarioConfig& cfg, const std::string& out_dir) {
    const ContinuumParams& cp = cfg.continuum;
    PulseMatchingConfig pm;
    pm.omega1 = cfg.match_omega1;
    pm.omega2 = cfg.match_omega2;

    const double rate = mismatch_decay_rate(cp, pm.omega1, pm.omega2);
    double sigma = cfg.pulse.sigma > 0.0 ? cfg.pulse.sigma : 1.0 / (2.0 * rate);
    double center = cfg.pulse.center > 0.0 ? cfg.pulse.center : 5.0 * sigma;
    pm.fit_t0 = cfg.fit_t0 > 0.0 ? cfg.fit_t0 : center + 3.0 * sigma;
    pm.fit_t1 = cfg.fit_t1 > 0.0 ? cfg.fit_t1 : pm.fit_t0 + 2.5 / rate;
    pm.ratio_measure_time = cfg.ratio_at > 0.0 ? cfg.ratio_at : pm.fit_t1;
    pm.options.duration = cfg.duration > 0.0 ? cfg.duration : pm.ratio_measure_time;
    pm.options.pad_length = cfg.pad_length;
    pm.options.cells = cfg.cells;
    pm.options.pulse = cfg.pulse;
    pm.options.pulse.sigma = sigma;
    pm.options.pulse.center = center;
    pm.options.trace_stride = 8;

    auto result = pulse_matching_probe(cp, pm);

    MetricSet metrics(cfg.tolerances);
    double ratio_err = result.tan_phi > 0.0
                           ? std::abs(result.e2_over_e1 - result.tan_phi) / result.tan_phi
                           : std::abs(result.e2_over_e1);
    metrics.add("e2_over_e1", result.e2_over_e1);
    metrics.add("tan_phi", result.tan_phi);
    metrics.add("ratio_rel_err", ratio_err);
    metrics.add("theory_decay_rate_per_s", result.theory_decay_rate);
    metrics.add("theory_lifetime_s", result.theory_lifetime);
    metrics.add("fit_valid", result.fit_valid ? 1.0 : 0.0);
    if (result.fit_valid) {
        metrics.add("fitted_decay_rate_per_s", result.fitted_decay_rate);
        metrics.add("fit_rel_err", std::abs(result.fitted_decay_rate - result.theory_decay_rate) /
                                       result.theory_decay_rate);
    }

    if (!out_dir.empty() && cfg.write_csv)
        write_trace_csv(out_dir + "/trace.csv", result.scenario.trace);

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

RunSummary run_bandwidth_scan(const ScenarioConfig& cfg, const std::string& out_dir) {
    BandwidthConfig bc = cfg.bandwidth;
    bc.pad_length = cfg.pad_length;
    auto report = bandwidth_scan(cfg.continuum, bc);

    MetricSet metrics(cfg.tolerances);
    metrics.add("band1_width_ratio", report.width_ratio_measured);
    metrics.add("band1_predicted", report.width_ratio_predicted);
    metrics.add("band1_rel_err",
                std::abs(report.width_ratio_measured / report.width_ratio_predicted - 1.0));
    metrics.add("band2_window_ratio", report.window_ratio_measured);
    metrics.add("band2_predicted", report.window_ratio_predicted);
    metrics.add("band2_rel_err",
                std::abs(report.window_ratio_measured / report.window_ratio_predicted - 1.0));
    metrics.add("band4_measured", report.band4_measured);
    metrics.add("band4_consistent", report.band4_consistent);
    metrics.add("narrowband_transmission", report.narrowband_transmission);
    metrics.add("broadband_transmission", report.broadband_transmission);

    if (!out_dir.empty() && cfg.write_csv) {
        std::string text =
            "width_before,width_after,width_ratio,width_ratio_predicted,window_before,"
            "window_after,window_ratio,window_ratio_predicted,band4_measured,band4_consistent,"
            "narrowband_transmission,broadband_transmission\n";
        text += csv_row({report.width_before, report.width_after, report.width_ratio_measured,
                         report.width_ratio_predicted, report.window_before, report.window_after,
                         report.window_ratio_measured, report.window_ratio_predicted,
                         report.band4_measured, report.band4_consistent,
                         report.narrowband_transmission, report.broadband_transmission});
        write_text_file(out_dir + "/bandwidth.csv", text);
    }

    RunSummary summary;
    summary.metrics = metrics.take();
    return summary;
}

}  // namespace

RunSummary run(const ScenarioConfig& config, const std::string& out_dir) {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    auto t_begin = std::chrono::steady_clock::now();

    RunSummary summary;
    switch (config.scenario) {
        case ScenarioId::StoreRelease:
        case ScenarioId::CatEntangle:
        case ScenarioId::SinglePhoton:
            summary = run_protocol_scenario(config, out_dir);
            break;
        case ScenarioId::AlgebraCheck:
            summary = run_algebra_check(config, out_dir);
            break;
        case ScenarioId::AdiabaticScan:
            summary = run_adiabatic_scan(config, out_dir);
            break;
        case ScenarioId::Propagate1d:
            summary = run_propagate_1d(config, out_dir);
            break;
        case ScenarioId::PulseMatching:
            summary = run_pulse_matching(config, out_dir);
            break;
        case ScenarioId::BandwidthScan:
            summary = run_bandwidth_scan(config, out_dir);
            break;
    }

    summary.scenario = to_string(config.scenario);
    summary.hash = config_hash(config);
    summary.pass = std::all_of(summary.metrics.begin(), summary.metrics.end(),
                               [](const Metric& m) { return m.pass; });
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

    if (!out_dir.empty())
        write_text_file(out_dir + "/summary.json", summary.to_json(config.resolved).dump(2) + "\n");
    return summary;
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key.path=value");
    std::string path = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    json* node = &config;
    size_t start = 0;
    std::vector<std::string> keys;
    while (true) {
        size_t dot = path.find('.', start);
        keys.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!node->contains(keys[i])) (*node)[keys[i]] = json::object();
        node = &(*node)[keys[i]];
    }
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (...) {
        parsed = value;  // plain string
    }
    (*node)[keys.back()] = parsed;
}

std::vector<SweepPoint> sweep(const std::string& config_text, const std::string& parameter,
                              const std::vector<double>& grid, const std::string& out_dir,
                              bool parallel) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    json base;
    try {
        base = json::parse(config_text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("sweep: invalid JSON config: ") + e.what());
    }

    // The parameter must resolve against the validated base config.
    {
        json probe = base;
        apply_override(probe, parameter + "=" + format_double(grid.front()));
        auto parsed = parse_config(probe.dump());
        if (!parsed.ok()) {
            std::string msg = "sweep: parameter '" + parameter + "' not addressable:";
            for (const auto& e : parsed.errors) msg += "\n  " + e;
            throw std::invalid_argument(msg);
        }
    }

    auto run_point = [&](size_t i) {
        json cfg_json = base;
        apply_override(cfg_json, parameter + "=" + format_double(grid[i]));
        auto parsed = parse_config(cfg_json.dump());
        if (!parsed.ok()) {
            std::string msg = "sweep point " + std::to_string(i) + " invalid:";
            for (const auto& e : parsed.errors) msg += "\n  " + e;
            throw std::invalid_argument(msg);
        }
        std::string point_dir =
            out_dir.empty() ? "" : out_dir + "/point_" + std::to_string(i);
        SweepPoint pt;
        pt.value = grid[i];
        pt.summary = run(*parsed.config, point_dir);
        return pt;
    };

    std::vector<SweepPoint> points(grid.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (parallel && workers > 1 && grid.size() > 1) {
        std::vector<std::future<SweepPoint>> futures;
        futures.reserve(grid.size());
        for (size_t i = 0; i < grid.size(); ++i)
            futures.push_back(std::async(std::launch::async, run_point, i));
        for (size_t i = 0; i < grid.size(); ++i) points[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < grid.size(); ++i) points[i] = run_point(i);
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string text = parameter;
        for (const auto& m : points.front().summary.metrics) text += "," + m.name;
        text += ",pass\n";
        for (const auto& pt : points) {
            text += format_double(pt.value);
            for (const auto& m : pt.summary.metrics) text += "," + format_double(m.value);
            text += pt.summary.pass ? ",1\n" : ",0\n";
        }
        write_text_file(out_dir + "/sweep.csv", text);
    }
    return points;
}

}  // namespace qmem
