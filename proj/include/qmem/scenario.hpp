// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmem/dynamics.hpp"
#include "qmem/propagation.hpp"

namespace qmem {

enum class ScenarioId {
    StoreRelease,
    CatEntangle,
    SinglePhoton,
    AlgebraCheck,
    AdiabaticScan,
    Propagate1d,
    PulseMatching,
    BandwidthScan,
};

std::string to_string(ScenarioId id);

// Fully validated scenario configuration. `resolved` carries the complete
// JSON with every default filled in; it is what summaries embed and what
// the config hash covers.
struct ScenarioConfig {
    ScenarioId scenario = ScenarioId::StoreRelease;
    std::uint64_t seed = 1;
    bool write_csv = true;
    bool write_binary = false;
    nlohmann::json resolved;

    // Fock-engine scenarios
    CouplingParams coupling;
    int cutoff = 12;
    ProtocolSpec protocol;

    // algebra-check
    int algebra_draws = 20;
    int algebra_max_class_total = 4;
    double algebra_fd_step = 1e-4;

    // adiabatic-scan
    std::vector<double> ramp_multipliers;

    // continuum scenarios
    ContinuumParams continuum;
    int cells = 2000;
    double pad_length = 0.0;
    GaussianPulse pulse;

    // propagate-1d
    bool transit_mode = true;
    double theta = 0.0;               // transit angle
    double theta_on = 0.0;            // store-release transport angle
    double phi_e = 0.0;
    double off_at = 0.0, on_at = 0.0, ramp = 0.0, measure_at = 0.0, duration = 0.0;

    // pulse-matching
    double match_omega1 = 0.0, match_omega2 = 0.0;
    double fit_t0 = -1.0, fit_t1 = -1.0, ratio_at = -1.0;

    // bandwidth-scan
    BandwidthConfig bandwidth;

    // metric name -> threshold; kind is encoded in the name suffix
    // (_min / _max), everything else is reported only.
    std::vector<std::pair<std::string, double>> tolerances;
};

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

// Parses and validates a JSON config; collects every error rather than
// stopping at the first. Unknown keys are rejected.
ParseResult parse_config(const std::string& text);

// Canonical serialization of the resolved config (stable key order).
std::string serialize_config(const ScenarioConfig& config);

// FNV-1a hash of the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& config);

struct Metric {
    std::string name;
    double value = 0.0;
    std::string kind;  // "min", "max" or "report"
    double threshold = 0.0;
    bool pass = true;
};

struct RunSummary {
    std::string scenario;
    std::uint64_t hash = 0;
    double wall_seconds = 0.0;  // not serialized: artifact files stay byte-stable
    std::vector<Metric> metrics;
    bool pass = true;

    nlohmann::json to_json(const nlohmann::json& resolved_config) const;
};

// Executes the scenario and, when out_dir is non-empty, writes the summary
// JSON plus CSV/binary artifacts there. Deterministic for a fixed config
// and seed.
RunSummary run(const ScenarioConfig& config, const std::string& out_dir = "");

// Applies "key.path=value" to a raw JSON config (value parsed as JSON,
// falling back to a string).
void apply_override(nlohmann::json& config, const std::string& assignment);

struct SweepPoint {
    double value = 0.0;
    RunSummary summary;
};

// One run per grid value of the dotted parameter path; results are ordered
// by grid index and aggregated into sweep.csv under out_dir.
std::vector<SweepPoint> sweep(const std::string& config_text, const std::string& parameter,
                              const std::vector<double>& grid, const std::string& out_dir = "",
                              bool parallel = true);

}  // namespace qmem
