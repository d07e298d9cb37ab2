// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0
//
// qmemsim — scenario runner for the double-lambda quantum memory simulator.
// One subcommand per scenario plus a generic parameter sweep; configs are
// JSON (see configs/ for presets), with --override for ad-hoc tweaks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmem/log.hpp"
#include "qmem/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Applies CLI-level adjustments (scenario, seed, overrides) on top of the
// file config and validates.
qmem::ParseResult load_config(const std::string& config_path, const std::string& scenario,
                              long long seed, const std::vector<std::string>& overrides) {
    nlohmann::json raw = nlohmann::json::object();
    if (!config_path.empty()) {
        try {
            raw = nlohmann::json::parse(read_file(config_path));
        } catch (const std::exception& e) {
            qmem::ParseResult bad;
            bad.errors.push_back(e.what());
            return bad;
        }
    }
    if (!scenario.empty()) raw["scenario"] = scenario;
    if (seed >= 0) raw["seed"] = seed;
    for (const auto& ov : overrides) qmem::apply_override(raw, ov);
    return qmem::parse_config(raw.dump());
}

int report(const qmem::RunSummary& summary) {
    for (const auto& m : summary.metrics) {
        if (m.kind == "report")
            std::printf("  %-28s %.10g\n", m.name.c_str(), m.value);
        else
            std::printf("  %-28s %.10g  [%s %s %.10g] %s\n", m.name.c_str(), m.value,
                        m.kind.c_str(), m.kind == "min" ? ">=" : "<=", m.threshold,
                        m.pass ? "PASS" : "FAIL");
    }
    std::printf("%s: %s (%.2f s)\n", summary.scenario.c_str(), summary.pass ? "PASS" : "FAIL",
                summary.wall_seconds);
    return summary.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"double-lambda quantum memory simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long long seed = -1;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory for summary and artifacts");
    app.add_option("--seed", seed, "random seed override");
    app.add_option("--override", overrides, "key.path=value config override (repeatable)");

    const std::vector<std::string> scenarios = {
        "store-release",  "cat-entangle", "single-photon", "algebra-check",
        "adiabatic-scan", "propagate-1d", "pulse-matching", "bandwidth-scan"};
    for (const auto& name : scenarios) app.add_subcommand(name, "run the " + name + " scenario");

    auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario over a parameter grid");
    std::string sweep_param, sweep_grid;
    bool sweep_serial = false;
    sweep_cmd->add_option("--param", sweep_param, "dotted config path, e.g. protocol.release_angle_rad")
        ->required();
    sweep_cmd->add_option("--grid", sweep_grid, "comma-separated values or start:stop:count")
        ->required();
    sweep_cmd->add_flag("--serial", sweep_serial, "disable concurrent sweep points");

    CLI11_PARSE(app, argc, argv);

    try {
        auto* sub = app.get_subcommands().front();
        if (sub == sweep_cmd) {
            std::vector<double> grid;
            if (sweep_grid.find(':') != std::string::npos) {
                double start, stop;
                int count;
                if (std::sscanf(sweep_grid.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3 ||
                    count < 1)
                    throw std::invalid_argument("--grid must be start:stop:count");
                for (int i = 0; i < count; ++i)
                    grid.push_back(count == 1 ? start
                                              : start + (stop - start) * i / (count - 1));
            } else {
                std::stringstream ss(sweep_grid);
                std::string item;
                while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
            }

            nlohmann::json raw = nlohmann::json::object();
            if (!config_path.empty()) raw = nlohmann::json::parse(read_file(config_path));
            if (seed >= 0) raw["seed"] = seed;
            for (const auto& ov : overrides) qmem::apply_override(raw, ov);

            auto points = qmem::sweep(raw.dump(), sweep_param, grid, out_dir, !sweep_serial);
            bool all_pass = true;
            for (const auto& pt : points) {
                std::printf("%s = %.10g -> %s\n", sweep_param.c_str(), pt.value,
                            pt.summary.pass ? "PASS" : "FAIL");
                all_pass = all_pass && pt.summary.pass;
            }
            return all_pass ? 0 : 1;
        }

        auto parsed = load_config(config_path, sub->get_name(), seed, overrides);
        if (!parsed.ok()) {
            std::fprintf(stderr, "config errors:\n");
            for (const auto& e : parsed.errors) std::fprintf(stderr, "  %s\n", e.c_str());
            return 2;
        }
        auto summary = qmem::run(*parsed.config, out_dir);
        return report(summary);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
