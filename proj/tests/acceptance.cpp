// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line
// with the measured numbers; the exit code is nonzero if any fail.
// Individual criteria can be selected with --only N.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "qmem/analysis.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/propagation.hpp"
#include "qmem/scenario.hpp"

using namespace qmem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass_if(bool ok, const std::string& detail) { return {ok, detail}; }

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

CouplingParams fock_params() {
    CouplingParams p;
    p.g1 = p.g2 = 0.1;
    p.atom_count = 100.0;  // g sqrt(N) = 1
    return p;
}

ContinuumParams continuum_params() {
    ContinuumParams p;
    p.gn1 = p.gn2 = 1e9;
    p.gamma = 1e8;
    p.light_speed = 3e8;
    p.medium_length = 240.0;
    p.atom_count = 1e8;
    return p;
}

// --------------------------------------------------------------------
// 1. Dark-state exactness
Outcome criterion_dark_states() {
    FockSpace space(8);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        CouplingParams p;
        p.g1 = 0.2 + 1.8 * u(rng);
        p.g2 = 0.2 + 1.8 * u(rng);
        p.atom_count = std::floor(4.0 + 396.0 * u(rng));
        double gref = std::sqrt(p.gn1() * p.gn2());
        double o1 = 3.0 * gref * u(rng), o2 = 3.0 * gref * u(rng);
        if (o1 + o2 <= 0.0) o1 = gref;
        auto v = build_hamiltonian(space, p, o1, o2);
        auto angles = mixing_angles(p, o1, o2);
        const double vnorm = space.cutoff() * polariton_energies(p, o1, o2).eps1;
        for (int n = 0; n <= 3; ++n) {
            auto dn = dark_state(space, n, angles);
            worst = std::max(worst, (v * dn.amplitudes).norm() / vnorm);
        }
    }
    return pass_if(worst <= 1e-10, fmt("max ||V|D_n>|| / ||V|| = %.2e (<= 1e-10)", worst));
}

// --------------------------------------------------------------------
// 2. Commutator suite
Outcome criterion_commutators() {
    FockSpace space(8);
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    double worst_energy_err = 0.0;
    const int headroom = space.cutoff() - 1;
    for (int draw = 0; draw < 10; ++draw) {
        // general couplings: the dark commutator
        CouplingParams p;
        p.g1 = 0.2 + 1.8 * u(rng);
        p.g2 = 0.2 + 1.8 * u(rng);
        p.atom_count = std::floor(4.0 + 196.0 * u(rng));
        double gref = std::sqrt(p.gn1() * p.gn2());
        double o1 = 2.0 * gref * u(rng), o2 = 2.0 * gref * u(rng);
        if (o1 + o2 <= 0.0) o2 = gref;
        {
            auto v = build_hamiltonian(space, p, o1, o2);
            auto set = polariton_set(space, p, o1, o2);
            worst = std::max(worst, max_abs_entry(restrict_columns(
                                        space, commutator(v, adjoint(set.dark)), headroom)));
        }

        // equal couplings: ladder relations with the printed energies
        CouplingParams q = p;
        q.g2 = q.g1;
        auto v = build_hamiltonian(space, q, o1, o2);
        auto set = polariton_set(space, q, o1, o2);
        const double eps1_printed = std::hypot(q.gn1(), std::hypot(o1, o2));
        const double eps2_printed = q.gn1();
        worst_energy_err = std::max({worst_energy_err,
                                     std::abs(set.eps1 - eps1_printed) / eps1_printed,
                                     std::abs(set.eps2 - eps2_printed) / eps2_printed});
        auto ladder_residual = [&](const SparseMatrix& op, double shift) {
            SparseMatrix opd = adjoint(op);
            SparseMatrix r = commutator(v, opd) - shift * opd;
            return max_abs_entry(restrict_columns(space, r, headroom));
        };
        worst = std::max({worst, ladder_residual(set.q_plus, eps1_printed),
                          ladder_residual(set.q_minus, -eps1_printed),
                          ladder_residual(set.p_plus, eps2_printed),
                          ladder_residual(set.p_minus, -eps2_printed)});
        for (const SparseMatrix* a : {&set.p_plus, &set.p_minus})
            for (const SparseMatrix* b : {&set.q_plus, &set.q_minus})
                worst = std::max(worst,
                                 max_abs_entry(restrict_columns(
                                     space, commutator(adjoint(*a), adjoint(*b)), headroom)));
    }
    bool ok = worst <= 1e-10 && worst_energy_err <= 1e-12;
    return pass_if(ok, fmt("max residual entry = %.2e (<= 1e-10), energy formula err = %.1e",
                           worst, worst_energy_err));
}

// --------------------------------------------------------------------
// 3. Degeneracy spectrum
Outcome criterion_degeneracy_spectrum() {
    FockSpace space(8);
    auto p = fock_params();
    double o1 = 2.3, o2 = 1.1;
    auto v = build_hamiltonian(space, p, o1, o2);
    auto set = polariton_set(space, p, o1, o2);
    double worst = 0.0;
    int count = 0;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j)
            for (int k = 0; i + j + k <= 4; ++k)
                for (int l = 0; i + j + k + l <= 4; ++l)
                    for (int n = 0; i + j + k + l + n <= 4; ++n) {
                        auto st = degeneracy_state(space, set, DegeneracyIndex{i, j, k, l, n});
                        double scale = std::max(set.eps2, std::abs(st.eigenvalue));
                        double resid =
                            (v * st.state.amplitudes - st.eigenvalue * st.state.amplitudes)
                                .norm() /
                            scale;
                        worst = std::max(worst, resid);
                        ++count;
                    }
    return pass_if(worst <= 1e-9,
                   fmt("%d index tuples, max relative residual = %.2e (<= 1e-9)", count, worst));
}

// --------------------------------------------------------------------
// 4. Adiabatic no-mixing
Outcome criterion_no_mixing() {
    FockSpace space(8);
    auto p = fock_params();
    auto set = polariton_set(space, p, 1.7, 0.9);
    std::vector<DegeneracyIndex> zero_class;
    for (int i = 0; 2 * i <= 6; ++i)
        for (int k = 0; 2 * i + 2 * k <= 6; ++k)
            for (int n = 0; 2 * i + 2 * k + n <= 6; ++n)
                zero_class.push_back(DegeneracyIndex{i, i, k, k, n});
    double worst = 0.0;
    for (AngleId which : {AngleId::Theta, AngleId::Phi}) {
        Matrix mix = adiabatic_mixing_matrix(space, set, zero_class, which, 1e-4);
        for (size_t r = 0; r < zero_class.size(); ++r)
            for (size_t c = 0; c < zero_class.size(); ++c) {
                if (zero_class[r].i == zero_class[c].i && zero_class[r].k == zero_class[c].k)
                    continue;
                worst = std::max(worst, std::abs(mix(r, c)));
            }
    }
    return pass_if(worst <= 1e-6,
                   fmt("%zu zero-class states, max cross-sector overlap = %.2e (<= 1e-6)",
                       zero_class.size(), worst));
}

// --------------------------------------------------------------------
// 5. Storage/release fidelity + ramp-duration monotonicity
Outcome criterion_storage_release() {
    auto p = fock_params();
    const double omega_max = 60.0, ramp = 240.0, hold = 8.0;

    auto run_one = [&](double phi_e, double ramp_duration) {
        FockSpace space(12);
        ProtocolSpec spec;
        spec.input.kind = InputKind::Coherent;
        spec.input.alpha = 1.0;
        spec.input.mode = 2;
        spec.release_angle = phi_e;
        spec.omega_max = omega_max;
        spec.ramp_duration = ramp_duration;
        spec.hold_duration = hold;
        spec.dark_population_abort = 0.0;  // judged by fidelity below
        auto res = run_storage_release(space, p, spec);
        return *res.release_fidelity;
    };

    const std::vector<double> angles = {0.0, kPi / 6, kPi / 4, kPi / 2};
    std::vector<std::future<double>> jobs;
    for (double a : angles)
        jobs.push_back(std::async(std::launch::async, run_one, a, ramp));
    double fmin = 1.0;
    std::string per_angle;
    for (size_t i = 0; i < angles.size(); ++i) {
        double f = jobs[i].get();
        fmin = std::min(fmin, f);
        per_angle += fmt("%sF(%.3f)=%.5f", i ? ", " : "", angles[i], f);
    }

    // doubling the ramp twice must reduce the infidelity each time
    std::vector<double> infid;
    for (double t : {15.0, 30.0, 60.0})
        infid.push_back(1.0 - run_one(kPi / 4, t));
    bool monotone = infid[0] > infid[1] && infid[1] > infid[2];

    bool ok = fmin >= 0.99 && monotone;
    return pass_if(ok, per_angle + fmt("; infidelity at T={15,30,60}: %.2e > %.2e > %.2e %s",
                                       infid[0], infid[1], infid[2],
                                       monotone ? "(monotone)" : "(NOT monotone)"));
}

// --------------------------------------------------------------------
// 6. MES generation: minus cat and single photon
Outcome criterion_mes() {
    auto p = fock_params();

    // minus cat, alpha0 = 1, phi_e = pi/4
    FockSpace space(10);
    ProtocolSpec spec;
    spec.input.kind = InputKind::Cat;
    spec.input.alpha = 1.0;
    spec.input.cat_sign = CatSign::Minus;
    spec.input.mode = 2;
    spec.release_angle = kPi / 4;
    spec.omega_max = 60.0;
    spec.ramp_duration = 240.0;
    spec.hold_duration = 8.0;
    auto cat = run_cat_protocol(space, p, spec);
    double entropy = entanglement_entropy(reduce(space, cat.final_state, {Mode::ProbeOne}));
    double cat_fidelity = *cat.release_fidelity;

    // single photon at pi/4
    FockSpace small(4);
    ProtocolSpec sp;
    sp.input.kind = InputKind::SinglePhoton;
    sp.input.mode = 2;
    sp.release_angle = kPi / 4;
    sp.omega_max = 120.0;
    sp.ramp_duration = 240.0;
    sp.hold_duration = 8.0;
    auto photon = run_storage_release(small, p, sp);
    double photon_fidelity = *photon.release_fidelity;

    bool ok = std::abs(entropy - 1.0) <= 1e-3 && cat_fidelity >= 0.99 &&
              photon_fidelity >= 0.999;
    return pass_if(ok, fmt("entropy = %.5f bits (1 +- 1e-3), F_cat = %.5f (>= 0.99), "
                           "F_photon = %.6f (>= 0.999)",
                           entropy, cat_fidelity, photon_fidelity));
}

// --------------------------------------------------------------------
// 7. DSP transport velocity
Outcome criterion_transport() {
    auto p = continuum_params();
    const double c = p.light_speed;
    std::string detail;
    bool ok = true;
    for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
        const double omega = p.gn1 / std::tan(theta);
        const double ct2 = std::pow(std::cos(theta), 2);
        const double window = transparency_window(p, omega, p.medium_length);
        const double sigma = 12.0 / window;
        const double center = 5.0 * sigma;
        const double v_exp = c * ct2;
        const double fit_t0 = center + std::max(3.0 * sigma, 0.15 * p.medium_length / v_exp);
        const double fit_t1 = center + 0.70 * p.medium_length / v_exp;

        ControlSegment seg;
        seg.t_start = 0.0;
        seg.t_end = (fit_t1 + 2.0 * sigma) * (1 + 1e-9);
        seg.profile = ProfileKind::Constant;
        seg.omega1_start = seg.omega1_end = omega;

        ScenarioOptions opts;
        opts.cells = 2000;
        opts.pad_length = 6.0;
        opts.duration = fit_t1 + 2.0 * sigma;
        opts.pulse.field = 1;
        opts.pulse.peak = 1e-3;
        opts.pulse.sigma = sigma;
        opts.pulse.center = center;
        opts.trace_stride = 16;
        auto result = run_scenario(p, ControlSchedule({seg}), opts);
        double v = fit_peak_velocity(result.trace, fit_t0, fit_t1);
        double err = std::abs(v - v_exp) / v_exp;
        ok = ok && err <= 0.02;
        detail += fmt("%stheta=%.3f: v/c=%.4f vs %.4f (err %.2f%%)", detail.empty() ? "" : "; ",
                      theta, v / c, ct2, 100 * err);
    }
    return pass_if(ok, detail);
}

// --------------------------------------------------------------------
// 8. Pulse matching
Outcome criterion_pulse_matching() {
    // Overdamped probe: the fitted decay of ||s|| against the closed-form
    // coefficient, and the pointwise ratio locking onto tan(phi) = 1.
    ContinuumParams p;
    p.gn1 = p.gn2 = 2.5e7;
    p.gamma = 1e8;
    p.light_speed = 3e8;
    p.medium_length = 600.0;
    p.atom_count = 1e8;

    PulseMatchingConfig cfg;
    cfg.omega1 = cfg.omega2 = 2.5e7;
    const double rate = mismatch_decay_rate(p, cfg.omega1, cfg.omega2);
    const double sigma = 0.5 / rate;
    cfg.options.pulse.field = 1;
    cfg.options.pulse.peak = 1e-3;
    cfg.options.pulse.sigma = sigma;
    cfg.options.pulse.center = 5.0 * sigma;
    cfg.fit_t0 = cfg.options.pulse.center + 3.0 * sigma;
    cfg.fit_t1 = cfg.fit_t0 + 2.5 / rate;
    cfg.ratio_measure_time = cfg.fit_t1;
    cfg.options.duration = cfg.fit_t1;
    cfg.options.cells = 1500;
    cfg.options.pad_length = 0.0;
    cfg.options.trace_stride = 8;
    auto probe = pulse_matching_probe(p, cfg);

    double fit_err = std::abs(probe.fitted_decay_rate - probe.theory_decay_rate) /
                     probe.theory_decay_rate;
    double ratio_err = std::abs(probe.e2_over_e1 - 1.0);

    // Paper-scale parameters through the scenario surface: the reported
    // lifetime comes from the same coefficient.
    auto parsed = parse_config(R"({
        "scenario": "pulse-matching",
        "continuum": {"gn1_rad_per_s": 1e9, "gn2_rad_per_s": 1e9, "gamma_rad_per_s": 1e8,
                       "medium_length_m": 30.0, "light_speed_m_per_s": 2.99792458e8},
        "grid": {"cells": 1200, "pad_length_m": 2.0},
        "matching": {"omega1_rad_per_s": 1e9, "omega2_rad_per_s": 1e9},
        "tolerances": {"ratio_rel_err_max": 1.0}
    })");
    if (!parsed.ok()) return {false, "paper-parameter preset failed to parse"};
    auto summary = run(*parsed.config);
    double lifetime = 0.0;
    for (const auto& m : summary.metrics)
        if (m.name == "theory_lifetime_s") lifetime = m.value;

    bool lifetime_ok = lifetime > 0.5e-10 && lifetime < 2e-10;
    bool ok = probe.fit_valid && fit_err <= 0.10 && ratio_err <= 0.01 && lifetime_ok;
    return pass_if(ok, fmt("E2/E1 = %.4f (tan phi = 1 +- 1%%), s-decay fit %.3e vs theory %.3e "
                           "(err %.1f%%), paper-scale lifetime = %.2e s (~1e-10)",
                           probe.e2_over_e1, probe.fitted_decay_rate, probe.theory_decay_rate,
                           100 * fit_err, lifetime));
}

// --------------------------------------------------------------------
// 9. Continuum storage/release split
Outcome criterion_continuum_split() {
    auto p = continuum_params();
    std::string detail;
    bool ok = true;
    for (double phi_e : {kPi / 6, kPi / 4}) {
        auto parsed = parse_config(fmt(R"({
            "scenario": "propagate-1d",
            "continuum": {"gn1_rad_per_s": 1e9, "gn2_rad_per_s": 1e9,
                           "gamma_rad_per_s": 1e8, "medium_length_m": 240.0,
                           "light_speed_m_per_s": 3e8},
            "grid": {"cells": 2000, "pad_length_m": 6.0},
            "run": {"mode": "store-release", "theta_on_rad": 1.107, "phi_e_rad": %.12f}
        })", phi_e));
        if (!parsed.ok()) return {false, "split preset failed to parse"};
        auto summary = run(*parsed.config);
        double err = -1.0, e1 = 0.0, e2 = 0.0;
        for (const auto& m : summary.metrics) {
            if (m.name == "split_rel_err") err = m.value;
            if (m.name == "split_e1") e1 = m.value;
            if (m.name == "split_e2") e2 = m.value;
        }
        ok = ok && err >= 0.0 && err <= 0.02;
        detail += fmt("%sphi_e=%.3f: E1:E2 = %.4f (expect %.4f, err %.2f%%)",
                      detail.empty() ? "" : "; ", phi_e, e1 / e2,
                      std::pow(std::cos(phi_e) / std::sin(phi_e), 2), 100 * err);
    }
    (void)p;
    return pass_if(ok, detail);
}

// --------------------------------------------------------------------
// 10. Bandwidth laws
Outcome criterion_bandwidth() {
    auto p = continuum_params();
    BandwidthConfig cfg;
    cfg.theta_before = kPi / 6;
    cfg.theta_after = kPi / 3;
    cfg.cells = 3000;
    cfg.narrow_fraction = 0.1;
    cfg.broad_fraction = 2.0;
    cfg.pad_length = 6.0;
    auto report = bandwidth_scan(p, cfg);
    double band1_err =
        std::abs(report.width_ratio_measured / report.width_ratio_predicted - 1.0);
    bool ok = band1_err <= 0.05 && report.narrowband_transmission >= 0.95 &&
              report.broadband_transmission < report.narrowband_transmission;
    return pass_if(
        ok, fmt("width ratio %.4f vs %.4f (err %.2f%%, <= 5%%); narrowband T = %.4f (>= 0.95), "
                "broadband T = %.4f",
                report.width_ratio_measured, report.width_ratio_predicted, 100 * band1_err,
                report.narrowband_transmission, report.broadband_transmission));
}

// --------------------------------------------------------------------
// 11. Cross-engine consistency at one excitation
Outcome criterion_cross_engine() {
    const double phi_e = kPi / 4;

    // Fock engine: single photon through the full protocol
    auto p = fock_params();
    FockSpace space(4);
    ProtocolSpec spec;
    spec.input.kind = InputKind::SinglePhoton;
    spec.input.mode = 2;
    spec.release_angle = phi_e;
    spec.omega_max = 120.0;
    spec.ramp_duration = 240.0;
    spec.hold_duration = 8.0;
    auto res = run_storage_release(space, p, spec);
    BasisState one_p1{}, one_p2{};
    one_p1.occupations[static_cast<int>(Mode::ProbeOne)] = 1;
    one_p2.occupations[static_cast<int>(Mode::ProbeTwo)] = 1;
    double a1 = std::abs(res.final_state.amplitudes[space.index_of(one_p1)]);
    double a2 = std::abs(res.final_state.amplitudes[space.index_of(one_p2)]);
    double norm = std::hypot(a1, a2);
    a1 /= norm;
    a2 /= norm;

    // Continuum engine: classical envelope split of the released energies
    auto parsed = parse_config(fmt(R"({
        "scenario": "propagate-1d",
        "continuum": {"gn1_rad_per_s": 1e9, "gn2_rad_per_s": 1e9, "gamma_rad_per_s": 1e8,
                       "medium_length_m": 240.0, "light_speed_m_per_s": 3e8},
        "grid": {"cells": 2000, "pad_length_m": 6.0},
        "run": {"mode": "store-release", "theta_on_rad": 1.107, "phi_e_rad": %.12f}
    })", phi_e));
    if (!parsed.ok()) return {false, "continuum preset failed to parse"};
    auto summary = run(*parsed.config);
    double e1 = 0.0, e2 = 0.0;
    for (const auto& m : summary.metrics) {
        if (m.name == "split_e1") e1 = m.value;
        if (m.name == "split_e2") e2 = m.value;
    }
    double c1 = std::sqrt(e1 / (e1 + e2));
    double c2 = std::sqrt(e2 / (e1 + e2));

    double err = std::max(std::abs(a1 - c1) / c1, std::abs(a2 - c2) / c2);
    bool ok = err <= 0.02;
    return pass_if(ok, fmt("fock split (%.4f, %.4f) vs continuum (%.4f, %.4f), max err %.2f%% "
                           "(<= 2%%)",
                           a1, a2, c1, c2, 100 * err));
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[i + 1]);

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "dark-state exactness", criterion_dark_states},
        {2, "commutator suite", criterion_commutators},
        {3, "degeneracy spectrum", criterion_degeneracy_spectrum},
        {4, "adiabatic no-mixing", criterion_no_mixing},
        {5, "storage/release fidelity", criterion_storage_release},
        {6, "entangled-state generation", criterion_mes},
        {7, "polariton transport velocity", criterion_transport},
        {8, "pulse matching", criterion_pulse_matching},
        {9, "continuum release split", criterion_continuum_split},
        {10, "bandwidth laws", criterion_bandwidth},
        {11, "cross-engine consistency", criterion_cross_engine},
    };

    bool all_pass = true;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        Outcome outcome;
        try {
            outcome = c.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %2d (%s): %s\n", outcome.pass ? "PASS" : "FAIL", c.id,
                    c.name, outcome.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
