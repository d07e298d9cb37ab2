// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "qmem/fock.hpp"
#include "qmem/schedule.hpp"

namespace qmem {

// Continuum-engine parameters: collective couplings gn_i = g_i sqrt(N)
// (rad/s), transversal decay gamma (rad/s, shared by both excited
// coherences), vacuum light speed (m/s), medium length (m), and the atom
// number for the g <-> g sqrt(N) bookkeeping.
struct ContinuumParams {
    double gn1 = 0.0;
    double gn2 = 0.0;
    double gamma = 0.0;
    double light_speed = 299792458.0;
    double medium_length = 0.0;
    double atom_count = 1.0;

    void validate() const;
};

// Uniform 1D grid over [0, medium_length + pad]; atoms occupy
// z <= medium_length, the pad is vacuum for observing released pulses.
// Fields are dimensionless envelopes; sigma_* are the per-atom coherences.
struct FieldGrid {
    double dz = 0.0;
    double medium_length = 0.0;
    Vector e1, e2;
    Vector sigma_ba, sigma_bc, sigma_bd;
    bool low_excitation_ok = true;
    double max_sigma_sq = 0.0;

    int cells() const { return static_cast<int>(e1.size()); }
    double z(int j) const { return j * dz; }
    bool in_medium(int j) const { return z(j) <= medium_length * (1.0 + 1e-12); }
};

FieldGrid make_grid(const ContinuumParams& params, double pad_length, int cells);

struct StepOptions {
    Complex boundary_e1 = 0.0;  // injected envelope values at z = 0
    Complex boundary_e2 = 0.0;
    // Retain the second-order products of Eq. (23)-type terms in the
    // spin-coherence update (approximated through the excited coherences).
    bool second_order_products = false;
};

// One global time step: Strang split of exact one-cell advection (requires
// c*dt <= dz; the scenario drivers always run at c*dt = dz where the shift
// is exact) around an exact exponential update of the local coherence ODEs
// (no Gamma stiffness limit).
void step(FieldGrid& grid, const ContinuumParams& params, double omega1, double omega2, double dt,
          const StepOptions& opts = {});

// Polariton fields at the current grid contents.
struct PolaritonFields {
    Vector psi;   // cos(t) E12 - sin(t) sqrt(N) sigma_bc
    Vector phi;   // sin(t) E12 + cos(t) sqrt(N) sigma_bc
    Vector e12;   // cos(f) E1 + sin(f) E2
    Vector s;     // -sin(f) E1 + cos(f) E2
    double beta = 0.0;
    MixingAngles angles;
};

PolaritonFields polariton_diagnostics(const FieldGrid& grid, const ContinuumParams& params,
                                      double omega1, double omega2);

// Mismatch-field absorption rate of Eq.-(33) type:
// (gn1^2 O2^2 + gn2^2 O1^2) cos^2(beta) / (Gamma O0^2).
double mismatch_decay_rate(const ContinuumParams& params, double omega1, double omega2);
double mismatch_mixing_beta(const ContinuumParams& params, double omega1, double omega2);

struct GaussianPulse {
    int field = 1;  // 1 or 2
    double peak = 1e-3;
    double center = 0.0;  // s
    double sigma = 0.0;   // s
    Complex envelope(double t) const;
};

// Per-step scalar records of a scenario run.
struct ScenarioTrace {
    std::vector<double> times;
    std::vector<double> energy_e1, energy_e2, energy_atoms;  // excitation units
    std::vector<double> s_norm, psi_norm, phi_norm;
    std::vector<double> psi_peak_z;  // subcell-refined argmax of |psi|
    std::vector<Complex> probe_e1, probe_e2;  // time series at the probe plane
};

struct Snapshot {
    double time = 0.0;
    Vector e1, e2, sigma_bc;
};

struct ScenarioOptions {
    double pad_length = 0.0;
    int cells = 2000;
    double duration = 0.0;
    GaussianPulse pulse;
    double probe_plane = -1.0;      // z of the probe record; < 0 disables
    int trace_stride = 1;           // steps between scalar records
    int snapshot_stride = 0;        // steps between z-profile snapshots (0: none)
    bool second_order_products = false;
};

struct ScenarioResult {
    ScenarioTrace trace;
    std::vector<Snapshot> snapshots;
    FieldGrid final_grid;
    double injected_energy = 0.0;
    bool low_excitation_ok = true;
    double dt = 0.0;
};

// March the grid through the schedule, injecting the pulse at z = 0.
ScenarioResult run_scenario(const ContinuumParams& params, const ControlSchedule& schedule,
                            const ScenarioOptions& options);

// Least-squares velocity of the tracked psi peak over [t0, t1].
double fit_peak_velocity(const ScenarioTrace& trace, double t0, double t1);

// Log-linear fit of an exponential decay rate of `series` over [t0, t1].
double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& series,
                      double t0, double t1);

struct StorageSummary {
    double velocity = 0.0;                // m/s, when a fit window was given
    double split_e1 = 0.0, split_e2 = 0.0;  // released field energies
    double stored_spin_energy = 0.0;      // atomic excitation during the hold
    double released_fraction = 0.0;       // (E1+E2 energy at measure time) / injected
    std::vector<double> stored_profile_z;
    std::vector<double> stored_profile_abs;  // |sigma_bc| profile at the hold
};

struct StorageScenarioConfig {
    ScenarioOptions options;
    double stored_snapshot_time = -1.0;   // when to record the spin-wave profile
    double measure_time = -1.0;           // when to measure the released split
    double velocity_fit_t0 = -1.0, velocity_fit_t1 = -1.0;
};

struct StorageScenarioResult {
    ScenarioResult scenario;
    StorageSummary summary;
};

// Full storage protocol record: injected field, stored spin wave, released
// E1/E2 split, optional transit-velocity fit.
StorageScenarioResult run_storage_scenario(const ContinuumParams& params,
                                           const ControlSchedule& schedule,
                                           const StorageScenarioConfig& config);

struct PulseMatchingResult {
    ScenarioResult scenario;
    double fitted_decay_rate = 0.0;   // of ||s||^2, halved to amplitude rate
    double theory_decay_rate = 0.0;   // Eq.-(33) coefficient
    double theory_lifetime = 0.0;     // 1 / theory_decay_rate
    double e2_over_e1 = 0.0;          // at the |E12| peak after the transient
    double tan_phi = 0.0;
    bool fit_valid = false;           // rate well inside the overdamped regime
};

struct PulseMatchingConfig {
    ScenarioOptions options;
    double omega1 = 0.0, omega2 = 0.0;  // constant controls
    double fit_t0 = -1.0, fit_t1 = -1.0;
    double ratio_measure_time = -1.0;
};

PulseMatchingResult pulse_matching_probe(const ContinuumParams& params,
                                         const PulseMatchingConfig& config);

struct BandwidthReport {
    double width_before = 0.0, width_after = 0.0;      // rad/s FWHM at the probes
    double width_ratio_measured = 0.0;
    double width_ratio_predicted = 0.0;                // cos^2(t)cos^2(f) law
    double window_before = 0.0, window_after = 0.0;    // rad/s transparency widths
    double window_ratio_measured = 0.0;
    double window_ratio_predicted = 0.0;               // cot^2(theta) law
    double band4_measured = 0.0;                        // width ratio / window ratio
    double band4_consistent = 0.0;                      // sin^2(theta) law from bands 1-3
    double narrowband_transmission = 0.0;
    double broadband_transmission = 0.0;
    double narrowband_width = 0.0, broadband_width = 0.0;  // input spectral widths
};

struct BandwidthConfig {
    double theta_before = 0.0, theta_after = 0.0;  // realized through Omega1, phi = 0
    double pad_length = 0.0;
    int cells = 3000;
    double pulse_peak = 1e-3;
    double narrow_fraction = 0.1;  // of the initial transparency window
    double broad_fraction = 2.0;
};

BandwidthReport bandwidth_scan(const ContinuumParams& params, const BandwidthConfig& config);

// FWHM of |FFT|^2 of a uniformly sampled complex record (rad/s).
double spectral_fwhm(const std::vector<Complex>& record, double dt);

// EIT transparency half-bandwidth estimate O0^2 / (Gamma sqrt(2 d)) with
// d = gn^2 L / (c Gamma) the optical depth of the traversed medium.
double transparency_window(const ContinuumParams& params, double omega0, double length);

}  // namespace qmem
