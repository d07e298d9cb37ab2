// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmem/ensemble.hpp"
#include "qmem/fock.hpp"
#include "qmem/schedule.hpp"

namespace qmem {

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    double max_norm_drift = 0.0;
    double max_excitation_drift = 0.0;
};

// Schrodinger evolution under the scheduled Hamiltonian. Each step applies
// a Lanczos approximation of exp(-i dt V(t_mid)); the Krylov update is
// unitary by construction, so the norm is preserved to round-off.
// Requires dt * ||V||_max <= 0.1 (spectral-norm estimate M * eps1).
Trajectory evolve(const FockSpace& space, const CouplingParams& params,
                  const ControlSchedule& schedule, const StateVector& psi0, double t0, double t1,
                  double dt, int sample_count = 0);

enum class InputKind { Coherent, Cat, SinglePhoton, Custom };

struct ProtocolInput {
    InputKind kind = InputKind::Coherent;
    Complex alpha = 1.0;
    CatSign cat_sign = CatSign::Minus;
    int mode = 2;  // probe mode carrying the input (1 or 2)
    std::optional<StateVector> custom;
};

struct ProtocolSpec {
    ProtocolInput input;
    double release_angle = 0.0;  // phi_e in [0, pi/2]
    double omega_max = 0.0;      // control scale; theta(0) = atan(gn1 gn2 / (gn2 Omax)) style
    double ramp_duration = 0.0;
    double hold_duration = 0.0;
    double dt = 0.0;  // 0: auto per segment from the norm bound
    int samples_per_segment = 32;
    double dark_population_abort = 0.9;
};

struct ProtocolDiagnostics {
    std::vector<double> times;
    std::vector<double> dark_population;
    std::vector<double> theta;
    std::vector<double> phi;
    double min_dark_population = 1.0;
    double max_norm_drift = 0.0;
    double max_excitation_drift = 0.0;
    double stored_population_outside_c = 0.0;
};

struct ProtocolResult {
    StateVector final_state;
    StateVector stored_state;
    ProtocolDiagnostics diagnostics;
    // Fidelity of the final state against the closed-form released state,
    // when the input has one (coherent, cat, single photon).
    std::optional<double> release_fidelity;
};

// Thrown when the instantaneous dark-subspace population falls below the
// abort threshold (misconfigured, too-fast schedule).
struct AdiabaticityError : std::runtime_error {
    explicit AdiabaticityError(const std::string& what) : std::runtime_error(what) {}
};

ProtocolResult run_storage_release(const FockSpace& space, const CouplingParams& params,
                                   const ProtocolSpec& spec);

// Storage/release with a cat input; identical machinery, kept as its own
// entry point because the released target is the two-mode entangled
// coherent state.
ProtocolResult run_cat_protocol(const FockSpace& space, const CouplingParams& params,
                                const ProtocolSpec& spec);

// Closed-form released target state |alpha cos(phi_e)> (x) |alpha sin(phi_e)>
// (or its cat/single-photon analogue) used for fidelity reporting.
StateVector released_target_state(const FockSpace& space, const ProtocolInput& input,
                                  double release_angle);

struct DephasingParams {
    double diffusion_rate = 0.0;  // D (1/s)
    double time = 0.0;            // exposure t (s)
};

// Mixed-state summary of the stored excitation after motional dephasing:
// populations of the collective mode are kept, the (n,m) coherence is
// scaled by exp(-(n+m) D t), and the purity of the resulting density
// matrix is reported.
struct DephasingSummary {
    Eigen::VectorXd populations;
    Matrix density;  // over the stored-mode occupations 0..M
    double purity = 1.0;
};

DephasingSummary apply_motional_dephasing(const FockSpace& space, const StateVector& stored,
                                          const DephasingParams& params);

}  // namespace qmem
