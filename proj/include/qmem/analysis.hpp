// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "qmem/fock.hpp"

namespace qmem {

// Reduced density matrix over a subset of modes. The reduced basis is the
// set of occupation tuples of the kept modes with total excitation within
// the parent cutoff, ordered lexicographically.
struct ReducedDensity {
    std::vector<Mode> kept;
    std::vector<std::vector<int>> basis;  // occupations of the kept modes
    Matrix rho;

    // Partial trace over one of the kept modes.
    ReducedDensity trace_out(Mode mode) const;
};

// |<psi|phi>|^2 for normalized pure states.
double fidelity(const StateVector& psi, const StateVector& phi);

// Partial trace of |psi><psi| over the complement of `keep`.
ReducedDensity reduce(const FockSpace& space, const StateVector& psi, std::vector<Mode> keep);

enum class EntropyBase { Two, E };

// von Neumann entropy -sum(lambda log lambda); eigenvalues below 1e-14 are
// dropped as truncation noise.
double entanglement_entropy(const ReducedDensity& rho, EntropyBase base = EntropyBase::Two);

struct EntanglementPoint {
    double release_angle = 0.0;
    double alpha_e1 = 0.0;
    double alpha_e2 = 0.0;
    double entropy_bits = 0.0;
};

// Entropy of the released entangled coherent state as a function of the
// release angle, from the closed-form output parameters alpha_e1 = a cos(phi_e),
// alpha_e2 = a sin(phi_e).
std::vector<EntanglementPoint> entanglement_vs_release_angle(double alpha0, CatSign sign,
                                                             const std::vector<double>& angles);

}  // namespace qmem
