// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "qmem/fock.hpp"

namespace qmem {

// Physical parameters shared by both engines. g1, g2 are the single-atom
// coupling constants (rad/s), N the atom number, gamma the transversal
// decay rate (rad/s; used only by the continuum solver).
struct CouplingParams {
    double g1 = 0.0;
    double g2 = 0.0;
    double atom_count = 1.0;
    double gamma = 0.0;

    void validate() const;
    double gn1() const;  // g1 * sqrt(N)
    double gn2() const;  // g2 * sqrt(N)
};

// theta in [0, pi/2] interpolates photonic <-> atomic character; phi in
// [0, pi/2] partitions weight between the two probe modes.
struct MixingAngles {
    double theta = 0.0;
    double phi = 0.0;
};

// Angles from the collective couplings gn_i = g_i sqrt(N) and the control
// Rabi frequencies. Shared by the Fock and continuum engines.
MixingAngles mixing_angles_collective(double gn1, double gn2, double omega1, double omega2);

// Throws when omega1 = omega2 = 0 (phi undefined for a standalone call).
MixingAngles mixing_angles(const CouplingParams& params, double omega1, double omega2);

// Single-particle eigenvalue pair {eps1, eps2} of the five-mode coupling
// matrix: the nonzero excitation energies come in pairs +-eps1, +-eps2.
// At g1 = g2 = g they reduce to eps1 = sqrt(g^2 N + O1^2 + O2^2) and
// eps2 = g sqrt(N).
struct PolaritonEnergies {
    double eps1 = 0.0;
    double eps2 = 0.0;
};

PolaritonEnergies polariton_energies(const CouplingParams& params, double omega1, double omega2);

// Coupling matrix of the bosonized interaction on the five modes, ordered
// (p1, p2, A, C, D). The many-body Hamiltonian is the quadratic form of
// this matrix in the ladder operators.
Eigen::Matrix<double, 5, 5> single_particle_matrix(const CouplingParams& params, double omega1,
                                                   double omega2);

// Bosonized interaction Hamiltonian
//   V = gn1 a1 A† + O1 A† C + gn2 a2 D† + O2 D† C + h.c.
// Hermitian and total-excitation conserving.
SparseMatrix build_hamiltonian(const FockSpace& space, const CouplingParams& params, double omega1,
                               double omega2);

// The polariton operator family at fixed angles (annihilation versions;
// take adjoints for the raising operators). The dark operator d commutes
// with V; Q± and P± shift V-eigenvalues by ±eps1 and ±eps2 when g1 = g2.
struct PolaritonSet {
    SparseMatrix dark;     // d  = cos t cos f a1 - sin t C + cos t sin f a2
    SparseMatrix bright;   // b  = sin t cos f a1 + cos t C + sin t sin f a2
    SparseMatrix u;        // u  = cos f A + sin f D
    SparseMatrix v;        // v  = -sin f A + cos f D
    SparseMatrix s;        // s  = -sin f a1 + cos f a2
    SparseMatrix q_plus;   // u + b
    SparseMatrix q_minus;  // u - b
    SparseMatrix p_plus;   // s + v
    SparseMatrix p_minus;  // s - v
    double eps1 = 0.0;
    double eps2 = 0.0;
    MixingAngles angles;
    CouplingParams params;
};

PolaritonSet polariton_set(const FockSpace& space, const CouplingParams& params, double omega1,
                           double omega2);

// Same family parameterized directly by the angles (used by the
// finite-difference derivative probes, which displace theta or phi).
PolaritonSet polariton_set_at_angles(const FockSpace& space, const CouplingParams& params,
                                     const MixingAngles& angles);

// |D_n> = (d†)^n |0> / sqrt(n!), the n-quantum dark state.
StateVector dark_state(const FockSpace& space, int n, const MixingAngles& angles);

// Index (i, j; k, l; n) of the ladder-generated eigenstate
// (Q+†)^i (Q-†)^j (P+†)^k (P-†)^l |D_n>, normalized, with eigenvalue
// (i-j) eps1 + (k-l) eps2. The zero-eigenvalue class has i=j, k=l.
struct DegeneracyIndex {
    int i = 0, j = 0, k = 0, l = 0, n = 0;
    int total_excitation() const { return i + j + k + l + n; }
};

struct DegeneracyState {
    StateVector state;
    double eigenvalue = 0.0;
    DegeneracyIndex index;
};

// Requires g1 = g2 and i+j+k+l+n <= cutoff-2 (headroom against truncation).
DegeneracyState degeneracy_state(const FockSpace& space, const PolaritonSet& set,
                                 const DegeneracyIndex& idx);

enum class AngleId { Theta, Phi };

// Matrix of <d(i',k';n') | d/d(angle) | d(i,k;n)> over the given
// zero-eigenvalue class indices (i=j, k=l entries of DegeneracyIndex),
// computed by central finite differences of the normalized states.
Matrix adiabatic_mixing_matrix(const FockSpace& space, const PolaritonSet& set,
                               const std::vector<DegeneracyIndex>& indices, AngleId which,
                               double step);

}  // namespace qmem
