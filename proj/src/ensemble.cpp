// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/ensemble.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

void CouplingParams::validate() const {
    if (!(g1 > 0.0) || !(g2 > 0.0))
        throw std::invalid_argument("CouplingParams: g1 and g2 must be positive");
    if (!(atom_count >= 1.0))
        throw std::invalid_argument("CouplingParams: atom_count must be >= 1");
    if (!(gamma >= 0.0)) throw std::invalid_argument("CouplingParams: gamma must be >= 0");
}

double CouplingParams::gn1() const { return g1 * std::sqrt(atom_count); }
double CouplingParams::gn2() const { return g2 * std::sqrt(atom_count); }

MixingAngles mixing_angles_collective(double gn1, double gn2, double omega1, double omega2) {
    if (omega1 < 0.0 || omega2 < 0.0)
        throw std::invalid_argument("mixing_angles: control Rabi frequencies must be >= 0");
    if (omega1 == 0.0 && omega2 == 0.0)
        throw std::invalid_argument("mixing_angles: phi undefined when both controls vanish");
    // tan(theta) = gn1 / sqrt(O1^2 + O2^2 gn1^2/gn2^2) = gn1 gn2 / R,
    // tan(phi)   = gn1 O2 / (gn2 O1), with R = sqrt(gn2^2 O1^2 + gn1^2 O2^2).
    const double r = std::hypot(gn2 * omega1, gn1 * omega2);
    MixingAngles a;
    a.theta = std::atan2(gn1 * gn2, r);
    a.phi = std::atan2(gn1 * omega2, gn2 * omega1);
    return a;
}

MixingAngles mixing_angles(const CouplingParams& params, double omega1, double omega2) {
    params.validate();
    return mixing_angles_collective(params.gn1(), params.gn2(), omega1, omega2);
}

Eigen::Matrix<double, 5, 5> single_particle_matrix(const CouplingParams& params, double omega1,
                                                   double omega2) {
    Eigen::Matrix<double, 5, 5> h = Eigen::Matrix<double, 5, 5>::Zero();
    const int p1 = 0, p2 = 1, A = 2, C = 3, D = 4;
    h(A, p1) = h(p1, A) = params.gn1();
    h(A, C) = h(C, A) = omega1;
    h(D, p2) = h(p2, D) = params.gn2();
    h(D, C) = h(C, D) = omega2;
    return h;
}

PolaritonEnergies polariton_energies(const CouplingParams& params, double omega1, double omega2) {
    // Nonzero eigenvalues are +-sqrt of the roots of
    // x^2 - a x + b with a = gn1^2 + gn2^2 + O1^2 + O2^2 and
    // b = gn1^2 gn2^2 + gn1^2 O2^2 + gn2^2 O1^2.
    const double gn1 = params.gn1(), gn2 = params.gn2();
    const double a = gn1 * gn1 + gn2 * gn2 + omega1 * omega1 + omega2 * omega2;
    const double b = gn1 * gn1 * gn2 * gn2 + gn1 * gn1 * omega2 * omega2 +
                     gn2 * gn2 * omega1 * omega1;
    const double disc = std::sqrt(std::max(0.0, a * a - 4.0 * b));
    PolaritonEnergies e;
    e.eps1 = std::sqrt(0.5 * (a + disc));
    e.eps2 = std::sqrt(std::max(0.0, 0.5 * (a - disc)));
    return e;
}

SparseMatrix build_hamiltonian(const FockSpace& space, const CouplingParams& params, double omega1,
                               double omega2) {
    // Zero couplings are legal here (the zero matrix); the angle and
    // protocol paths enforce positivity through CouplingParams::validate.
    if (params.g1 < 0.0 || params.g2 < 0.0 || params.atom_count < 0.0 || omega1 < 0.0 ||
        omega2 < 0.0)
        throw std::invalid_argument("build_hamiltonian: negative coupling");
    auto a1 = ladder(space, Mode::ProbeOne, LadderKind::Lower);
    auto a2 = ladder(space, Mode::ProbeTwo, LadderKind::Lower);
    auto A = ladder(space, Mode::AtomA, LadderKind::Lower);
    auto C = ladder(space, Mode::AtomC, LadderKind::Lower);
    auto D = ladder(space, Mode::AtomD, LadderKind::Lower);

    auto bilinear = [](const SparseMatrix& x, const SparseMatrix& y) {
        // x† y + y† x ; excitation-conserving, so exact under truncation.
        SparseMatrix xy = SparseMatrix(x.adjoint()) * y;
        return SparseMatrix(xy + SparseMatrix(xy.adjoint()));
    };

    SparseMatrix V = params.gn1() * bilinear(A, a1) + omega1 * bilinear(A, C) +
                     params.gn2() * bilinear(D, a2) + omega2 * bilinear(D, C);
    V.makeCompressed();
    return V;
}

PolaritonSet polariton_set_at_angles(const FockSpace& space, const CouplingParams& params,
                                     const MixingAngles& angles) {
    auto a1 = ladder(space, Mode::ProbeOne, LadderKind::Lower);
    auto a2 = ladder(space, Mode::ProbeTwo, LadderKind::Lower);
    auto A = ladder(space, Mode::AtomA, LadderKind::Lower);
    auto C = ladder(space, Mode::AtomC, LadderKind::Lower);
    auto D = ladder(space, Mode::AtomD, LadderKind::Lower);

    const double ct = std::cos(angles.theta), st = std::sin(angles.theta);
    const double cf = std::cos(angles.phi), sf = std::sin(angles.phi);

    PolaritonSet set;
    set.dark = ct * cf * a1 - st * C + ct * sf * a2;
    // The C coefficient is cos(theta); only then do the ladder relations
    // [V, Q±†] = ±eps1 Q±† close (checked in the test suite).
    set.bright = st * cf * a1 + ct * C + st * sf * a2;
    set.u = cf * A + sf * D;
    set.v = -sf * A + cf * D;
    set.s = -sf * a1 + cf * a2;
    set.q_plus = set.u + set.bright;
    set.q_minus = SparseMatrix(set.u - set.bright);
    set.p_plus = set.s + set.v;
    set.p_minus = SparseMatrix(set.s - set.v);
    set.angles = angles;
    set.params = params;
    return set;
}

PolaritonSet polariton_set(const FockSpace& space, const CouplingParams& params, double omega1,
                           double omega2) {
    auto angles = mixing_angles(params, omega1, omega2);
    auto set = polariton_set_at_angles(space, params, angles);
    auto e = polariton_energies(params, omega1, omega2);
    set.eps1 = e.eps1;
    set.eps2 = e.eps2;
    return set;
}

namespace {

StateVector apply_raising_power(const SparseMatrix& op_lowering, int power,
                                const StateVector& base) {
    SparseMatrix raise = adjoint(op_lowering);
    StateVector out = base;
    for (int p = 0; p < power; ++p) out.amplitudes = raise * out.amplitudes;
    return out;
}

}  // namespace

StateVector dark_state(const FockSpace& space, int n, const MixingAngles& angles) {
    if (n < 0 || n > space.cutoff())
        throw std::out_of_range("dark_state: n exceeds the space cutoff");
    CouplingParams dummy;  // operators depend only on the angles
    dummy.g1 = dummy.g2 = 1.0;
    auto set = polariton_set_at_angles(space, dummy, angles);
    StateVector vac = StateVector::basis(space, BasisState{});
    StateVector out = apply_raising_power(set.dark, n, vac);
    out.normalize();  // exact 1/sqrt(n!) since d is canonical
    return out;
}

DegeneracyState degeneracy_state(const FockSpace& space, const PolaritonSet& set,
                                 const DegeneracyIndex& idx) {
    if (idx.i < 0 || idx.j < 0 || idx.k < 0 || idx.l < 0 || idx.n < 0)
        throw std::invalid_argument("degeneracy_state: indices must be non-negative");
    if (std::abs(set.params.g1 - set.params.g2) > 1e-12 * std::max(set.params.g1, set.params.g2))
        throw std::invalid_argument("degeneracy_state: requires g1 = g2");
    if (idx.total_excitation() > space.cutoff() - 2)
        throw std::out_of_range("degeneracy_state: needs two quanta of cutoff headroom");

    StateVector state = dark_state(space, idx.n, set.angles);
    state = apply_raising_power(set.q_plus, idx.i, state);
    state = apply_raising_power(set.q_minus, idx.j, state);
    state = apply_raising_power(set.p_plus, idx.k, state);
    state = apply_raising_power(set.p_minus, idx.l, state);
    state.normalize();  // Q±, P± are not canonical bosons; normalize explicitly

    DegeneracyState out;
    out.state = state;
    out.eigenvalue = (idx.i - idx.j) * set.eps1 + (idx.k - idx.l) * set.eps2;
    out.index = idx;
    return out;
}

Matrix adiabatic_mixing_matrix(const FockSpace& space, const PolaritonSet& set,
                               const std::vector<DegeneracyIndex>& indices, AngleId which,
                               double step) {
    if (step < 1e-6 || step > 1e-3)
        throw std::invalid_argument("adiabatic_mixing_matrix: step must be in [1e-6, 1e-3]");

    auto displaced_set = [&](double delta) {
        MixingAngles a = set.angles;
        (which == AngleId::Theta ? a.theta : a.phi) += delta;
        auto s = polariton_set_at_angles(space, set.params, a);
        s.eps1 = set.eps1;  // eigenvalue metadata is not differentiated
        s.eps2 = set.eps2;
        return s;
    };

    auto set_plus = displaced_set(step);
    auto set_minus = displaced_set(-step);

    const int count = static_cast<int>(indices.size());
    std::vector<StateVector> bras(count);
    std::vector<StateVector> derivs(count);
    for (int c = 0; c < count; ++c) {
        bras[c] = degeneracy_state(space, set, indices[c]).state;
        auto fwd = degeneracy_state(space, set_plus, indices[c]).state;
        auto bwd = degeneracy_state(space, set_minus, indices[c]).state;
        derivs[c].amplitudes = (fwd.amplitudes - bwd.amplitudes) / (2.0 * step);
    }

    Matrix mix(count, count);
    for (int r = 0; r < count; ++r)
        for (int c = 0; c < count; ++c) mix(r, c) = bras[r].inner(derivs[c]);
    return mix;
}

}  // namespace qmem
