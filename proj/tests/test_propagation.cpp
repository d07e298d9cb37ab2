// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "oracles.hpp"
#include "qmem/propagation.hpp"

using namespace qmem;

namespace {

constexpr double kPi = 3.14159265358979323846;

ContinuumParams lab_params() {
    ContinuumParams p;
    p.gn1 = p.gn2 = 1e9;  // g sqrt(N)
    p.gamma = 1e8;
    p.light_speed = 3e8;
    p.medium_length = 120.0;
    p.atom_count = 1e8;
    return p;
}

ControlSchedule constant_controls(double o1, double o2, double t1) {
    ControlSegment seg;
    seg.t_start = 0.0;
    seg.t_end = t1;
    seg.profile = ProfileKind::Constant;
    seg.omega1_start = seg.omega1_end = o1;
    seg.omega2_start = seg.omega2_end = o2;
    return ControlSchedule({seg});
}

}  // namespace

TEST_CASE("free advection is an exact shift") {
    ContinuumParams p = lab_params();
    p.gamma = 0.0;
    p.medium_length = 30.0;
    FieldGrid grid = make_grid(p, 0.0, 512);
    const double dt = grid.dz / p.light_speed;

    // Place a pulse mid-grid and march with controls and couplings inert
    // (no atoms excited, sigma = 0 throughout, and the drive enters only
    // through sigma so the fields advect freely).
    for (int j = 0; j < grid.cells(); ++j) {
        double z = grid.z(j) - 10.0;
        grid.e1[j] = std::exp(-z * z / 4.0);
    }
    Vector before = grid.e1;
    ContinuumParams inert = p;
    inert.gn1 = inert.gn2 = 1e-30;  // couplings enter only via sigma sources
    const int steps = 128;
    for (int i = 0; i < steps; ++i) step(grid, inert, 0.0, 0.0, dt);

    for (int j = steps; j < grid.cells(); ++j)
        CHECK(std::abs(grid.e1[j] - before[j - steps]) <= 1e-12);
    CHECK(grid.sigma_bc.norm() == 0.0);
}

TEST_CASE("step validates CFL and controls") {
    ContinuumParams p = lab_params();
    FieldGrid grid = make_grid(p, 0.0, 128);
    CHECK_THROWS_WITH_AS(step(grid, p, 1e8, 0.0, 3.0 * grid.dz / p.light_speed),
                         doctest::Contains("CFL"), std::invalid_argument);
    CHECK_THROWS_AS(step(grid, p, -1.0, 0.0, grid.dz / p.light_speed), std::invalid_argument);
}

TEST_CASE("local coherences relax onto the zero-order solution") {
    // Constant fields, t >> 1/Gamma: the stationary state obeys
    // sigma_ba = (i g1 E1 + i O1 sigma_bc) / Gamma exactly.
    ContinuumParams p = lab_params();
    p.medium_length = 1.0;
    FieldGrid grid = make_grid(p, 0.0, 8);
    const double o1 = 0.05 * p.gamma, o2 = 0.03 * p.gamma;
    const double dt = grid.dz / p.light_speed;
    const Complex e1(1e-3, 0.0), e2(-4e-4, 2e-4);

    StepOptions opts;
    opts.boundary_e1 = e1;
    opts.boundary_e2 = e2;
    // hold the fields fixed everywhere by re-imposing them each step
    const int steps = static_cast<int>(40.0 / (p.gamma * dt));
    for (int i = 0; i < steps; ++i) {
        grid.e1.setConstant(e1);
        grid.e2.setConstant(e2);
        step(grid, p, o1, o2, dt, opts);
    }
    const int j = 4;
    const double g1 = p.gn1 / std::sqrt(p.atom_count);
    Complex expected =
        (Complex(0, 1) * g1 * e1 + Complex(0, 1) * o1 * grid.sigma_bc[j]) / p.gamma;
    CHECK(std::abs(grid.sigma_ba[j] - expected) <= 0.01 * std::abs(expected));
}

TEST_CASE("quasi-static drive reproduces the first-order spin coherence") {
    // sigma_bc ~ -(g1 O1 E1 + g2 O2 E2)/O0^2 + (Gamma/O0^4)(g1 O1 dE1 + g2 O2 dE2)
    ContinuumParams p = lab_params();
    p.medium_length = 1.0;
    FieldGrid grid = make_grid(p, 0.0, 8);
    const double o1 = 0.2 * p.gamma, o2 = 0.1 * p.gamma;
    const double o0sq = o1 * o1 + o2 * o2;
    const double dt = grid.dz / p.light_speed;
    const double g1 = p.gn1 / std::sqrt(p.atom_count);
    const double g2 = p.gn2 / std::sqrt(p.atom_count);

    // Slow exponential turn-on: E(t) = E0 (1 - e^{-r t}) with r << O0^2/Gamma
    const double rate = 0.02 * o0sq / p.gamma;
    const double e0 = 1e-3;
    double t = 0.0;
    const int steps = static_cast<int>(4.0 / (rate * dt));
    for (int i = 0; i < steps; ++i) {
        double drive = e0 * (1.0 - std::exp(-rate * (t + 0.5 * dt)));
        grid.e1.setConstant(drive);
        grid.e2.setConstant(0.5 * drive);
        step(grid, p, o1, o2, dt);
        t += dt;
    }
    double drive = e0 * (1.0 - std::exp(-rate * t));
    double ddrive = e0 * rate * std::exp(-rate * t);
    const int j = 4;
    Complex first_order = -(g1 * o1 * drive + g2 * o2 * 0.5 * drive) / o0sq +
                          (p.gamma / (o0sq * o0sq)) * (g1 * o1 * ddrive + g2 * o2 * 0.5 * ddrive);
    CHECK(std::abs(grid.sigma_bc[j] - first_order) <= 0.05 * std::abs(first_order));
}

TEST_CASE("polariton diagnostics") {
    ContinuumParams p = lab_params();
    FieldGrid grid = make_grid(p, 0.0, 64);
    for (int j = 0; j < grid.cells(); ++j) {
        grid.e1[j] = Complex(0.01 * j, 0.002);
        grid.e2[j] = Complex(0.003, -0.001 * j);
        grid.sigma_bc[j] = Complex(1e-6 * j, 2e-6);
    }

    SUBCASE("theta = 0 0 gives psi = E12") {
        // enormous controls push theta to zero
        auto f = polariton_diagnostics(grid, p, 1e14, 0.0);
        CHECK((f.psi - f.e12).norm() <= 1e-8 * f.e12.norm());
    }

    SUBCASE("phi = 0 gives s = E2") {
        auto f = polariton_diagnostics(grid, p, 1e9, 0.0);
        CHECK((f.s - grid.e2).norm() == 0.0);
    }

    SUBCASE("rotation identity pointwise") {
        auto f = polariton_diagnostics(grid, p, 7e8, 5e8);
        const double rn = std::sqrt(p.atom_count);
        for (int j = 0; j < grid.cells(); ++j) {
            double lhs = std::norm(f.psi[j]) + std::norm(f.phi[j]);
            double rhs = std::norm(f.e12[j]) + p.atom_count * std::norm(grid.sigma_bc[j]);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
        (void)rn;
    }

    SUBCASE("equal couplings have no mismatch mixing") {
        CHECK(mismatch_mixing_beta(p, 3e8, 5e8) == 0.0);
        ContinuumParams uneven = p;
        uneven.gn2 = 0.5e9;
        CHECK(mismatch_mixing_beta(uneven, 3e8, 5e8) > 0.0);
    }
}

TEST_CASE("energy is conserved without decay") {
    ContinuumParams p = lab_params();
    p.gamma = 0.0;
    p.gn1 = p.gn2 = 3e8;
    p.medium_length = 150.0;

    ScenarioOptions opts;
    opts.cells = 1500;
    opts.pad_length = 0.0;
    opts.pulse.field = 1;
    opts.pulse.peak = 1e-3;
    opts.pulse.sigma = 5e-8;
    opts.pulse.center = 3e-7;
    opts.duration = 8e-7;
    opts.trace_stride = 8;

    auto result = run_scenario(p, constant_controls(3e8, 2e8, opts.duration), opts);
    const auto& tr = result.trace;
    // after the pulse has fully entered and before anything exits
    double reference = -1.0;
    for (size_t i = 0; i < tr.times.size(); ++i) {
        double t = tr.times[i];
        if (t < opts.pulse.center + 4.0 * opts.pulse.sigma) continue;
        if (t > 6.5e-7) break;
        double total = tr.energy_e1[i] + tr.energy_e2[i] + tr.energy_atoms[i];
        if (reference < 0.0) reference = total;
        CHECK(std::abs(total - reference) <= 0.01 * reference);
    }
    CHECK(reference > 0.0);
}

TEST_CASE("four-level engine reduces to the three-level reference") {
    // With the second control and probe dark, E1 and the spin wave follow
    // the plain three-level slow-light problem.
    ContinuumParams p = lab_params();
    p.gn1 = p.gn2 = 5e8;
    p.medium_length = 150.0;
    const double theta = kPi / 4;
    const double omega = p.gn1 / std::tan(theta);

    ScenarioOptions opts;
    opts.cells = 1200;
    opts.pad_length = 0.0;
    opts.pulse.field = 1;
    opts.pulse.peak = 1e-3;
    opts.pulse.sigma = 1.2e-7;
    opts.pulse.center = 6e-7;
    opts.duration = 1.6e-6;
    opts.trace_stride = 4;

    auto result = run_scenario(p, constant_controls(omega, 0.0, opts.duration), opts);

    // nothing leaks into the second probe or the d-coherence
    CHECK(result.final_grid.e2.norm() <= 1e-12);
    CHECK(result.final_grid.sigma_bd.norm() <= 1e-12);

    auto ref = oracles::three_level_reference(p.gn1, p.gamma, p.light_speed, p.medium_length,
                                              opts.pad_length, opts.cells, omega,
                                              opts.pulse.peak, opts.pulse.center,
                                              opts.pulse.sigma, opts.duration);
    double scale = ref.e.norm();
    CHECK((result.final_grid.e1 - ref.e).norm() <= 0.02 * scale);
    double spin_scale = ref.sigma_bc.norm();
    CHECK((std::sqrt(p.atom_count) * result.final_grid.sigma_bc - ref.sigma_bc).norm() <=
          0.02 * spin_scale);

    // transport at c cos^2(theta)
    double v = fit_peak_velocity(result.trace, 9e-7, 1.35e-6);
    CHECK(std::abs(v - p.light_speed * 0.5) <= 0.02 * p.light_speed * 0.5);
}

TEST_CASE("grid refinement converges") {
    ContinuumParams p = lab_params();
    p.gn1 = p.gn2 = 5e8;
    p.medium_length = 60.0;

    auto released = [&](int cells) {
        ScenarioOptions opts;
        opts.cells = cells;
        opts.pad_length = 0.0;
        opts.pulse.field = 1;
        opts.pulse.peak = 1e-3;
        opts.pulse.sigma = 8e-8;
        opts.pulse.center = 4e-7;
        opts.duration = 8e-7;
        opts.trace_stride = 1 << 20;  // endpoints only
        double omega = p.gn1;  // theta = pi/4
        auto result = run_scenario(p, constant_controls(omega, 0.0, opts.duration), opts);
        return result.final_grid.e1;
    };

    auto coarse = released(500);
    auto medium = released(999);   // dz exactly halves (cells-1 doubles)
    auto fine = released(1997);

    // compare on the shared coarse nodes
    auto diff = [](const Vector& a, const Vector& b, int stride) {
        double acc = 0.0;
        for (int j = 0; j * stride < b.size() && j < a.size(); ++j)
            acc += std::norm(a[j] - b[j * stride]);
        return std::sqrt(acc);
    };
    double d1 = diff(coarse, medium, 2);
    double d2 = diff(medium, fine, 2);
    CHECK(d1 / d2 >= 2.0);
}

TEST_CASE("low-excitation flag trips on absurd drive") {
    ContinuumParams p = lab_params();
    p.medium_length = 10.0;
    FieldGrid grid = make_grid(p, 0.0, 64);
    const double dt = grid.dz / p.light_speed;
    StepOptions opts;
    opts.boundary_e1 = 1e5;  // far beyond the linear regime
    bool threw = false;
    try {
        for (int i = 0; i < 200; ++i) step(grid, p, 1e8, 1e8, dt, opts);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    CHECK(threw);
}
