// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "qmem/ensemble.hpp"

namespace qmem {

enum class ProfileKind { Constant, CosineRamp };

// One control segment over [t_start, t_end]. A cosine ramp interpolates
// each Rabi frequency with a raised cosine (zero slope at both ends), so
// any chain of segments with matching endpoint values is C^1.
struct ControlSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    ProfileKind profile = ProfileKind::Constant;
    double omega1_start = 0.0, omega1_end = 0.0;
    double omega2_start = 0.0, omega2_end = 0.0;
};

struct ControlSample {
    double omega1 = 0.0;
    double omega2 = 0.0;
};

// Piecewise control schedule: contiguous, non-overlapping segments with
// non-negative Rabi frequencies and continuous values at junctions.
class ControlSchedule {
public:
    ControlSchedule() = default;
    explicit ControlSchedule(std::vector<ControlSegment> segments);

    const std::vector<ControlSegment>& segments() const { return segments_; }
    double t_start() const;
    double t_end() const;
    bool covers(double t0, double t1) const;

    ControlSample at(double t) const;

    // Mixing angles with hold semantics: while both controls are off, phi
    // keeps its most recent defined value (it only matters once controls
    // are re-applied).
    MixingAngles angles_at(double gn1, double gn2, double t) const;
    MixingAngles angles_at(const CouplingParams& params, double t) const;

private:
    std::vector<ControlSegment> segments_;
};

// Multi-segment storage/release schedule: chained raised-cosine ramps take
// the common control scale from omega_max to zero (ratio fixed by phi0),
// hold, then back up with the ratio set by phi_release. Segment durations
// are distributed to keep the sweep rate of theta relative to the eps1
// gap roughly uniform, then scaled so each ramp lasts ramp_duration.
ControlSchedule make_storage_schedule(const CouplingParams& params, double omega_max, double phi0,
                                      double phi_release, double ramp_duration,
                                      double hold_duration);

}  // namespace qmem
