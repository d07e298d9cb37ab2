// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qmem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTimeTol = 1e-9;  // relative junction tolerance

double lerp_cosine(double a, double b, double u) {
    return a + (b - a) * 0.5 * (1.0 - std::cos(kPi * u));
}

}  // namespace

ControlSchedule::ControlSchedule(std::vector<ControlSegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("ControlSchedule: no segments");
    double span = std::max(1e-300, segments_.back().t_end - segments_.front().t_start);
    for (size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.t_end > s.t_start))
            throw std::invalid_argument("ControlSchedule: segment " + std::to_string(i) +
                                        " has non-positive duration");
        if (s.omega1_start < 0 || s.omega1_end < 0 || s.omega2_start < 0 || s.omega2_end < 0)
            throw std::invalid_argument("ControlSchedule: Rabi frequencies must be >= 0");
        if (s.profile == ProfileKind::Constant &&
            (s.omega1_start != s.omega1_end || s.omega2_start != s.omega2_end))
            throw std::invalid_argument("ControlSchedule: constant segment with unequal endpoints");
        if (i > 0) {
            const auto& p = segments_[i - 1];
            double gap = s.t_start - p.t_end;
            if (gap > kTimeTol * span)
                throw std::invalid_argument("ControlSchedule: gap between segments " +
                                            std::to_string(i - 1) + " and " + std::to_string(i));
            if (gap < -kTimeTol * span)
                throw std::invalid_argument("ControlSchedule: overlapping segments over [" +
                                            std::to_string(s.t_start) + ", " +
                                            std::to_string(p.t_end) + "]");
            double scale =
                1.0 + std::max({p.omega1_end, p.omega2_end, s.omega1_start, s.omega2_start});
            if (std::abs(p.omega1_end - s.omega1_start) > 1e-9 * scale ||
                std::abs(p.omega2_end - s.omega2_start) > 1e-9 * scale)
                throw std::invalid_argument(
                    "ControlSchedule: discontinuous control values at segment junction " +
                    std::to_string(i));
        }
    }
}

double ControlSchedule::t_start() const {
    if (segments_.empty()) throw std::logic_error("ControlSchedule: empty");
    return segments_.front().t_start;
}

double ControlSchedule::t_end() const {
    if (segments_.empty()) throw std::logic_error("ControlSchedule: empty");
    return segments_.back().t_end;
}

bool ControlSchedule::covers(double t0, double t1) const {
    if (segments_.empty()) return false;
    double span = std::max(1e-300, t_end() - t_start());
    return t0 >= t_start() - kTimeTol * span && t1 <= t_end() + kTimeTol * span;
}

ControlSample ControlSchedule::at(double t) const {
    if (segments_.empty()) throw std::logic_error("ControlSchedule: empty");
    double span = std::max(1e-300, t_end() - t_start());
    if (t < t_start() - kTimeTol * span || t > t_end() + kTimeTol * span)
        throw std::out_of_range("ControlSchedule: time outside schedule");
    t = std::clamp(t, t_start(), t_end());
    // Segments are few; a linear scan keeps this simple.
    const ControlSegment* seg = &segments_.back();
    for (const auto& s : segments_) {
        if (t <= s.t_end) {
            seg = &s;
            break;
        }
    }
    ControlSample out;
    if (seg->profile == ProfileKind::Constant) {
        out.omega1 = seg->omega1_start;
        out.omega2 = seg->omega2_start;
    } else {
        double u = (t - seg->t_start) / (seg->t_end - seg->t_start);
        out.omega1 = lerp_cosine(seg->omega1_start, seg->omega1_end, u);
        out.omega2 = lerp_cosine(seg->omega2_start, seg->omega2_end, u);
    }
    return out;
}

MixingAngles ControlSchedule::angles_at(double gn1, double gn2, double t) const {
    ControlSample c = at(t);
    if (c.omega1 > 0.0 || c.omega2 > 0.0)
        return mixing_angles_collective(gn1, gn2, c.omega1, c.omega2);
    // Both controls off: theta = pi/2, phi held at its last defined value.
    MixingAngles a;
    a.theta = kPi / 2.0;
    a.phi = 0.0;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
        if (it->t_start > t) continue;
        double o1 = it->omega1_end, o2 = it->omega2_end;
        if (o1 <= 0.0 && o2 <= 0.0) {
            // Ramp ending at zero: the limiting ratio comes from the start
            // values.
            o1 = it->omega1_start;
            o2 = it->omega2_start;
        }
        if (o1 > 0.0 || o2 > 0.0) {
            a.phi = std::atan2(gn1 * o2, gn2 * o1);
            break;
        }
    }
    return a;
}

MixingAngles ControlSchedule::angles_at(const CouplingParams& params, double t) const {
    return angles_at(params.gn1(), params.gn2(), t);
}

ControlSchedule make_storage_schedule(const CouplingParams& params, double omega_max, double phi0,
                                      double phi_release, double ramp_duration,
                                      double hold_duration) {
    params.validate();
    if (!(omega_max > 0.0)) throw std::invalid_argument("make_storage_schedule: omega_max <= 0");
    if (!(ramp_duration > 0.0))
        throw std::invalid_argument("make_storage_schedule: ramp_duration <= 0");
    if (hold_duration < 0.0)
        throw std::invalid_argument("make_storage_schedule: hold_duration < 0");

    const double gn1 = params.gn1(), gn2 = params.gn2();
    const double gref = std::sqrt(gn1 * gn2);

    // Control pair realizing angle phi at common scale s, normalized so
    // that theta(s) = atan(gref / (s * omega_max)).
    auto controls = [&](double phi, double scale) {
        return std::pair<double, double>{scale * omega_max * std::cos(phi) * gn1 / gref,
                                         scale * omega_max * std::sin(phi) * gn2 / gref};
    };
    auto theta_of = [&](double scale) { return std::atan2(gref, scale * omega_max); };
    auto eps1_of = [&](double phi, double scale) {
        auto [o1, o2] = controls(phi, scale);
        return polariton_energies(params, o1, o2).eps1;
    };

    // A few wide levels keep the sweep curvature at the global pi^2
    // dtheta / T^2 scale; many short cosine segments would each land with
    // zero slope and radiate at their junctions.
    std::vector<double> scales{1.0};
    for (double knee : {6.0, 1.2}) {
        double s = knee * gref / omega_max;
        if (s < 0.75 * scales.back()) scales.push_back(s);
    }
    scales.push_back(0.0);

    const int n_seg = static_cast<int>(scales.size()) - 1;
    std::vector<double> weights(n_seg);
    double total = 0.0;
    for (int k = 0; k < n_seg; ++k) {
        double dtheta = theta_of(scales[k + 1]) - theta_of(scales[k]);
        double gap = eps1_of(phi0, scales[k + 1]);  // smallest gap in the segment
        weights[k] = dtheta / gap;
        total += weights[k];
    }

    std::vector<ControlSegment> segs;
    double t = 0.0;
    auto push_ramp = [&](double phi, double sa, double sb, double duration) {
        ControlSegment seg;
        seg.t_start = t;
        seg.t_end = t + duration;
        seg.profile = ProfileKind::CosineRamp;
        auto [o1a, o2a] = controls(phi, sa);
        auto [o1b, o2b] = controls(phi, sb);
        seg.omega1_start = o1a;
        seg.omega1_end = o1b;
        seg.omega2_start = o2a;
        seg.omega2_end = o2b;
        segs.push_back(seg);
        t = seg.t_end;
    };

    for (int k = 0; k < n_seg; ++k)
        push_ramp(phi0, scales[k], scales[k + 1], ramp_duration * weights[k] / total);

    if (hold_duration > 0.0) {
        ControlSegment hold;
        hold.t_start = t;
        hold.t_end = t + hold_duration;
        hold.profile = ProfileKind::Constant;
        segs.push_back(hold);
        t = hold.t_end;
    }

    for (int k = n_seg - 1; k >= 0; --k)
        push_ramp(phi_release, scales[k + 1], scales[k], ramp_duration * weights[k] / total);

    return ControlSchedule(std::move(segs));
}

}  // namespace qmem
