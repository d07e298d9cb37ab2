// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmem {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// ---------------------------------------------------------------------------
// Lanczos propagator
// ---------------------------------------------------------------------------

namespace {

// The interaction Hamiltonian fused into one static-pattern CSR with three
// real value arrays: V(t)[k] = v_static[k] + O1(t) v_o1[k] + O2(t) v_o2[k]
// (the g-terms never change, the control bilinears scale). The per-step
// coefficients are folded once per step and every Krylov matvec is a
// single pass with raw loops; Eigen's expression paths are several times
// slower here and this loop carries the whole protocol cost.
struct HamiltonianBlocks {
    std::vector<int> row_ptr;
    std::vector<std::uint16_t> col;  // dim <= C(21,5) < 65536
    std::vector<double> v_static, v_o1, v_o2, v_now;

    HamiltonianBlocks(const FockSpace& space, const CouplingParams& params) {
        auto a1 = ladder(space, Mode::ProbeOne, LadderKind::Lower);
        auto a2 = ladder(space, Mode::ProbeTwo, LadderKind::Lower);
        auto A = ladder(space, Mode::AtomA, LadderKind::Lower);
        auto C = ladder(space, Mode::AtomC, LadderKind::Lower);
        auto D = ladder(space, Mode::AtomD, LadderKind::Lower);
        auto bilinear = [](const SparseMatrix& x, const SparseMatrix& y) {
            SparseMatrix xy = SparseMatrix(x.adjoint()) * y;
            SparseMatrix out = xy + SparseMatrix(xy.adjoint());
            out.makeCompressed();
            return out;
        };
        SparseMatrix b_static = params.gn1() * bilinear(A, a1) + params.gn2() * bilinear(D, a2);
        SparseMatrix b_o1 = bilinear(A, C);
        SparseMatrix b_o2 = bilinear(D, C);
        SparseMatrix pattern = b_static + b_o1 + b_o2;  // union of the supports
        pattern.makeCompressed();

        const int n = space.dim();
        row_ptr.assign(n + 1, 0);
        // Eigen stores column-major; the blocks are real symmetric, so
        // columns double as CSR rows.
        for (int k = 0; k < pattern.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(pattern, k); it; ++it)
                ++row_ptr[it.col() + 1];
        for (int i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
        const int nnz = row_ptr[n];
        col.assign(nnz, 0);
        v_static.assign(nnz, 0.0);
        v_o1.assign(nnz, 0.0);
        v_o2.assign(nnz, 0.0);
        v_now.assign(nnz, 0.0);
        std::vector<int> cursor(row_ptr.begin(), row_ptr.end() - 1);
        for (int k = 0; k < pattern.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(pattern, k); it; ++it)
                col[cursor[it.col()]++] = static_cast<std::uint16_t>(it.row());
        auto scatter = [&](const SparseMatrix& m, std::vector<double>& dst) {
            for (int k = 0; k < m.outerSize(); ++k) {
                for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
                    const int r = static_cast<int>(it.col());
                    for (int s = row_ptr[r]; s < row_ptr[r + 1]; ++s) {
                        if (col[s] == it.row()) {
                            dst[s] += it.value().real();
                            break;
                        }
                    }
                }
            }
        };
        scatter(b_static, v_static);
        scatter(b_o1, v_o1);
        scatter(b_o2, v_o2);
    }

    void set_controls(double omega1, double omega2) {
        const std::size_t nnz = v_now.size();
        const double* s = v_static.data();
        const double* a = v_o1.data();
        const double* b = v_o2.data();
        double* w = v_now.data();
        for (std::size_t k = 0; k < nnz; ++k) w[k] = s[k] + omega1 * a[k] + omega2 * b[k];
    }

    // y = H x and Re<x, y> in one pass (real for Hermitian H).
    double apply_and_dot(const Vector& x, Vector& y) const {
        const int n = static_cast<int>(row_ptr.size()) - 1;
        const Complex* xp = x.data();
        Complex* yp = y.data();
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex acc(0.0, 0.0);
            for (int s = row_ptr[i]; s < row_ptr[i + 1]; ++s) acc += v_now[s] * xp[col[s]];
            yp[i] = acc;
            dot += xp[i].real() * acc.real() + xp[i].imag() * acc.imag();
        }
        return dot;
    }

    void apply(const Vector& x, Vector& y) const { (void)apply_and_dot(x, y); }
};

// One step of exp(-i dt H) psi via a plain Hermitian Lanczos recurrence.
// For dt ||H|| <= 0.1 a fixed order of 7 leaves a truncation error
// ~ 2 (dt ||H|| / 2)^m / m! < 1e-12 per step, and over so few iterations
// the three-term recurrence keeps the basis orthonormal to round-off, so
// the update stays unitary to machine precision.
class LanczosStepper {
public:
    static constexpr int kOrder = 7;

    explicit LanczosStepper(int dim) : dim_(dim) {
        const int m = std::min(kOrder, std::max(1, dim));
        basis_.resize(m);
        for (auto& v : basis_) v.resize(dim);
        alpha_.resize(m);
        beta_.resize(m);
        work_.resize(dim);
    }

    void step(const HamiltonianBlocks& h, double dt, Vector& psi) {
        const double norm0 = psi.norm();
        if (norm0 == 0.0) return;
        const int m_max = static_cast<int>(basis_.size());
        basis_[0] = psi / norm0;
        int m = m_max;
        for (int j = 0; j < m_max; ++j) {
            alpha_[j] = h.apply_and_dot(basis_[j], work_);
            // work -= alpha b_j + beta_{j-1} b_{j-1}, accumulating |work|^2
            const Complex* bj = basis_[j].data();
            const Complex* bp = j > 0 ? basis_[j - 1].data() : nullptr;
            const double a = alpha_[j];
            const double b = j > 0 ? beta_[j - 1] : 0.0;
            Complex* w = work_.data();
            double norm_sq = 0.0;
            for (int i = 0; i < dim_; ++i) {
                Complex v = w[i] - a * bj[i];
                if (bp) v -= b * bp[i];
                w[i] = v;
                norm_sq += v.real() * v.real() + v.imag() * v.imag();
            }
            beta_[j] = std::sqrt(norm_sq);
            if (beta_[j] < 1e-13 || j + 1 == m_max) {
                m = j + 1;  // happy breakdown: the subspace is invariant
                break;
            }
            const double inv = 1.0 / beta_[j];
            Complex* nx = basis_[j + 1].data();
            for (int i = 0; i < dim_; ++i) nx[i] = w[i] * inv;
        }
        Eigen::VectorXcd weights = small_exp(m, dt);
        // psi = norm0 * sum_r weights_r basis_r, one fused pass
        Complex* out = psi.data();
        for (int i = 0; i < dim_; ++i) {
            Complex acc(0.0, 0.0);
            for (int r = 0; r < m; ++r) acc += weights[r] * basis_[r].data()[i];
            out[i] = norm0 * acc;
        }
    }

private:
    // exp(-i dt T_m) e1 for the tridiagonal projection.
    Eigen::VectorXcd small_exp(int m, double dt) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha_[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta_[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        Eigen::VectorXcd phases(m);
        for (int i = 0; i < m; ++i)
            phases[i] = std::exp(Complex(0.0, -dt * es.eigenvalues()[i]));
        return es.eigenvectors() *
               (phases.array() * es.eigenvectors().row(0).transpose().cast<Complex>().array())
                   .matrix();
    }

    int dim_;
    std::vector<Vector> basis_;
    std::vector<double> alpha_, beta_;
    Vector work_;
};

double norm_estimate(const FockSpace& space, const CouplingParams& params,
                     const ControlSchedule& schedule, double t0, double t1) {
    // ||V(t)|| = cutoff * eps1(t); eps1 is monotone in the control scale
    // and every profile is monotone within a segment, so segment endpoints
    // bound the maximum.
    double worst = 0.0;
    auto probe = [&](double t) {
        auto c = schedule.at(t);
        worst = std::max(worst, polariton_energies(params, c.omega1, c.omega2).eps1);
    };
    probe(t0);
    probe(t1);
    for (const auto& s : schedule.segments()) {
        if (s.t_end <= t0 || s.t_start >= t1) continue;
        probe(std::clamp(s.t_start, t0, t1));
        probe(std::clamp(s.t_end, t0, t1));
    }
    return space.cutoff() * worst;
}

}  // namespace

Trajectory evolve(const FockSpace& space, const CouplingParams& params,
                  const ControlSchedule& schedule, const StateVector& psi0, double t0, double t1,
                  double dt, int sample_count) {
    params.validate();
    if (psi0.amplitudes.size() != space.dim())
        throw std::invalid_argument("evolve: state dimension mismatch");
    if (!(t1 > t0)) throw std::invalid_argument("evolve: t1 must exceed t0");
    if (!schedule.covers(t0, t1))
        throw std::invalid_argument("evolve: schedule does not cover [t0, t1]");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    const double vnorm = norm_estimate(space, params, schedule, t0, t1);
    if (dt * vnorm > 0.1 * (1.0 + 1e-9))
        throw std::invalid_argument("evolve: dt * ||V|| = " + std::to_string(dt * vnorm) +
                                    " exceeds 0.1; reduce the step");

    const int n_steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-12)));
    const double h = (t1 - t0) / n_steps;

    std::vector<double> totals(space.dim());
    for (int i = 0; i < space.dim(); ++i) totals[i] = space.state(i).total();
    auto excitation = [&](const Vector& v) {
        double acc = 0.0;
        for (int i = 0; i < space.dim(); ++i) acc += totals[i] * std::norm(v[i]);
        return acc;
    };

    HamiltonianBlocks blocks(space, params);
    LanczosStepper stepper(space.dim());

    Trajectory traj;
    const int samples = std::max(sample_count, 2);
    int next_sample = 0;
    Vector psi = psi0.amplitudes;
    const double exc0 = excitation(psi);

    auto record = [&](double t, const Vector& v) {
        traj.times.push_back(t);
        traj.states.push_back(StateVector{v});
        traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(v.norm() - 1.0));
        traj.max_excitation_drift =
            std::max(traj.max_excitation_drift, std::abs(excitation(v) - exc0));
    };

    record(t0, psi);
    next_sample = 1;
    for (int i = 0; i < n_steps; ++i) {
        const double tm = t0 + (i + 0.5) * h;
        auto c = schedule.at(tm);
        blocks.set_controls(c.omega1, c.omega2);
        stepper.step(blocks, h, psi);
        // Sample on a uniform grid including the final state.
        bool due = false;
        while (next_sample < samples &&
               (i + 1) >= static_cast<double>(next_sample) * n_steps / (samples - 1)) {
            due = true;
            ++next_sample;
        }
        if (due) record(t0 + (i + 1) * h, psi);
    }
    if (traj.times.back() < t1 - 1e-12 * (t1 - t0)) record(t1, psi);
    return traj;
}

// ---------------------------------------------------------------------------
// Storage / release protocol
// ---------------------------------------------------------------------------

namespace {

Mode input_mode_of(const ProtocolInput& input) {
    if (input.mode == 1) return Mode::ProbeOne;
    if (input.mode == 2) return Mode::ProbeTwo;
    throw std::invalid_argument("ProtocolInput: mode must be 1 or 2");
}

StateVector make_input_state(const FockSpace& space, const ProtocolInput& input) {
    switch (input.kind) {
        case InputKind::Coherent:
            return coherent_state(space, input_mode_of(input), input.alpha);
        case InputKind::Cat:
            return cat_state(space, input_mode_of(input), input.alpha, input.cat_sign);
        case InputKind::SinglePhoton: {
            BasisState s{};
            s.occupations[static_cast<int>(input_mode_of(input))] = 1;
            return StateVector::basis(space, s);
        }
        case InputKind::Custom:
            if (!input.custom) throw std::invalid_argument("ProtocolInput: missing custom state");
            if (input.custom->amplitudes.size() != space.dim())
                throw std::invalid_argument("ProtocolInput: custom state dimension mismatch");
            return *input.custom;
    }
    throw std::logic_error("make_input_state: unreachable");
}

// Dark-subspace population monitor with the ladder matrices cached once;
// per sample it only assembles d-dagger and climbs the dark tower.
class DarkMonitor {
public:
    explicit DarkMonitor(const FockSpace& space)
        : space_(space),
          a1_(adjoint(ladder(space, Mode::ProbeOne, LadderKind::Lower))),
          a2_(adjoint(ladder(space, Mode::ProbeTwo, LadderKind::Lower))),
          c_(adjoint(ladder(space, Mode::AtomC, LadderKind::Lower))) {}

    double population(const MixingAngles& angles, const StateVector& psi) const {
        const double ct = std::cos(angles.theta), st = std::sin(angles.theta);
        const double cf = std::cos(angles.phi), sf = std::sin(angles.phi);
        SparseMatrix raise = ct * cf * a1_ - st * c_ + ct * sf * a2_;
        Vector dn = StateVector::basis(space_, BasisState{}).amplitudes;
        double pop = std::norm(dn.dot(psi.amplitudes));
        for (int n = 1; n <= space_.cutoff(); ++n) {
            dn = (raise * dn).eval();
            double norm = dn.norm();
            if (norm <= 0.0) break;
            dn /= norm;
            pop += std::norm(dn.dot(psi.amplitudes));
        }
        return pop;
    }

private:
    const FockSpace& space_;
    SparseMatrix a1_, a2_, c_;
};

double population_outside_mode(const FockSpace& space, const StateVector& psi, Mode mode) {
    double pop = 0.0;
    for (int i = 0; i < space.dim(); ++i) {
        const auto& s = space.state(i);
        if (s.total() != s[mode]) pop += std::norm(psi.amplitudes[i]);
    }
    return pop;
}

ProtocolResult run_protocol(const FockSpace& space, const CouplingParams& params,
                            const ProtocolSpec& spec) {
    params.validate();
    if (spec.release_angle < 0.0 || spec.release_angle > kPi / 2.0 + 1e-12)
        throw std::invalid_argument("ProtocolSpec: release angle must lie in [0, pi/2]");
    const double gref = std::sqrt(params.gn1() * params.gn2());
    const double theta0 = std::atan2(gref, spec.omega_max);
    if (theta0 > 0.05)
        throw std::invalid_argument(
            "ProtocolSpec: omega_max too weak; initial mixing angle theta(0) = " +
            std::to_string(theta0) + " exceeds 0.05 rad");

    const double phi0 = (input_mode_of(spec.input) == Mode::ProbeTwo) ? kPi / 2.0 : 0.0;
    ControlSchedule schedule = make_storage_schedule(params, spec.omega_max, phi0,
                                                     spec.release_angle, spec.ramp_duration,
                                                     spec.hold_duration);

    StateVector psi = make_input_state(space, spec.input);
    const double t_stored = spec.ramp_duration + spec.hold_duration;

    ProtocolResult result;
    auto& diag = result.diagnostics;
    DarkMonitor dark_monitor(space);

    auto monitor = [&](double t, const StateVector& state) {
        auto angles = schedule.angles_at(params, t);
        double pop = dark_monitor.population(angles, state);
        diag.times.push_back(t);
        diag.dark_population.push_back(pop);
        diag.theta.push_back(angles.theta);
        diag.phi.push_back(angles.phi);
        diag.min_dark_population = std::min(diag.min_dark_population, pop);
        if (pop < spec.dark_population_abort)
            throw AdiabaticityError(
                "storage protocol aborted: dark-subspace population " + std::to_string(pop) +
                " fell below " + std::to_string(spec.dark_population_abort) + " at t = " +
                std::to_string(t) + " (schedule too fast for adiabatic following)");
    };

    monitor(schedule.t_start(), psi);
    bool stored_recorded = false;
    // Sub-intervals keep the step matched to the local norm when a ramp
    // spans a wide control range.
    constexpr int kSpansPerSegment = 4;
    for (const auto& seg : schedule.segments()) {
        const int spans = seg.profile == ProfileKind::Constant ? 1 : kSpansPerSegment;
        const int samples =
            std::max(2, spec.samples_per_segment / spans + (spans > 1 ? 1 : 0));
        for (int span = 0; span < spans; ++span) {
            const double ta = seg.t_start + (seg.t_end - seg.t_start) * span / spans;
            const double tb = seg.t_start + (seg.t_end - seg.t_start) * (span + 1) / spans;
            double dt = spec.dt;
            if (dt <= 0.0) dt = 0.1 / norm_estimate(space, params, schedule, ta, tb);
            Trajectory traj =
                evolve(space, params, schedule, StateVector{psi}, ta, tb, dt, samples);
            diag.max_norm_drift = std::max(diag.max_norm_drift, traj.max_norm_drift);
            diag.max_excitation_drift =
                std::max(diag.max_excitation_drift, traj.max_excitation_drift);
            for (size_t i = 1; i < traj.states.size(); ++i) monitor(traj.times[i], traj.states[i]);
            psi = traj.states.back();
        }
        if (!stored_recorded && seg.t_end >= t_stored - 1e-12 * schedule.t_end()) {
            result.stored_state = psi;
            stored_recorded = true;
        }
    }
    if (!stored_recorded) result.stored_state = psi;
    diag.stored_population_outside_c =
        population_outside_mode(space, result.stored_state, Mode::AtomC);

    result.final_state = psi;
    StateVector target = released_target_state(space, spec.input, spec.release_angle);
    if (target.amplitudes.size() > 0)
        result.release_fidelity = std::norm(target.inner(result.final_state));
    return result;
}

}  // namespace

StateVector released_target_state(const FockSpace& space, const ProtocolInput& input,
                                  double release_angle) {
    const double cf = std::cos(release_angle), sf = std::sin(release_angle);
    switch (input.kind) {
        case InputKind::Coherent:
        case InputKind::Cat: {
            const Complex a1 = input.alpha * cf;
            const Complex a2 = input.alpha * sf;
            auto amp = [&](Complex alpha, int n) {
                Complex p = std::exp(-0.5 * std::norm(alpha));
                for (int k = 1; k <= n; ++k) p *= alpha / std::sqrt(double(k));
                return p;
            };
            StateVector v = StateVector::zero(space);
            for (int i = 0; i < space.dim(); ++i) {
                const auto& s = space.state(i);
                if (s[Mode::AtomA] || s[Mode::AtomC] || s[Mode::AtomD]) continue;
                const int n1 = s[Mode::ProbeOne], n2 = s[Mode::ProbeTwo];
                Complex c = amp(a1, n1) * amp(a2, n2);
                if (input.kind == InputKind::Cat) {
                    Complex cm = amp(-a1, n1) * amp(-a2, n2);
                    c = (input.cat_sign == CatSign::Plus) ? c + cm : c - cm;
                }
                v.amplitudes[i] = c;
            }
            v.normalize();
            return v;
        }
        case InputKind::SinglePhoton: {
            BasisState one_p1{}, one_p2{};
            one_p1.occupations[static_cast<int>(Mode::ProbeOne)] = 1;
            one_p2.occupations[static_cast<int>(Mode::ProbeTwo)] = 1;
            StateVector v = StateVector::zero(space);
            v.amplitudes[space.index_of(one_p1)] = cf;
            v.amplitudes[space.index_of(one_p2)] = sf;
            v.normalize();
            return v;
        }
        case InputKind::Custom:
            return StateVector{};  // no closed-form target
    }
    throw std::logic_error("released_target_state: unreachable");
}

ProtocolResult run_storage_release(const FockSpace& space, const CouplingParams& params,
                                   const ProtocolSpec& spec) {
    return run_protocol(space, params, spec);
}

ProtocolResult run_cat_protocol(const FockSpace& space, const CouplingParams& params,
                                const ProtocolSpec& spec) {
    if (spec.input.kind != InputKind::Cat)
        throw std::invalid_argument("run_cat_protocol: input must be a cat state");
    return run_protocol(space, params, spec);
}

DephasingSummary apply_motional_dephasing(const FockSpace& space, const StateVector& stored,
                                          const DephasingParams& params) {
    if (params.diffusion_rate < 0.0 || params.time < 0.0)
        throw std::invalid_argument("apply_motional_dephasing: D and t must be >= 0");
    double outside = population_outside_mode(space, stored, Mode::AtomC);
    if (outside > 1e-6)
        throw std::invalid_argument(
            "apply_motional_dephasing: state not in stored form; population outside the "
            "collective mode = " +
            std::to_string(outside));

    const int m = space.cutoff();
    Vector c(m + 1);
    BasisState s{};
    for (int n = 0; n <= m; ++n) {
        s.occupations[static_cast<int>(Mode::AtomC)] = static_cast<std::uint8_t>(n);
        c[n] = stored.amplitudes[space.index_of(s)];
    }

    DephasingSummary out;
    out.populations = c.cwiseAbs2().real();
    out.density = Matrix(m + 1, m + 1);
    const double dt = params.diffusion_rate * params.time;
    double purity = 0.0;
    for (int n = 0; n <= m; ++n) {
        for (int k = 0; k <= m; ++k) {
            // populations survive; the (n,k) coherence picks up exp(-(n+k) D t)
            double factor = (n == k) ? 1.0 : std::exp(-double(n + k) * dt);
            out.density(n, k) = c[n] * std::conj(c[k]) * factor;
            purity += std::norm(out.density(n, k));
        }
    }
    out.purity = purity;
    return out;
}

}  // namespace qmem
