// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

namespace {

std::uint64_t pack_key(const BasisState& s) {
    std::uint64_t key = 0;
    for (int m = 0; m < kModeCount; ++m) key = (key << 8) | s.occupations[m];
    return key;
}

void enumerate(int mode, int budget, BasisState& current, std::vector<BasisState>& out) {
    if (mode == kModeCount) {
        out.push_back(current);
        return;
    }
    for (int n = 0; n <= budget; ++n) {
        current.occupations[mode] = static_cast<std::uint8_t>(n);
        enumerate(mode + 1, budget - n, current, out);
    }
    current.occupations[mode] = 0;
}

}  // namespace

FockSpace::FockSpace(int cutoff) : cutoff_(cutoff) {
    if (cutoff < 0 || cutoff > kMaxCutoff)
        throw std::invalid_argument("FockSpace: cutoff must be in [0, 16], got " +
                                    std::to_string(cutoff));
    BasisState scratch{};
    enumerate(0, cutoff_, scratch, states_);
    index_.reserve(states_.size());
    for (int i = 0; i < static_cast<int>(states_.size()); ++i) index_[pack_key(states_[i])] = i;
}

int FockSpace::index_of(const BasisState& s) const {
    auto it = index_.find(pack_key(s));
    return it == index_.end() ? -1 : it->second;
}

void StateVector::normalize() {
    double n = amplitudes.norm();
    if (n <= 0.0) throw std::runtime_error("StateVector: cannot normalize a zero vector");
    amplitudes /= n;
}

StateVector StateVector::zero(const FockSpace& space) {
    StateVector v;
    v.amplitudes = Vector::Zero(space.dim());
    return v;
}

StateVector StateVector::basis(const FockSpace& space, const BasisState& s) {
    int idx = space.index_of(s);
    if (idx < 0) throw std::out_of_range("StateVector::basis: state outside the truncated space");
    StateVector v = zero(space);
    v.amplitudes[idx] = 1.0;
    return v;
}

SparseMatrix adjoint(const SparseMatrix& op) { return op.adjoint(); }

SparseMatrix commutator(const SparseMatrix& a, const SparseMatrix& b) {
    return SparseMatrix(a * b) - SparseMatrix(b * a);
}

double max_abs_entry(const SparseMatrix& op) {
    double mx = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(op, k); it; ++it)
            mx = std::max(mx, std::abs(it.value()));
    return mx;
}

bool is_hermitian(const SparseMatrix& op, double tol) {
    return max_abs_entry(SparseMatrix(op - SparseMatrix(op.adjoint()))) <= tol;
}

SparseMatrix restrict_columns(const FockSpace& space, const SparseMatrix& op, int max_total) {
    std::vector<Eigen::Triplet<Complex>> triplets;
    for (int k = 0; k < op.outerSize(); ++k) {
        if (space.state(k).total() > max_total) continue;
        for (SparseMatrix::InnerIterator it(op, k); it; ++it)
            triplets.emplace_back(it.row(), it.col(), it.value());
    }
    SparseMatrix out(op.rows(), op.cols());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

FockSpace build_space(int cutoff) { return FockSpace(cutoff); }

SparseMatrix ladder(const FockSpace& space, Mode mode, LadderKind kind) {
    const int m = static_cast<int>(mode);
    if (m < 0 || m >= kModeCount) throw std::invalid_argument("ladder: invalid mode id");
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(space.dim());
    for (int col = 0; col < space.dim(); ++col) {
        BasisState s = space.state(col);
        const int n = s.occupations[m];
        if (kind == LadderKind::Lower) {
            if (n == 0) continue;
            s.occupations[m] = static_cast<std::uint8_t>(n - 1);
            triplets.emplace_back(space.index_of(s), col, std::sqrt(double(n)));
        } else {
            if (s.total() + 1 > space.cutoff()) continue;  // truncated at the boundary
            s.occupations[m] = static_cast<std::uint8_t>(n + 1);
            triplets.emplace_back(space.index_of(s), col, std::sqrt(double(n + 1)));
        }
    }
    SparseMatrix op(space.dim(), space.dim());
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

SparseMatrix total_excitation_operator(const FockSpace& space) {
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
        int n = space.state(i).total();
        if (n > 0) triplets.emplace_back(i, i, double(n));
    }
    SparseMatrix op(space.dim(), space.dim());
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

double coherent_truncation_leakage(Complex alpha, int cutoff) {
    const double a2 = std::norm(alpha);
    double weight = 0.0;
    double term = std::exp(-a2);  // |P_0|^2
    for (int n = 0; n <= cutoff; ++n) {
        weight += term;
        term *= a2 / double(n + 1);
    }
    return std::max(0.0, 1.0 - weight);
}

namespace {

// Amplitudes P_n(alpha) = alpha^n exp(-|alpha|^2/2) / sqrt(n!) up to the cutoff.
std::vector<Complex> coherent_amplitudes(Complex alpha, int cutoff) {
    std::vector<Complex> p(cutoff + 1);
    p[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= cutoff; ++n) p[n] = p[n - 1] * alpha / std::sqrt(double(n));
    return p;
}

}  // namespace

StateVector coherent_state(const FockSpace& space, Mode mode, Complex alpha) {
    const double leak = coherent_truncation_leakage(alpha, space.cutoff());
    if (leak > kMaxCoherentLeakage)
        throw std::invalid_argument(
            "coherent_state: truncation leakage " + std::to_string(leak) +
            " too large; raise the cutoff or reduce |alpha|");
    auto p = coherent_amplitudes(alpha, space.cutoff());
    StateVector v = StateVector::zero(space);
    BasisState s{};
    for (int n = 0; n <= space.cutoff(); ++n) {
        s.occupations[static_cast<int>(mode)] = static_cast<std::uint8_t>(n);
        v.amplitudes[space.index_of(s)] = p[n];
    }
    v.normalize();
    return v;
}

StateVector cat_state(const FockSpace& space, Mode mode, Complex alpha, CatSign sign) {
    const double leak = coherent_truncation_leakage(alpha, space.cutoff());
    if (leak > kMaxCoherentLeakage)
        throw std::invalid_argument("cat_state: truncation leakage " + std::to_string(leak) +
                                    " too large; raise the cutoff or reduce |alpha|");
    if (sign == CatSign::Minus && std::abs(alpha) == 0.0)
        throw std::invalid_argument("cat_state: minus cat at alpha=0 is the zero vector");
    auto p = coherent_amplitudes(alpha, space.cutoff());
    StateVector v = StateVector::zero(space);
    BasisState s{};
    for (int n = 0; n <= space.cutoff(); ++n) {
        // P_n(-alpha) = (-1)^n P_n(alpha)
        Complex amp = (sign == CatSign::Plus) ? p[n] + ((n % 2) ? -p[n] : p[n])
                                              : p[n] - ((n % 2) ? -p[n] : p[n]);
        if (amp == Complex(0.0)) continue;
        s.occupations[static_cast<int>(mode)] = static_cast<std::uint8_t>(n);
        v.amplitudes[space.index_of(s)] = amp;
    }
    v.normalize();
    return v;
}

}  // namespace qmem
