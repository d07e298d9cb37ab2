// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qmem {

namespace {

void enumerate_tuples(int slot, int budget, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
    if (slot == static_cast<int>(current.size())) {
        out.push_back(current);
        return;
    }
    for (int n = 0; n <= budget; ++n) {
        current[slot] = n;
        enumerate_tuples(slot + 1, budget - n, current, out);
    }
    current[slot] = 0;
}

std::vector<std::vector<int>> tuple_basis(int mode_count, int cutoff) {
    std::vector<std::vector<int>> out;
    std::vector<int> scratch(mode_count, 0);
    enumerate_tuples(0, cutoff, scratch, out);
    return out;
}

std::uint64_t pack_tuple(const std::vector<int>& t) {
    std::uint64_t key = 0;
    for (int n : t) key = (key << 8) | static_cast<std::uint64_t>(n);
    return key;
}

}  // namespace

double fidelity(const StateVector& psi, const StateVector& phi) {
    if (psi.amplitudes.size() != phi.amplitudes.size())
        throw std::invalid_argument("fidelity: dimension mismatch");
    return std::norm(psi.inner(phi));
}

ReducedDensity reduce(const FockSpace& space, const StateVector& psi, std::vector<Mode> keep) {
    if (psi.amplitudes.size() != space.dim())
        throw std::invalid_argument("reduce: state dimension mismatch");
    std::sort(keep.begin(), keep.end());
    if (keep.empty() || std::unique(keep.begin(), keep.end()) != keep.end() ||
        static_cast<int>(keep.front()) < 0 || static_cast<int>(keep.back()) >= kModeCount)
        throw std::invalid_argument("reduce: invalid mode subset");

    std::vector<Mode> comp;
    for (int m = 0; m < kModeCount; ++m) {
        Mode mode = static_cast<Mode>(m);
        if (!std::binary_search(keep.begin(), keep.end(), mode)) comp.push_back(mode);
    }

    ReducedDensity out;
    out.kept = keep;
    out.basis = tuple_basis(static_cast<int>(keep.size()), space.cutoff());
    std::map<std::uint64_t, int> kept_index;
    for (int i = 0; i < static_cast<int>(out.basis.size()); ++i)
        kept_index[pack_tuple(out.basis[i])] = i;

    // Group global amplitudes by the traced-out occupations; each group
    // contributes an outer product.
    std::map<std::uint64_t, std::vector<std::pair<int, Complex>>> groups;
    std::vector<int> kept_occ(keep.size()), comp_occ(comp.size());
    for (int g = 0; g < space.dim(); ++g) {
        const Complex amp = psi.amplitudes[g];
        if (amp == Complex(0.0)) continue;
        const auto& s = space.state(g);
        for (size_t i = 0; i < keep.size(); ++i) kept_occ[i] = s[keep[i]];
        for (size_t i = 0; i < comp.size(); ++i) comp_occ[i] = s[comp[i]];
        groups[pack_tuple(comp_occ)].emplace_back(kept_index.at(pack_tuple(kept_occ)), amp);
    }

    const int dim = static_cast<int>(out.basis.size());
    out.rho = Matrix::Zero(dim, dim);
    for (const auto& [key, entries] : groups) {
        (void)key;
        for (const auto& [i, a] : entries)
            for (const auto& [j, b] : entries) out.rho(i, j) += a * std::conj(b);
    }
    return out;
}

ReducedDensity ReducedDensity::trace_out(Mode mode) const {
    auto it = std::find(kept.begin(), kept.end(), mode);
    if (it == kept.end())
        throw std::invalid_argument("ReducedDensity::trace_out: mode not in the kept subset");
    const int slot = static_cast<int>(it - kept.begin());

    ReducedDensity out;
    out.kept = kept;
    out.kept.erase(out.kept.begin() + slot);
    if (out.kept.empty())
        throw std::invalid_argument("ReducedDensity::trace_out: cannot trace out the last mode");

    std::map<std::uint64_t, int> new_index;
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
        std::vector<int> t = basis[i];
        t.erase(t.begin() + slot);
        if (new_index.emplace(pack_tuple(t), static_cast<int>(out.basis.size())).second)
            out.basis.push_back(t);
    }
    // Rebuild in lexicographic order for determinism.
    std::sort(out.basis.begin(), out.basis.end());
    new_index.clear();
    for (int i = 0; i < static_cast<int>(out.basis.size()); ++i)
        new_index[pack_tuple(out.basis[i])] = i;

    std::vector<int> row_map(basis.size()), row_n(basis.size());
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
        std::vector<int> t = basis[i];
        row_n[i] = t[slot];
        t.erase(t.begin() + slot);
        row_map[i] = new_index.at(pack_tuple(t));
    }

    out.rho = Matrix::Zero(out.basis.size(), out.basis.size());
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
        for (int j = 0; j < static_cast<int>(basis.size()); ++j)
            if (row_n[i] == row_n[j]) out.rho(row_map[i], row_map[j]) += rho(i, j);
    return out;
}

double entanglement_entropy(const ReducedDensity& density, EntropyBase base) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(density.rho);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("entanglement_entropy: eigensolver failed");
    double h = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda > 1e-14) h -= lambda * std::log(lambda);
    }
    return base == EntropyBase::Two ? h / std::log(2.0) : h;
}

std::vector<EntanglementPoint> entanglement_vs_release_angle(double alpha0, CatSign sign,
                                                             const std::vector<double>& angles) {
    constexpr double kHalfPi = 1.5707963267948966;
    for (double a : angles)
        if (a < 0.0 || a > kHalfPi + 1e-12)
            throw std::invalid_argument("entanglement_vs_release_angle: angle outside [0, pi/2]");
    if (sign == CatSign::Minus && alpha0 == 0.0)
        throw std::invalid_argument("entanglement_vs_release_angle: minus cat needs alpha0 > 0");

    int cutoff = 4;
    while (cutoff < FockSpace::kMaxCutoff && coherent_truncation_leakage(alpha0, cutoff) > 1e-9)
        ++cutoff;
    FockSpace space(cutoff);

    auto amp = [](double alpha, int n) {
        double p = std::exp(-0.5 * alpha * alpha);
        for (int k = 1; k <= n; ++k) p *= alpha / std::sqrt(double(k));
        return p;
    };

    std::vector<EntanglementPoint> out;
    out.reserve(angles.size());
    for (double phi_e : angles) {
        EntanglementPoint pt;
        pt.release_angle = phi_e;
        pt.alpha_e1 = alpha0 * std::cos(phi_e);
        pt.alpha_e2 = alpha0 * std::sin(phi_e);

        StateVector ecs = StateVector::zero(space);
        for (int i = 0; i < space.dim(); ++i) {
            const auto& s = space.state(i);
            if (s[Mode::AtomA] || s[Mode::AtomC] || s[Mode::AtomD]) continue;
            double plus = amp(pt.alpha_e1, s[Mode::ProbeOne]) * amp(pt.alpha_e2, s[Mode::ProbeTwo]);
            double minus =
                amp(-pt.alpha_e1, s[Mode::ProbeOne]) * amp(-pt.alpha_e2, s[Mode::ProbeTwo]);
            ecs.amplitudes[i] = (sign == CatSign::Plus) ? plus + minus : plus - minus;
        }
        ecs.normalize();
        pt.entropy_bits = entanglement_entropy(reduce(space, ecs, {Mode::ProbeOne}));
        out.push_back(pt);
    }
    return out;
}

}  // namespace qmem
