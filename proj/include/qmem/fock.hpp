// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qmem {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// The five bosonic modes: two quantized probe fields and the three
// collective atomic excitations (A, C, D) in the bosonized low-excitation
// limit.
enum class Mode : int {
    ProbeOne = 0,
    ProbeTwo = 1,
    AtomA = 2,
    AtomC = 3,
    AtomD = 4,
};

inline constexpr int kModeCount = 5;

enum class LadderKind { Raise, Lower };

// Occupation-number basis state over the five modes.
struct BasisState {
    std::array<std::uint8_t, kModeCount> occupations{};

    int total() const {
        int sum = 0;
        for (auto n : occupations) sum += n;
        return sum;
    }
    int operator[](Mode m) const { return occupations[static_cast<int>(m)]; }
    bool operator==(const BasisState& other) const { return occupations == other.occupations; }
};

// Truncated five-mode Fock space with a total-excitation cutoff M.
// The basis is ordered lexicographically in
// (n_p1, n_p2, n_A, n_C, n_D), so two builds with the same cutoff produce
// identical index maps.
class FockSpace {
public:
    static constexpr int kMaxCutoff = 16;

    explicit FockSpace(int cutoff);

    int cutoff() const { return cutoff_; }
    int dim() const { return static_cast<int>(states_.size()); }

    const BasisState& state(int index) const { return states_[index]; }
    const std::vector<BasisState>& states() const { return states_; }

    // Ordinal of a basis state; -1 when outside the truncated space.
    int index_of(const BasisState& s) const;

private:
    int cutoff_ = 0;
    std::vector<BasisState> states_;
    std::unordered_map<std::uint64_t, int> index_;
};

// Normalized state vector over a FockSpace basis.
struct StateVector {
    Vector amplitudes;

    double norm() const { return amplitudes.norm(); }
    void normalize();
    Complex inner(const StateVector& other) const { return amplitudes.dot(other.amplitudes); }

    static StateVector zero(const FockSpace& space);
    static StateVector basis(const FockSpace& space, const BasisState& s);
};

SparseMatrix adjoint(const SparseMatrix& op);
SparseMatrix commutator(const SparseMatrix& a, const SparseMatrix& b);
double max_abs_entry(const SparseMatrix& op);
bool is_hermitian(const SparseMatrix& op, double tol = 1e-14);

// Restrict an operator to columns whose source basis state has total
// excitation <= max_total (rows untouched). Truncation artifacts live in
// the discarded columns, so algebraic identities hold exactly on the rest.
SparseMatrix restrict_columns(const FockSpace& space, const SparseMatrix& op, int max_total);

FockSpace build_space(int cutoff);

// Matrix of the raising/lowering operator for one mode. Raising out of the
// truncated space maps to zero.
SparseMatrix ladder(const FockSpace& space, Mode mode, LadderKind kind);

// Diagonal total-excitation operator (sum of all five number operators).
SparseMatrix total_excitation_operator(const FockSpace& space);

// Fraction of |alpha|-coherent-state weight lost to truncation at the
// given cutoff.
double coherent_truncation_leakage(Complex alpha, int cutoff);

// Largest tolerated truncation leakage for coherent/cat constructors
// (admits |alpha| = 2 at the maximum cutoff, leakage 1.13e-6).
inline constexpr double kMaxCoherentLeakage = 2e-6;

// Truncated coherent state in one mode (vacuum elsewhere). Throws when the
// cutoff loses more than 1e-6 of the distribution.
StateVector coherent_state(const FockSpace& space, Mode mode, Complex alpha);

enum class CatSign { Plus, Minus };

// Truncated even/odd superposition (|alpha> +- |-alpha>), renormalized.
StateVector cat_state(const FockSpace& space, Mode mode, Complex alpha, CatSign sign);

}  // namespace qmem
