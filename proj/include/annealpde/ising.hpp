#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "annealpde/common.hpp"

namespace annealpde {

// Spin state; every entry is -1 or +1.
using SpinVector = std::vector<std::int8_t>;

/// Quadratic spin Hamiltonian in the plus convention
///
///     H(sigma) = sum_{i<j} J_ij sigma_i sigma_j + sum_i h_i sigma_i + offset.
///
/// Note the sign: textbook ferromagnet Hamiltonians carry minus signs in
/// front of both sums; here they are absorbed into the coefficients so that
/// least-squares cost functions map onto models without sign flips.
/// Couplings are stored once per unordered pair under i < j; self-couplings
/// are rejected. Models are cheap to build incrementally and are treated as
/// immutable once handed to a solver (safe to share across threads).
class IsingModel {
public:
    using CouplingMap = std::map<std::pair<int, int>, double>;

    IsingModel() = default;
    explicit IsingModel(int n_spins);

    int n_spins() const { return static_cast<int>(fields_.size()); }
    double offset() const { return offset_; }
    void set_offset(double v) { offset_ = v; }
    void add_offset(double v) { offset_ += v; }

    /// h_i += v
    void add_field(int i, double v);
    /// J_ij += v (canonicalized to i < j); i == j is a dimension error.
    void add_coupling(int i, int j, double v);

    double field(int i) const;
    double coupling(int i, int j) const;

    const Eigen::VectorXd& fields() const { return fields_; }
    const CouplingMap& couplings() const { return couplings_; }

    /// Neighbors of spin i with their coupling values, for O(degree) moves.
    const std::vector<std::pair<int, double>>& neighbors(int i) const;

private:
    void check_index(int i) const;

    Eigen::VectorXd fields_;  // dense h, length n_spins
    CouplingMap couplings_;   // canonical (i < j) -> J_ij, zero entries pruned
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
    double offset_ = 0.0;
};

/// Exact energy of `spins` under `model` (plus convention).
double energy(const IsingModel& model, const SpinVector& spins);

/// Energy change from flipping spin `flip_index`, computed from the local
/// field in O(degree) without re-evaluating the full Hamiltonian.
double delta_energy(const IsingModel& model, const SpinVector& spins, int flip_index);

struct GroundState {
    SpinVector state;
    double energy = 0.0;
};

/// Exhaustive scan of all 2^N states. Ties are broken by the
/// lexicographically smallest state with -1 ordered before +1, so the result
/// is deterministic. Instances above `max_spins` raise a capacity error.
GroundState brute_force_ground_state(const IsingModel& model, int max_spins = 24);

/// Text form: header `n_spins offset`, then one `i j coeff` line per term in
/// sorted order; i == j encodes the field h_i. Zero coefficients are omitted.
void write_model(std::ostream& os, const IsingModel& model);
IsingModel read_model(std::istream& is);

}  // namespace annealpde
