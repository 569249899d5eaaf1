#include "annealpde/ising.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace annealpde {

IsingModel::IsingModel(int n_spins) {
    if (n_spins < 0) throw DimensionError("IsingModel: negative spin count");
    fields_ = Eigen::VectorXd::Zero(n_spins);
    adjacency_.resize(static_cast<std::size_t>(n_spins));
}

void IsingModel::check_index(int i) const {
    if (i < 0 || i >= n_spins()) {
        throw DimensionError("IsingModel: spin index " + std::to_string(i) +
                             " out of range [0, " + std::to_string(n_spins()) + ")");
    }
}

void IsingModel::add_field(int i, double v) {
    check_index(i);
    if (!std::isfinite(v)) throw DomainError("IsingModel: non-finite field coefficient");
    fields_[i] += v;
}

void IsingModel::add_coupling(int i, int j, double v) {
    check_index(i);
    check_index(j);
    if (i == j) throw DimensionError("IsingModel: self-coupling on spin " + std::to_string(i));
    if (!std::isfinite(v)) throw DomainError("IsingModel: non-finite coupling coefficient");
    if (i > j) std::swap(i, j);
    double& slot = couplings_[{i, j}];
    const bool fresh = (slot == 0.0);
    slot += v;
    if (slot == 0.0) {
        couplings_.erase({i, j});
        if (!fresh) {
            auto drop = [](std::vector<std::pair<int, double>>& adj, int other) {
                adj.erase(std::remove_if(adj.begin(), adj.end(),
                                         [&](const auto& p) { return p.first == other; }),
                          adj.end());
            };
            drop(adjacency_[i], j);
            drop(adjacency_[j], i);
        }
        return;
    }
    auto upsert = [](std::vector<std::pair<int, double>>& adj, int other, double value) {
        for (auto& p : adj) {
            if (p.first == other) {
                p.second = value;
                return;
            }
        }
        adj.emplace_back(other, value);
    };
    upsert(adjacency_[i], j, slot);
    upsert(adjacency_[j], i, slot);
}

double IsingModel::field(int i) const {
    check_index(i);
    return fields_[i];
}

double IsingModel::coupling(int i, int j) const {
    check_index(i);
    check_index(j);
    if (i > j) std::swap(i, j);
    auto it = couplings_.find({i, j});
    return it == couplings_.end() ? 0.0 : it->second;
}

const std::vector<std::pair<int, double>>& IsingModel::neighbors(int i) const {
    check_index(i);
    return adjacency_[i];
}

double energy(const IsingModel& model, const SpinVector& spins) {
    if (static_cast<int>(spins.size()) != model.n_spins()) {
        throw DimensionError("energy: spin vector length " + std::to_string(spins.size()) +
                             " != model size " + std::to_string(model.n_spins()));
    }
    double e = model.offset();
    const auto& h = model.fields();
    for (int i = 0; i < model.n_spins(); ++i) e += h[i] * spins[i];
    for (const auto& [key, j] : model.couplings()) e += j * spins[key.first] * spins[key.second];
    return e;
}

double delta_energy(const IsingModel& model, const SpinVector& spins, int flip_index) {
    if (static_cast<int>(spins.size()) != model.n_spins()) {
        throw DimensionError("delta_energy: spin vector length mismatch");
    }
    if (flip_index < 0 || flip_index >= model.n_spins()) {
        throw DimensionError("delta_energy: flip index out of range");
    }
    double local = model.fields()[flip_index];
    for (const auto& [j, coeff] : model.neighbors(flip_index)) local += coeff * spins[j];
    return -2.0 * spins[flip_index] * local;
}

GroundState brute_force_ground_state(const IsingModel& model, int max_spins) {
    const int n = model.n_spins();
    if (n > max_spins) {
        throw CapacityError("brute_force_ground_state: " + std::to_string(n) +
                            " spins exceeds cap " + std::to_string(max_spins));
    }
    if (n == 0) return {SpinVector{}, model.offset()};

    // Enumerate states in the order induced by the integer v in [0, 2^n),
    // where bit (n-1-i) of v encodes spin i (+1 for a set bit). Increasing v
    // is then exactly lexicographic order with -1 < +1, which makes the
    // "first strict minimum wins" rule reproduce the documented tie-break.
    // The walk itself visits states in Gray-code order so each step is a
    // single O(degree) flip; the running energy is re-synced periodically and
    // whenever a new best is recorded, keeping tie comparisons exact.
    SpinVector state(static_cast<std::size_t>(n), -1);
    double e = energy(model, state);
    GroundState best{state, e};
    std::uint64_t best_pattern = 0;  // the bit pattern IS the lexicographic rank

    const std::uint64_t total = std::uint64_t(1) << n;
    std::uint64_t pattern = 0;
    for (std::uint64_t v = 1; v < total; ++v) {
        const std::uint64_t next = v ^ (v >> 1);  // Gray code of the step index
        const std::uint64_t changed = pattern ^ next;
        pattern = next;
        int bit = 0;
        while (!((changed >> bit) & 1)) ++bit;
        const int spin = n - 1 - bit;
        e += delta_energy(model, state, spin);
        state[spin] = static_cast<std::int8_t>(-state[spin]);
        if ((v & 0xfffULL) == 0) e = energy(model, state);  // drift re-sync

        if (e < best.energy) {
            best.energy = energy(model, state);
            best.state = state;
            best_pattern = pattern;
            e = best.energy;
        } else if (e == best.energy && pattern < best_pattern) {
            best.state = state;
            best_pattern = pattern;
        }
    }
    return best;
}

void write_model(std::ostream& os, const IsingModel& model) {
    os << model.n_spins() << ' ' << format_double(model.offset()) << '\n';
    std::map<std::pair<int, int>, double> terms = model.couplings();
    for (int i = 0; i < model.n_spins(); ++i) {
        if (model.fields()[i] != 0.0) terms[{i, i}] = model.fields()[i];
    }
    for (const auto& [key, coeff] : terms) {
        os << key.first << ' ' << key.second << ' ' << format_double(coeff) << '\n';
    }
}

IsingModel read_model(std::istream& is) {
    int n = 0;
    double offset = 0.0;
    if (!(is >> n >> offset)) throw IoError("read_model: bad header");
    IsingModel model(n);
    model.set_offset(offset);
    int i = 0, j = 0;
    double coeff = 0.0;
    while (is >> i >> j >> coeff) {
        if (i == j) {
            model.add_field(i, coeff);
        } else {
            model.add_coupling(i, j, coeff);
        }
    }
    return model;
}

}  // namespace annealpde
