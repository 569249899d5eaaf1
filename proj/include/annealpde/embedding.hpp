#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "annealpde/ising.hpp"

namespace annealpde {

/// Abstract annealer-hardware connectivity: qubits 0..n-1 and the pairs that
/// may carry a coupling. Stand-in for machine graphs whose limited
/// connectivity forces minor embedding.
struct HardwareGraph {
    int n_qubits = 0;
    std::set<std::pair<int, int>> edges;  // canonical i < j

    bool has_edge(int i, int j) const;
    std::vector<std::vector<int>> adjacency() const;
};

HardwareGraph make_complete_graph(int n);
HardwareGraph make_grid_graph(int rows, int cols);
/// 7 qubits, max degree 3. Small enough to brute-force and tight enough that
/// a logical spin of degree 4 provably needs a chain of length >= 2.
HardwareGraph make_degree_capped_demo();
/// Chimera tiling: rows x cols cells of K_{shore,shore}, vertical shore
/// linked down columns, horizontal shore along rows.
HardwareGraph make_chimera_graph(int rows, int cols, int shore = 4);
HardwareGraph make_custom_graph(int n_qubits, const std::vector<std::pair<int, int>>& edges);

enum class HardwareKind { complete, grid, degree_capped_demo, chimera, custom };

struct HardwareParams {
    int a = 0;  // complete: n; grid: rows; chimera: rows
    int b = 0;  // grid: cols; chimera: cols
    int shore = 4;
    int custom_n = 0;
    std::vector<std::pair<int, int>> custom_edges;
};

HardwareGraph generate_hardware_graph(HardwareKind kind, const HardwareParams& params);

/// chains[v] is the sorted set of physical qubits representing logical spin v.
struct ChainEmbedding {
    std::vector<std::vector<int>> chains;
    int n_logical() const { return static_cast<int>(chains.size()); }
    int chain_of(int qubit) const;  // -1 when the qubit is unused
};

/// Checks all embedding invariants: chains non-empty, pairwise disjoint,
/// connected in the hardware graph, and every logical edge bridged by at
/// least one hardware edge. Returns a diagnostic instead of throwing.
std::optional<std::string> embedding_defect(const ChainEmbedding& emb,
                                            const std::vector<std::pair<int, int>>& logical_edges,
                                            const HardwareGraph& hardware);

/// Heuristic minor embedding: randomized greedy chain growth with retries
/// (each logical vertex is rooted at a low-distance free qubit and connected
/// to embedded neighbor chains along shortest free paths). On small hardware
/// graphs an exhaustive backtracking pass backs the heuristic up, so failure
/// on those is a proof of impossibility rather than bad luck. Returns
/// nullopt on failure; callers can enlarge the hardware graph and retry.
std::optional<ChainEmbedding> find_embedding(int n_logical,
                                             const std::vector<std::pair<int, int>>& logical_edges,
                                             const HardwareGraph& hardware, std::uint64_t seed,
                                             int retries = 64);

std::vector<std::pair<int, int>> coupling_edges(const IsingModel& model);

struct EmbeddedModel {
    IsingModel physical;
    double penalty = 0.0;
    ChainEmbedding embedding;
    int penalty_edges = 0;
};

/// Physical model over the hardware qubits: each logical field is split
/// equally over its chain, each logical coupling rides one canonical
/// (lowest-index) inter-chain edge, and every chain is held together by
/// ferromagnetic couplings -P on a spanning tree of the chain. The offset
/// gains +P per penalty edge, so chain-consistent physical states have
/// exactly the logical energy.
EmbeddedModel embed_model(const IsingModel& model, const ChainEmbedding& emb,
                          const HardwareGraph& hardware, double penalty);

/// 1.5 x the largest coefficient magnitude, floored at 1.
double default_chain_strength(const IsingModel& model);

bool chain_consistent(const SpinVector& physical, const ChainEmbedding& emb);

/// Majority vote per chain; exact ties resolve to +1.
SpinVector unembed(const SpinVector& physical, const ChainEmbedding& emb);

void write_hardware_graph(std::ostream& os, const HardwareGraph& g);
HardwareGraph read_hardware_graph(std::istream& is);
void write_embedding(std::ostream& os, const ChainEmbedding& emb);

}  // namespace annealpde
