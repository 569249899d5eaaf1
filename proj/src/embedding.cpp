#include "annealpde/embedding.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace annealpde {

namespace {

void insert_edge(HardwareGraph& g, int i, int j) {
    if (i == j) throw ConfigError("hardware graph: self loop on qubit " + std::to_string(i));
    if (i < 0 || j < 0 || i >= g.n_qubits || j >= g.n_qubits) {
        throw ConfigError("hardware graph: edge endpoint out of range");
    }
    if (i > j) std::swap(i, j);
    g.edges.insert({i, j});
}

}  // namespace

bool HardwareGraph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return edges.count({i, j}) > 0;
}

std::vector<std::vector<int>> HardwareGraph::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_qubits));
    for (const auto& [i, j] : edges) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    return adj;
}

HardwareGraph make_complete_graph(int n) {
    if (n < 1) throw ConfigError("complete graph: need at least one qubit");
    HardwareGraph g{n, {}};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) insert_edge(g, i, j);
    return g;
}

HardwareGraph make_grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("grid graph: sizes must be positive");
    HardwareGraph g{rows * cols, {}};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int q = r * cols + c;
            if (c + 1 < cols) insert_edge(g, q, q + 1);
            if (r + 1 < rows) insert_edge(g, q, q + cols);
        }
    }
    return g;
}

HardwareGraph make_degree_capped_demo() {
    // Only the pair (2, 3) has enough spare slots to host a 2-chain for a
    // degree-4 logical spin, and the remaining edges close cycles through
    // both halves of that chain, so a weak chain penalty genuinely loses the
    // ground state instead of merely tying it.
    HardwareGraph g{7, {}};
    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5}, {0, 6}}) {
        insert_edge(g, i, j);
    }
    return g;
}

HardwareGraph make_chimera_graph(int rows, int cols, int shore) {
    if (rows < 1 || cols < 1 || shore < 1) throw ConfigError("chimera graph: sizes must be positive");
    const int cell = 2 * shore;
    HardwareGraph g{rows * cols * cell, {}};
    const auto qubit = [&](int r, int c, int side, int k) {
        return ((r * cols) + c) * cell + side * shore + k;
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int a = 0; a < shore; ++a) {
                for (int b = 0; b < shore; ++b) insert_edge(g, qubit(r, c, 0, a), qubit(r, c, 1, b));
                if (r + 1 < rows) insert_edge(g, qubit(r, c, 0, a), qubit(r + 1, c, 0, a));
                if (c + 1 < cols) insert_edge(g, qubit(r, c, 1, a), qubit(r, c + 1, 1, a));
            }
        }
    }
    return g;
}

HardwareGraph make_custom_graph(int n_qubits, const std::vector<std::pair<int, int>>& edges) {
    if (n_qubits < 1) throw ConfigError("custom graph: need at least one qubit");
    HardwareGraph g{n_qubits, {}};
    for (const auto& [i, j] : edges) insert_edge(g, i, j);
    return g;
}

HardwareGraph generate_hardware_graph(HardwareKind kind, const HardwareParams& params) {
    switch (kind) {
        case HardwareKind::complete: return make_complete_graph(params.a);
        case HardwareKind::grid: return make_grid_graph(params.a, params.b);
        case HardwareKind::degree_capped_demo: return make_degree_capped_demo();
        case HardwareKind::chimera: return make_chimera_graph(params.a, params.b, params.shore);
        case HardwareKind::custom: return make_custom_graph(params.custom_n, params.custom_edges);
    }
    throw ConfigError("generate_hardware_graph: unknown kind");
}

int ChainEmbedding::chain_of(int qubit) const {
    for (std::size_t v = 0; v < chains.size(); ++v) {
        if (std::binary_search(chains[v].begin(), chains[v].end(), qubit)) {
            return static_cast<int>(v);
        }
    }
    return -1;
}

std::optional<std::string> embedding_defect(const ChainEmbedding& emb,
                                            const std::vector<std::pair<int, int>>& logical_edges,
                                            const HardwareGraph& hardware) {
    std::vector<int> owner(static_cast<std::size_t>(hardware.n_qubits), -1);
    for (std::size_t v = 0; v < emb.chains.size(); ++v) {
        const auto& chain = emb.chains[v];
        if (chain.empty()) return "chain " + std::to_string(v) + " is empty";
        for (int q : chain) {
            if (q < 0 || q >= hardware.n_qubits) {
                return "chain " + std::to_string(v) + " uses an invalid qubit";
            }
            if (owner[static_cast<std::size_t>(q)] != -1) {
                return "qubit " + std::to_string(q) + " is shared by chains " +
                       std::to_string(owner[static_cast<std::size_t>(q)]) + " and " +
                       std::to_string(v);
            }
            owner[static_cast<std::size_t>(q)] = static_cast<int>(v);
        }
        // connectivity of the induced subgraph
        std::vector<int> seen{chain.front()};
        std::deque<int> queue{chain.front()};
        while (!queue.empty()) {
            const int q = queue.front();
            queue.pop_front();
            for (int r : chain) {
                if (hardware.has_edge(q, r) &&
                    std::find(seen.begin(), seen.end(), r) == seen.end()) {
                    seen.push_back(r);
                    queue.push_back(r);
                }
            }
        }
        if (seen.size() != chain.size()) {
            return "chain " + std::to_string(v) + " is not connected";
        }
    }
    for (const auto& [a, b] : logical_edges) {
        if (a < 0 || b < 0 || a >= emb.n_logical() || b >= emb.n_logical()) {
            return "logical edge endpoint out of range";
        }
        bool bridged = false;
        for (int qa : emb.chains[static_cast<std::size_t>(a)]) {
            for (int qb : emb.chains[static_cast<std::size_t>(b)]) {
                if (hardware.has_edge(qa, qb)) {
                    bridged = true;
                    break;
                }
            }
            if (bridged) break;
        }
        if (!bridged) {
            return "logical coupling (" + std::to_string(a) + ", " + std::to_string(b) +
                   ") has no hardware edge";
        }
    }
    return std::nullopt;
}

namespace {

struct GreedyContext {
    const HardwareGraph& hardware;
    const std::vector<std::vector<int>>& hw_adj;
    const std::vector<std::vector<int>>& logical_adj;
    std::vector<std::vector<int>> chains;
    std::vector<int> owner;  // qubit -> logical vertex or -1
    std::vector<char> placed;
};

// Distances from a chain through free qubits only; chain members are sources
// at distance zero. Parents let us walk a shortest path back to the chain.
void bfs_from_chain(const GreedyContext& ctx, const std::vector<int>& chain,
                    std::vector<int>& dist, std::vector<int>& parent) {
    dist.assign(ctx.owner.size(), std::numeric_limits<int>::max());
    parent.assign(ctx.owner.size(), -1);
    std::deque<int> queue;
    for (int q : chain) {
        dist[static_cast<std::size_t>(q)] = 0;
        queue.push_back(q);
    }
    while (!queue.empty()) {
        const int q = queue.front();
        queue.pop_front();
        for (int r : ctx.hw_adj[static_cast<std::size_t>(q)]) {
            if (ctx.owner[static_cast<std::size_t>(r)] != -1) continue;  // free qubits only
            if (dist[static_cast<std::size_t>(r)] != std::numeric_limits<int>::max()) continue;
            dist[static_cast<std::size_t>(r)] = dist[static_cast<std::size_t>(q)] + 1;
            parent[static_cast<std::size_t>(r)] = q;
            queue.push_back(r);
        }
    }
}

bool greedy_attempt(GreedyContext& ctx, const std::vector<int>& order, std::mt19937_64& rng) {
    const int n_qubits = static_cast<int>(ctx.owner.size());
    for (int v : order) {
        std::vector<int> embedded_neighbors;
        for (int u : ctx.logical_adj[static_cast<std::size_t>(v)]) {
            if (ctx.placed[static_cast<std::size_t>(u)]) embedded_neighbors.push_back(u);
        }

        if (embedded_neighbors.empty()) {
            std::vector<int> free;
            for (int q = 0; q < n_qubits; ++q) {
                if (ctx.owner[static_cast<std::size_t>(q)] == -1) free.push_back(q);
            }
            if (free.empty()) return false;
            const int root = free[rng() % free.size()];
            ctx.chains[static_cast<std::size_t>(v)] = {root};
            ctx.owner[static_cast<std::size_t>(root)] = v;
            ctx.placed[static_cast<std::size_t>(v)] = 1;
            continue;
        }

        std::vector<std::vector<int>> dists(embedded_neighbors.size());
        std::vector<std::vector<int>> parents(embedded_neighbors.size());
        for (std::size_t u = 0; u < embedded_neighbors.size(); ++u) {
            bfs_from_chain(ctx, ctx.chains[static_cast<std::size_t>(embedded_neighbors[u])],
                           dists[u], parents[u]);
        }

        // Root: free qubit reaching every neighbor chain, smallest total
        // distance; ties broken by a random priority so retries explore.
        std::vector<std::uint32_t> priority(static_cast<std::size_t>(n_qubits));
        for (auto& p : priority) p = static_cast<std::uint32_t>(rng());
        long best_score = std::numeric_limits<long>::max();
        std::uint32_t best_priority = 0;
        int root = -1;
        for (int q = 0; q < n_qubits; ++q) {
            if (ctx.owner[static_cast<std::size_t>(q)] != -1) continue;
            long score = 0;
            bool ok = true;
            for (std::size_t u = 0; u < embedded_neighbors.size(); ++u) {
                const int d = dists[u][static_cast<std::size_t>(q)];
                if (d == std::numeric_limits<int>::max()) {
                    ok = false;
                    break;
                }
                score += d;
            }
            if (!ok) continue;
            if (score < best_score ||
                (score == best_score && priority[static_cast<std::size_t>(q)] < best_priority)) {
                best_score = score;
                best_priority = priority[static_cast<std::size_t>(q)];
                root = q;
            }
        }
        if (root < 0) return false;

        std::vector<int>& chain = ctx.chains[static_cast<std::size_t>(v)];
        chain = {root};
        ctx.owner[static_cast<std::size_t>(root)] = v;
        for (std::size_t u = 0; u < embedded_neighbors.size(); ++u) {
            // Walk from the root back to the neighbor chain, claiming the
            // interior of the path for v. Qubits claimed by v while routing
            // earlier neighbors are fine to reuse.
            int q = root;
            while (dists[u][static_cast<std::size_t>(q)] > 1) {
                const int p = parents[u][static_cast<std::size_t>(q)];
                if (p < 0) return false;
                if (ctx.owner[static_cast<std::size_t>(p)] == -1) {
                    ctx.owner[static_cast<std::size_t>(p)] = v;
                    chain.push_back(p);
                } else if (ctx.owner[static_cast<std::size_t>(p)] != v &&
                           dists[u][static_cast<std::size_t>(p)] > 0) {
                    return false;
                }
                q = p;
            }
        }
        std::sort(chain.begin(), chain.end());
        ctx.placed[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

// Exhaustive backtracking over connected chains for small hardware graphs.
struct BacktrackContext {
    const HardwareGraph& hardware;
    const std::vector<std::vector<int>>& logical_adj;
    std::vector<std::vector<int>> chains;
    std::vector<char> placed;
    std::uint32_t used = 0;  // qubit bitmask
    int max_chain = 1;
    long budget = 0;
};

bool subset_connected(const HardwareGraph& g, const std::vector<int>& subset) {
    if (subset.size() <= 1) return true;
    std::uint32_t seen = 1;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < subset.size(); ++b) {
            if ((seen >> b) & 1u) continue;
            if (g.has_edge(subset[static_cast<std::size_t>(a)], subset[b])) {
                seen |= 1u << b;
                stack.push_back(static_cast<int>(b));
            }
        }
    }
    return seen == (1u << subset.size()) - 1;
}

bool backtrack(BacktrackContext& ctx, const std::vector<int>& order, std::size_t pos) {
    if (pos == order.size()) return true;
    if (--ctx.budget < 0) return false;
    const int v = order[pos];

    std::vector<int> free;
    for (int q = 0; q < ctx.hardware.n_qubits; ++q) {
        if (!((ctx.used >> q) & 1u)) free.push_back(q);
    }

    std::vector<int> subset;
    const auto feasible = [&](const std::vector<int>& chain) {
        if (!subset_connected(ctx.hardware, chain)) return false;
        for (int u : ctx.logical_adj[static_cast<std::size_t>(v)]) {
            if (!ctx.placed[static_cast<std::size_t>(u)]) continue;
            bool bridged = false;
            for (int qa : chain) {
                for (int qb : ctx.chains[static_cast<std::size_t>(u)]) {
                    if (ctx.hardware.has_edge(qa, qb)) {
                        bridged = true;
                        break;
                    }
                }
                if (bridged) break;
            }
            if (!bridged) return false;
        }
        return true;
    };

    // All subsets of the free qubits up to the chain-size cap, lexicographic.
    const std::function<bool(std::size_t)> recurse = [&](std::size_t start) -> bool {
        if (!subset.empty() && feasible(subset)) {
            for (int q : subset) ctx.used |= 1u << q;
            ctx.chains[static_cast<std::size_t>(v)] = subset;
            ctx.placed[static_cast<std::size_t>(v)] = 1;
            if (backtrack(ctx, order, pos + 1)) return true;
            ctx.placed[static_cast<std::size_t>(v)] = 0;
            ctx.chains[static_cast<std::size_t>(v)].clear();
            for (int q : subset) ctx.used &= ~(1u << q);
        }
        if (static_cast<int>(subset.size()) >= ctx.max_chain) return false;
        for (std::size_t k = start; k < free.size(); ++k) {
            subset.push_back(free[k]);
            if (recurse(k + 1)) return true;
            subset.pop_back();
        }
        return false;
    };
    return recurse(0);
}

}  // namespace

std::optional<ChainEmbedding> find_embedding(int n_logical,
                                             const std::vector<std::pair<int, int>>& logical_edges,
                                             const HardwareGraph& hardware, std::uint64_t seed,
                                             int retries) {
    if (n_logical < 0) throw DimensionError("find_embedding: negative logical size");
    if (n_logical == 0) return ChainEmbedding{};
    std::vector<std::vector<int>> logical_adj(static_cast<std::size_t>(n_logical));
    for (const auto& [a, b] : logical_edges) {
        if (a < 0 || b < 0 || a >= n_logical || b >= n_logical || a == b) {
            throw DimensionError("find_embedding: bad logical edge");
        }
        logical_adj[static_cast<std::size_t>(a)].push_back(b);
        logical_adj[static_cast<std::size_t>(b)].push_back(a);
    }

    const auto finish = [&](ChainEmbedding emb) -> std::optional<ChainEmbedding> {
        for (auto& chain : emb.chains) std::sort(chain.begin(), chain.end());
        if (embedding_defect(emb, logical_edges, hardware)) return std::nullopt;
        return emb;
    };

    // Identity fast path: the logical graph is already hardware-compatible.
    if (n_logical <= hardware.n_qubits) {
        const bool direct = std::all_of(logical_edges.begin(), logical_edges.end(),
                                        [&](const auto& e) {
                                            return hardware.has_edge(e.first, e.second);
                                        });
        if (direct) {
            ChainEmbedding emb;
            emb.chains.resize(static_cast<std::size_t>(n_logical));
            for (int v = 0; v < n_logical; ++v) emb.chains[static_cast<std::size_t>(v)] = {v};
            auto res = finish(std::move(emb));
            if (res) return res;
        }
    }

    const std::vector<std::vector<int>> hw_adj = hardware.adjacency();
    for (int attempt = 0; attempt < retries; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::vector<int> order(static_cast<std::size_t>(n_logical));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        GreedyContext ctx{hardware,
                          hw_adj,
                          logical_adj,
                          std::vector<std::vector<int>>(static_cast<std::size_t>(n_logical)),
                          std::vector<int>(static_cast<std::size_t>(hardware.n_qubits), -1),
                          std::vector<char>(static_cast<std::size_t>(n_logical), 0)};
        if (greedy_attempt(ctx, order, rng)) {
            auto res = finish(ChainEmbedding{std::move(ctx.chains)});
            if (res) return res;
        }
    }

    // Exhaustive fallback for small hardware: growing chain-size caps, so a
    // miss here is a genuine impossibility proof (within the cap).
    if (hardware.n_qubits <= 24) {
        std::vector<int> order(static_cast<std::size_t>(n_logical));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return logical_adj[static_cast<std::size_t>(a)].size() >
                   logical_adj[static_cast<std::size_t>(b)].size();
        });
        for (int cap = 1; cap <= std::min(4, hardware.n_qubits); ++cap) {
            BacktrackContext ctx{hardware,
                                 logical_adj,
                                 std::vector<std::vector<int>>(static_cast<std::size_t>(n_logical)),
                                 std::vector<char>(static_cast<std::size_t>(n_logical), 0),
                                 0,
                                 cap,
                                 2'000'000};
            if (backtrack(ctx, order, 0)) {
                auto res = finish(ChainEmbedding{std::move(ctx.chains)});
                if (res) return res;
            }
        }
    }
    return std::nullopt;
}

std::vector<std::pair<int, int>> coupling_edges(const IsingModel& model) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(model.couplings().size());
    for (const auto& [key, coeff] : model.couplings()) {
        if (coeff != 0.0) edges.push_back(key);
    }
    return edges;
}

EmbeddedModel embed_model(const IsingModel& model, const ChainEmbedding& emb,
                          const HardwareGraph& hardware, double penalty) {
    if (!(penalty > 0.0)) throw ConfigError("embed_model: penalty must be positive");
    if (emb.n_logical() != model.n_spins()) {
        throw ConsistencyError("embed_model: embedding covers " + std::to_string(emb.n_logical()) +
                               " logical spins, model has " + std::to_string(model.n_spins()));
    }
    if (auto defect = embedding_defect(emb, coupling_edges(model), hardware)) {
        throw ConsistencyError("embed_model: invalid embedding: " + *defect);
    }

    EmbeddedModel out{IsingModel(hardware.n_qubits), penalty, emb, 0};
    out.physical.set_offset(model.offset());

    for (int v = 0; v < model.n_spins(); ++v) {
        const auto& chain = emb.chains[static_cast<std::size_t>(v)];
        const double share = model.fields()[v] / static_cast<double>(chain.size());
        if (share != 0.0) {
            for (int q : chain) out.physical.add_field(q, share);
        }
    }

    for (const auto& [key, coeff] : model.couplings()) {
        // Canonical inter-chain edge: the lexicographically smallest
        // hardware edge joining the two chains carries the full coupling.
        std::pair<int, int> best{-1, -1};
        for (int qa : emb.chains[static_cast<std::size_t>(key.first)]) {
            for (int qb : emb.chains[static_cast<std::size_t>(key.second)]) {
                if (!hardware.has_edge(qa, qb)) continue;
                std::pair<int, int> e = qa < qb ? std::pair{qa, qb} : std::pair{qb, qa};
                if (best.first < 0 || e < best) best = e;
            }
        }
        out.physical.add_coupling(best.first, best.second, coeff);
    }

    // Ferromagnetic -P on a spanning tree of each chain; +P offset per edge
    // keeps chain-consistent physical energies equal to logical energies.
    for (const auto& chain : emb.chains) {
        std::vector<int> reached{chain.front()};
        std::deque<int> queue{chain.front()};
        while (!queue.empty()) {
            const int q = queue.front();
            queue.pop_front();
            for (int r : chain) {
                if (hardware.has_edge(q, r) &&
                    std::find(reached.begin(), reached.end(), r) == reached.end()) {
                    reached.push_back(r);
                    queue.push_back(r);
                    out.physical.add_coupling(q, r, -penalty);
                    out.physical.add_offset(penalty);
                    ++out.penalty_edges;
                }
            }
        }
    }
    return out;
}

double default_chain_strength(const IsingModel& model) {
    double m = 0.0;
    for (int i = 0; i < model.n_spins(); ++i) m = std::max(m, std::abs(model.fields()[i]));
    for (const auto& [key, coeff] : model.couplings()) m = std::max(m, std::abs(coeff));
    return std::max(1.0, 1.5 * m);
}

bool chain_consistent(const SpinVector& physical, const ChainEmbedding& emb) {
    for (const auto& chain : emb.chains) {
        for (int q : chain) {
            if (physical[static_cast<std::size_t>(q)] != physical[static_cast<std::size_t>(chain.front())]) {
                return false;
            }
        }
    }
    return true;
}

SpinVector unembed(const SpinVector& physical, const ChainEmbedding& emb) {
    SpinVector logical(static_cast<std::size_t>(emb.n_logical()));
    for (std::size_t v = 0; v < emb.chains.size(); ++v) {
        int sum = 0;
        for (int q : emb.chains[v]) {
            if (q < 0 || q >= static_cast<int>(physical.size())) {
                throw DimensionError("unembed: physical state too short");
            }
            sum += physical[static_cast<std::size_t>(q)];
        }
        logical[v] = sum >= 0 ? 1 : -1;  // ties resolve to +1
    }
    return logical;
}

void write_hardware_graph(std::ostream& os, const HardwareGraph& g) {
    os << g.n_qubits << '\n';
    for (const auto& [i, j] : g.edges) os << i << ' ' << j << '\n';
}

HardwareGraph read_hardware_graph(std::istream& is) {
    int n = 0;
    if (!(is >> n)) throw IoError("read_hardware_graph: bad header");
    HardwareGraph g{n, {}};
    int i = 0, j = 0;
    while (is >> i >> j) insert_edge(g, i, j);
    return g;
}

void write_embedding(std::ostream& os, const ChainEmbedding& emb) {
    for (std::size_t v = 0; v < emb.chains.size(); ++v) {
        os << v;
        for (int q : emb.chains[v]) os << ' ' << q;
        os << '\n';
    }
}

}  // namespace annealpde
