#include "annealpde/sa.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <deque>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace annealpde {

namespace {

void validate_geometric(const GeometricSchedule& s) {
    if (!(s.t0 > 0.0) || !(s.ratio > 0.0 && s.ratio < 1.0) || s.steps < 1) {
        throw ConfigError("geometric schedule: need t0 > 0, ratio in (0,1), steps >= 1");
    }
}

void validate_logarithmic(const LogarithmicSchedule& s) {
    if (!(s.a > 0.0) || !(s.alpha > 0.0) || s.steps < 1) {
        throw ConfigError("logarithmic schedule: need a > 0, alpha > 0, steps >= 1");
    }
}

// Flat adjacency for the hot loop.
struct CompiledModel {
    int n = 0;
    double offset = 0.0;
    std::vector<double> field;
    std::vector<int> adj_start;       // n + 1 offsets
    std::vector<int> adj_index;
    std::vector<double> adj_weight;
};

// A block group with its internal couplings separated out, so the energy of
// all 2^k settings can be enumerated against the external local fields.
struct CompiledGroup {
    std::vector<int> members;
    std::vector<std::tuple<int, int, double>> intra;  // local indices, coupling
    // Relative decoded value of each spin setting, treating members as a
    // binary expansion in listed order (most significant first). Lets the
    // relaxation read fit the block's parabolic energy restriction.
    std::vector<double> level;
};

std::vector<CompiledGroup> compile_groups(const IsingModel& model,
                                          const std::vector<std::vector<int>>& groups) {
    std::vector<CompiledGroup> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        if (g.empty()) continue;
        if (g.size() > 10) throw ConfigError("anneal: block group larger than 10 spins");
        CompiledGroup cg;
        cg.members = g;
        for (std::size_t a = 0; a < g.size(); ++a) {
            const int i = g[a];
            if (i < 0 || i >= model.n_spins()) throw ConfigError("anneal: group index out of range");
            for (std::size_t b = a + 1; b < g.size(); ++b) {
                if (g[b] == i) throw ConfigError("anneal: repeated spin inside a block group");
                const double j = model.coupling(i, g[b]);
                if (j != 0.0) cg.intra.emplace_back(static_cast<int>(a), static_cast<int>(b), j);
            }
        }
        cg.level.resize(std::size_t(1) << g.size());
        for (std::uint32_t cfg = 0; cfg < cg.level.size(); ++cfg) {
            double v = 0.0, w = 1.0;
            for (std::size_t a = 0; a < g.size(); ++a, w *= 0.5) {
                v += ((cfg >> a) & 1u) ? w : -w;
            }
            cg.level[cfg] = v;
        }
        out.push_back(std::move(cg));
    }
    return out;
}

CompiledModel compile(const IsingModel& model) {
    CompiledModel c;
    c.n = model.n_spins();
    c.offset = model.offset();
    c.field.assign(model.fields().data(), model.fields().data() + c.n);
    c.adj_start.assign(static_cast<std::size_t>(c.n) + 1, 0);
    for (int i = 0; i < c.n; ++i) {
        c.adj_start[static_cast<std::size_t>(i) + 1] =
            c.adj_start[static_cast<std::size_t>(i)] +
            static_cast<int>(model.neighbors(i).size());
    }
    c.adj_index.resize(static_cast<std::size_t>(c.adj_start.back()));
    c.adj_weight.resize(static_cast<std::size_t>(c.adj_start.back()));
    for (int i = 0; i < c.n; ++i) {
        int pos = c.adj_start[static_cast<std::size_t>(i)];
        for (const auto& [j, w] : model.neighbors(i)) {
            c.adj_index[static_cast<std::size_t>(pos)] = j;
            c.adj_weight[static_cast<std::size_t>(pos)] = w;
            ++pos;
        }
    }
    return c;
}

double local_field_stub(const CompiledModel& c, const SpinVector& s, int k) {
    double l = c.field[static_cast<std::size_t>(k)];
    for (int p = c.adj_start[static_cast<std::size_t>(k)];
         p < c.adj_start[static_cast<std::size_t>(k) + 1]; ++p) {
        l += c.adj_weight[static_cast<std::size_t>(p)] *
             s[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])];
    }
    return l;
}

double full_energy(const CompiledModel& c, const SpinVector& s) {
    double e = c.offset;
    for (int i = 0; i < c.n; ++i) {
        e += c.field[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
        for (int p = c.adj_start[static_cast<std::size_t>(i)];
             p < c.adj_start[static_cast<std::size_t>(i) + 1]; ++p) {
            const int j = c.adj_index[static_cast<std::size_t>(p)];
            if (j > i) e += c.adj_weight[static_cast<std::size_t>(p)] * s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
        }
    }
    return e;
}

struct ReadOutcome {
    SpinVector best_state;
    double best_energy = 0.0;
    double drift = 0.0;
    std::vector<TracePoint> trace;
    std::vector<AcceptanceBin> acceptance;
};

// Joint update of one group: enumerate every setting of its spins against
// the frozen rest of the system. temperature > 0 samples the Gibbs
// distribution; temperature <= 0 takes the argmin. Returns the energy change.
double group_move(const CompiledModel& c, const CompiledGroup& g, SpinVector& state,
                  std::vector<double>& local, double temperature, std::mt19937_64& rng,
                  std::uniform_real_distribution<double>& unif,
                  std::vector<int>* changed = nullptr) {
    const std::size_t k = g.members.size();
    // External field on each member: maintained local field minus the
    // internal contributions, which get re-added per candidate setting.
    double ext[10];
    std::int8_t cur[10];
    for (std::size_t a = 0; a < k; ++a) {
        ext[a] = local[static_cast<std::size_t>(g.members[a])];
        cur[a] = state[static_cast<std::size_t>(g.members[a])];
    }
    for (const auto& [a, b, j] : g.intra) {
        ext[static_cast<std::size_t>(a)] -= j * cur[b];
        ext[static_cast<std::size_t>(b)] -= j * cur[a];
    }

    const std::uint32_t n_cfg = 1u << k;
    double energy_of[1u << 10];
    std::uint32_t cur_cfg = 0;
    for (std::size_t a = 0; a < k; ++a) {
        if (cur[a] > 0) cur_cfg |= 1u << a;
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
        double e = 0.0;
        for (std::size_t a = 0; a < k; ++a) e += ((cfg >> a) & 1u) ? ext[a] : -ext[a];
        for (const auto& [a, b, j] : g.intra) {
            const int sa = ((cfg >> a) & 1u) ? 1 : -1;
            const int sb = ((cfg >> b) & 1u) ? 1 : -1;
            e += j * sa * sb;
        }
        energy_of[cfg] = e;
        lowest = std::min(lowest, e);
    }

    std::uint32_t chosen = cur_cfg;
    if (temperature > 0.0) {
        double total = 0.0;
        double weight[1u << 10];
        for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
            weight[cfg] = std::exp(-(energy_of[cfg] - lowest) / temperature);
            total += weight[cfg];
        }
        double u = unif(rng) * total;
        chosen = n_cfg - 1;
        for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
            u -= weight[cfg];
            if (u <= 0.0) {
                chosen = cfg;
                break;
            }
        }
    } else {
        for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
            // strict improvement only, so descent cannot cycle on fp ties
            if (energy_of[cfg] < energy_of[chosen] - 1e-13) chosen = cfg;
        }
    }
    if (chosen == cur_cfg) return 0.0;

    for (std::size_t a = 0; a < k; ++a) {
        const std::int8_t next = ((chosen >> a) & 1u) ? 1 : -1;
        if (next == cur[a]) continue;
        const int i = g.members[a];
        state[static_cast<std::size_t>(i)] = next;
        if (changed) changed->push_back(i);
        for (int p = c.adj_start[static_cast<std::size_t>(i)];
             p < c.adj_start[static_cast<std::size_t>(i) + 1]; ++p) {
            local[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])] +=
                2.0 * c.adj_weight[static_cast<std::size_t>(p)] * next;
        }
    }
    return energy_of[chosen] - energy_of[cur_cfg];
}

// How reads treat the temperature schedule.
enum class ReadMode {
    forward,  // random start, full schedule
    descent,  // warm start, no thermal phase, straight to greedy descent
    reverse,  // warm start, schedule rescaled to the warm state's own energy
              // scale so soft collective modes equilibrate without melting
              // the incumbent structure
    relax     // Gauss-Seidel block relaxation with rounding instead of the
              // thermal phase; on quadratic costs this tracks the continuous
              // window optimum, bypassing the barriers that trap local moves
};

// One Gauss-Seidel relaxation pass: per block, fit the parabola of the
// block-restricted energy over its decoded levels, move to the level nearest
// the parabola's box-clamped minimizer (argmin when the restriction is not
// convex). Returns the number of blocks that moved.
int relax_pass(const CompiledModel& c, const std::vector<CompiledGroup>& groups,
               SpinVector& state, std::vector<double>& local, double& energy) {
    int moved_blocks = 0;
    for (const CompiledGroup& g : groups) {
        const std::size_t k = g.members.size();
        double ext[10];
        std::int8_t cur[10];
        for (std::size_t a = 0; a < k; ++a) {
            ext[a] = local[static_cast<std::size_t>(g.members[a])];
            cur[a] = state[static_cast<std::size_t>(g.members[a])];
        }
        for (const auto& [a, b, j] : g.intra) {
            ext[static_cast<std::size_t>(a)] -= j * cur[b];
            ext[static_cast<std::size_t>(b)] -= j * cur[a];
        }
        const std::uint32_t n_cfg = 1u << k;
        double energy_of[1u << 10];
        std::uint32_t cur_cfg = 0;
        for (std::size_t a = 0; a < k; ++a) {
            if (cur[a] > 0) cur_cfg |= 1u << a;
        }
        for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
            double e = 0.0;
            for (std::size_t a = 0; a < k; ++a) e += ((cfg >> a) & 1u) ? ext[a] : -ext[a];
            for (const auto& [a, b, j] : g.intra) {
                const int sa = ((cfg >> a) & 1u) ? 1 : -1;
                const int sb = ((cfg >> b) & 1u) ? 1 : -1;
                e += j * sa * sb;
            }
            energy_of[cfg] = e;
        }
        // least-squares parabola E = A v^2 + B v + C over the level line
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0, sy = 0, syv = 0, syv2 = 0;
        for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
            const double v = g.level[cfg], y = energy_of[cfg];
            s1 += v;
            s2 += v * v;
            s3 += v * v * v;
            s4 += v * v * v * v;
            sy += y;
            syv += y * v;
            syv2 += y * v * v;
        }
        const double m = static_cast<double>(n_cfg);
        Eigen::Matrix3d M;
        M << s4, s3, s2, s3, s2, s1, s2, s1, m;
        Eigen::Vector3d rhs(syv2, syv, sy);
        const Eigen::Vector3d coeff = M.ldlt().solve(rhs);
        const double A = coeff[0], B = coeff[1];

        std::uint32_t chosen = cur_cfg;
        if (A > 1e-300) {
            double vmin = g.level[0], vmax = g.level[0];
            for (std::uint32_t cfg = 1; cfg < n_cfg; ++cfg) {
                vmin = std::min(vmin, g.level[cfg]);
                vmax = std::max(vmax, g.level[cfg]);
            }
            const double target = std::clamp(-B / (2.0 * A), vmin, vmax);
            double bd = std::numeric_limits<double>::infinity();
            for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
                const double d = std::abs(g.level[cfg] - target);
                if (d < bd) {
                    bd = d;
                    chosen = cfg;
                }
            }
        } else {
            for (std::uint32_t cfg = 0; cfg < n_cfg; ++cfg) {
                if (energy_of[cfg] < energy_of[chosen] - 1e-13) chosen = cfg;
            }
        }
        if (chosen == cur_cfg) continue;
        ++moved_blocks;
        energy += energy_of[chosen] - energy_of[cur_cfg];
        for (std::size_t a = 0; a < k; ++a) {
            const std::int8_t next = ((chosen >> a) & 1u) ? 1 : -1;
            if (next == cur[a]) continue;
            const int i = g.members[a];
            state[static_cast<std::size_t>(i)] = next;
            for (int p = c.adj_start[static_cast<std::size_t>(i)];
                 p < c.adj_start[static_cast<std::size_t>(i) + 1]; ++p) {
                local[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])] +=
                    2.0 * c.adj_weight[static_cast<std::size_t>(p)] * next;
            }
        }
    }
    return moved_blocks;
}

ReadOutcome run_read(const CompiledModel& c, const std::vector<CompiledGroup>& groups,
                     const std::vector<CompiledGroup>& descent_groups,
                     const std::vector<std::vector<int>>& groups_of_spin,
                     const std::vector<double>& temps_in, int sweeps, int polish_iterations,
                     std::uint64_t seed, bool record_trace,
                     const std::vector<double>& bin_edges, const SpinVector& warm_start,
                     ReadMode mode) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SpinVector state(static_cast<std::size_t>(c.n));
    for (auto& s : state) s = (rng() & 1) ? 1 : -1;
    for (std::size_t i = 0; i < warm_start.size() && i < state.size(); ++i) {
        state[i] = warm_start[i];
    }

    // Local fields: L_k = h_k + sum_j J_kj s_j, so a flip costs dE = -2 s_k L_k.
    std::vector<double> local(c.field.begin(), c.field.end());
    for (int i = 0; i < c.n; ++i) {
        for (int p = c.adj_start[static_cast<std::size_t>(i)];
             p < c.adj_start[static_cast<std::size_t>(i) + 1]; ++p) {
            local[static_cast<std::size_t>(i)] +=
                c.adj_weight[static_cast<std::size_t>(p)] *
                state[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])];
        }
    }
    double energy = full_energy(c, state);

    ReadOutcome out;
    out.best_state = state;
    out.best_energy = energy;
    const bool collect = !bin_edges.empty();
    if (collect) {
        out.acceptance.resize(bin_edges.size() - 1);
        for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
            out.acceptance[b].lo = bin_edges[b];
            out.acceptance[b].hi = bin_edges[b + 1];
        }
    }

    std::vector<int> order(static_cast<std::size_t>(c.n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> group_order(groups.size());
    std::iota(group_order.begin(), group_order.end(), 0);

    std::vector<double> temps = temps_in;
    if (mode == ReadMode::descent || mode == ReadMode::relax) {
        temps.clear();
    } else if (mode == ReadMode::reverse) {
        // Calibrate the reverse peak on uphill moves available at the warm
        // state itself: median dE accepted at ~35%.
        std::vector<double> uphill;
        for (int trial = 0; trial < 256; ++trial) {
            const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(c.n));
            const double de = -2.0 * state[static_cast<std::size_t>(k)] *
                              local_field_stub(c, state, k);
            if (de > 0.0) uphill.push_back(de);
        }
        if (!uphill.empty()) {
            std::nth_element(uphill.begin(), uphill.begin() + uphill.size() / 2, uphill.end());
            const double t_peak = uphill[uphill.size() / 2] / std::log(1.0 / 0.35);
            const double scale = t_peak / temps.front();
            if (scale > 0.0 && scale < 1.0) {
                for (double& t : temps) t *= scale;
            }
        }
    }

    for (std::size_t step = 0; step < temps.size(); ++step) {
        const double t = temps[step];
        const double inv_t = 1.0 / t;
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            std::shuffle(order.begin(), order.end(), rng);
            for (int k : order) {
                const double de = -2.0 * state[static_cast<std::size_t>(k)] *
                                  local[static_cast<std::size_t>(k)];
                bool accept;
                if (de <= 0.0) {
                    accept = true;
                } else {
                    const double x = de * inv_t;
                    accept = x < 45.0 && unif(rng) < std::exp(-x);
                    if (collect) {
                        auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), de);
                        if (it != bin_edges.begin() && it != bin_edges.end()) {
                            AcceptanceBin& bin = out.acceptance[static_cast<std::size_t>(
                                it - bin_edges.begin() - 1)];
                            ++bin.proposed;
                            if (accept) ++bin.accepted;
                        }
                    }
                }
                if (!accept) continue;
                const std::int8_t flipped = static_cast<std::int8_t>(-state[static_cast<std::size_t>(k)]);
                state[static_cast<std::size_t>(k)] = flipped;
                energy += de;
                for (int p = c.adj_start[static_cast<std::size_t>(k)];
                     p < c.adj_start[static_cast<std::size_t>(k) + 1]; ++p) {
                    local[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])] +=
                        2.0 * c.adj_weight[static_cast<std::size_t>(p)] * flipped;
                }
                if (energy < out.best_energy) {
                    out.best_energy = energy;
                    out.best_state = state;
                }
            }
        }
        if (!groups.empty()) {
            std::shuffle(group_order.begin(), group_order.end(), rng);
            for (int gi : group_order) {
                energy += group_move(c, groups[static_cast<std::size_t>(gi)], state, local, t,
                                     rng, unif);
            }
            if (energy < out.best_energy) {
                out.best_energy = energy;
                out.best_state = state;
            }
        }
        if (record_trace) {
            out.trace.push_back({static_cast<int>(step), t, energy});
        }
    }

    // Greedy endgame: event-driven descent to a joint fixpoint of single-spin
    // flips and argmin group settings, then iterated kicks (randomize one
    // group, relax the neighborhood, keep strict improvements only).
    std::vector<char> spin_queued(static_cast<std::size_t>(c.n), 0);
    std::vector<char> group_queued(descent_groups.size(), 0);
    std::deque<int> spin_q, group_q;
    const auto push_spin = [&](int k) {
        if (!spin_queued[static_cast<std::size_t>(k)]) {
            spin_queued[static_cast<std::size_t>(k)] = 1;
            spin_q.push_back(k);
        }
    };
    const auto push_groups_of = [&](int k) {
        for (int g : groups_of_spin[static_cast<std::size_t>(k)]) {
            if (!group_queued[static_cast<std::size_t>(g)]) {
                group_queued[static_cast<std::size_t>(g)] = 1;
                group_q.push_back(g);
            }
        }
    };
    const auto wake_neighborhood = [&](int k) {
        push_spin(k);
        push_groups_of(k);
        for (int p = c.adj_start[static_cast<std::size_t>(k)];
             p < c.adj_start[static_cast<std::size_t>(k) + 1]; ++p) {
            const int j = c.adj_index[static_cast<std::size_t>(p)];
            push_spin(j);
            push_groups_of(j);
        }
    };
    std::vector<int> moved;
    const auto descend = [&]() {
        double delta = 0.0;
        while (!spin_q.empty() || !group_q.empty()) {
            while (!spin_q.empty()) {
                const int k = spin_q.front();
                spin_q.pop_front();
                spin_queued[static_cast<std::size_t>(k)] = 0;
                const double de = -2.0 * state[static_cast<std::size_t>(k)] *
                                  local[static_cast<std::size_t>(k)];
                if (de >= -1e-13) continue;
                const std::int8_t flipped =
                    static_cast<std::int8_t>(-state[static_cast<std::size_t>(k)]);
                state[static_cast<std::size_t>(k)] = flipped;
                delta += de;
                for (int p = c.adj_start[static_cast<std::size_t>(k)];
                     p < c.adj_start[static_cast<std::size_t>(k) + 1]; ++p) {
                    local[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])] +=
                        2.0 * c.adj_weight[static_cast<std::size_t>(p)] * flipped;
                }
                wake_neighborhood(k);
            }
            if (!group_q.empty()) {
                const int g = group_q.front();
                group_q.pop_front();
                group_queued[static_cast<std::size_t>(g)] = 0;
                moved.clear();
                const double de = group_move(c, descent_groups[static_cast<std::size_t>(g)],
                                             state, local, 0.0, rng, unif, &moved);
                delta += de;
                for (int k : moved) wake_neighborhood(k);
            }
        }
        return delta;
    };

    if (mode == ReadMode::relax && !groups.empty()) {
        for (int pass = 0; pass < 64; ++pass) {
            if (relax_pass(c, groups, state, local, energy) == 0) break;
        }
        if (energy < out.best_energy) {
            out.best_energy = energy;
            out.best_state = state;
        }
    }

    for (int k = 0; k < c.n; ++k) push_spin(k);
    for (std::size_t g = 0; g < descent_groups.size(); ++g) {
        group_queued[g] = 1;
        group_q.push_back(static_cast<int>(g));
    }
    energy += descend();
    if (energy < out.best_energy) {
        out.best_energy = energy;
        out.best_state = state;
    }

    if (!descent_groups.empty() && polish_iterations > 0 && mode != ReadMode::relax) {
        SpinVector snap_state;
        std::vector<double> snap_local;
        for (int iter = 0; iter < polish_iterations; ++iter) {
            snap_state = state;
            snap_local = local;
            const double snap_energy = energy;
            const CompiledGroup& g =
                descent_groups[static_cast<std::size_t>(rng() % descent_groups.size())];
            for (int m : g.members) {
                const std::int8_t next = (rng() & 1) ? 1 : -1;
                if (next == state[static_cast<std::size_t>(m)]) continue;
                energy += -2.0 * state[static_cast<std::size_t>(m)] *
                          local[static_cast<std::size_t>(m)];
                state[static_cast<std::size_t>(m)] = next;
                for (int p = c.adj_start[static_cast<std::size_t>(m)];
                     p < c.adj_start[static_cast<std::size_t>(m) + 1]; ++p) {
                    local[static_cast<std::size_t>(c.adj_index[static_cast<std::size_t>(p)])] +=
                        2.0 * c.adj_weight[static_cast<std::size_t>(p)] * next;
                }
                wake_neighborhood(m);
            }
            energy += descend();
            if (energy < snap_energy - 1e-13) {
                if (energy < out.best_energy) {
                    out.best_energy = energy;
                    out.best_state = state;
                }
            } else {
                state = std::move(snap_state);
                local = std::move(snap_local);
                energy = snap_energy;
            }
        }
    }

    const double exact = full_energy(c, out.best_state);
    out.drift = std::abs(out.best_energy - exact);
    out.best_energy = exact;
    return out;
}

}  // namespace

int schedule_steps(const Schedule& schedule) {
    return std::visit([](const auto& s) { return s.steps; }, schedule);
}

double temperature_at(const Schedule& schedule, int step, int n_spins) {
    if (step < 0 || step >= schedule_steps(schedule)) {
        throw ConfigError("temperature_at: step out of range");
    }
    if (const auto* g = std::get_if<GeometricSchedule>(&schedule)) {
        validate_geometric(*g);
        return g->t0 * std::pow(g->ratio, step);
    }
    if (const auto* l = std::get_if<LogarithmicSchedule>(&schedule)) {
        validate_logarithmic(*l);
        return l->a * n_spins / std::log(l->alpha * step + 2.0);
    }
    throw ConfigError("temperature_at: auto schedule must be resolved against a model first");
}

TemperatureEstimate auto_temperature(const IsingModel& model, double target_acceptance,
                                     std::uint64_t seed) {
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
        throw ConfigError("auto_temperature: target acceptance must lie in (0, 1)");
    }
    const int n = model.n_spins();
    if (n == 0) return {1.0, false};

    std::mt19937_64 rng(splitmix64(seed));
    std::vector<double> uphill;
    SpinVector state(static_cast<std::size_t>(n));
    constexpr int kSamples = 2048;
    for (int trial = 0; trial < kSamples; ++trial) {
        for (auto& s : state) s = (rng() & 1) ? 1 : -1;
        const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        const double de = delta_energy(model, state, k);
        if (de > 0.0) uphill.push_back(de);
    }
    if (uphill.empty()) return {1.0, false};

    const auto mean_acceptance = [&](double t) {
        double sum = 0.0;
        for (double de : uphill) sum += std::exp(-de / t);
        return sum / static_cast<double>(uphill.size());
    };
    double lo = 1e-12, hi = 1e15;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::sqrt(lo * hi);  // bisect in log space
        if (mean_acceptance(mid) < target_acceptance) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {std::sqrt(lo * hi), true};
}

Schedule resolve_schedule(const Schedule& schedule, const IsingModel& model, std::uint64_t seed) {
    const auto* a = std::get_if<AutoSchedule>(&schedule);
    if (!a) return schedule;
    if (a->steps < 1) throw ConfigError("auto schedule: steps must be >= 1");
    const TemperatureEstimate est =
        auto_temperature(model, a->target_acceptance, derive_seed(seed, 0xca11b8));
    const double t0 = est.temperature;
    if (!(a->t_final_factor > 0.0 && a->t_final_factor < 1.0)) {
        throw ConfigError("auto schedule: t_final_factor must lie in (0, 1)");
    }
    const double t_final = a->t_final > 0.0 ? a->t_final : a->t_final_factor * t0;
    if (!(t_final > 0.0 && t_final < t0)) {
        throw ConfigError("auto schedule: t_final must lie in (0, t0)");
    }
    GeometricSchedule g;
    g.t0 = t0;
    g.steps = a->steps;
    g.ratio = a->steps > 1 ? std::pow(t_final / t0, 1.0 / (a->steps - 1)) : 0.5;
    return g;
}

AnnealResult anneal(const IsingModel& model, const AnnealParams& params) {
    if (model.n_spins() < 1) throw ConfigError("anneal: model has no spins");
    if (params.reads < 1) throw ConfigError("anneal: reads must be >= 1");
    if (params.sweeps < 1) throw ConfigError("anneal: sweeps must be >= 1");
    if (!params.acceptance_bin_edges.empty() &&
        !std::is_sorted(params.acceptance_bin_edges.begin(), params.acceptance_bin_edges.end())) {
        throw ConfigError("anneal: acceptance bin edges must be sorted");
    }

    const Schedule resolved = resolve_schedule(params.schedule, model, params.seed);
    const int steps = schedule_steps(resolved);
    std::vector<double> temps(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        temps[static_cast<std::size_t>(s)] = temperature_at(resolved, s, model.n_spins());
        if (!(temps[static_cast<std::size_t>(s)] > 0.0)) {
            throw ConfigError("anneal: schedule produced a non-positive temperature");
        }
    }

    const CompiledModel compiled = compile(model);
    const std::vector<CompiledGroup> groups = compile_groups(model, params.block_groups);
    const std::vector<CompiledGroup> descent_groups =
        params.descent_groups.empty() ? groups
                                      : compile_groups(model, params.descent_groups);
    std::vector<std::vector<int>> groups_of_spin(static_cast<std::size_t>(model.n_spins()));
    for (std::size_t g = 0; g < descent_groups.size(); ++g) {
        for (int i : descent_groups[g].members) {
            groups_of_spin[static_cast<std::size_t>(i)].push_back(static_cast<int>(g));
        }
    }
    std::vector<ReadOutcome> outcomes(static_cast<std::size_t>(params.reads));

    int n_threads = params.threads > 0
                        ? params.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, params.reads));

    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (int r = next.fetch_add(1); r < params.reads; r = next.fetch_add(1)) {
            // With a warm start, read 0 descends deterministically from it
            // (the incumbent is polished, never melted) and half of the
            // remaining reads re-anneal around it at its own energy scale;
            // the rest explore from random states as usual.
            ReadMode mode = ReadMode::forward;
            if (!params.warm_start.empty()) {
                if (r == 0) {
                    mode = ReadMode::descent;
                } else if (r == 1 && !groups.empty()) {
                    mode = ReadMode::relax;
                } else if (r % 2 == 1) {
                    mode = ReadMode::reverse;
                }
            } else if (r == 0 && !groups.empty() && params.reads > 1) {
                mode = ReadMode::relax;
            }
            outcomes[static_cast<std::size_t>(r)] = run_read(
                compiled, groups, descent_groups, groups_of_spin, temps, params.sweeps,
                params.polish_iterations,
                derive_seed(params.seed, static_cast<std::uint64_t>(r)), params.record_trace,
                params.acceptance_bin_edges,
                mode == ReadMode::forward ? SpinVector{} : params.warm_start, mode);
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    AnnealResult result;
    result.read_energies.reserve(static_cast<std::size_t>(params.reads));
    for (int r = 0; r < params.reads; ++r) {
        const ReadOutcome& o = outcomes[static_cast<std::size_t>(r)];
        result.read_energies.push_back(o.best_energy);
        result.max_incremental_drift = std::max(result.max_incremental_drift, o.drift);
        if (result.best_read < 0 || o.best_energy < result.best_energy) {
            result.best_read = r;
            result.best_energy = o.best_energy;
        }
    }
    result.best_state = outcomes[static_cast<std::size_t>(result.best_read)].best_state;
    if (params.record_trace) {
        result.trace = outcomes[static_cast<std::size_t>(result.best_read)].trace;
    }
    if (!params.acceptance_bin_edges.empty()) {
        result.acceptance = outcomes[0].acceptance;
        for (int r = 1; r < params.reads; ++r) {
            for (std::size_t b = 0; b < result.acceptance.size(); ++b) {
                result.acceptance[b].proposed += outcomes[static_cast<std::size_t>(r)].acceptance[b].proposed;
                result.acceptance[b].accepted += outcomes[static_cast<std::size_t>(r)].acceptance[b].accepted;
            }
        }
    }
    return result;
}

std::vector<std::vector<int>> pair_descent_groups(const IsingModel& model,
                                                  const std::vector<std::vector<int>>& blocks,
                                                  int max_pairs) {
    std::vector<std::vector<int>> groups;
    for (const auto& b : blocks) {
        if (!b.empty() && b.size() <= 10) groups.push_back(b);
    }
    if (blocks.size() < 2) return groups;

    std::vector<int> block_of(static_cast<std::size_t>(model.n_spins()), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (int i : blocks[b]) {
            if (i >= 0 && i < model.n_spins()) block_of[static_cast<std::size_t>(i)] = static_cast<int>(b);
        }
    }
    std::map<std::pair<int, int>, double> strength;
    for (const auto& [key, j] : model.couplings()) {
        const int a = block_of[static_cast<std::size_t>(key.first)];
        const int b = block_of[static_cast<std::size_t>(key.second)];
        if (a < 0 || b < 0 || a == b) continue;
        auto id = a < b ? std::pair{a, b} : std::pair{b, a};
        double& slot = strength[id];
        slot = std::max(slot, std::abs(j));
    }
    std::vector<std::pair<double, std::pair<int, int>>> ranked;
    ranked.reserve(strength.size());
    for (const auto& [id, mag] : strength) ranked.push_back({mag, id});
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        return x.first > y.first || (x.first == y.first && x.second < y.second);
    });
    int taken = 0;
    for (const auto& [mag, id] : ranked) {
        if (taken >= max_pairs) break;
        const auto& ba = blocks[static_cast<std::size_t>(id.first)];
        const auto& bb = blocks[static_cast<std::size_t>(id.second)];
        if (ba.size() + bb.size() > 8) continue;
        std::vector<int> fused = ba;
        fused.insert(fused.end(), bb.begin(), bb.end());
        groups.push_back(std::move(fused));
        ++taken;
    }
    return groups;
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
    os << "step,temperature,energy\n";
    for (const TracePoint& p : trace) {
        os << p.step << ',' << format_double(p.temperature) << ',' << format_double(p.energy)
           << '\n';
    }
}

}  // namespace annealpde
