#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "annealpde/ising.hpp"

namespace annealpde {

/// T(step) = t0 * ratio^step, ratio in (0, 1).
struct GeometricSchedule {
    double t0 = 10.0;
    double ratio = 0.95;
    int steps = 200;
};

/// T(step) = a * n_spins / log(alpha * step + 2); the slow schedule that
/// guarantees convergence in the worst case. Natural logarithm.
struct LogarithmicSchedule {
    double a = 1.0;
    double alpha = 1.0;
    int steps = 200;
};

/// Calibrated geometric schedule: t0 is chosen so random uphill moves are
/// accepted at `target_acceptance`, and the ratio solves T(steps-1) =
/// t_final. A non-positive t_final means "1e-3 of the calibrated t0".
struct AutoSchedule {
    double target_acceptance = 0.5;
    double t_final = 0.0;
    double t_final_factor = 1e-3;  // used when t_final <= 0
    int steps = 200;
};

using Schedule = std::variant<GeometricSchedule, LogarithmicSchedule, AutoSchedule>;

/// Temperature at a step. Auto schedules must be resolved first (they have
/// no temperatures until calibrated against a model).
double temperature_at(const Schedule& schedule, int step, int n_spins);

int schedule_steps(const Schedule& schedule);

struct TemperatureEstimate {
    double temperature = 1.0;
    bool calibrated = false;  // false: no uphill moves found, fallback T = 1
};

/// Samples random states and single-spin flips, then solves
/// mean(exp(-dE/T)) = target over the collected uphill moves by bisection.
TemperatureEstimate auto_temperature(const IsingModel& model, double target_acceptance,
                                     std::uint64_t seed);

/// Replaces an auto schedule by its calibrated geometric equivalent;
/// geometric and logarithmic schedules pass through unchanged.
Schedule resolve_schedule(const Schedule& schedule, const IsingModel& model, std::uint64_t seed);

struct AnnealParams {
    Schedule schedule = AutoSchedule{};
    int reads = 100;   // independent chains; best-over-reads is returned
    int sweeps = 10;   // full randomized-order passes per temperature step
    std::uint64_t seed = 0;
    int threads = 0;   // 0: hardware concurrency (reads stay deterministic)
    bool record_trace = false;
    // Spin groups resampled jointly (Gibbs over all 2^k settings) once per
    // temperature step. Single-bit flips cannot move a binary-encoded
    // variable between adjacent levels without climbing through a distant
    // one, so annealing encoded problems without these moves freezes the
    // fine bits early. Groups may overlap (applied sequentially); size <= 10.
    std::vector<std::vector<int>> block_groups;
    // Groups for the greedy endgame (argmin passes after the schedule ends).
    // Defaults to block_groups when empty; pair unions of strongly coupled
    // variables belong here, where exact joint placement matters most.
    std::vector<std::vector<int>> descent_groups;
    // Iterated-descent kicks after the endgame: randomize one descent group,
    // relax the neighborhood to a fixpoint, keep the result only when it
    // improves. Escapes the compensated local minima that plain descent and
    // low-temperature sweeps both get stuck in.
    int polish_iterations = 0;
    // Initial state for read 0 (remaining reads start random). May cover a
    // prefix of the spins; the rest are randomized. Used by the zoom loop to
    // carry the incumbent solution into the next epoch's search.
    SpinVector warm_start;
    // When non-empty, uphill proposals are binned by dE between consecutive
    // edges and acceptance counts collected (for frozen-temperature tests).
    std::vector<double> acceptance_bin_edges;
};

struct TracePoint {
    int step = 0;
    double temperature = 0.0;
    double energy = 0.0;  // chain energy after the sweeps at this step
};

struct AcceptanceBin {
    double lo = 0.0, hi = 0.0;
    std::uint64_t proposed = 0, accepted = 0;
};

struct AnnealResult {
    SpinVector best_state;
    double best_energy = 0.0;
    int best_read = -1;
    std::vector<double> read_energies;  // best energy seen by each read
    std::vector<TracePoint> trace;      // of the winning read, if recorded
    std::vector<AcceptanceBin> acceptance;  // summed over reads
    double max_incremental_drift = 0.0;  // tracked-vs-recomputed energy gap
};

/// Metropolis simulated annealing: `reads` independent chains from random
/// states, single-spin proposals in a fresh random order each sweep, accept
/// if dE <= 0 else with probability exp(-dE/T). Each read keeps the best
/// state it ever visits and the result is the best over reads, ties broken
/// by the lowest read index. Per-read RNG streams are derived from
/// (seed, read), so the output is bit-identical for identical inputs no
/// matter how reads are scheduled across threads.
AnnealResult anneal(const IsingModel& model, const AnnealParams& params);

/// Descent groups for encoded problems: the variable blocks plus the union
/// of every strongly coupled block pair (strongest `max_pairs` by coupling
/// magnitude; unions larger than the group-size cap are skipped). Joint
/// placement of coupled variable pairs is what lets the endgame walk the
/// near-degenerate valleys of least-squares costs.
std::vector<std::vector<int>> pair_descent_groups(const IsingModel& model,
                                                  const std::vector<std::vector<int>>& blocks,
                                                  int max_pairs = 1500);

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

}  // namespace annealpde
