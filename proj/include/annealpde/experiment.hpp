#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealpde/embedding.hpp"
#include "annealpde/encoding.hpp"
#include "annealpde/problems.hpp"
#include "annealpde/sa.hpp"

namespace annealpde {

enum class ExperimentKind { toy, stommel_fd, stommel_spectral, nonlinear, embed_demo, sweep };

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

struct EncodingConfig {
    double zoom_factor = 0.8;
    int n_spin = 3;
    int epochs = 30;
    double initial_center = 0.0;
    double initial_scale = 1.0;
    bool iterate = true;  // false: single shot (large-spin-number variant)
};

struct AnnealConfig {
    std::string schedule = "auto";  // auto | geometric | logarithmic
    int steps = 200;
    double target_acceptance = 0.5;
    double t_final = 0.0;  // auto schedule; <= 0 means t_final_factor * t0
    double t_final_factor = 1e-3;
    double t0 = 10.0;
    double ratio = 0.95;
    double a = 1.0;
    double alpha = 1.0;
    int reads = 100;
    int sweeps = 10;
    int polish = 200;  // iterated-descent kicks per read after the schedule
    std::uint64_t seed = 0;
    int threads = 0;
    std::string annealer = "sa";  // sa | exact (exhaustive oracle, small models)
    bool trace = false;
};

struct EmbeddingConfig {
    bool enabled = false;
    std::string hardware = "degree-capped-demo";
    int rows = 4, cols = 4, shore = 4;
    int n = 0;                                  // complete / custom size
    std::vector<std::pair<int, int>> edges;     // custom
    double chain_strength = 0.0;                // <= 0: default_chain_strength
    int retries = 64;
    std::vector<double> penalties;              // embed-demo sweep; empty: default set
};

struct SweepCell {
    double zoom_factor = 0.8;
    int n_spin = 3;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::toy;
    StommelConfig stommel;
    SpectralConfig spectral;
    NonlinearConfig nonlinear;
    EncodingConfig encoding;
    AnnealConfig anneal;
    EmbeddingConfig embedding;
    std::vector<SweepCell> sweep_cells;
    bool sweep_concurrent = false;
    std::string sweep_base = "stommel-fd";
    std::string output_dir = "out";
    std::string dump_model_path;
    std::string dump_poly_path;
    nlohmann::json echo;  // resolved values, written into the report
};

/// Validates and resolves a config document. Missing problem-defining keys
/// (problem.n / problem.epsilon / problem.n_x / problem.n_basis, per kind)
/// are config errors naming the key; everything else has documented defaults.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& kind_name);

struct PenaltyRow {
    double penalty = 0.0;
    bool consistent = false;
    bool recovered = false;  // consistent and unembeds to the logical optimum
    double physical_energy = 0.0;
};

struct SweepCellResult {
    double zoom_factor = 0.0;
    int n_spin = 0;
    double final_cost = 0.0;
    double relative_l2 = 0.0;
    double seconds = 0.0;
};

struct ExperimentReport {
    std::string kind;
    nlohmann::json config_echo;

    std::vector<double> epoch_cost;
    std::vector<double> best_cost_series;
    Eigen::VectorXd solution;  // decoded best w; spin values for toy/embed-demo
    double final_cost = 0.0;

    Eigen::VectorXd oracle_solution;
    double oracle_cost = 0.0;
    double relative_l2 = 0.0;
    bool has_oracle = false;

    std::optional<ProblemKind> problem_kind;  // drives field rendering
    int total_spins = 0;
    int aux_vars = 0;

    // toy / embed-demo
    SpinVector best_state;
    double best_energy = 0.0;

    // embed-demo extras
    std::vector<PenaltyRow> penalty_sweep;
    std::optional<HardwareGraph> hardware;
    std::optional<ChainEmbedding> chain_embedding;

    // embedding stage (when enabled on an iterative run)
    bool embedding_enabled = false;
    int physical_qubits = 0;
    int longest_chain = 0;

    std::vector<TracePoint> trace;

    // sweep children, one report per cell
    std::vector<SweepCellResult> sweep_cells;
    std::vector<ExperimentReport> children;
    std::vector<std::string> child_labels;

    double build_seconds = 0.0;
    double solve_seconds = 0.0;
    double oracle_seconds = 0.0;
    double total_seconds = 0.0;
};

ExperimentReport run(const ExperimentConfig& config);

/// The annealer callback used by `run`: simulated annealing (or the
/// exhaustive oracle), optionally routed through embed -> anneal -> unembed
/// on the configured hardware graph. Exposed for tests.
AnnealerFn make_annealer(const ExperimentConfig& config, ExperimentReport* report);

}  // namespace annealpde
