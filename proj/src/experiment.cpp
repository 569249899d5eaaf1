#include "annealpde/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <memory>

namespace annealpde {

namespace {

using nlohmann::json;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const json* find_section(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) return nullptr;
    if (!it->is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
    return &*it;
}

template <typename T>
T get_or(const json* section, const char* key, T fallback) {
    if (!section) return fallback;
    auto it = section->find(key);
    if (it == section->end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for key: ") + key);
    }
}

template <typename T>
T require(const json* section, const char* section_name, const char* key) {
    if (section) {
        auto it = section->find(key);
        if (it != section->end()) {
            try {
                return it->get<T>();
            } catch (const json::exception&) {
                throw ConfigError(std::string("config: bad value for key: ") + section_name + "." +
                                  key);
            }
        }
    }
    throw ConfigError(std::string("config: missing required key: ") + section_name + "." + key);
}

HardwareKind hardware_kind_from_name(const std::string& name) {
    if (name == "complete") return HardwareKind::complete;
    if (name == "grid") return HardwareKind::grid;
    if (name == "degree-capped-demo" || name == "demo7") return HardwareKind::degree_capped_demo;
    if (name == "chimera") return HardwareKind::chimera;
    if (name == "custom") return HardwareKind::custom;
    throw ConfigError("config: unknown hardware kind '" + name + "'");
}

HardwareGraph build_hardware(const EmbeddingConfig& cfg) {
    HardwareParams params;
    const HardwareKind kind = hardware_kind_from_name(cfg.hardware);
    switch (kind) {
        case HardwareKind::complete: params.a = cfg.n; break;
        case HardwareKind::grid: params.a = cfg.rows, params.b = cfg.cols; break;
        case HardwareKind::chimera:
            params.a = cfg.rows, params.b = cfg.cols, params.shore = cfg.shore;
            break;
        case HardwareKind::custom:
            params.custom_n = cfg.n, params.custom_edges = cfg.edges;
            break;
        case HardwareKind::degree_capped_demo: break;
    }
    return generate_hardware_graph(kind, params);
}

Schedule schedule_from_config(const AnnealConfig& cfg) {
    if (cfg.schedule == "auto") {
        return AutoSchedule{cfg.target_acceptance, cfg.t_final, cfg.t_final_factor, cfg.steps};
    }
    if (cfg.schedule == "geometric") return GeometricSchedule{cfg.t0, cfg.ratio, cfg.steps};
    if (cfg.schedule == "logarithmic") return LogarithmicSchedule{cfg.a, cfg.alpha, cfg.steps};
    throw ConfigError("config: unknown schedule '" + cfg.schedule + "'");
}

AnnealParams anneal_params_from_config(const AnnealConfig& cfg) {
    AnnealParams params;
    params.schedule = schedule_from_config(cfg);
    params.reads = cfg.reads;
    params.sweeps = cfg.sweeps;
    params.polish_iterations = cfg.polish;
    params.seed = cfg.seed;
    params.threads = cfg.threads;
    return params;
}

// H = s0 s1 + s0 - s1, the two-spin walkthrough model.
IsingModel toy_ising_model() {
    IsingModel m(2);
    m.add_coupling(0, 1, 1.0);
    m.add_field(0, 1.0);
    m.add_field(1, -1.0);
    return m;
}

// H = s0 s1 + 2 s1 s2 - 3 s0 s2 + 4 s2 s3 - 5 s3 s4 - 6 s2 s4, the
// embedding walkthrough model.
IsingModel embed_demo_model() {
    IsingModel m(5);
    m.add_coupling(0, 1, 1.0);
    m.add_coupling(1, 2, 2.0);
    m.add_coupling(0, 2, -3.0);
    m.add_coupling(2, 3, 4.0);
    m.add_coupling(3, 4, -5.0);
    m.add_coupling(2, 4, -6.0);
    return m;
}

struct Problem {
    RealCost cost;
    ProblemKind kind;
    Eigen::VectorXd oracle;  // exact minimizer / analytic truth
    double oracle_cost = 0.0;
};

Problem build_problem(const ExperimentConfig& config, ExperimentKind kind,
                      ExperimentReport& report) {
    const auto t0 = std::chrono::steady_clock::now();
    Problem p;
    switch (kind) {
        case ExperimentKind::stommel_fd: {
            LinearSystem sys = build_stommel_fd(config.stommel);
            p.cost = least_squares_quadratic(sys);
            p.kind = ProblemKind::stommel_fd;
            break;
        }
        case ExperimentKind::stommel_spectral: {
            p.cost = build_stommel_spectral(config.spectral);
            p.kind = ProblemKind::stommel_spectral;
            break;
        }
        case ExperimentKind::nonlinear: {
            p.cost = build_nonlinear_ode(config.nonlinear);
            p.kind = ProblemKind::nonlinear_ode;
            break;
        }
        default: throw ConfigError("build_problem: not an iterative experiment kind");
    }
    report.build_seconds = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    if (kind == ExperimentKind::nonlinear) {
        // The model equation is solved by y = 1 + x^2 exactly, which the
        // monomial basis represents with coefficients (1, 0, 1, 0, ...).
        p.oracle = Eigen::VectorXd::Zero(config.nonlinear.n_basis);
        p.oracle[0] = 1.0;
        p.oracle[2] = 1.0;
    } else {
        p.oracle = solve_quadratic_exact(p.cost);
    }
    p.oracle_cost = evaluate(p.cost, p.oracle);
    report.oracle_seconds = seconds_since(t1);
    return p;
}

void maybe_dump_epoch0(const ExperimentConfig& config, const RealCost& cost) {
    if (config.dump_model_path.empty() && config.dump_poly_path.empty()) return;
    std::vector<VariableEncoding> encodings(
        static_cast<std::size_t>(cost.n_vars()),
        VariableEncoding{config.encoding.initial_center, config.encoding.initial_scale,
                         config.encoding.n_spin});
    SpinPolynomial poly = substitute_encoding(cost, encodings);
    if (!config.dump_poly_path.empty()) {
        std::ofstream os(config.dump_poly_path);
        if (!os) throw IoError("cannot open " + config.dump_poly_path);
        write_polynomial(os, poly);
    }
    if (!config.dump_model_path.empty()) {
        IsingModel model = poly.degree() <= 2
                               ? ising_from_quadratic(poly)
                               : ising_from_quadratic(reduce_to_quadratic(poly).quadratic);
        std::ofstream os(config.dump_model_path);
        if (!os) throw IoError("cannot open " + config.dump_model_path);
        write_model(os, model);
    }
}

ExperimentReport run_toy(const ExperimentConfig& config) {
    ExperimentReport report;
    report.kind = experiment_kind_name(ExperimentKind::toy);
    report.config_echo = config.echo;

    IsingModel model = toy_ising_model();
    const auto t0 = std::chrono::steady_clock::now();
    AnnealParams params = anneal_params_from_config(config.anneal);
    params.record_trace = true;
    AnnealResult res = anneal(model, params);
    report.solve_seconds = seconds_since(t0);

    GroundState oracle = brute_force_ground_state(model);
    report.best_state = res.best_state;
    report.best_energy = res.best_energy;
    report.final_cost = res.best_energy;
    report.epoch_cost = {res.best_energy};
    report.best_cost_series = {res.best_energy};
    report.trace = res.trace;
    report.total_spins = model.n_spins();

    report.solution.resize(model.n_spins());
    report.oracle_solution.resize(model.n_spins());
    for (int i = 0; i < model.n_spins(); ++i) {
        report.solution[i] = res.best_state[static_cast<std::size_t>(i)];
        report.oracle_solution[i] = oracle.state[static_cast<std::size_t>(i)];
    }
    report.oracle_cost = oracle.energy;
    report.has_oracle = true;
    report.relative_l2 =
        (report.solution - report.oracle_solution).norm() / report.oracle_solution.norm();

    if (!config.dump_model_path.empty()) {
        std::ofstream os(config.dump_model_path);
        if (!os) throw IoError("cannot open " + config.dump_model_path);
        write_model(os, model);
    }
    return report;
}

ExperimentReport run_embed_demo(const ExperimentConfig& config) {
    ExperimentReport report;
    report.kind = experiment_kind_name(ExperimentKind::embed_demo);
    report.config_echo = config.echo;

    IsingModel logical = embed_demo_model();
    HardwareGraph hardware = build_hardware(config.embedding);
    const auto t0 = std::chrono::steady_clock::now();
    auto emb = find_embedding(logical.n_spins(), coupling_edges(logical), hardware,
                              config.anneal.seed, config.embedding.retries);
    if (!emb) {
        throw EmbeddingError("embed-demo: no embedding of the walkthrough model into '" +
                             config.embedding.hardware + "' hardware");
    }

    GroundState logical_gs = brute_force_ground_state(logical);
    std::vector<double> penalties = config.embedding.penalties;
    const double default_p = default_chain_strength(logical);
    if (penalties.empty()) penalties = {0.25, 0.5, 1.0, 2.0, 4.0, default_p};

    for (double p : penalties) {
        EmbeddedModel embedded = embed_model(logical, *emb, hardware, p);
        GroundState physical = brute_force_ground_state(embedded.physical);
        PenaltyRow row;
        row.penalty = p;
        row.physical_energy = physical.energy;
        row.consistent = chain_consistent(physical.state, *emb);
        row.recovered = row.consistent &&
                        std::abs(energy(logical, unembed(physical.state, *emb)) -
                                 logical_gs.energy) < 1e-9;
        report.penalty_sweep.push_back(row);
    }
    report.solve_seconds = seconds_since(t0);

    report.hardware = hardware;
    report.chain_embedding = *emb;
    report.embedding_enabled = true;
    report.physical_qubits = hardware.n_qubits;
    for (const auto& chain : emb->chains) {
        report.longest_chain = std::max(report.longest_chain, static_cast<int>(chain.size()));
    }

    report.best_state = logical_gs.state;
    report.best_energy = logical_gs.energy;
    report.final_cost = logical_gs.energy;
    report.epoch_cost = {logical_gs.energy};
    report.best_cost_series = {logical_gs.energy};
    report.oracle_cost = logical_gs.energy;
    report.has_oracle = true;
    report.relative_l2 = 0.0;
    report.total_spins = logical.n_spins();
    report.solution.resize(logical.n_spins());
    report.oracle_solution.resize(logical.n_spins());
    for (int i = 0; i < logical.n_spins(); ++i) {
        report.solution[i] = logical_gs.state[static_cast<std::size_t>(i)];
        report.oracle_solution[i] = report.solution[i];
    }

    if (!config.dump_model_path.empty()) {
        std::ofstream os(config.dump_model_path);
        if (!os) throw IoError("cannot open " + config.dump_model_path);
        write_model(os, logical);
    }
    return report;
}

ExperimentReport run_iterative(const ExperimentConfig& config, ExperimentKind kind) {
    ExperimentReport report;
    report.kind = experiment_kind_name(kind);
    report.config_echo = config.echo;

    Problem problem = build_problem(config, kind, report);
    maybe_dump_epoch0(config, problem.cost);

    IterativeParams params;
    params.zoom_factor = config.encoding.zoom_factor;
    params.n_spin = config.encoding.n_spin;
    params.epochs = config.encoding.iterate ? config.encoding.epochs : 1;
    params.initial_center = config.encoding.initial_center;
    params.initial_scale = config.encoding.initial_scale;
    params.seed = config.anneal.seed;

    AnnealerFn annealer = make_annealer(config, &report);
    const auto t0 = std::chrono::steady_clock::now();
    IterativeResult res = solve_iterative(problem.cost, params, annealer);
    report.solve_seconds = seconds_since(t0);

    report.epoch_cost = res.epoch_cost;
    report.best_cost_series = res.best_cost_series;
    report.solution = res.best_w;
    report.final_cost = res.best_cost;
    report.total_spins = res.total_spins;
    report.aux_vars = res.aux_vars;
    report.problem_kind = problem.kind;
    report.oracle_solution = problem.oracle;
    report.oracle_cost = problem.oracle_cost;
    report.has_oracle = true;
    report.relative_l2 = (res.best_w - problem.oracle).norm() /
                         std::max(1e-300, problem.oracle.norm());
    report.total_seconds = report.build_seconds + report.solve_seconds + report.oracle_seconds;
    return report;
}

ExperimentKind sweep_base_kind(const ExperimentConfig& config) {
    const ExperimentKind base = experiment_kind_from_name(config.sweep_base);
    if (base != ExperimentKind::stommel_fd && base != ExperimentKind::stommel_spectral &&
        base != ExperimentKind::nonlinear) {
        throw ConfigError("config: sweep base must be an iterative experiment kind");
    }
    return base;
}

ExperimentReport run_sweep(const ExperimentConfig& config) {
    ExperimentReport report;
    report.kind = experiment_kind_name(ExperimentKind::sweep);
    report.config_echo = config.echo;
    if (config.sweep_cells.empty()) {
        throw ConfigError("config: missing required key: sweep.cells");
    }
    const ExperimentKind base = sweep_base_kind(config);

    const auto run_cell = [&](std::size_t index) {
        const SweepCell& cell = config.sweep_cells[index];
        ExperimentConfig cell_config = config;
        cell_config.kind = base;
        cell_config.encoding.zoom_factor = cell.zoom_factor;
        cell_config.encoding.n_spin = cell.n_spin;
        cell_config.anneal.seed = derive_seed(config.anneal.seed, index);
        cell_config.echo["encoding"]["zoom_factor"] = cell.zoom_factor;
        cell_config.echo["encoding"]["n_spin"] = cell.n_spin;
        cell_config.echo["anneal"]["seed"] = cell_config.anneal.seed;
        cell_config.echo["experiment"] = experiment_kind_name(base);
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentReport child = run_iterative(cell_config, base);
        SweepCellResult result{cell.zoom_factor, cell.n_spin, child.final_cost,
                               child.relative_l2, seconds_since(t0)};
        return std::pair{std::move(child), result};
    };

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<ExperimentReport, SweepCellResult>> cells(config.sweep_cells.size());
    if (config.sweep_concurrent) {
        std::vector<std::future<std::pair<ExperimentReport, SweepCellResult>>> futures;
        futures.reserve(config.sweep_cells.size());
        for (std::size_t i = 0; i < config.sweep_cells.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run_cell, i));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) cells[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < config.sweep_cells.size(); ++i) cells[i] = run_cell(i);
    }
    report.solve_seconds = seconds_since(t0);

    double best = std::numeric_limits<double>::infinity();
    for (auto& [child, result] : cells) {
        char label[64];
        std::snprintf(label, sizeof(label), "cell_S%g_n%d", result.zoom_factor, result.n_spin);
        report.child_labels.push_back(label);
        report.sweep_cells.push_back(result);
        if (result.final_cost < best) {
            best = result.final_cost;
            report.solution = child.solution;
            report.final_cost = child.final_cost;
            report.oracle_solution = child.oracle_solution;
            report.oracle_cost = child.oracle_cost;
            report.relative_l2 = child.relative_l2;
            report.has_oracle = true;
            report.problem_kind = child.problem_kind;
        }
        report.children.push_back(std::move(child));
    }
    report.total_seconds = report.solve_seconds;
    return report;
}

}  // namespace

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::toy: return "toy";
        case ExperimentKind::stommel_fd: return "stommel-fd";
        case ExperimentKind::stommel_spectral: return "stommel-spectral";
        case ExperimentKind::nonlinear: return "nonlinear";
        case ExperimentKind::embed_demo: return "embed-demo";
        case ExperimentKind::sweep: return "sweep";
    }
    throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    for (ExperimentKind kind :
         {ExperimentKind::toy, ExperimentKind::stommel_fd, ExperimentKind::stommel_spectral,
          ExperimentKind::nonlinear, ExperimentKind::embed_demo, ExperimentKind::sweep}) {
        if (experiment_kind_name(kind) == name) return kind;
    }
    throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& kind_name) {
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
    ExperimentConfig config;
    config.kind = experiment_kind_from_name(kind_name);
    if (doc.contains("experiment")) {
        const std::string declared = doc["experiment"].get<std::string>();
        if (declared != kind_name) {
            throw ConfigError("config: declares experiment '" + declared + "' but '" + kind_name +
                              "' was requested");
        }
    }

    const json* problem = find_section(doc, "problem");
    const json* encoding = find_section(doc, "encoding");
    const json* anneal = find_section(doc, "anneal");
    const json* embedding = find_section(doc, "embedding");
    const json* sweep = find_section(doc, "sweep");

    const ExperimentKind problem_kind =
        config.kind == ExperimentKind::sweep
            ? experiment_kind_from_name(get_or<std::string>(sweep, "base", "stommel-fd"))
            : config.kind;
    if (config.kind == ExperimentKind::sweep) {
        config.sweep_base = experiment_kind_name(problem_kind);
    }

    switch (problem_kind) {
        case ExperimentKind::stommel_fd:
            config.stommel.n = require<int>(problem, "problem", "n");
            config.stommel.epsilon = require<double>(problem, "problem", "epsilon");
            break;
        case ExperimentKind::stommel_spectral:
            config.spectral.n_x = require<int>(problem, "problem", "n_x");
            config.spectral.epsilon = require<double>(problem, "problem", "epsilon");
            config.spectral.quadrature_nodes = get_or<int>(problem, "quadrature_nodes", 64);
            break;
        case ExperimentKind::nonlinear:
            config.nonlinear.n_basis = require<int>(problem, "problem", "n_basis");
            config.nonlinear.bc_penalty = get_or<double>(problem, "bc_penalty", 10.0);
            break;
        default: break;
    }

    config.encoding.zoom_factor = get_or<double>(encoding, "zoom_factor", 0.8);
    config.encoding.n_spin = get_or<int>(encoding, "n_spin", 3);
    config.encoding.epochs = get_or<int>(encoding, "epochs", 30);
    config.encoding.initial_center = get_or<double>(encoding, "initial_center", 0.0);
    config.encoding.initial_scale = get_or<double>(encoding, "initial_scale", 1.0);
    config.encoding.iterate = get_or<bool>(encoding, "iterate", true);

    config.anneal.schedule = get_or<std::string>(anneal, "schedule", "auto");
    config.anneal.steps = get_or<int>(anneal, "steps", 200);
    config.anneal.target_acceptance = get_or<double>(anneal, "target_acceptance", 0.5);
    config.anneal.t_final = get_or<double>(anneal, "t_final", 0.0);
    config.anneal.t_final_factor = get_or<double>(anneal, "t_final_factor", 1e-3);
    config.anneal.t0 = get_or<double>(anneal, "t0", 10.0);
    config.anneal.ratio = get_or<double>(anneal, "ratio", 0.95);
    config.anneal.a = get_or<double>(anneal, "a", 1.0);
    config.anneal.alpha = get_or<double>(anneal, "alpha", 1.0);
    config.anneal.reads = get_or<int>(anneal, "reads", 100);
    config.anneal.sweeps = get_or<int>(anneal, "sweeps", 10);
    config.anneal.polish = get_or<int>(anneal, "polish", 200);
    config.anneal.seed = get_or<std::uint64_t>(anneal, "seed", 0);
    config.anneal.threads = get_or<int>(anneal, "threads", 0);
    config.anneal.annealer = get_or<std::string>(anneal, "annealer", "sa");
    config.anneal.trace = get_or<bool>(anneal, "trace", false);
    if (config.anneal.annealer != "sa" && config.anneal.annealer != "exact") {
        throw ConfigError("config: anneal.annealer must be 'sa' or 'exact'");
    }
    schedule_from_config(config.anneal);  // validate the schedule name early

    config.embedding.enabled = get_or<bool>(embedding, "enabled", false);
    config.embedding.hardware =
        get_or<std::string>(embedding, "hardware", "degree-capped-demo");
    hardware_kind_from_name(config.embedding.hardware);  // validate early
    config.embedding.rows = get_or<int>(embedding, "rows", 4);
    config.embedding.cols = get_or<int>(embedding, "cols", 4);
    config.embedding.shore = get_or<int>(embedding, "shore", 4);
    config.embedding.n = get_or<int>(embedding, "n", 0);
    config.embedding.chain_strength = get_or<double>(embedding, "chain_strength", 0.0);
    config.embedding.retries = get_or<int>(embedding, "retries", 64);
    if (embedding && embedding->contains("edges")) {
        for (const auto& e : (*embedding)["edges"]) {
            if (!e.is_array() || e.size() != 2) {
                throw ConfigError("config: embedding.edges entries must be [i, j] pairs");
            }
            config.embedding.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }
    if (embedding && embedding->contains("penalties")) {
        for (const auto& p : (*embedding)["penalties"]) {
            config.embedding.penalties.push_back(p.get<double>());
        }
    }

    if (config.kind == ExperimentKind::sweep) {
        if (!sweep || !sweep->contains("cells")) {
            throw ConfigError("config: missing required key: sweep.cells");
        }
        for (const auto& cell : (*sweep)["cells"]) {
            SweepCell c;
            c.zoom_factor = cell.contains("zoom_factor") ? cell["zoom_factor"].get<double>()
                                                         : config.encoding.zoom_factor;
            c.n_spin = cell.contains("n_spin") ? cell["n_spin"].get<int>()
                                               : config.encoding.n_spin;
            config.sweep_cells.push_back(c);
        }
        config.sweep_concurrent = get_or<bool>(sweep, "concurrent", false);
    }

    config.output_dir = doc.contains("output") ? doc["output"].get<std::string>() : "out";

    // Resolved echo: every value the run will actually use.
    json echo;
    echo["experiment"] = kind_name;
    switch (problem_kind) {
        case ExperimentKind::stommel_fd:
            echo["problem"] = {{"n", config.stommel.n}, {"epsilon", config.stommel.epsilon}};
            break;
        case ExperimentKind::stommel_spectral:
            echo["problem"] = {{"n_x", config.spectral.n_x},
                               {"epsilon", config.spectral.epsilon},
                               {"quadrature_nodes", config.spectral.quadrature_nodes}};
            break;
        case ExperimentKind::nonlinear:
            echo["problem"] = {{"n_basis", config.nonlinear.n_basis},
                               {"bc_penalty", config.nonlinear.bc_penalty}};
            break;
        default: echo["problem"] = json::object(); break;
    }
    echo["encoding"] = {{"zoom_factor", config.encoding.zoom_factor},
                        {"n_spin", config.encoding.n_spin},
                        {"epochs", config.encoding.epochs},
                        {"initial_center", config.encoding.initial_center},
                        {"initial_scale", config.encoding.initial_scale},
                        {"iterate", config.encoding.iterate}};
    echo["anneal"] = {{"schedule", config.anneal.schedule},
                      {"steps", config.anneal.steps},
                      {"target_acceptance", config.anneal.target_acceptance},
                      {"t_final", config.anneal.t_final},
                      {"t_final_factor", config.anneal.t_final_factor},
                      {"t0", config.anneal.t0},
                      {"ratio", config.anneal.ratio},
                      {"a", config.anneal.a},
                      {"alpha", config.anneal.alpha},
                      {"reads", config.anneal.reads},
                      {"sweeps", config.anneal.sweeps},
                      {"polish", config.anneal.polish},
                      {"seed", config.anneal.seed},
                      {"threads", config.anneal.threads},
                      {"annealer", config.anneal.annealer},
                      {"trace", config.anneal.trace}};
    echo["embedding"] = {{"enabled", config.embedding.enabled},
                         {"hardware", config.embedding.hardware},
                         {"rows", config.embedding.rows},
                         {"cols", config.embedding.cols},
                         {"shore", config.embedding.shore},
                         {"n", config.embedding.n},
                         {"chain_strength", config.embedding.chain_strength},
                         {"retries", config.embedding.retries}};
    if (config.kind == ExperimentKind::sweep) {
        json cells = json::array();
        for (const SweepCell& c : config.sweep_cells) {
            cells.push_back({{"zoom_factor", c.zoom_factor}, {"n_spin", c.n_spin}});
        }
        echo["sweep"] = {{"base", config.sweep_base},
                         {"cells", cells},
                         {"concurrent", config.sweep_concurrent}};
    }
    echo["output"] = config.output_dir;
    config.echo = echo;
    return config;
}

AnnealerFn make_annealer(const ExperimentConfig& config, ExperimentReport* report) {
    const bool exact = config.anneal.annealer == "exact";
    const AnnealParams base_params = anneal_params_from_config(config.anneal);
    const bool want_trace = config.anneal.trace;

    AnnealerFn plain;
    if (exact) {
        plain = exact_annealer();
    } else {
        plain = [base_params, want_trace, report](const IsingModel& model,
                                                  const EpochContext& ctx) -> SpinVector {
            AnnealParams params = base_params;
            params.seed = ctx.seed;
            params.record_trace = want_trace;
            params.block_groups = ctx.spin_groups;
            params.descent_groups = pair_descent_groups(model, ctx.spin_groups);
            params.warm_start = ctx.warm_start;
            AnnealResult res = anneal(model, params);
            if (want_trace && report) report->trace = res.trace;
            return res.best_state;
        };
    }
    if (!config.embedding.enabled) return plain;

    // Route each epoch's model through embed -> anneal -> unembed. The
    // coupling graph is constant across epochs for a fixed problem, so the
    // embedding is found once and reused while the edge set matches.
    const HardwareGraph hardware = build_hardware(config.embedding);
    const EmbeddingConfig emb_config = config.embedding;
    auto cache = std::make_shared<std::pair<std::vector<std::pair<int, int>>, ChainEmbedding>>();
    auto cached = std::make_shared<bool>(false);

    return [plain, hardware, emb_config, cache, cached, report](
               const IsingModel& model, const EpochContext& ctx) -> SpinVector {
        const std::vector<std::pair<int, int>> edges = coupling_edges(model);
        if (!*cached || cache->first != edges) {
            auto emb = find_embedding(model.n_spins(), edges, hardware, ctx.seed ^ 0xe3bedd,
                                      emb_config.retries);
            if (!emb) {
                throw EmbeddingError("no embedding of a " + std::to_string(model.n_spins()) +
                                     "-spin model into '" + emb_config.hardware + "' hardware");
            }
            *cache = {edges, std::move(*emb)};
            *cached = true;
        }
        const double penalty = emb_config.chain_strength > 0.0 ? emb_config.chain_strength
                                                               : default_chain_strength(model);
        EmbeddedModel embedded = embed_model(model, cache->second, hardware, penalty);
        if (report) {
            report->embedding_enabled = true;
            report->physical_qubits = hardware.n_qubits;
            for (const auto& chain : cache->second.chains) {
                report->longest_chain =
                    std::max(report->longest_chain, static_cast<int>(chain.size()));
            }
        }
        // Translate each variable's spin block to the union of its chains so
        // the physical anneal keeps joint block moves (skipped if too large).
        EpochContext physical_ctx{ctx.seed, ctx.epoch, {}, {}};
        if (!ctx.warm_start.empty()) {
            physical_ctx.warm_start.assign(static_cast<std::size_t>(hardware.n_qubits), 1);
            for (std::size_t v = 0; v < ctx.warm_start.size(); ++v) {
                for (int q : cache->second.chains[v]) {
                    physical_ctx.warm_start[static_cast<std::size_t>(q)] = ctx.warm_start[v];
                }
            }
        }
        for (const auto& group : ctx.spin_groups) {
            std::vector<int> qubits;
            for (int spin : group) {
                const auto& chain = cache->second.chains[static_cast<std::size_t>(spin)];
                qubits.insert(qubits.end(), chain.begin(), chain.end());
            }
            if (qubits.size() <= 10) physical_ctx.spin_groups.push_back(std::move(qubits));
        }
        SpinVector physical = plain(embedded.physical, physical_ctx);
        return unembed(physical, cache->second);
    };
}

ExperimentReport run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    switch (config.kind) {
        case ExperimentKind::toy: report = run_toy(config); break;
        case ExperimentKind::embed_demo: report = run_embed_demo(config); break;
        case ExperimentKind::sweep: report = run_sweep(config); break;
        default: report = run_iterative(config, config.kind); break;
    }
    report.total_seconds = seconds_since(t0);
    return report;
}

}  // namespace annealpde
