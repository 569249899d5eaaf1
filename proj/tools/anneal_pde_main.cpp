#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "annealpde/experiment.hpp"
#include "annealpde/outputs.hpp"

using namespace annealpde;

namespace {

int run_cli(int argc, char** argv) {
    CLI::App app{
        "anneal-pde: PDE/ODE least-squares costs as Ising problems, solved by "
        "simulated annealing with zoom iteration and optional hardware-graph embedding"};
    app.get_formatter()->column_width(34);

    std::string kind_name, config_path, out_dir, embed_kind, dump_model, dump_poly;
    std::uint64_t seed = 0;
    int reads = 0;
    bool no_iterate = false;

    app.add_option("experiment", kind_name,
                   "toy | stommel-fd | stommel-spectral | nonlinear | embed-demo | sweep")
        ->required();
    app.add_option("--config", config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides config)");
    auto* reads_opt =
        app.add_option("--reads", reads, "independent anneal reads (overrides config)");
    app.add_option("--embed", embed_kind,
                   "enable embedding on this hardware kind "
                   "(complete | grid | degree-capped-demo | chimera | custom)");
    app.add_flag("--no-iterate", no_iterate, "single shot: no zoom iteration (epochs = 1)");
    app.add_option("--dump-model", dump_model, "write the epoch-0 Ising model as text");
    app.add_option("--dump-poly", dump_poly, "write the epoch-0 spin polynomial as text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    std::ifstream is(config_path);
    if (!is) throw IoError("cannot open config " + config_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + config_path + " is not valid JSON: " + e.what());
    }

    ExperimentConfig config = parse_experiment_config(doc, kind_name);
    if (*seed_opt) {
        config.anneal.seed = seed;
        config.echo["anneal"]["seed"] = seed;
    }
    if (*reads_opt) {
        if (reads < 1) throw ConfigError("config: --reads must be >= 1");
        config.anneal.reads = reads;
        config.echo["anneal"]["reads"] = reads;
    }
    if (!embed_kind.empty()) {
        config.embedding.enabled = true;
        config.embedding.hardware = embed_kind;
        config.echo["embedding"]["enabled"] = true;
        config.echo["embedding"]["hardware"] = embed_kind;
    }
    if (no_iterate) {
        config.encoding.iterate = false;
        config.echo["encoding"]["iterate"] = false;
    }
    if (!out_dir.empty()) {
        config.output_dir = out_dir;
        config.echo["output"] = out_dir;
    }
    config.dump_model_path = dump_model;
    config.dump_poly_path = dump_poly;

    // Re-validate the embedding hardware name early so typos fail fast.
    ExperimentReport report = run(config);
    emit_outputs(report, config.output_dir);

    std::cout << "experiment=" << report.kind << " final_cost=" << format_double(report.final_cost);
    if (report.has_oracle) {
        std::cout << " oracle_cost=" << format_double(report.oracle_cost)
                  << " relative_l2=" << format_double(report.relative_l2);
    }
    std::cout << " seconds=" << format_double(report.total_seconds) << " out=" << config.output_dir
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ConsistencyError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const CapacityError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const EmbeddingError& e) {
        std::cerr << "embedding error: " << e.what() << '\n';
        return 4;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
