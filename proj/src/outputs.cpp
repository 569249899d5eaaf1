#include "annealpde/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace annealpde {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

std::string hex_color(double t) {
    // t in [-1, 1]: white at 0, blue toward -1, red toward +1.
    t = std::clamp(t, -1.0, 1.0);
    int r = 255, g = 255, b = 255;
    if (t < 0) {
        const double a = -t;
        r = static_cast<int>(std::lround(255 + a * (33 - 255)));
        g = static_cast<int>(std::lround(255 + a * (68 - 255)));
        b = static_cast<int>(std::lround(255 + a * (190 - 255)));
    } else if (t > 0) {
        r = static_cast<int>(std::lround(255 + t * (190 - 255)));
        g = static_cast<int>(std::lround(255 + t * (32 - 255)));
        b = static_cast<int>(std::lround(255 + t * (38 - 255)));
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string heatmap_svg(const Field& field) {
    const int rows = field.rows(), cols = field.cols();
    const double m = field.values.cwiseAbs().maxCoeff();
    const int cell = std::clamp(480 / std::max(rows, cols), 4, 40);
    const int margin = 10, footer = 34;
    const int width = cols * cell + 2 * margin;
    const int height = rows * cell + 2 * margin + footer;

    int min_r = 0, min_c = 0, max_r = 0, max_c = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (field.values(r, c) < field.values(min_r, min_c)) min_r = r, min_c = c;
            if (field.values(r, c) > field.values(max_r, max_c)) max_r = r, max_c = c;
        }
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    for (int r = 0; r < rows; ++r) {
        // row 0 is y = 0, drawn at the bottom so the image matches the domain
        const int y = margin + (rows - 1 - r) * cell;
        for (int c = 0; c < cols; ++c) {
            const double t = m > 0.0 ? field.values(r, c) / m : 0.0;
            svg << "<rect x=\"" << margin + c * cell << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << hex_color(t) << "\"/>\n";
        }
    }
    const int ty = rows * cell + 2 * margin + 14;
    svg << "<text x=\"" << margin << "\" y=\"" << ty
        << "\" font-family=\"monospace\" font-size=\"12\">min=" << short_num(field.values(min_r, min_c))
        << " at (x=" << min_c << ",y=" << min_r << ")</text>\n";
    svg << "<text x=\"" << margin << "\" y=\"" << ty + 15
        << "\" font-family=\"monospace\" font-size=\"12\">max=" << short_num(field.values(max_r, max_c))
        << " at (x=" << max_c << ",y=" << max_r << ")</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string lineplot_svg(const Field& field) {
    const int n = field.cols();
    const double lo = field.values.minCoeff();
    const double hi = field.values.maxCoeff();
    const double span = hi - lo;
    const int width = 480, height = 260, margin = 24, footer = 34;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height + footer << "\" viewBox=\"0 0 " << width << ' ' << height + footer << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height + footer
        << "\" fill=\"white\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
    for (int k = 0; k < n; ++k) {
        const double fx = n > 1 ? static_cast<double>(k) / (n - 1) : 0.5;
        const double fy = span > 0.0 ? (field.values(0, k) - lo) / span : 0.5;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", margin + fx * (width - 2 * margin),
                      height - margin - fy * (height - 2 * margin));
        svg << buf;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"" << height + 14
        << "\" font-family=\"monospace\" font-size=\"12\">min=" << short_num(lo)
        << " max=" << short_num(hi) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_penalty_sweep_csv(std::ostream& os, const std::vector<PenaltyRow>& rows) {
    os << "penalty,chain_consistent,recovers_logical_ground_state,physical_energy\n";
    for (const PenaltyRow& row : rows) {
        os << format_double(row.penalty) << ',' << (row.consistent ? 1 : 0) << ','
           << (row.recovered ? 1 : 0) << ',' << format_double(row.physical_energy) << '\n';
    }
}

}  // namespace

void write_convergence_csv(std::ostream& os, const ExperimentReport& report) {
    os << "epoch,cost,best_cost\n";
    for (std::size_t e = 0; e < report.epoch_cost.size(); ++e) {
        os << e << ',' << format_double(report.epoch_cost[e]) << ','
           << format_double(report.best_cost_series[e]) << '\n';
    }
}

void write_solution_csv(std::ostream& os, const ExperimentReport& report) {
    os << "# experiment=" << report.kind << '\n';
    os << "# length=" << report.solution.size() << '\n';
    if (report.problem_kind) {
        switch (*report.problem_kind) {
            case ProblemKind::stommel_fd:
                os << "# layout=grid n="
                   << static_cast<int>(std::lround(std::sqrt(double(report.solution.size()))))
                   << " order=row-major\n";
                break;
            case ProblemKind::stommel_spectral:
                os << "# layout=sine-coefficients n_x=" << report.solution.size() / 2
                   << " m=1,2\n";
                break;
            case ProblemKind::nonlinear_ode:
                os << "# layout=monomial-coefficients n_basis=" << report.solution.size() << '\n';
                break;
        }
    } else {
        os << "# layout=spins\n";
    }
    os << "# final_cost=" << format_double(report.final_cost) << '\n';
    os << "value\n";
    for (Eigen::Index i = 0; i < report.solution.size(); ++i) {
        os << format_double(report.solution[i]) << '\n';
    }
}

void write_report_txt(std::ostream& os, const ExperimentReport& report) {
    os << "experiment = " << report.kind << '\n';
    os << "config = " << report.config_echo.dump() << '\n';
    os << "epochs = " << report.epoch_cost.size() << '\n';
    os << "total_spins = " << report.total_spins << '\n';
    os << "aux_vars = " << report.aux_vars << '\n';
    os << "final_cost = " << format_double(report.final_cost) << '\n';
    if (report.has_oracle) {
        os << "oracle_cost = " << format_double(report.oracle_cost) << '\n';
        os << "relative_l2_error = " << format_double(report.relative_l2) << '\n';
    }
    if (!report.best_state.empty()) {
        os << "best_energy = " << format_double(report.best_energy) << '\n';
        os << "best_state =";
        for (std::int8_t s : report.best_state) os << ' ' << static_cast<int>(s);
        os << '\n';
    }
    os << "embedding = " << (report.embedding_enabled ? "enabled" : "disabled") << '\n';
    if (report.embedding_enabled) {
        os << "physical_qubits = " << report.physical_qubits << '\n';
        os << "longest_chain = " << report.longest_chain << '\n';
    }
    if (!report.penalty_sweep.empty()) {
        os << "penalty_sweep = ";
        for (const PenaltyRow& row : report.penalty_sweep) {
            os << format_double(row.penalty) << (row.recovered ? ":ok " : ":broken ");
        }
        os << '\n';
    }
    if (!report.sweep_cells.empty()) {
        for (const SweepCellResult& cell : report.sweep_cells) {
            os << "cell S=" << format_double(cell.zoom_factor) << " n_spin=" << cell.n_spin
               << " final_cost=" << format_double(cell.final_cost)
               << " relative_l2=" << format_double(cell.relative_l2) << '\n';
        }
    }
    os << "build_seconds = " << format_double(report.build_seconds) << '\n';
    os << "solve_seconds = " << format_double(report.solve_seconds) << '\n';
    os << "oracle_seconds = " << format_double(report.oracle_seconds) << '\n';
    os << "total_seconds = " << format_double(report.total_seconds) << '\n';
}

std::string render_field_svg(const Field& field) {
    if (field.rows() <= 0 || field.cols() <= 0) throw DimensionError("render_field_svg: empty field");
    return field.rows() > 1 ? heatmap_svg(field) : lineplot_svg(field);
}

void emit_outputs(const ExperimentReport& report, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    const fs::path base(dir);

    {
        auto os = open_out(base / "convergence.csv");
        write_convergence_csv(os, report);
    }
    {
        auto os = open_out(base / "solution.csv");
        write_solution_csv(os, report);
    }
    {
        auto os = open_out(base / "report.txt");
        write_report_txt(os, report);
    }
    {
        Field field;
        if (report.problem_kind) {
            field = field_from_solution(*report.problem_kind, report.solution);
        } else {
            field.values.resize(1, report.solution.size());
            for (Eigen::Index i = 0; i < report.solution.size(); ++i) {
                field.values(0, i) = report.solution[i];
            }
        }
        auto os = open_out(base / "field.svg");
        os << render_field_svg(field);
    }
    if (!report.trace.empty()) {
        auto os = open_out(base / "trace.csv");
        write_trace_csv(os, report.trace);
    }
    if (!report.penalty_sweep.empty()) {
        auto os = open_out(base / "penalty_sweep.csv");
        write_penalty_sweep_csv(os, report.penalty_sweep);
    }
    if (report.hardware) {
        auto os = open_out(base / "hardware.txt");
        write_hardware_graph(os, *report.hardware);
    }
    if (report.chain_embedding) {
        auto os = open_out(base / "embedding.txt");
        write_embedding(os, *report.chain_embedding);
    }
    if (!report.sweep_cells.empty()) {
        auto os = open_out(base / "sweep.csv");
        os << "zoom_factor,n_spin,final_cost,relative_l2,seconds\n";
        for (const SweepCellResult& cell : report.sweep_cells) {
            os << format_double(cell.zoom_factor) << ',' << cell.n_spin << ','
               << format_double(cell.final_cost) << ',' << format_double(cell.relative_l2) << ','
               << format_double(cell.seconds) << '\n';
        }
    }
    for (std::size_t i = 0; i < report.children.size(); ++i) {
        emit_outputs(report.children[i], (base / report.child_labels[i]).string());
    }
}

}  // namespace annealpde
