#pragma once

#include <iosfwd>
#include <string>

#include "annealpde/experiment.hpp"
#include "annealpde/problems.hpp"

namespace annealpde {

/// Writes the report's file set into `dir` (created if needed):
/// convergence.csv, solution.csv, report.txt, field.svg, plus trace.csv,
/// penalty_sweep.csv / hardware.txt / embedding.txt and per-cell
/// subdirectories where the experiment produced them. Output is byte-stable
/// for identical reports.
void emit_outputs(const ExperimentReport& report, const std::string& dir);

void write_convergence_csv(std::ostream& os, const ExperimentReport& report);
void write_solution_csv(std::ostream& os, const ExperimentReport& report);
void write_report_txt(std::ostream& os, const ExperimentReport& report);

/// Heatmap for 2-D fields (diverging palette centered on zero, min/max
/// annotations), line plot for 1-D fields. A constant field degenerates to a
/// single color without error.
std::string render_field_svg(const Field& field);

}  // namespace annealpde
