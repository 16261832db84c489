#pragma once

#include <string>
#include <vector>

#include "circ/config.hpp"
#include "circ/energy.hpp"
#include "circ/solver.hpp"

namespace circ {

/// Exact header names of the time-series file, in column order. The set and
/// order are a compatibility contract (documented in docs/formats.md).
const std::vector<std::string>& timeseries_columns();

/// Comma-separated time series: t, the 12 differential components, the 8
/// algebraic components, and every energy/power subterm. %.12g formatting,
/// LF line endings. I/O failures surface as Error with the path.
void write_timeseries(const Trajectory& traj, const ModelParams& params, const std::string& path);

std::string render_report_text(const WorkSummary& summary);
std::string render_report_json(const WorkSummary& summary);

void write_report(const WorkSummary& summary, ReportFormat format, const std::string& path);

}  // namespace circ
