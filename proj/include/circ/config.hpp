#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "circ/coupling.hpp"
#include "circ/solver.hpp"
#include "circ/types.hpp"

namespace circ {

enum class RunMode { monolithic, coupled };
enum class ChamberKind { elastance, nonlinear };
enum class ReportFormat { text, json };

/// Everything a run needs, assembled from one config document plus optional
/// command-line overrides.
struct RunConfig {
  ModelParams model;
  SolverConfig solver;
  CouplingConfig coupling;
  NonlinearChamberParams ext_chamber;
  CirculationState initial;

  RunMode mode = RunMode::monolithic;
  ChamberKind chamber = ChamberKind::elastance;
  int beats = 20;
  int analyze_beats = 1;
  std::string out_dir = ".";
  ReportFormat report_format = ReportFormat::text;
};

/// Parse the line-oriented key=value format ('#' comments, dotted section
/// keys, fixed units mmHg/mL/s). Unknown keys, duplicates, non-numeric
/// values, missing required keys and invariant violations are all collected
/// and reported together in the ConfigError message, with line numbers.
RunConfig parse_config(std::string_view text);

/// Read and parse a config file; I/O failures surface as ConfigError.
RunConfig load_config_file(const std::string& path);

/// The shipped "physiological-default" document. Calibrated for textbook
/// ranges (systemic arterial pressure ≈ 80–120 mmHg, stroke volume
/// ≈ 60–80 mL); not fitted to any published parameter table.
std::string_view default_config_text();

/// Instantiate the external chamber selected by the configuration.
std::unique_ptr<ExternalChamber> make_external_chamber(const RunConfig& cfg);

}  // namespace circ
