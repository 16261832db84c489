#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "circ/config.hpp"
#include "circ/energy.hpp"
#include "circ/errors.hpp"
#include "circ/io.hpp"
#include "circ/verify.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  int beats = -1;
  double dt = 0;
  std::string out_dir;
  std::string format;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "config file path")->required();
  sub->add_option("--beats", flags.beats, "override run.beats");
  sub->add_option("--dt", flags.dt, "override solver.dt [s]");
  sub->add_option("--out", flags.out_dir, "override run.out_dir");
  sub->add_option("--format", flags.format, "override run.report_format (text|json)")
      ->check(CLI::IsMember({"text", "json"}));
}

circ::RunConfig load(const CommonFlags& flags) {
  circ::RunConfig cfg = circ::load_config_file(flags.config_path);
  if (flags.beats > 0) {
    cfg.beats = flags.beats;
    cfg.analyze_beats = std::min(cfg.analyze_beats, cfg.beats);
  }
  if (flags.dt > 0) cfg.solver.dt = flags.dt;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.format.empty()) {
    cfg.report_format =
        flags.format == "json" ? circ::ReportFormat::json : circ::ReportFormat::text;
  }
  return cfg;
}

struct RunResult {
  circ::Trajectory traj;
  circ::WorkSummary summary;
  double max_coupling_residual = 0;
};

RunResult run(const circ::RunConfig& cfg) {
  RunResult out;
  if (cfg.mode == circ::RunMode::coupled) {
    auto chamber = circ::make_external_chamber(cfg);
    auto coupled =
        circ::simulate_coupled(cfg.model, cfg.initial, *chamber, cfg.beats, cfg.solver,
                               cfg.coupling);
    out.traj = std::move(coupled.traj);
    out.max_coupling_residual = coupled.max_abs_residual;
  } else {
    out.traj = circ::simulate(cfg.model, cfg.initial, cfg.beats, cfg.solver);
  }
  out.summary = circ::analyze(out.traj, cfg.model,
                              {cfg.analyze_beats, cfg.solver.periodicity_tol});
  return out;
}

std::string report_path(const circ::RunConfig& cfg) {
  return cfg.out_dir + (cfg.report_format == circ::ReportFormat::json ? "/report.json"
                                                                      : "/report.txt");
}

int write_outputs(const circ::RunConfig& cfg, const RunResult& result) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string csv = cfg.out_dir + "/timeseries.csv";
  circ::write_timeseries(result.traj, cfg.model, csv);
  circ::write_report(result.summary, cfg.report_format, report_path(cfg));
  std::cout << "wrote " << csv << "\n";
  std::cout << "wrote " << report_path(cfg) << "\n";
  return circ::kExitOk;
}

int cmd_simulate(circ::RunConfig cfg) {
  cfg.mode = circ::RunMode::monolithic;
  const RunResult result = run(cfg);
  std::cout << "simulated " << cfg.beats << " beats, "
            << (result.summary.periodic ? "periodic" : "not periodic") << ", daily work "
            << result.summary.daily_work_kj << " kJ\n";
  return write_outputs(cfg, result);
}

int cmd_couple(circ::RunConfig cfg, const std::string& chamber) {
  cfg.mode = circ::RunMode::coupled;
  if (!chamber.empty()) {
    cfg.chamber = chamber == "nonlinear" ? circ::ChamberKind::nonlinear
                                         : circ::ChamberKind::elastance;
  }
  const RunResult result = run(cfg);
  std::cout << "coupled " << cfg.beats << " beats ("
            << (cfg.chamber == circ::ChamberKind::nonlinear ? "nonlinear" : "elastance")
            << " chamber), max |constraint residual| " << result.max_coupling_residual
            << " mL\n";
  return write_outputs(cfg, result);
}

int cmd_energy_report(const circ::RunConfig& cfg) {
  const RunResult result = run(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  circ::write_report(result.summary, cfg.report_format, report_path(cfg));
  std::cout << circ::render_report_text(result.summary);
  std::cout << "wrote " << report_path(cfg) << "\n";
  return circ::kExitOk;
}

int cmd_verify(const circ::RunConfig& cfg) {
  bool all_pass = true;
  for (const circ::AuditResult& a : circ::run_audits(cfg)) {
    std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name;
    if (!a.detail.empty()) std::cout << " (" << a.detail << ")";
    std::cout << "\n";
    all_pass = all_pass && a.pass;
  }
  return all_pass ? circ::kExitOk : circ::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop 0D circulation simulator with an energy ledger"};
  app.require_subcommand(1);

  CommonFlags sim_flags, couple_flags, report_flags, verify_flags;
  std::string couple_chamber;

  CLI::App* sim = app.add_subcommand("simulate", "run the monolithic model");
  add_common(sim, sim_flags);
  CLI::App* couple =
      app.add_subcommand("couple", "run with the LV replaced by an external chamber");
  add_common(couple, couple_flags);
  couple->add_option("--chamber", couple_chamber, "external chamber (elastance|nonlinear)")
      ->check(CLI::IsMember({"elastance", "nonlinear"}));
  CLI::App* report = app.add_subcommand("energy-report", "run and write the energy report");
  add_common(report, report_flags);
  CLI::App* verify = app.add_subcommand("verify", "run the invariant/audit suite");
  verify->add_option("--config", verify_flags.config_path, "config file path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(load(sim_flags));
    if (couple->parsed()) return cmd_couple(load(couple_flags), couple_chamber);
    if (report->parsed()) return cmd_energy_report(load(report_flags));
    if (verify->parsed()) return cmd_verify(load(verify_flags));
  } catch (const circ::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return circ::kExitConfig;
  } catch (const circ::CouplingError& e) {
    std::cerr << "coupling error: " << e.what() << "\n";
    return circ::kExitCoupling;
  } catch (const circ::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return circ::kExitIntegration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return circ::kExitFailure;
  }
  return circ::kExitFailure;
}
