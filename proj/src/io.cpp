#include "circ/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "circ/errors.hpp"

namespace circ {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const char* pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> kColumns = {
      "t",
      // c1
      "v_la", "v_lv", "v_ra", "v_rv", "p_ar_sys", "p_ven_sys", "p_ar_pul", "p_ven_pul",
      "q_ar_sys", "q_ven_sys", "q_ar_pul", "q_ven_pul",
      // c2
      "p_lv", "p_la", "p_rv", "p_ra", "q_mv", "q_av", "q_tv", "q_pv",
      // stored energies
      "e_la", "e_lv", "e_ra", "e_rv", "e_ar_sys", "e_ven_sys", "e_ar_pul", "e_ven_pul",
      "k_ar_sys", "k_ven_sys", "k_ar_pul", "k_ven_pul", "m_total",
      // powers
      "pi_act_la", "pi_act_lv", "pi_act_ra", "pi_act_rv", "pi_act_total",
      "pi_ex_la", "pi_ex_lv", "pi_ex_ra", "pi_ex_rv", "pi_ex_total",
      "pi_diss_mv", "pi_diss_av", "pi_diss_tv", "pi_diss_pv",
      "pi_diss_ar_sys", "pi_diss_ven_sys", "pi_diss_ar_pul", "pi_diss_ven_pul",
      "pi_diss_total"};
  return kColumns;
}

void write_timeseries(const Trajectory& traj, const ModelParams& params,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);

  const auto& cols = timeseries_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';

  for (const Sample& s : traj.samples) {
    const EnergySnapshot e = energy_snapshot(s.t, s.c1, s.c2, params, traj.coupled);
    const double row[] = {
        s.t,
        s.c1.v_la, s.c1.v_lv, s.c1.v_ra, s.c1.v_rv,
        s.c1.p_ar_sys, s.c1.p_ven_sys, s.c1.p_ar_pul, s.c1.p_ven_pul,
        s.c1.q_ar_sys, s.c1.q_ven_sys, s.c1.q_ar_pul, s.c1.q_ven_pul,
        s.c2.p_lv, s.c2.p_la, s.c2.p_rv, s.c2.p_ra,
        s.c2.q_mv, s.c2.q_av, s.c2.q_tv, s.c2.q_pv,
        e.storage.e_la, e.storage.e_lv, e.storage.e_ra, e.storage.e_rv,
        e.storage.e_ar_sys, e.storage.e_ven_sys, e.storage.e_ar_pul, e.storage.e_ven_pul,
        e.storage.k_ar_sys, e.storage.k_ven_sys, e.storage.k_ar_pul, e.storage.k_ven_pul,
        e.storage.total,
        e.active.la, e.active.lv, e.active.ra, e.active.rv, e.active.total,
        e.external.la, e.external.lv, e.external.ra, e.external.rv, e.external.total,
        e.dissipated.mv, e.dissipated.av, e.dissipated.tv, e.dissipated.pv,
        e.dissipated.ar_sys, e.dissipated.ven_sys, e.dissipated.ar_pul, e.dissipated.ven_pul,
        e.dissipated.total};
    static_assert(sizeof(row) / sizeof(row[0]) == 53);
    for (std::size_t i = 0; i < 53; ++i) {
      if (i) out << ',';
      out << fmt(row[i]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

std::string render_report_text(const WorkSummary& w) {
  std::ostringstream os;
  os << "circulation energy report\n";
  os << "=========================\n";
  os << "mode:              " << (w.lv_boundary_mode ? "coupled (LV as boundary power)" : "monolithic")
     << "\n";
  os << "window:            t = " << fmt(w.t_begin) << " .. " << fmt(w.t_end) << " s (" << w.beats
     << (w.beats == 1 ? " beat)\n" : " beats)\n");
  if (w.degenerate) {
    os << "regime:            passive (no active work)\n";
  } else if (w.periodic) {
    os << "regime:            periodic from beat " << w.periodic_beat_index << " (tol "
       << fmt(w.periodicity_tol) << ", residual " << fmt(w.periodicity_residual) << ")\n";
  } else {
    os << "regime:            NOT periodic at tol " << fmt(w.periodicity_tol) << " (residual "
       << fmt(w.periodicity_residual) << ")\n";
  }
  os << "\nwork over window [mmHg·mL | J]\n";
  auto work_line = [&](const char* name, double v) {
    os << "  " << name << fmt(v) << " | " << fmt(v * kJoulePerMmhgMl) << "\n";
  };
  work_line("W_act        = ", w.w_act);
  work_line("  LA         = ", w.w_act_la);
  work_line("  LV         = ", w.w_act_lv);
  work_line("  RA         = ", w.w_act_ra);
  work_line("  RV         = ", w.w_act_rv);
  work_line("W_diss       = ", w.w_diss);
  work_line("W_ex         = ", w.w_ex);

  os << "\nchecks\n";
  if (w.degenerate) {
    os << "  periodic work balance: trivially satisfied (no active work)\n";
  } else if (w.periodic) {
    os << "  periodic work balance |W_act+W_diss|/W_act = " << fmt(w.work_balance_rel) << "  ["
       << pass_fail(w.work_balance_rel <= 0.01) << " <= 0.01]\n";
  } else {
    os << "  periodic work balance: n/a (non-periodic window)\n";
  }
  os << "  energy balance residual (normalized) = " << fmt(w.balance_residual_norm) << "\n";

  os << "\npower\n";
  os << "  mean active power  = " << fmt(w.mean_active_power_w) << " W\n";
  os << "  daily work         = " << fmt(w.daily_work_kj) << " kJ\n";

  if (w.estimates_valid) {
    os << "\nclinical estimates (signed relative error vs model)\n";
    os << "  arterial pressure: mean " << fmt(w.p_ar_sys_mean) << ", max " << fmt(w.p_ar_sys_max)
       << ", min " << fmt(w.p_ar_sys_min) << " mmHg\n";
    os << "  stroke volume:     " << fmt(w.stroke_volume) << " mL\n";
    os << "  mean-pressure estimate  = " << fmt(w.est_mean_pressure_daily_kj)
       << " kJ/day  (vs total " << fmt(w.err_mean_vs_total) << ", vs LV " << fmt(w.err_mean_vs_lv)
       << ")\n";
    os << "  third-rule estimate     = " << fmt(w.est_third_rule_daily_kj)
       << " kJ/day  (vs total " << fmt(w.err_third_vs_total) << ", vs LV "
       << fmt(w.err_third_vs_lv) << ")\n";
  }
  return os.str();
}

std::string render_report_json(const WorkSummary& w) {
  nlohmann::json j;
  j["mode"] = w.lv_boundary_mode ? "coupled" : "monolithic";
  j["window"] = {{"t_begin", w.t_begin}, {"t_end", w.t_end}, {"beats", w.beats}};
  j["periodic"] = {{"detected", w.periodic},
                   {"beat_index", w.periodic_beat_index},
                   {"residual", w.periodicity_residual},
                   {"tol", w.periodicity_tol}};
  j["work_mmhg_ml"] = {{"act", w.w_act},
                       {"act_la", w.w_act_la},
                       {"act_lv", w.w_act_lv},
                       {"act_ra", w.w_act_ra},
                       {"act_rv", w.w_act_rv},
                       {"diss", w.w_diss},
                       {"ex", w.w_ex}};
  j["work_j"] = {{"act", w.w_act * kJoulePerMmhgMl}, {"diss", w.w_diss * kJoulePerMmhgMl}};
  j["checks"] = {{"work_balance_rel", w.work_balance_rel},
                 {"work_balance_pass", w.degenerate || (w.periodic && w.work_balance_rel <= 0.01)},
                 {"balance_residual_norm", w.balance_residual_norm}};
  j["power"] = {{"mean_active_w", w.mean_active_power_w}, {"daily_kj", w.daily_work_kj}};
  j["degenerate"] = w.degenerate;
  if (w.estimates_valid) {
    j["clinical"] = {{"p_ar_sys_mean", w.p_ar_sys_mean},
                     {"p_ar_sys_max", w.p_ar_sys_max},
                     {"p_ar_sys_min", w.p_ar_sys_min},
                     {"stroke_volume", w.stroke_volume},
                     {"mean_pressure_daily_kj", w.est_mean_pressure_daily_kj},
                     {"third_rule_daily_kj", w.est_third_rule_daily_kj},
                     {"err_mean_vs_total", w.err_mean_vs_total},
                     {"err_mean_vs_lv", w.err_mean_vs_lv},
                     {"err_third_vs_total", w.err_third_vs_total},
                     {"err_third_vs_lv", w.err_third_vs_lv}};
  }
  return j.dump(2) + "\n";
}

void write_report(const WorkSummary& summary, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << (format == ReportFormat::json ? render_report_json(summary)
                                       : render_report_text(summary));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace circ
