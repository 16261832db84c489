#pragma once

#include <cstddef>
#include <vector>

#include "circ/solver.hpp"
#include "circ/types.hpp"

namespace circ {

/// Stored mechanical energy [mmHg·mL]: ½E_pass(V−V0)² per chamber,
/// ½C·p² and ½L·Q² per vascular compartment.
struct StorageEnergies {
  double e_la = 0, e_lv = 0, e_ra = 0, e_rv = 0;
  double e_ar_sys = 0, e_ven_sys = 0, e_ar_pul = 0, e_ven_pul = 0;
  double k_ar_sys = 0, k_ven_sys = 0, k_ar_pul = 0, k_ven_pul = 0;
  double total = 0;
};

/// Per-chamber powers [mmHg·mL/s] and their sum.
struct ChamberPowers {
  double la = 0, lv = 0, ra = 0, rv = 0;
  double total = 0;
};

/// Dissipation [mmHg·mL/s]; every term is nonpositive.
struct DissipatedPowers {
  double mv = 0, av = 0, tv = 0, pv = 0;
  double ar_sys = 0, ven_sys = 0, ar_pul = 0, ven_pul = 0;
  double total = 0;
};

/// Instantaneous ledger entry. In lv_boundary_mode (coupled runs) the LV
/// active-power slot carries the boundary power p_lv·dV_lv/dt, the LV
/// external-power slot is zero and the LV elastic storage is excluded
/// (the external chamber's internal energy is opaque to the 0D ledger).
struct EnergySnapshot {
  double t = 0;
  StorageEnergies storage;
  ChamberPowers active;
  ChamberPowers external;
  DissipatedPowers dissipated;
  bool lv_boundary_mode = false;
};

StorageEnergies mechanical_energy(double t, const CirculationState& c1, const ModelParams& params);

/// Π_i = −E_i^act(t)·(V_i − V0_i)·dV_i/dt; dc1dt must come from the model
/// right-hand side at (t, c1).
ChamberPowers active_power(double t, const CirculationState& c1, const CirculationState& dc1dt,
                           const ModelParams& params);

/// Π_i = −p_ex(t)·dV_i/dt.
ChamberPowers external_power(double t, const CirculationState& c1, const CirculationState& dc1dt,
                             const ModelParams& params);

/// Valve terms −Δp·Q and compartment terms −R·Q².
DissipatedPowers dissipated_power(double t, const CirculationState& c1, const DerivedState& c2,
                                  const ModelParams& params);

/// Full ledger entry at one instant; the state derivative is evaluated from
/// the right-hand side, not from trajectory differences.
EnergySnapshot energy_snapshot(double t, const CirculationState& c1, const DerivedState& c2,
                               const ModelParams& params, bool lv_boundary_mode = false);

/// Residual of the power balance dM/dt = Π_act + Π_diss + Π_ex accumulated
/// by trapezoidal quadrature over a sample range.
struct BalanceResidual {
  std::vector<double> t;
  std::vector<double> residual;   ///< M(t) − M(t0) − ∫(Π_act+Π_diss+Π_ex)
  double max_abs = 0;
  double diss_integral_abs = 0;   ///< ∫|Π_diss|
  double normalized = 0;          ///< max_abs / ∫|Π_diss|
};

inline constexpr std::size_t kNpos = static_cast<std::size_t>(-1);

BalanceResidual balance_residual(const Trajectory& traj, const ModelParams& params,
                                 std::size_t i_begin = 0, std::size_t i_end = kNpos);

/// Work terms over an integer number of beats plus derived report values.
struct WorkSummary {
  double t_begin = 0, t_end = 0;
  int beats = 0;

  double w_act = 0, w_diss = 0, w_ex = 0;  ///< [mmHg·mL]
  double w_act_la = 0, w_act_lv = 0, w_act_ra = 0, w_act_rv = 0;
  double work_balance_rel = 0;  ///< |w_act + w_diss| / |w_act|

  bool periodic = false;
  int periodic_beat_index = 0;
  double periodicity_residual = 0;
  double periodicity_tol = 0;

  double mean_active_power_w = 0;  ///< [W]
  double daily_work_kj = 0;        ///< [kJ]

  double balance_residual_norm = 0;  ///< normalized pointwise energy-balance residual

  // Clinical estimators (filled only on periodic, non-degenerate runs).
  bool estimates_valid = false;
  double p_ar_sys_mean = 0, p_ar_sys_max = 0, p_ar_sys_min = 0;
  double stroke_volume = 0;
  double est_mean_pressure_daily_kj = 0;   ///< p̄·SV/T estimator
  double est_third_rule_daily_kj = 0;      ///< (p_max/3 + 2·p_min/3)·SV/T estimator
  double err_mean_vs_total = 0, err_mean_vs_lv = 0;  ///< signed relative errors
  double err_third_vs_total = 0, err_third_vs_lv = 0;

  bool lv_boundary_mode = false;
  bool degenerate = false;  ///< all work terms at numerical zero
};

/// Integrate the power terms over beats [beat_begin, beat_end) of the
/// trajectory (trapezoid on the recorded samples; beat marks are sample
/// points by construction).
WorkSummary work_integrals(const Trajectory& traj, const ModelParams& params,
                           std::size_t beat_begin, std::size_t beat_end);

/// Fill the clinical work estimators. Refuses (AnalysisError) when the
/// summary is not flagged periodic; degenerate summaries are left empty.
void clinical_work_estimate(const Trajectory& traj, const ModelParams& params,
                            WorkSummary& summary);

struct AnalysisOptions {
  int analyze_beats = 1;
  double periodicity_tol = 1e-4;
};

/// One-stop post-processing: periodicity detection, work integrals over the
/// trailing analyze_beats beats, balance residual, clinical estimates.
WorkSummary analyze(const Trajectory& traj, const ModelParams& params,
                    const AnalysisOptions& opts);

}  // namespace circ
