#include "circ/energy.hpp"

#include <algorithm>
#include <cmath>

#include "circ/errors.hpp"

namespace circ {

namespace {

double half_sq(double coeff, double x) { return 0.5 * coeff * x * x; }

// |w_act| below this is treated as a run with no active contraction.
constexpr double kDegenerateWork = 1e-6;  // [mmHg·mL]

}  // namespace

StorageEnergies mechanical_energy(double /*t*/, const CirculationState& c1,
                                  const ModelParams& params) {
  StorageEnergies s;
  s.e_la = half_sq(params.la.e_pass, c1.v_la - params.la.v0);
  s.e_lv = half_sq(params.lv.e_pass, c1.v_lv - params.lv.v0);
  s.e_ra = half_sq(params.ra.e_pass, c1.v_ra - params.ra.v0);
  s.e_rv = half_sq(params.rv.e_pass, c1.v_rv - params.rv.v0);
  s.e_ar_sys = half_sq(params.ar_sys.c, c1.p_ar_sys);
  s.e_ven_sys = half_sq(params.ven_sys.c, c1.p_ven_sys);
  s.e_ar_pul = half_sq(params.ar_pul.c, c1.p_ar_pul);
  s.e_ven_pul = half_sq(params.ven_pul.c, c1.p_ven_pul);
  s.k_ar_sys = half_sq(params.ar_sys.l, c1.q_ar_sys);
  s.k_ven_sys = half_sq(params.ven_sys.l, c1.q_ven_sys);
  s.k_ar_pul = half_sq(params.ar_pul.l, c1.q_ar_pul);
  s.k_ven_pul = half_sq(params.ven_pul.l, c1.q_ven_pul);
  s.total = s.e_la + s.e_lv + s.e_ra + s.e_rv + s.e_ar_sys + s.e_ven_sys + s.e_ar_pul +
            s.e_ven_pul + s.k_ar_sys + s.k_ven_sys + s.k_ar_pul + s.k_ven_pul;
  return s;
}

ChamberPowers active_power(double t, const CirculationState& c1, const CirculationState& dc1dt,
                           const ModelParams& params) {
  auto act = [&](const ChamberParams& ch, double v, double dv) {
    return -(ch.e_act_max * activation(ch, t, params.t_beat)) * (v - ch.v0) * dv;
  };
  ChamberPowers p;
  p.la = act(params.la, c1.v_la, dc1dt.v_la);
  p.lv = act(params.lv, c1.v_lv, dc1dt.v_lv);
  p.ra = act(params.ra, c1.v_ra, dc1dt.v_ra);
  p.rv = act(params.rv, c1.v_rv, dc1dt.v_rv);
  p.total = p.la + p.lv + p.ra + p.rv;
  return p;
}

ChamberPowers external_power(double t, const CirculationState& /*c1*/,
                             const CirculationState& dc1dt, const ModelParams& params) {
  const double p_ex = params.p_ex.value(t, params.t_beat);
  ChamberPowers p;
  p.la = -p_ex * dc1dt.v_la;
  p.lv = -p_ex * dc1dt.v_lv;
  p.ra = -p_ex * dc1dt.v_ra;
  p.rv = -p_ex * dc1dt.v_rv;
  p.total = p.la + p.lv + p.ra + p.rv;
  return p;
}

DissipatedPowers dissipated_power(double /*t*/, const CirculationState& c1,
                                  const DerivedState& c2, const ModelParams& params) {
  DissipatedPowers d;
  d.mv = -(c2.p_la - c2.p_lv) * c2.q_mv;
  d.av = -(c2.p_lv - c1.p_ar_sys) * c2.q_av;
  d.tv = -(c2.p_ra - c2.p_rv) * c2.q_tv;
  d.pv = -(c2.p_rv - c1.p_ar_pul) * c2.q_pv;
  d.ar_sys = -params.ar_sys.r * c1.q_ar_sys * c1.q_ar_sys;
  d.ven_sys = -params.ven_sys.r * c1.q_ven_sys * c1.q_ven_sys;
  d.ar_pul = -params.ar_pul.r * c1.q_ar_pul * c1.q_ar_pul;
  d.ven_pul = -params.ven_pul.r * c1.q_ven_pul * c1.q_ven_pul;
  d.total = d.mv + d.av + d.tv + d.pv + d.ar_sys + d.ven_sys + d.ar_pul + d.ven_pul;
  return d;
}

EnergySnapshot energy_snapshot(double t, const CirculationState& c1, const DerivedState& c2,
                               const ModelParams& params, bool lv_boundary_mode) {
  const CirculationState dc1dt = rhs_full(t, c1, c2, params);
  EnergySnapshot snap;
  snap.t = t;
  snap.lv_boundary_mode = lv_boundary_mode;
  snap.storage = mechanical_energy(t, c1, params);
  snap.active = active_power(t, c1, dc1dt, params);
  snap.external = external_power(t, c1, dc1dt, params);
  snap.dissipated = dissipated_power(t, c1, c2, params);
  if (lv_boundary_mode) {
    // The multiplier's boundary power replaces the 0D LV accounting.
    snap.storage.total -= snap.storage.e_lv;
    snap.storage.e_lv = 0;
    snap.active.total -= snap.active.lv;
    snap.active.lv = c2.p_lv * (c2.q_mv - c2.q_av);
    snap.active.total += snap.active.lv;
    snap.external.total -= snap.external.lv;
    snap.external.lv = 0;
  }
  return snap;
}

BalanceResidual balance_residual(const Trajectory& traj, const ModelParams& params,
                                 std::size_t i_begin, std::size_t i_end) {
  if (i_end == kNpos) i_end = traj.samples.empty() ? 0 : traj.samples.size() - 1;
  BalanceResidual out;
  if (traj.samples.empty() || i_end <= i_begin) return out;

  const std::size_t n = i_end - i_begin + 1;
  out.t.reserve(n);
  out.residual.reserve(n);

  double m0 = 0;
  double integral = 0;
  double prev_power = 0, prev_abs_diss = 0, prev_t = 0;
  for (std::size_t i = i_begin; i <= i_end; ++i) {
    const Sample& s = traj.samples[i];
    const EnergySnapshot snap = energy_snapshot(s.t, s.c1, s.c2, params, traj.coupled);
    const double power = snap.active.total + snap.dissipated.total + snap.external.total;
    const double abs_diss = std::abs(snap.dissipated.total);
    if (i == i_begin) {
      m0 = snap.storage.total;
    } else {
      const double h = s.t - prev_t;
      integral += 0.5 * h * (power + prev_power);
      out.diss_integral_abs += 0.5 * h * (abs_diss + prev_abs_diss);
    }
    const double r = (snap.storage.total - m0) - integral;
    out.t.push_back(s.t);
    out.residual.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
    prev_power = power;
    prev_abs_diss = abs_diss;
    prev_t = s.t;
  }
  out.normalized = out.diss_integral_abs > 0 ? out.max_abs / out.diss_integral_abs
                                             : (out.max_abs == 0 ? 0.0 : INFINITY);
  return out;
}

WorkSummary work_integrals(const Trajectory& traj, const ModelParams& params,
                           std::size_t beat_begin, std::size_t beat_end) {
  if (beat_end <= beat_begin || beat_end >= traj.beat_marks.size()) {
    throw AnalysisError("work_integrals: invalid beat range");
  }
  const std::size_t i_begin = traj.beat_marks[beat_begin];
  const std::size_t i_end = traj.beat_marks[beat_end];

  WorkSummary w;
  w.beats = static_cast<int>(beat_end - beat_begin);
  w.t_begin = traj.samples[i_begin].t;
  w.t_end = traj.samples[i_end].t;
  w.lv_boundary_mode = traj.coupled;

  EnergySnapshot prev;
  for (std::size_t i = i_begin; i <= i_end; ++i) {
    const Sample& s = traj.samples[i];
    const EnergySnapshot snap = energy_snapshot(s.t, s.c1, s.c2, params, traj.coupled);
    if (i > i_begin) {
      const double h = s.t - prev.t;
      auto trap = [h](double a, double b) { return 0.5 * h * (a + b); };
      w.w_act += trap(prev.active.total, snap.active.total);
      w.w_act_la += trap(prev.active.la, snap.active.la);
      w.w_act_lv += trap(prev.active.lv, snap.active.lv);
      w.w_act_ra += trap(prev.active.ra, snap.active.ra);
      w.w_act_rv += trap(prev.active.rv, snap.active.rv);
      w.w_diss += trap(prev.dissipated.total, snap.dissipated.total);
      w.w_ex += trap(prev.external.total, snap.external.total);
    }
    prev = snap;
  }

  const double span = w.t_end - w.t_begin;
  w.mean_active_power_w = w.w_act / span * kJoulePerMmhgMl;
  w.daily_work_kj = w.mean_active_power_w * kSecondsPerDay / 1e3;
  w.degenerate = std::abs(w.w_act) < kDegenerateWork && std::abs(w.w_diss) < kDegenerateWork;
  w.work_balance_rel =
      w.degenerate ? 0.0 : std::abs(w.w_act + w.w_diss) / std::abs(w.w_act);
  return w;
}

void clinical_work_estimate(const Trajectory& traj, const ModelParams& params,
                            WorkSummary& summary) {
  if (summary.degenerate) return;
  if (!summary.periodic) {
    throw AnalysisError(
        "clinical work estimates require a periodic trajectory (periodicity was not detected at "
        "tolerance " +
        std::to_string(summary.periodicity_tol) + ")");
  }
  // locate the analyzed window by time
  std::size_t i_begin = 0, i_end = traj.samples.size() - 1;
  while (i_begin < traj.samples.size() && traj.samples[i_begin].t < summary.t_begin) ++i_begin;
  while (i_end > 0 && traj.samples[i_end].t > summary.t_end) --i_end;

  double p_sum = 0;
  double p_max = traj.samples[i_begin].c1.p_ar_sys, p_min = p_max;
  double v_max = traj.samples[i_begin].c1.v_lv, v_min = v_max;
  double prev_t = 0, prev_p = 0;
  for (std::size_t i = i_begin; i <= i_end; ++i) {
    const Sample& s = traj.samples[i];
    p_max = std::max(p_max, s.c1.p_ar_sys);
    p_min = std::min(p_min, s.c1.p_ar_sys);
    v_max = std::max(v_max, s.c1.v_lv);
    v_min = std::min(v_min, s.c1.v_lv);
    if (i > i_begin) p_sum += 0.5 * (s.t - prev_t) * (s.c1.p_ar_sys + prev_p);
    prev_t = s.t;
    prev_p = s.c1.p_ar_sys;
  }
  const double span = summary.t_end - summary.t_begin;
  summary.p_ar_sys_mean = p_sum / span;
  summary.p_ar_sys_max = p_max;
  summary.p_ar_sys_min = p_min;
  summary.stroke_volume = v_max - v_min;

  const double sv_per_beat_rate = summary.stroke_volume / params.t_beat;  // [mL/s]
  const double est_mean = summary.p_ar_sys_mean * sv_per_beat_rate;       // [mmHg·mL/s]
  const double est_third = (p_max / 3.0 + 2.0 * p_min / 3.0) * sv_per_beat_rate;
  auto daily_kj = [](double power_mmhg_ml_s) {
    return power_mmhg_ml_s * kJoulePerMmhgMl * kSecondsPerDay / 1e3;
  };
  summary.est_mean_pressure_daily_kj = daily_kj(est_mean);
  summary.est_third_rule_daily_kj = daily_kj(est_third);

  const double total_rate = summary.w_act / span;
  const double lv_rate = summary.w_act_lv / span;
  summary.err_mean_vs_total = (est_mean - total_rate) / total_rate;
  summary.err_mean_vs_lv = (est_mean - lv_rate) / lv_rate;
  summary.err_third_vs_total = (est_third - total_rate) / total_rate;
  summary.err_third_vs_lv = (est_third - lv_rate) / lv_rate;
  summary.estimates_valid = true;
}

WorkSummary analyze(const Trajectory& traj, const ModelParams& params,
                    const AnalysisOptions& opts) {
  const std::size_t beats = traj.beats();
  if (beats < 1) throw AnalysisError("analyze requires at least one complete beat");
  const std::size_t n_analyze = std::min<std::size_t>(std::max(opts.analyze_beats, 1), beats);
  const std::size_t beat_begin = beats - n_analyze;

  WorkSummary w = work_integrals(traj, params, beat_begin, beats);
  w.periodicity_tol = opts.periodicity_tol;
  if (beats >= 2) {
    const PeriodicRegime pr = detect_periodic_regime(traj, opts.periodicity_tol);
    w.periodic = pr.converged && beat_begin + 1 >= static_cast<std::size_t>(pr.beat_index);
    w.periodic_beat_index = pr.beat_index;
    w.periodicity_residual = pr.residual;
  }
  w.balance_residual_norm =
      balance_residual(traj, params, traj.beat_marks[beat_begin], traj.beat_marks[beats])
          .normalized;
  if (w.periodic && !w.degenerate) clinical_work_estimate(traj, params, w);
  return w;
}

}  // namespace circ
