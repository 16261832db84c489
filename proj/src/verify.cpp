#include "circ/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "circ/energy.hpp"
#include "circ/model.hpp"
#include "circ/solver.hpp"

namespace circ {

namespace {

CirculationState random_state(std::mt19937& rng) {
  std::uniform_real_distribution<double> vol(20.0, 250.0);
  std::uniform_real_distribution<double> pres(-20.0, 140.0);
  std::uniform_real_distribution<double> flow(-200.0, 600.0);
  CirculationState s;
  s.v_la = vol(rng);
  s.v_lv = vol(rng);
  s.v_ra = vol(rng);
  s.v_rv = vol(rng);
  s.p_ar_sys = pres(rng);
  s.p_ven_sys = pres(rng);
  s.p_ar_pul = pres(rng);
  s.p_ven_pul = pres(rng);
  s.q_ar_sys = flow(rng);
  s.q_ven_sys = flow(rng);
  s.q_ar_pul = flow(rng);
  s.q_ven_pul = flow(rng);
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// |a − b| relative to the largest magnitude involved.
double rel_diff(double a, double b, double scale) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b), scale});
}

AuditResult audit_conservation(const ModelParams& params, std::mt19937& rng) {
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const CirculationState c1 = random_state(rng);
    const double t = static_cast<double>(i % 97) * params.t_beat / 97.0;
    const CirculationState d = rhs_full(t, c1, derived_state(t, c1, params), params);
    const double drift = d.v_la + d.v_lv + d.v_ra + d.v_rv + params.ar_sys.c * d.p_ar_sys +
                         params.ven_sys.c * d.p_ven_sys + params.ar_pul.c * d.p_ar_pul +
                         params.ven_pul.c * d.p_ven_pul;
    const double scale = std::abs(d.v_la) + std::abs(d.v_lv) + std::abs(d.v_ra) +
                         std::abs(d.v_rv) + 1.0;
    worst = std::max(worst, std::abs(drift) / scale);
  }
  return {"total-volume directional derivative = 0 (1000 random states)", worst <= 1e-12,
          "worst " + fmt(worst)};
}

AuditResult audit_sub_balances(const ModelParams& params, std::mt19937& rng) {
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const CirculationState c1 = random_state(rng);
    const double t = static_cast<double>(i % 89) * params.t_beat / 89.0;
    const DerivedState c2 = derived_state(t, c1, params);
    const CirculationState d = rhs_full(t, c1, c2, params);
    const ChamberPowers act = active_power(t, c1, d, params);
    const ChamberPowers ext = external_power(t, c1, d, params);
    const DissipatedPowers dis = dissipated_power(t, c1, c2, params);

    // chambers: p_i dV_i/dt = dE_i/dt − Π_act_i − Π_ex_i
    struct Ch {
      double p, v, dv, e_pass, v0, act, ext;
    } chambers[4] = {
        {c2.p_la, c1.v_la, d.v_la, params.la.e_pass, params.la.v0, act.la, ext.la},
        {c2.p_lv, c1.v_lv, d.v_lv, params.lv.e_pass, params.lv.v0, act.lv, ext.lv},
        {c2.p_ra, c1.v_ra, d.v_ra, params.ra.e_pass, params.ra.v0, act.ra, ext.ra},
        {c2.p_rv, c1.v_rv, d.v_rv, params.rv.e_pass, params.rv.v0, act.rv, ext.rv},
    };
    for (const auto& ch : chambers) {
      const double lhs = ch.p * ch.dv;
      const double rhs = ch.e_pass * (ch.v - ch.v0) * ch.dv - ch.act - ch.ext;
      // normalize by the largest participating term: the cancelling sum
      // keeps ulp-level debris of its big terms
      worst = std::max(worst, rel_diff(lhs, rhs, std::abs(ch.act)));
    }
    // valves: Δp·Q = −Π
    const double valve_pairs[4][2] = {{(c2.p_la - c2.p_lv) * c2.q_mv, -dis.mv},
                                      {(c2.p_lv - c1.p_ar_sys) * c2.q_av, -dis.av},
                                      {(c2.p_ra - c2.p_rv) * c2.q_tv, -dis.tv},
                                      {(c2.p_rv - c1.p_ar_pul) * c2.q_pv, -dis.pv}};
    for (const auto& vp : valve_pairs) worst = std::max(worst, rel_diff(vp[0], vp[1], 0));
    // reservoirs: p(Q_in − Q_out) = C·p·dp/dt
    const double res_pairs[4][2] = {
        {c1.p_ar_sys * (c2.q_av - c1.q_ar_sys), params.ar_sys.c * c1.p_ar_sys * d.p_ar_sys},
        {c1.p_ven_sys * (c1.q_ar_sys - c1.q_ven_sys),
         params.ven_sys.c * c1.p_ven_sys * d.p_ven_sys},
        {c1.p_ar_pul * (c2.q_pv - c1.q_ar_pul), params.ar_pul.c * c1.p_ar_pul * d.p_ar_pul},
        {c1.p_ven_pul * (c1.q_ar_pul - c1.q_ven_pul),
         params.ven_pul.c * c1.p_ven_pul * d.p_ven_pul}};
    for (const auto& rp : res_pairs) worst = std::max(worst, rel_diff(rp[0], rp[1], 0));
    // conductors: (p_up − p_down)·Q = L·Q·dQ/dt − Π
    const double con_pairs[4][2] = {
        {(c1.p_ar_sys - c1.p_ven_sys) * c1.q_ar_sys,
         params.ar_sys.l * c1.q_ar_sys * d.q_ar_sys - dis.ar_sys},
        {(c1.p_ven_sys - c2.p_ra) * c1.q_ven_sys,
         params.ven_sys.l * c1.q_ven_sys * d.q_ven_sys - dis.ven_sys},
        {(c1.p_ar_pul - c1.p_ven_pul) * c1.q_ar_pul,
         params.ar_pul.l * c1.q_ar_pul * d.q_ar_pul - dis.ar_pul},
        {(c1.p_ven_pul - c2.p_la) * c1.q_ven_pul,
         params.ven_pul.l * c1.q_ven_pul * d.q_ven_pul - dis.ven_pul}};
    const double con_scales[4] = {std::abs(dis.ar_sys), std::abs(dis.ven_sys),
                                  std::abs(dis.ar_pul), std::abs(dis.ven_pul)};
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, rel_diff(con_pairs[k][0], con_pairs[k][1], con_scales[k]));
    }
  }
  return {"per-element power identities (1000 random states)", worst <= 1e-12,
          "worst " + fmt(worst)};
}

AuditResult audit_diode(const ModelParams& params, std::mt19937& rng) {
  std::uniform_real_distribution<double> pres(-50.0, 200.0);
  bool ok = true;
  const ValveParams* valves[4] = {&params.mv, &params.av, &params.tv, &params.pv};
  for (int i = 0; i < 1000 && ok; ++i) {
    const double pu = pres(rng), pd = pres(rng);
    for (const ValveParams* v : valves) {
      const double q = valve_flow(pu, pd, *v);
      if (q * (pu - pd) < 0) ok = false;
      if (pu < pd && std::abs(q) > std::abs(pu - pd) / v->r_max) ok = false;
    }
  }
  return {"diode sign and reverse-leakage bound (1000 random pairs)", ok, ""};
}

AuditResult audit_reduced_consistency(const ModelParams& params, std::mt19937& rng) {
  bool ok = true;
  for (int i = 0; i < 200 && ok; ++i) {
    const CirculationState c1 = random_state(rng);
    const double t = static_cast<double>(i % 53) * params.t_beat / 53.0;
    const double p_lv = chamber_pressure(elastance_at(params.lv, t, params.t_beat), c1.v_lv,
                                         params.lv.v0, params.p_ex.value(t, params.t_beat));
    const auto a = rhs_full(t, c1, derived_state(t, c1, params), params).as_array();
    const auto b = rhs_reduced(t, c1, p_lv, params).as_array();
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] != b[k]) ok = false;
    }
  }
  return {"reduced/full right-hand-side consistency (200 random states)", ok, ""};
}

AuditResult audit_elastance(const ModelParams& params) {
  const ChamberParams* chambers[4] = {&params.la, &params.lv, &params.ra, &params.rv};
  double worst_per = 0;
  bool in_range = true;
  for (const ChamberParams* ch : chambers) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = static_cast<double>(i) * params.t_beat / 250.0;
      const double e = elastance_at(*ch, t, params.t_beat);
      if (e < ch->e_pass - 1e-15 || e > ch->e_pass + ch->e_act_max + 1e-15) in_range = false;
      worst_per = std::max(
          worst_per, std::abs(e - elastance_at(*ch, t + params.t_beat, params.t_beat)));
    }
  }
  return {"elastance periodicity and range", in_range && worst_per <= 1e-12,
          "worst periodicity gap " + fmt(worst_per)};
}

AuditResult audit_simulation(const RunConfig& cfg) {
  const int beats = std::min(cfg.beats, 20);
  const Trajectory traj = simulate(cfg.model, cfg.initial, beats, cfg.solver);

  double worst_drift = 0;
  const double tbv0 = total_blood_volume(traj.samples.front().c1, cfg.model);
  for (std::size_t k = 1; k < traj.beat_marks.size(); ++k) {
    const double a = total_blood_volume(traj.samples[traj.beat_marks[k - 1]].c1, cfg.model);
    const double b = total_blood_volume(traj.samples[traj.beat_marks[k]].c1, cfg.model);
    worst_drift = std::max(worst_drift, std::abs(b - a) / std::abs(tbv0));
  }
  bool diss_ok = true;
  for (const Sample& s : traj.samples) {
    const DissipatedPowers d = dissipated_power(s.t, s.c1, s.c2, cfg.model);
    for (double v : {d.mv, d.av, d.tv, d.pv, d.ar_sys, d.ven_sys, d.ar_pul, d.ven_pul}) {
      if (v > 0) diss_ok = false;
    }
  }
  const auto marks = traj.beat_marks;
  const BalanceResidual br =
      balance_residual(traj, cfg.model, marks[marks.size() - 2], marks.back());

  std::vector<AuditResult> parts;
  AuditResult out;
  out.name = "simulation checks (" + std::to_string(beats) + " beats)";
  out.pass = worst_drift <= 1e-10 && diss_ok && br.normalized <= 1e-3;
  out.detail = "volume drift/beat " + fmt(worst_drift) + ", dissipation signs " +
               (diss_ok ? "ok" : "VIOLATED") + ", balance residual " + fmt(br.normalized);
  return out;
}

}  // namespace

std::vector<AuditResult> run_audits(const RunConfig& cfg) {
  std::mt19937 rng(0x5eed);
  std::vector<AuditResult> out;
  out.push_back(audit_conservation(cfg.model, rng));
  out.push_back(audit_sub_balances(cfg.model, rng));
  out.push_back(audit_diode(cfg.model, rng));
  out.push_back(audit_reduced_consistency(cfg.model, rng));
  out.push_back(audit_elastance(cfg.model));
  out.push_back(audit_simulation(cfg));
  return out;
}

}  // namespace circ
