#include <cmath>
#include <random>

#include <doctest.h>

#include "circ/energy.hpp"
#include "circ/errors.hpp"
#include "helpers.hpp"

using namespace circ;

namespace {

Trajectory default_periodic_run(int beats = 30) {
  const RunConfig cfg = test::default_run_config();
  return simulate(cfg.model, cfg.initial, beats, cfg.solver);
}

}  // namespace

TEST_CASE("stored energy formulas") {
  const ModelParams m = test::default_params();
  CirculationState zero;
  zero.v_la = m.la.v0;
  zero.v_lv = m.lv.v0;
  zero.v_ra = m.ra.v0;
  zero.v_rv = m.rv.v0;
  const StorageEnergies s0 = mechanical_energy(0.0, zero, m);
  CHECK(s0.total == 0.0);

  ModelParams m2 = m;
  m2.lv.e_pass = 0.08;
  CirculationState c;
  c.v_lv = m2.lv.v0 + 100.0;
  c.v_la = m2.la.v0;
  c.v_ra = m2.ra.v0;
  c.v_rv = m2.rv.v0;
  CHECK(mechanical_energy(0.0, c, m2).e_lv == doctest::Approx(400.0).epsilon(1e-14));

  ModelParams m3 = m;
  m3.ar_sys.c = 2.0;
  CirculationState c3 = zero;
  c3.p_ar_sys = 10.0;
  CHECK(mechanical_energy(0.0, c3, m3).e_ar_sys == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(mechanical_energy(0.0, c3, m3).total >= 0.0);
}

TEST_CASE("active power sign structure") {
  const ModelParams m = test::default_params();
  std::mt19937 rng(17);

  // a passive heart generates nothing
  ModelParams passive = m;
  for (ChamberParams* ch : {&passive.la, &passive.lv, &passive.ra, &passive.rv})
    ch->e_act_max = 0.0;
  const CirculationState c1 = test::random_state(rng);
  const CirculationState d = rhs_full(0.2, c1, derived_state(0.2, c1, passive), passive);
  CHECK(active_power(0.2, c1, d, passive).total == 0.0);

  // contracting chamber with shrinking volume does positive work
  CirculationState c2;
  c2.v_lv = m.lv.v0 + 80.0;
  c2.v_la = m.la.v0;
  c2.v_ra = m.ra.v0;
  c2.v_rv = m.rv.v0;
  CirculationState dv;  // imposed volume rate
  dv.v_lv = -200.0;
  const double t_active = m.lv.onset + 0.5 * m.lv.t_contract;
  REQUIRE(activation(m.lv, t_active, m.t_beat) > 0.0);
  CHECK(active_power(t_active, c2, dv, m).lv > 0.0);
}

TEST_CASE("dissipated power terms and examples") {
  const ModelParams m = test::default_params();
  CirculationState rest;
  rest.v_la = m.la.v0;
  rest.v_lv = m.lv.v0;
  rest.v_ra = m.ra.v0;
  rest.v_rv = m.rv.v0;
  const DerivedState c2 = derived_state(0.5, rest, m);
  const DissipatedPowers d0 = dissipated_power(0.5, rest, c2, m);
  CHECK(d0.total == 0.0);

  // open valve with a 5 mmHg drop at r_min = 0.05
  ModelParams m2 = m;
  m2.mv.r_min = 0.05;
  CirculationState c;
  c.v_la = m2.la.v0 + 5.0 / m2.la.e_pass;  // p_la = 5 at rest
  c.v_lv = m2.lv.v0;                       // p_lv = 0
  c.v_ra = m2.ra.v0;
  c.v_rv = m2.rv.v0;
  const DerivedState c2b = derived_state(0.5, c, m2);
  REQUIRE(c2b.q_mv == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(dissipated_power(0.5, c, c2b, m2).mv == doctest::Approx(-500.0).epsilon(1e-12));
}

TEST_CASE("every dissipation subterm is nonpositive along the default run") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig sc = cfg.solver;
  sc.dt = 5e-4;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 5, sc);
  for (const Sample& s : traj.samples) {
    const DissipatedPowers d = dissipated_power(s.t, s.c1, s.c2, cfg.model);
    for (double v : {d.mv, d.av, d.tv, d.pv, d.ar_sys, d.ven_sys, d.ar_pul, d.ven_pul}) {
      CHECK(v <= 0.0);
    }
  }
}

TEST_CASE("external power examples") {
  ModelParams m = test::default_params();
  std::mt19937 rng(23);
  const CirculationState c1 = test::random_state(rng);
  const CirculationState d = rhs_full(0.1, c1, derived_state(0.1, c1, m), m);
  CHECK(external_power(0.1, c1, d, m).total == 0.0);  // p_ex = 0 by default

  m.p_ex.base = 1.0;
  CirculationState dv;
  dv.v_la = -1.0;
  dv.v_lv = -1.0;
  dv.v_ra = -0.5;
  dv.v_rv = -0.5;  // total volume rate -3 mL/s
  CHECK(external_power(0.1, c1, dv, m).total == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("per-element power identities on randomized states") {
  // Independent transcription of the chamber, valve, reservoir and conductor
  // sub-balances, evaluated against the rhs-based ledger terms.
  const ModelParams m = test::default_params();
  std::mt19937 rng(31);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const CirculationState c1 = test::random_state(rng);
    const double t = m.t_beat * (i % 83) / 83.0;
    const DerivedState c2 = derived_state(t, c1, m);
    const CirculationState d = rhs_full(t, c1, c2, m);
    const ChamberPowers act = active_power(t, c1, d, m);
    const ChamberPowers ext = external_power(t, c1, d, m);
    const DissipatedPowers dis = dissipated_power(t, c1, c2, m);

    // relative to the largest term participating in the identity: a
    // cancelling sum keeps ulp-level debris of its big terms
    auto check = [&](double lhs, double rhs, double term_scale = 0.0) {
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs), term_scale});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    };
    // chambers: p_i·dV_i = dE_i/dt − Π_act − Π_ex
    check(c2.p_la * d.v_la, m.la.e_pass * (c1.v_la - m.la.v0) * d.v_la - act.la - ext.la,
          std::abs(act.la));
    check(c2.p_lv * d.v_lv, m.lv.e_pass * (c1.v_lv - m.lv.v0) * d.v_lv - act.lv - ext.lv,
          std::abs(act.lv));
    check(c2.p_ra * d.v_ra, m.ra.e_pass * (c1.v_ra - m.ra.v0) * d.v_ra - act.ra - ext.ra,
          std::abs(act.ra));
    check(c2.p_rv * d.v_rv, m.rv.e_pass * (c1.v_rv - m.rv.v0) * d.v_rv - act.rv - ext.rv,
          std::abs(act.rv));
    // valves: Δp·Q = −Π
    check((c2.p_la - c2.p_lv) * c2.q_mv, -dis.mv);
    check((c2.p_lv - c1.p_ar_sys) * c2.q_av, -dis.av);
    check((c2.p_ra - c2.p_rv) * c2.q_tv, -dis.tv);
    check((c2.p_rv - c1.p_ar_pul) * c2.q_pv, -dis.pv);
    // reservoirs: p·(Q_in − Q_out) = dE/dt
    check(c1.p_ar_sys * (c2.q_av - c1.q_ar_sys), m.ar_sys.c * c1.p_ar_sys * d.p_ar_sys);
    check(c1.p_ven_sys * (c1.q_ar_sys - c1.q_ven_sys),
          m.ven_sys.c * c1.p_ven_sys * d.p_ven_sys);
    check(c1.p_ar_pul * (c2.q_pv - c1.q_ar_pul), m.ar_pul.c * c1.p_ar_pul * d.p_ar_pul);
    check(c1.p_ven_pul * (c1.q_ar_pul - c1.q_ven_pul),
          m.ven_pul.c * c1.p_ven_pul * d.p_ven_pul);
    // conductors: (p_up − p_down)·Q = dK/dt − Π
    check((c1.p_ar_sys - c1.p_ven_sys) * c1.q_ar_sys,
          m.ar_sys.l * c1.q_ar_sys * d.q_ar_sys - dis.ar_sys, std::abs(dis.ar_sys));
    check((c1.p_ven_sys - c2.p_ra) * c1.q_ven_sys,
          m.ven_sys.l * c1.q_ven_sys * d.q_ven_sys - dis.ven_sys, std::abs(dis.ven_sys));
    check((c1.p_ar_pul - c1.p_ven_pul) * c1.q_ar_pul,
          m.ar_pul.l * c1.q_ar_pul * d.q_ar_pul - dis.ar_pul, std::abs(dis.ar_pul));
    check((c1.p_ven_pul - c2.p_la) * c1.q_ven_pul,
          m.ven_pul.l * c1.q_ven_pul * d.q_ven_pul - dis.ven_pul, std::abs(dis.ven_pul));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("snapshot totals decompose exactly into their parts") {
  const ModelParams m = test::default_params();
  std::mt19937 rng(41);
  for (int i = 0; i < 50; ++i) {
    const CirculationState c1 = test::random_state(rng);
    const double t = m.t_beat * (i % 13) / 13.0;
    const EnergySnapshot e = energy_snapshot(t, c1, derived_state(t, c1, m), m);
    CHECK(e.active.total == e.active.la + e.active.lv + e.active.ra + e.active.rv);
    CHECK(e.external.total == e.external.la + e.external.lv + e.external.ra + e.external.rv);
    CHECK(e.dissipated.total == e.dissipated.mv + e.dissipated.av + e.dissipated.tv +
                                    e.dissipated.pv + e.dissipated.ar_sys + e.dissipated.ven_sys +
                                    e.dissipated.ar_pul + e.dissipated.ven_pul);
    CHECK(e.storage.total ==
          e.storage.e_la + e.storage.e_lv + e.storage.e_ra + e.storage.e_rv + e.storage.e_ar_sys +
              e.storage.e_ven_sys + e.storage.e_ar_pul + e.storage.e_ven_pul + e.storage.k_ar_sys +
              e.storage.k_ven_sys + e.storage.k_ar_pul + e.storage.k_ven_pul);
  }
}

TEST_CASE("balance residual vanishes on a stationary trajectory") {
  ModelParams m = test::default_params();
  for (ChamberParams* ch : {&m.la, &m.lv, &m.ra, &m.rv}) ch->e_act_max = 0.0;
  CirculationState y0;
  y0.v_la = m.la.v0;
  y0.v_lv = m.lv.v0;
  y0.v_ra = m.ra.v0;
  y0.v_rv = m.rv.v0;
  SolverConfig sc;
  sc.dt = 1e-3;
  const Trajectory traj = simulate(m, y0, 2, sc);
  const BalanceResidual br = balance_residual(traj, m);
  CHECK(br.max_abs == 0.0);
  CHECK(br.normalized == 0.0);
}

TEST_CASE("balance residual is small on a periodic beat and shrinks with the stride") {
  const RunConfig cfg = test::default_run_config();
  const Trajectory traj = default_periodic_run();
  const std::size_t b = traj.beats();
  const BalanceResidual fine =
      balance_residual(traj, cfg.model, traj.beat_marks[b - 1], traj.beat_marks[b]);
  CHECK(fine.normalized <= 1e-3);

  // quadrature error drops by about 4x per stride halving
  const Trajectory d20 = decimate(traj, 20);
  const Trajectory d10 = decimate(traj, 10);
  const BalanceResidual coarse =
      balance_residual(d20, cfg.model, d20.beat_marks[b - 1], d20.beat_marks[b]);
  const BalanceResidual half =
      balance_residual(d10, cfg.model, d10.beat_marks[b - 1], d10.beat_marks[b]);
  const double ratio = coarse.max_abs / half.max_abs;
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}

TEST_CASE("balance residual holds with a time-varying external pressure") {
  RunConfig cfg = test::default_run_config();
  cfg.model.p_ex.base = -4.0;
  cfg.model.p_ex.amplitude = 2.0;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 6, cfg.solver);
  const std::size_t b = traj.beats();
  const BalanceResidual br =
      balance_residual(traj, cfg.model, traj.beat_marks[b - 1], traj.beat_marks[b]);
  CHECK(br.normalized <= 1e-3);
}

TEST_CASE("work integrals on the periodic default run") {
  const RunConfig cfg = test::default_run_config();
  const Trajectory traj = default_periodic_run();
  const std::size_t b = traj.beats();
  const WorkSummary w = work_integrals(traj, cfg.model, b - 1, b);
  CHECK_FALSE(w.degenerate);
  CHECK(w.w_act > 0.0);
  CHECK(w.w_diss < 0.0);
  CHECK(std::abs(w.w_act + w.w_diss) <= 0.01 * std::abs(w.w_act));
  CHECK(w.w_ex == 0.0);  // constant zero external pressure
  CHECK(w.w_act_lv > 0.5 * w.w_act);
  CHECK(w.daily_work_kj > 50.0);
  CHECK(w.daily_work_kj < 250.0);
}

TEST_CASE("passive heart yields zero work and a degenerate summary") {
  RunConfig cfg = test::default_run_config();
  for (ChamberParams* ch : {&cfg.model.la, &cfg.model.lv, &cfg.model.ra, &cfg.model.rv})
    ch->e_act_max = 0.0;
  CirculationState y0;
  y0.v_la = cfg.model.la.v0;
  y0.v_lv = cfg.model.lv.v0;
  y0.v_ra = cfg.model.ra.v0;
  y0.v_rv = cfg.model.rv.v0;
  SolverConfig sc = cfg.solver;
  sc.dt = 1e-3;
  const Trajectory traj = simulate(cfg.model, y0, 2, sc);
  const WorkSummary w = work_integrals(traj, cfg.model, 0, 2);
  CHECK(w.degenerate);
  CHECK(w.w_act == 0.0);
  CHECK(w.w_diss == 0.0);
}

TEST_CASE("LV active work equals the signed PV-loop area at periodic regime") {
  const RunConfig cfg = test::default_run_config();
  const Trajectory traj = default_periodic_run();
  const std::size_t b = traj.beats();
  const WorkSummary w = work_integrals(traj, cfg.model, b - 1, b);

  double loop = 0;  // oriented integral of p_lv dV_lv over the beat
  for (std::size_t i = traj.beat_marks[b - 1] + 1; i <= traj.beat_marks[b]; ++i) {
    const Sample& a = traj.samples[i - 1];
    const Sample& s = traj.samples[i];
    loop += 0.5 * (s.c2.p_lv + a.c2.p_lv) * (s.c1.v_lv - a.c1.v_lv);
  }
  // filling at low pressure, ejection at high pressure: the time-oriented
  // loop integral is the negative of the injected work
  CHECK(-loop == doctest::Approx(w.w_act_lv).epsilon(0.01));
}

TEST_CASE("constant external pressure is conservative at periodic regime") {
  RunConfig cfg = test::default_run_config();
  cfg.model.p_ex.base = -4.0;
  SolverConfig sc = cfg.solver;
  sc.max_beats = 60;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 45, sc);
  const PeriodicRegime pr = detect_periodic_regime(traj, 1e-5);
  REQUIRE(pr.converged);
  const std::size_t b = traj.beats();
  const WorkSummary w = work_integrals(traj, cfg.model, b - 1, b);
  CHECK(std::abs(w.w_ex) <= 1e-5 * std::abs(w.w_diss));
  CHECK(std::abs(w.w_act + w.w_diss + w.w_ex) <= 0.01 * std::abs(w.w_act));
}

TEST_CASE("clinical estimator arithmetic on a synthetic trajectory") {
  // constant arterial pressure 100 mmHg, stroke volume 70 mL, T = 0.8 s
  ModelParams m = test::default_params();
  Trajectory traj;
  traj.t_beat = m.t_beat;
  for (int i = 0; i <= 8; ++i) {
    Sample s;
    s.t = 0.1 * i;
    s.c1.p_ar_sys = 100.0;
    s.c1.v_lv = (i % 2 == 0) ? 50.0 : 120.0;
    traj.samples.push_back(s);
  }
  traj.beat_marks = {0, 8};

  WorkSummary w;
  w.t_begin = 0.0;
  w.t_end = 0.8;
  w.beats = 1;
  w.periodic = true;
  w.w_act = 7000.0;  // 7000 mmHg·mL over 0.8 s: the model's own mean power
  w.w_act_lv = 7000.0;  // equals the p̄·SV/T estimate of 8750 mmHg·mL/s
  clinical_work_estimate(traj, m, w);
  REQUIRE(w.estimates_valid);
  CHECK(w.p_ar_sys_mean == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(w.stroke_volume == doctest::Approx(70.0).epsilon(1e-12));
  // 8750 mmHg·mL/s = 1.1666 W = 100.79 kJ/day
  const double power_w = 8750.0 * kJoulePerMmhgMl;
  CHECK(power_w == doctest::Approx(1.16657).epsilon(1e-4));
  CHECK(w.est_mean_pressure_daily_kj == doctest::Approx(100.79).epsilon(1e-3));
  CHECK(w.err_mean_vs_total == doctest::Approx(0.0).epsilon(1e-12));

  WorkSummary bad = w;
  bad.periodic = false;
  CHECK_THROWS_AS(clinical_work_estimate(traj, m, bad), AnalysisError);
}

TEST_CASE("estimator errors vs total and LV coincide when only the LV works") {
  RunConfig cfg = test::default_run_config();
  cfg.model.la.e_act_max = 0.0;
  cfg.model.ra.e_act_max = 0.0;
  cfg.model.rv.e_act_max = 0.0;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 40, cfg.solver);
  const PeriodicRegime pr = detect_periodic_regime(traj, 1e-3);
  REQUIRE(pr.converged);
  const std::size_t b = traj.beats();
  WorkSummary w = work_integrals(traj, cfg.model, b - 1, b);
  REQUIRE_FALSE(w.degenerate);
  CHECK(w.w_act == doctest::Approx(w.w_act_lv).epsilon(1e-12));
  w.periodic = true;
  clinical_work_estimate(traj, cfg.model, w);
  CHECK(w.err_mean_vs_total == doctest::Approx(w.err_mean_vs_lv).epsilon(1e-9));
  CHECK(w.err_third_vs_total == doctest::Approx(w.err_third_vs_lv).epsilon(1e-9));
}

TEST_CASE("coupled-mode snapshot reports the LV boundary power") {
  const ModelParams m = test::default_params();
  std::mt19937 rng(53);
  const CirculationState c1 = test::random_state(rng);
  const DerivedState c2 = derived_state_reduced(0.3, c1, 52.0, m);
  const EnergySnapshot e = energy_snapshot(0.3, c1, c2, m, true);
  CHECK(e.lv_boundary_mode);
  CHECK(e.active.lv == doctest::Approx(52.0 * (c2.q_mv - c2.q_av)).epsilon(1e-13));
  CHECK(e.external.lv == 0.0);
  CHECK(e.storage.e_lv == 0.0);
  CHECK(e.active.total == e.active.la + e.active.lv + e.active.ra + e.active.rv);
}

TEST_CASE("analyze produces a consistent summary on the default run") {
  const RunConfig cfg = test::default_run_config();
  const Trajectory traj = default_periodic_run();
  const WorkSummary w = analyze(traj, cfg.model, {1, 1e-4});
  CHECK(w.periodic);
  CHECK(w.estimates_valid);
  CHECK(w.beats == 1);
  CHECK(w.work_balance_rel <= 0.01);
  CHECK(w.balance_residual_norm <= 1e-3);
  // the mean-pressure estimate underestimates the total but tracks the LV
  CHECK(w.est_mean_pressure_daily_kj < w.daily_work_kj);
  CHECK(std::abs(w.err_mean_vs_lv) < std::abs(w.err_mean_vs_total));
  CHECK(w.est_third_rule_daily_kj < w.est_mean_pressure_daily_kj);
}
