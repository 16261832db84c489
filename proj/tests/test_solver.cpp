#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "circ/errors.hpp"
#include "circ/rk.hpp"
#include "circ/solver.hpp"
#include "helpers.hpp"

using namespace circ;

namespace {

Trajectory synthetic_trajectory(const std::vector<double>& beat_values, double t_beat,
                                double mid_value) {
  Trajectory traj;
  traj.t_beat = t_beat;
  for (std::size_t k = 0; k < beat_values.size(); ++k) {
    Sample s;
    s.t = static_cast<double>(k) * t_beat;
    s.c1.v_la = beat_values[k];
    traj.samples.push_back(s);
    traj.beat_marks.push_back(traj.samples.size() - 1);
    if (k + 1 < beat_values.size()) {
      Sample mid;
      mid.t = s.t + 0.5 * t_beat;
      mid.c1.v_la = mid_value;
      traj.samples.push_back(mid);
    }
  }
  return traj;
}

double max_rel_diff(const CirculationState& a, const CirculationState& b) {
  const auto xa = a.as_array(), xb = b.as_array();
  double d = 0;
  for (std::size_t k = 0; k < xa.size(); ++k) {
    d = std::max(d, std::abs(xa[k] - xb[k]) / std::max(1.0, std::abs(xb[k])));
  }
  return d;
}

}  // namespace

TEST_CASE("scalar exponential decay converges at order 4") {
  auto f = [](double, const rk::Vec<1>& y) { return rk::Vec<1>{-y[0]}; };
  auto integrate = [&](double dt) {
    rk::Vec<1> y{1.0};
    const long n = std::lround(1.0 / dt);
    for (long i = 0; i < n; ++i) y = rk::rk4_step(f, i * dt, y, dt);
    return std::abs(y[0] - std::exp(-1.0));
  };
  double prev = integrate(0.1);
  for (double dt : {0.05, 0.025, 0.0125}) {
    const double cur = integrate(dt);
    const double order = std::log2(prev / cur);
    CHECK(order == doctest::Approx(4.0).epsilon(0.05));  // 4 ± 0.2
    prev = cur;
  }
}

TEST_CASE("embedded pair solves the scalar problem within tolerance") {
  auto f = [](double, const rk::Vec<1>& y) { return rk::Vec<1>{-y[0]}; };
  rk::Vec<1> y{1.0};
  double t = 0, dt = 0.1;
  while (t < 1.0 - 1e-12) {
    dt = std::min(dt, 1.0 - t);
    const auto res = rk::dp54_step(f, t, y, dt, 1e-10, 1e-10);
    if (res.err_norm <= 1.0) {
      y = res.y;
      t += dt;
    }
    dt *= std::clamp(0.9 * std::pow(std::max(res.err_norm, 1e-10), -0.2), 0.2, 5.0);
  }
  CHECK(std::abs(y[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("step is consistent with the right-hand side as dt -> 0") {
  const ModelParams m = test::default_params();
  const CirculationState y0 = test::default_initial();
  SolverConfig sc;
  const CirculationState f0 = rhs_full(0.0, y0, derived_state(0.0, y0, m), m);
  auto defect = [&](double dt) {
    const CirculationState y1 = step(0.0, y0, dt, m, sc);
    const auto a = y1.as_array(), b = y0.as_array(), c = f0.as_array();
    double d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      d = std::max(d, std::abs(a[k] - (b[k] + dt * c[k])));
    }
    return d;
  };
  // the defect against the Euler predictor shrinks like dt^2
  const double d1 = defect(1e-3), d2 = defect(5e-4);
  CHECK(d1 > 0.0);
  CHECK(d2 / d1 == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("one step preserves total blood volume to roundoff") {
  const ModelParams m = test::default_params();
  SolverConfig sc;
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    CirculationState y = test::random_state(rng);
    const double before = total_blood_volume(y, m);
    const CirculationState y1 = step(0.37, y, 1e-3, m, sc);
    const double after = total_blood_volume(y1, m);
    CHECK(std::abs(after - before) <= 1e-12 * std::abs(before));
  }
}

TEST_CASE("equilibrium initial state stays stationary") {
  ModelParams m = test::default_params();
  for (ChamberParams* ch : {&m.la, &m.lv, &m.ra, &m.rv}) ch->e_act_max = 0.0;
  m.p_ex = {};
  CirculationState y0;
  y0.v_la = m.la.v0;
  y0.v_lv = m.lv.v0;
  y0.v_ra = m.ra.v0;
  y0.v_rv = m.rv.v0;
  SolverConfig sc;
  sc.dt = 1e-3;
  const Trajectory traj = simulate(m, y0, 2, sc);
  for (const Sample& s : traj.samples) {
    CHECK(max_rel_diff(s.c1, y0) <= 1e-14);
  }
}

TEST_CASE("default run reaches textbook ranges") {
  const RunConfig cfg = test::default_run_config();
  const Trajectory traj = simulate(cfg.model, cfg.initial, 20, cfg.solver);
  const std::size_t b = traj.beats();
  double sv_min = 1e9, sv_max = -1e9, p_min = 1e9, p_max = -1e9;
  for (std::size_t i = traj.beat_marks[b - 1]; i <= traj.beat_marks[b]; ++i) {
    sv_min = std::min(sv_min, traj.samples[i].c1.v_lv);
    sv_max = std::max(sv_max, traj.samples[i].c1.v_lv);
    p_min = std::min(p_min, traj.samples[i].c1.p_ar_sys);
    p_max = std::max(p_max, traj.samples[i].c1.p_ar_sys);
  }
  const double sv = sv_max - sv_min;
  CHECK(sv > 50.0);
  CHECK(sv < 90.0);
  CHECK(p_max > 105.0);
  CHECK(p_max < 130.0);
  CHECK(p_min > 70.0);
  CHECK(p_min < 90.0);
}

TEST_CASE("total volume drift per beat stays at roundoff over 20 beats") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig sc = cfg.solver;
  sc.sample_stride = cfg.model.t_beat;  // beat boundaries only
  const Trajectory traj = simulate(cfg.model, cfg.initial, 20, sc);
  const double tbv0 = total_blood_volume(traj.samples.front().c1, cfg.model);
  for (std::size_t k = 1; k < traj.beat_marks.size(); ++k) {
    const double a = total_blood_volume(traj.samples[traj.beat_marks[k - 1]].c1, cfg.model);
    const double b = total_blood_volume(traj.samples[traj.beat_marks[k]].c1, cfg.model);
    CHECK(std::abs(b - a) <= 1e-10 * std::abs(tbv0));
  }
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig sc = cfg.solver;
  sc.dt = 5e-4;
  const Trajectory a = simulate(cfg.model, cfg.initial, 3, sc);
  const Trajectory b = simulate(cfg.model, cfg.initial, 3, sc);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto xa = a.samples[i].c1.as_array(), xb = b.samples[i].c1.as_array();
    for (std::size_t k = 0; k < xa.size(); ++k) CHECK(xa[k] == xb[k]);
  }
}

TEST_CASE("self-convergence error shrinks with dt far faster than first order") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig warm = cfg.solver;
  warm.sample_stride = cfg.model.t_beat;
  const CirculationState y0 = simulate(cfg.model, cfg.initial, 8, warm).samples.back().c1;

  auto final_state = [&](double dt) {
    SolverConfig sc = cfg.solver;
    sc.dt = dt;
    sc.sample_stride = cfg.model.t_beat;
    return simulate(cfg.model, y0, 1, sc).samples.back().c1;
  };
  const CirculationState f1 = final_state(2e-3);
  const CirculationState f2 = final_state(1e-3);
  const CirculationState f3 = final_state(5e-4);
  const CirculationState f4 = final_state(2.5e-4);
  const double d1 = max_rel_diff(f1, f2);
  const double d2 = max_rel_diff(f2, f3);
  const double d3 = max_rel_diff(f3, f4);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d3 < 0.1 * d1);
}

TEST_CASE("periodicity detection on synthetic trajectories") {
  SUBCASE("exactly repeating beats converge at the first comparison") {
    const Trajectory traj = synthetic_trajectory({3.0, 3.0, 3.0}, 1.0, 7.0);
    const PeriodicRegime pr = detect_periodic_regime(traj, 1e-12);
    CHECK(pr.converged);
    CHECK(pr.beat_index == 1);
  }
  SUBCASE("constant trajectory converges at the first comparison") {
    const Trajectory traj = synthetic_trajectory({5.0, 5.0, 5.0, 5.0}, 1.0, 5.0);
    const PeriodicRegime pr = detect_periodic_regime(traj, 1e-6);
    CHECK(pr.converged);
    CHECK(pr.beat_index == 1);
  }
  SUBCASE("geometric decay converges at the analytically expected beat") {
    // boundary values 2^-k against a unit within-beat amplitude:
    // r_k = 2^-k / (1 - 2^-k); first r_k <= tol at k = ceil(log2(1/tol))
    std::vector<double> values;
    for (int k = 0; k <= 12; ++k) values.push_back(std::pow(0.5, k));
    const Trajectory traj = synthetic_trajectory(values, 1.0, 1.0);
    CHECK(detect_periodic_regime(traj, 1e-3).beat_index == 10);
    CHECK(detect_periodic_regime(traj, 1e-2).beat_index == 7);
    CHECK(detect_periodic_regime(traj, 1e-3).converged);
  }
  SUBCASE("fewer than two beats is a precondition error") {
    const Trajectory traj = synthetic_trajectory({1.0, 2.0}, 1.0, 1.5);
    CHECK(traj.beats() == 1);
    CHECK_THROWS_AS((void)detect_periodic_regime(traj, 1e-3), AnalysisError);
  }
}

TEST_CASE("transient start is reported as not converged") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig sc = cfg.solver;
  sc.dt = 1e-3;
  sc.sample_stride = 0.01;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 3, sc);
  const PeriodicRegime pr = detect_periodic_regime(traj, 1e-6);
  CHECK_FALSE(pr.converged);
  CHECK(pr.residual > 1e-6);
}

TEST_CASE("negative chamber volume is rejected as unphysiological") {
  const RunConfig cfg = test::default_run_config();
  CirculationState y0 = cfg.initial;
  y0.v_la = 5.0;
  y0.p_ven_pul = -500.0;  // drains the left atrium within milliseconds
  CHECK_THROWS_AS((void)simulate(cfg.model, y0, 1, cfg.solver), IntegrationError);
  try {
    (void)simulate(cfg.model, y0, 1, cfg.solver);
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("v_la") != std::string::npos);
  }
}

TEST_CASE("non-finite state components are fatal and named") {
  const RunConfig cfg = test::default_run_config();
  CirculationState y0 = cfg.initial;
  y0.q_ar_pul = std::nan("");
  CHECK_THROWS_AS((void)simulate(cfg.model, y0, 1, cfg.solver), IntegrationError);
  try {
    (void)simulate(cfg.model, y0, 1, cfg.solver);
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("q_ar_pul") != std::string::npos);
  }
}

TEST_CASE("adaptive method tracks the fixed-step solution") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig fixed = cfg.solver;
  fixed.sample_stride = cfg.model.t_beat;
  const CirculationState ref = simulate(cfg.model, cfg.initial, 2, fixed).samples.back().c1;

  SolverConfig ad = cfg.solver;
  ad.method = Method::adaptive_dp54;
  ad.dt = 1e-3;
  ad.abs_tol = 1e-9;
  ad.rel_tol = 1e-9;
  ad.sample_stride = cfg.model.t_beat;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 2, ad);
  CHECK(max_rel_diff(traj.samples.back().c1, ref) < 1e-6);

  // adaptive accepted steps preserve the linear invariant as well
  const double tbv0 = total_blood_volume(cfg.initial, cfg.model);
  const double tbv1 = total_blood_volume(traj.samples.back().c1, cfg.model);
  CHECK(std::abs(tbv1 - tbv0) <= 1e-10 * std::abs(tbv0));
}

TEST_CASE("sampling stride and decimation keep beat marks exact") {
  const RunConfig cfg = test::default_run_config();
  SolverConfig sc = cfg.solver;
  sc.dt = 1e-3;
  sc.sample_stride = 0.01;
  const Trajectory traj = simulate(cfg.model, cfg.initial, 2, sc);
  REQUIRE(traj.beat_marks.size() == 3);
  for (std::size_t k = 0; k < traj.beat_marks.size(); ++k) {
    CHECK(traj.samples[traj.beat_marks[k]].t ==
          doctest::Approx(k * cfg.model.t_beat).epsilon(1e-12));
  }
  const Trajectory dec = decimate(traj, 4);
  REQUIRE(dec.beat_marks.size() == 3);
  for (std::size_t k = 0; k < dec.beat_marks.size(); ++k) {
    CHECK(dec.samples[dec.beat_marks[k]].t ==
          doctest::Approx(k * cfg.model.t_beat).epsilon(1e-12));
  }
  CHECK(dec.samples.size() < traj.samples.size());
}
