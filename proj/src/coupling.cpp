#include "circ/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circ/errors.hpp"
#include "circ/rk.hpp"

namespace circ {

namespace {

using Vec12 = rk::Vec<CirculationState::kSize>;

// Volume guard range mapped to the admissible multiplier interval of both
// built-in chambers.
constexpr double kVolLo = 1.0;
constexpr double kVolHi = 900.0;

/// Advance c1 one RK4 step of the reduced system. The multiplier is ramped
/// linearly from p_start to p_end across the step (or held at p_end).
CirculationState advance_reduced(double t, double dt, const CirculationState& c1, double p_start,
                                 double p_end, bool ramp, const ModelParams& params) {
  auto f = [&](double t_stage, const Vec12& y) {
    const double w = ramp ? std::clamp((t_stage - t) / dt, 0.0, 1.0) : 1.0;
    const double p = p_start + w * (p_end - p_start);
    return rhs_reduced(t_stage, CirculationState::from_array(y), p, params).as_array();
  };
  const Vec12 y1 = rk::rk4_step(f, t, c1.as_array(), dt);
  for (std::size_t i = 0; i < y1.size(); ++i) {
    if (!std::isfinite(y1[i])) {
      throw IntegrationError("non-finite state component '" +
                             std::string(CirculationState::component_name(i)) +
                             "' in coupled step at t = " + std::to_string(t));
    }
  }
  return CirculationState::from_array(y1);
}

std::string format_pressure(double p) {
  return std::to_string(p) + " mmHg";
}

}  // namespace

double coupling_residual(double t, double dt, const CoupledState& state,
                         const ExternalChamber& chamber, double p_lv_trial,
                         const ModelParams& params, const CouplingConfig& config) {
  if (dt == 0.0) return state.c1.v_lv - chamber.volume();
  const CirculationState c1_new =
      advance_reduced(t, dt, state.c1, state.p_lv, p_lv_trial, config.ramp_multiplier, params);
  return c1_new.v_lv - chamber.trial_volume(t, dt, p_lv_trial);
}

CoupledStepResult solve_coupled_step(double t, const CoupledState& state, ExternalChamber& chamber,
                                     double dt, const ModelParams& params,
                                     const CouplingConfig& config) {
  const auto [p_adm_lo, p_adm_hi] = chamber.admissible_pressure(t + dt);
  int iters = 0;
  auto residual_at = [&](double p) {
    ++iters;
    return coupling_residual(t, dt, state, chamber, p, params, config);
  };
  auto accept = [&](double p, double r) {
    chamber.accept(t, dt, p);
    CoupledStepResult out;
    out.state.c1 =
        advance_reduced(t, dt, state.c1, state.p_lv, p, config.ramp_multiplier, params);
    out.state.p_lv = p;
    out.residual = r;
    out.iterations = iters;
    return out;
  };

  const double p0 = std::clamp(state.p_lv, p_adm_lo, p_adm_hi);
  const double r0 = residual_at(p0);
  if (std::abs(r0) <= config.tol) return accept(p0, r0);

  // The residual decreases in p, so a positive residual means the root lies
  // at higher pressure. Expand a doubling window on that side only.
  double a, b, ra, rb;  // bracket with ra >= 0 >= rb
  const bool upward = r0 > 0;
  a = b = p0;
  ra = rb = r0;
  double width = config.bracket_init;
  while (true) {
    if (iters >= config.max_iter) {
      throw CouplingError("coupling bracket search exceeded the iteration cap at t = " +
                          std::to_string(t));
    }
    const double cand = upward ? std::min(p0 + width, p_adm_hi) : std::max(p0 - width, p_adm_lo);
    const double rc = residual_at(cand);
    if (upward) {
      b = cand;
      rb = rc;
      if (rb <= 0.0) break;
      a = cand;
      ra = rc;
    } else {
      a = cand;
      ra = rc;
      if (ra >= 0.0) break;
      b = cand;
      rb = rc;
    }
    const bool exhausted = upward ? cand >= p_adm_hi : cand <= p_adm_lo;
    if (exhausted) {
      throw CouplingError(
          "coupling bracket exhausted the admissible pressure interval at t = " +
          std::to_string(t) + ": residual(" + format_pressure(a) + ") = " + std::to_string(ra) +
          " mL, residual(" + format_pressure(b) + ") = " + std::to_string(rb) + " mL");
    }
    width *= 2.0;
  }
  if (std::abs(ra) <= config.tol) return accept(a, ra);
  if (std::abs(rb) <= config.tol) return accept(b, rb);

  // Illinois-regula-falsi on the bracket; bisection when the secant step
  // leaves it.
  int side = 0;
  while (iters < config.max_iter) {
    double p = b - rb * (b - a) / (rb - ra);
    if (!std::isfinite(p) || p <= std::min(a, b) || p >= std::max(a, b)) {
      p = 0.5 * (a + b);
    }
    const double r = residual_at(p);
    if (std::abs(r) <= config.tol) return accept(p, r);
    if (r > 0.0) {
      a = p;
      ra = r;
      if (side == 1) rb *= 0.5;
      side = 1;
    } else {
      b = p;
      rb = r;
      if (side == -1) ra *= 0.5;
      side = -1;
    }
    if (std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(b))) {
      throw CouplingError("coupling root-find stagnated at t = " + std::to_string(t) +
                          " with residual " + std::to_string(std::min(std::abs(ra), std::abs(rb))) +
                          " mL");
    }
  }
  throw CouplingError("coupling root-find exceeded " + std::to_string(config.max_iter) +
                      " iterations at t = " + std::to_string(t));
}

CoupledRun simulate_coupled(const ModelParams& params, const CirculationState& c1_0,
                            ExternalChamber& chamber, int n_beats, const SolverConfig& solver,
                            const CouplingConfig& coupling) {
  params.ensure_valid();
  solver.ensure_valid();
  if (solver.method != Method::fixed_rk4) {
    throw ConfigError("coupled mode requires the fixed-step method");
  }
  if (n_beats < 1) throw IntegrationError("simulate_coupled requires n_beats >= 1");

  CoupledRun run;
  run.traj.t_beat = params.t_beat;
  run.traj.coupled = true;

  chamber.reset(0.0, c1_0.v_lv);
  CoupledState state{c1_0, chamber.pressure_from_volume(0.0, c1_0.v_lv)};

  auto record = [&](double t) {
    run.traj.samples.push_back(
        {t, state.c1, derived_state_reduced(t, state.c1, state.p_lv, params)});
  };
  record(0.0);
  run.traj.beat_marks.push_back(0);

  const long n_per_beat = std::max<long>(1, std::lround(params.t_beat / solver.dt));
  const double dt_eff = params.t_beat / static_cast<double>(n_per_beat);
  long k_record = 1;
  if (solver.sample_stride > 0) {
    k_record = std::clamp<long>(std::lround(solver.sample_stride / dt_eff), 1, n_per_beat);
  }
  run.traj.stride = static_cast<double>(k_record) * dt_eff;
  for (int beat = 0; beat < n_beats; ++beat) {
    const double beat_start = static_cast<double>(beat) * params.t_beat;
    const double beat_end = static_cast<double>(beat + 1) * params.t_beat;
    for (long i = 0; i < n_per_beat; ++i) {
      const double t = beat_start + static_cast<double>(i) * dt_eff;
      const bool last = (i == n_per_beat - 1);
      const double dt = last ? beat_end - t : dt_eff;
      auto res = solve_coupled_step(t, state, chamber, dt, params, coupling);
      state = res.state;
      run.max_abs_residual = std::max(run.max_abs_residual, std::abs(res.residual));
      run.max_iterations = std::max(run.max_iterations, res.iterations);
      const double t_new = last ? beat_end : beat_start + static_cast<double>(i + 1) * dt_eff;
      if (state.c1.v_lv <= 0.0 || state.c1.v_la <= 0.0 || state.c1.v_ra <= 0.0 ||
          state.c1.v_rv <= 0.0) {
        throw IntegrationError("chamber volume became non-positive at t = " +
                               std::to_string(t_new) + " in coupled mode");
      }
      if (last || (i + 1) % k_record == 0) record(t_new);
    }
    run.traj.beat_marks.push_back(run.traj.samples.size() - 1);
  }
  return run;
}

ElastanceChamber::ElastanceChamber(const ChamberParams& params, double t_beat,
                                   const ExternalPressure& p_ex)
    : params_(params), t_beat_(t_beat), p_ex_(p_ex) {
  if (!(params.e_pass > 0)) throw ConfigError("elastance chamber requires e_pass > 0");
}

double ElastanceChamber::trial_volume(double t, double dt, double p_lv) const {
  if (dt == 0.0) return v_committed_;
  const double te = t + dt;
  const double e = elastance_at(params_, te, t_beat_);
  return params_.v0 + (p_lv - p_ex_.value(te, t_beat_)) / e;
}

void ElastanceChamber::accept(double t, double dt, double p_lv) {
  v_committed_ = trial_volume(t, dt, p_lv);
}

double ElastanceChamber::pressure_from_volume(double t, double v) const {
  return chamber_pressure(elastance_at(params_, t, t_beat_), v, params_.v0,
                          p_ex_.value(t, t_beat_));
}

std::pair<double, double> ElastanceChamber::admissible_pressure(double t) const {
  return {pressure_from_volume(t, kVolLo), pressure_from_volume(t, kVolHi)};
}

std::vector<std::string> NonlinearChamberParams::validate() const {
  std::vector<std::string> out;
  if (!(alpha > 0)) out.push_back("ext_chamber.alpha must be > 0");
  if (!(beta > 0)) out.push_back("ext_chamber.beta must be > 0");
  if (lin.e_pass < 0) out.push_back("ext_chamber.e_lin_pass must be >= 0");
  if (lin.e_act_max < 0) out.push_back("ext_chamber.e_act_max must be >= 0");
  if (lin.v0 < 0) out.push_back("ext_chamber.v0 must be >= 0");
  return out;
}

NonlinearChamber::NonlinearChamber(const NonlinearChamberParams& params, double t_beat,
                                   const ExternalPressure& p_ex)
    : params_(params), t_beat_(t_beat), p_ex_(p_ex) {
  auto violations = params.validate();
  if (!violations.empty()) {
    std::string msg = "invalid nonlinear chamber parameters:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }
}

double NonlinearChamber::pressure_from_volume(double t, double v) const {
  const double e_lin = params_.lin.e_pass + params_.lin.e_act_max * activation(params_.lin, t, t_beat_);
  const double dv = v - params_.lin.v0;
  return p_ex_.value(t, t_beat_) + e_lin * dv + params_.alpha * (std::exp(params_.beta * dv) - 1.0);
}

double NonlinearChamber::invert(double t, double p_lv) const {
  const double e_lin = params_.lin.e_pass + params_.lin.e_act_max * activation(params_.lin, t, t_beat_);
  const double p_ex = p_ex_.value(t, t_beat_);
  auto law = [&](double v) {
    const double dv = v - params_.lin.v0;
    return p_ex + e_lin * dv + params_.alpha * (std::exp(params_.beta * dv) - 1.0) - p_lv;
  };
  double lo = kVolLo, hi = kVolHi;
  if (law(lo) > 0.0 || law(hi) < 0.0) {
    throw CouplingError("chamber advance failure: trial pressure " + format_pressure(p_lv) +
                        " outside the admissible interval at t = " + std::to_string(t));
  }
  double v = std::clamp(v_committed_, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double f = law(v);
    if (f > 0.0) {
      hi = v;
    } else {
      lo = v;
    }
    const double fp = e_lin + params_.alpha * params_.beta * std::exp(params_.beta * (v - params_.lin.v0));
    double v_new = v - f / fp;
    if (!(v_new > lo && v_new < hi)) v_new = 0.5 * (lo + hi);
    if (std::abs(v_new - v) <= 1e-12) return v_new;
    v = v_new;
  }
  throw CouplingError("chamber volume inversion did not converge for trial pressure " +
                      format_pressure(p_lv) + " at t = " + std::to_string(t));
}

double NonlinearChamber::trial_volume(double t, double dt, double p_lv) const {
  if (dt == 0.0) return v_committed_;
  return invert(t + dt, p_lv);
}

void NonlinearChamber::accept(double t, double dt, double p_lv) {
  v_committed_ = trial_volume(t, dt, p_lv);
}

std::pair<double, double> NonlinearChamber::admissible_pressure(double t) const {
  return {pressure_from_volume(t, kVolLo), pressure_from_volume(t, kVolHi)};
}

ElastanceChamber reference_elastance_chamber(const ChamberParams& params, double t_beat,
                                             const ExternalPressure& p_ex) {
  return ElastanceChamber(params, t_beat, p_ex);
}

NonlinearChamber nonlinear_test_chamber(const NonlinearChamberParams& params, double t_beat,
                                        const ExternalPressure& p_ex) {
  return NonlinearChamber(params, t_beat, p_ex);
}

}  // namespace circ
