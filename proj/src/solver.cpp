#include "circ/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circ/errors.hpp"
#include "circ/rk.hpp"

namespace circ {

namespace {

using Vec12 = rk::Vec<CirculationState::kSize>;

struct OdeFn {
  const ModelParams& params;
  Vec12 operator()(double t, const Vec12& y) const {
    const CirculationState c1 = CirculationState::from_array(y);
    return rhs_full(t, c1, derived_state(t, c1, params), params).as_array();
  }
};

/// Open/closed pattern of the four valves at (t, y), one bit per valve.
int valve_pattern(double t, const Vec12& y, const ModelParams& params) {
  const CirculationState c1 = CirculationState::from_array(y);
  const DerivedState c2 = derived_state(t, c1, params);
  int bits = 0;
  if (c2.p_la >= c2.p_lv) bits |= 1;
  if (c2.p_lv >= c1.p_ar_sys) bits |= 2;
  if (c2.p_ra >= c2.p_rv) bits |= 4;
  if (c2.p_rv >= c1.p_ar_pul) bits |= 8;
  return bits;
}

void check_finite(double t, const Vec12& y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw IntegrationError("non-finite state component '" +
                             std::string(CirculationState::component_name(i)) + "' at t = " +
                             std::to_string(t));
    }
  }
}

void check_volumes(double t, const CirculationState& c1) {
  const double vols[4] = {c1.v_la, c1.v_lv, c1.v_ra, c1.v_rv};
  static constexpr const char* names[4] = {"v_la", "v_lv", "v_ra", "v_rv"};
  for (int i = 0; i < 4; ++i) {
    if (vols[i] <= 0.0) {
      throw IntegrationError("chamber volume " + std::string(names[i]) +
                             " became non-positive at t = " + std::to_string(t) +
                             " (unphysiological parameters or timestep)");
    }
  }
}

/// RK4 step that splits at diode switching instants: when the valve pattern
/// changes across the step, the switch time is bracketed by bisection and
/// the step is taken in smooth pieces.
Vec12 rk4_localized(const OdeFn& f, double t, const Vec12& y, double dt, const ModelParams& params,
                    int depth) {
  const Vec12 y_full = rk::rk4_step(f, t, y, dt);
  const int before = valve_pattern(t, y, params);
  if (depth >= 6 || valve_pattern(t + dt, y_full, params) == before) return y_full;

  double lo = 0.0, hi = dt;
  Vec12 y_lo = y;
  for (int it = 0; it < 30 && hi - lo > 1e-9 * dt; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vec12 y_mid = rk::rk4_step(f, t, y, mid);
    if (valve_pattern(t + mid, y_mid, params) == before) {
      lo = mid;
      y_lo = y_mid;
    } else {
      hi = mid;
    }
  }
  if (lo <= 0.0) return y_full;  // switch at the very start; nothing to split
  return rk4_localized(f, t + lo, y_lo, dt - lo, params, depth + 1);
}

Vec12 advance(double t, const Vec12& y, double dt, const ModelParams& params,
              const SolverConfig& config) {
  const OdeFn f{params};
  Vec12 out;
  if (config.method == Method::adaptive_dp54) {
    out = rk::dp54_step(f, t, y, dt, config.abs_tol, config.rel_tol).y;
  } else if (config.localize_valve_events) {
    out = rk4_localized(f, t, y, dt, params, 0);
  } else {
    out = rk::rk4_step(f, t, y, dt);
  }
  check_finite(t + dt, out);
  return out;
}

/// Interior knot times of the activation pulses within one beat. The
/// right-hand side is only C¹ at these instants, so steps must not straddle
/// them if the method is to keep its full order.
std::vector<double> activation_knots(const ModelParams& params) {
  std::vector<double> knots;
  for (const ChamberParams* ch : {&params.la, &params.lv, &params.ra, &params.rv}) {
    knots.push_back(ch->onset);
    knots.push_back(ch->onset + ch->t_contract);
    knots.push_back(ch->onset + ch->t_contract + ch->t_relax);
  }
  std::sort(knots.begin(), knots.end());
  const double tol = 1e-12 * params.t_beat;
  std::vector<double> out;
  for (double k : knots) {
    if (k <= tol || k >= params.t_beat - tol) continue;
    if (!out.empty() && k - out.back() <= tol) continue;
    out.push_back(k);
  }
  return out;
}

}  // namespace

std::vector<std::string> SolverConfig::validate() const {
  std::vector<std::string> out;
  if (!(dt > 0)) out.push_back("solver.dt must be > 0");
  if (!(abs_tol > 0)) out.push_back("solver.abs_tol must be > 0");
  if (!(rel_tol > 0)) out.push_back("solver.rel_tol must be > 0");
  if (max_beats < 1) out.push_back("solver.max_beats must be >= 1");
  if (!(periodicity_tol > 0)) out.push_back("solver.periodicity_tol must be > 0");
  if (sample_stride < 0) out.push_back("solver.sample_stride must be >= 0");
  return out;
}

void SolverConfig::ensure_valid() const {
  auto violations = validate();
  if (violations.empty()) return;
  std::string msg = "invalid solver configuration:";
  for (const auto& v : violations) msg += "\n  " + v;
  throw ConfigError(msg);
}

CirculationState step(double t, const CirculationState& c1, double dt, const ModelParams& params,
                      const SolverConfig& config) {
  if (!(dt > 0)) throw IntegrationError("step requires dt > 0");
  return CirculationState::from_array(advance(t, c1.as_array(), dt, params, config));
}

Trajectory simulate(const ModelParams& params, const CirculationState& c1_0, int n_beats,
                    const SolverConfig& config) {
  params.ensure_valid();
  config.ensure_valid();
  if (n_beats < 1) throw IntegrationError("simulate requires n_beats >= 1");

  Trajectory traj;
  traj.t_beat = params.t_beat;

  auto record = [&](double t, const Vec12& y) {
    const CirculationState c1 = CirculationState::from_array(y);
    traj.samples.push_back({t, c1, derived_state(t, c1, params)});
  };

  Vec12 y = c1_0.as_array();
  check_finite(0.0, y);
  check_volumes(0.0, c1_0);
  record(0.0, y);
  traj.beat_marks.push_back(0);

  if (config.method == Method::fixed_rk4) {
    const long n_per_beat = std::max<long>(1, std::lround(params.t_beat / config.dt));
    const double dt_eff = params.t_beat / static_cast<double>(n_per_beat);
    long k_record = 1;
    if (config.sample_stride > 0) {
      k_record = std::clamp<long>(std::lround(config.sample_stride / dt_eff), 1, n_per_beat);
    }
    traj.stride = static_cast<double>(k_record) * dt_eff;

    // Stops within one beat: the uniform grid, plus (when localizing) the
    // activation knots so no step straddles a C¹ break of the waveforms.
    struct Stop {
      double offset;
      long grid_idx;  // -1 for interior knots
    };
    std::vector<Stop> stops;
    const std::vector<double> knots =
        config.localize_valve_events ? activation_knots(params) : std::vector<double>{};
    const double merge_tol = 1e-9 * dt_eff;
    std::size_t ki = 0;
    for (long i = 1; i <= n_per_beat; ++i) {
      const double g = static_cast<double>(i) * dt_eff;
      while (ki < knots.size() && knots[ki] < g - merge_tol) {
        stops.push_back({knots[ki], -1});
        ++ki;
      }
      if (ki < knots.size() && std::abs(knots[ki] - g) <= merge_tol) ++ki;
      stops.push_back({g, i});
    }

    for (int beat = 0; beat < n_beats; ++beat) {
      const double beat_start = static_cast<double>(beat) * params.t_beat;
      const double beat_end = static_cast<double>(beat + 1) * params.t_beat;
      double prev_offset = 0.0;
      for (const Stop& stop : stops) {
        const bool last = stop.grid_idx == n_per_beat;
        const double t = beat_start + prev_offset;
        const double dt = (last ? beat_end - beat_start : stop.offset) - prev_offset;
        y = advance(t, y, dt, params, config);
        const double t_new = last ? beat_end : beat_start + stop.offset;
        check_volumes(t_new, CirculationState::from_array(y));
        if (last || (stop.grid_idx > 0 && stop.grid_idx % k_record == 0)) record(t_new, y);
        prev_offset = stop.offset;
      }
      traj.beat_marks.push_back(traj.samples.size() - 1);
    }
    return traj;
  }

  // Adaptive: steps land exactly on sample-grid times and beat boundaries.
  const OdeFn f{params};
  const double stride = config.sample_stride > 0 ? config.sample_stride : 0.0;
  traj.stride = stride;
  double dt_cur = std::min(config.dt, params.t_beat);
  for (int beat = 0; beat < n_beats; ++beat) {
    const double beat_start = static_cast<double>(beat) * params.t_beat;
    const double beat_end = static_cast<double>(beat + 1) * params.t_beat;
    double t = beat_start;
    long sample_idx = 1;
    while (t < beat_end - 1e-12 * params.t_beat) {
      double next_stop = beat_end;
      if (stride > 0) {
        next_stop = std::min(next_stop, beat_start + static_cast<double>(sample_idx) * stride);
      }
      const double dt_try = std::min(dt_cur, next_stop - t);
      const auto res = rk::dp54_step(f, t, y, dt_try, config.abs_tol, config.rel_tol);
      const double factor = std::clamp(0.9 * std::pow(std::max(res.err_norm, 1e-10), -0.2), 0.2, 5.0);
      if (res.err_norm <= 1.0) {
        const int before = valve_pattern(t, y, params);
        t += dt_try;
        y = res.y;
        check_finite(t, y);
        check_volumes(t, CirculationState::from_array(y));
        // clamp growth across a diode switch
        const bool switched = valve_pattern(t, y, params) != before;
        dt_cur = dt_try * (switched ? std::min(factor, 1.0) : factor);
        const bool at_stop = std::abs(t - next_stop) <= 1e-12 * params.t_beat;
        if (at_stop && stride > 0 && next_stop < beat_end) {
          record(t, y);
          ++sample_idx;
        } else if (stride == 0 && t < beat_end - 1e-12 * params.t_beat) {
          record(t, y);
        }
      } else {
        dt_cur = dt_try * factor;
        if (dt_cur < 1e-14) {
          throw IntegrationError("adaptive step size underflow at t = " + std::to_string(t));
        }
      }
    }
    record(beat_end, y);
    traj.beat_marks.push_back(traj.samples.size() - 1);
  }
  return traj;
}

PeriodicRegime detect_periodic_regime(const Trajectory& traj, double tol) {
  if (traj.beats() < 2) {
    throw AnalysisError("periodicity detection requires at least two complete beats");
  }
  PeriodicRegime out;
  for (std::size_t k = 1; k < traj.beat_marks.size(); ++k) {
    const auto prev = traj.samples[traj.beat_marks[k - 1]].c1.as_array();
    const auto cur = traj.samples[traj.beat_marks[k]].c1.as_array();

    std::array<double, CirculationState::kSize> lo = cur, hi = cur;
    for (std::size_t s = traj.beat_marks[k - 1]; s <= traj.beat_marks[k]; ++s) {
      const auto a = traj.samples[s].c1.as_array();
      for (std::size_t i = 0; i < a.size(); ++i) {
        lo[i] = std::min(lo[i], a[i]);
        hi[i] = std::max(hi[i], a[i]);
      }
    }
    double r = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double amp = hi[i] - lo[i];
      const double scale = std::max(amp, 1e-9 * std::max(1.0, std::abs(cur[i])));
      r = std::max(r, std::abs(cur[i] - prev[i]) / scale);
    }
    out.beat_index = static_cast<int>(k);
    out.residual = r;
    if (r <= tol) {
      out.converged = true;
      return out;
    }
  }
  out.converged = false;
  return out;
}

Trajectory decimate(const Trajectory& traj, std::size_t factor) {
  if (factor <= 1) return traj;
  Trajectory out;
  out.t_beat = traj.t_beat;
  out.stride = traj.stride * static_cast<double>(factor);
  out.coupled = traj.coupled;
  std::size_t next_mark = 0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const bool is_mark = next_mark < traj.beat_marks.size() && traj.beat_marks[next_mark] == i;
    if (is_mark || i % factor == 0) {
      out.samples.push_back(traj.samples[i]);
      if (is_mark) {
        out.beat_marks.push_back(out.samples.size() - 1);
        ++next_mark;
      }
    }
  }
  return out;
}

}  // namespace circ
