#pragma once

#include <cstddef>
#include <vector>

#include "circ/model.hpp"
#include "circ/types.hpp"

namespace circ {

enum class Method {
  fixed_rk4,      ///< classic RK4 at a fixed step
  adaptive_dp54,  ///< Dormand–Prince 5(4) with step-size control
};

struct SolverConfig {
  double dt = 1e-4;  ///< fixed step, or initial step for the adaptive method [s]
  Method method = Method::fixed_rk4;
  double abs_tol = 1e-8;  ///< adaptive absolute tolerance
  double rel_tol = 1e-6;  ///< adaptive relative tolerance
  int max_beats = 60;
  double periodicity_tol = 1e-4;
  double sample_stride = 0;  ///< recording stride [s]; 0 records every step
  /// Split steps at diode switching instants (and, in simulate, align the
  /// step schedule with the activation-waveform knots) so every substep
  /// integrates a smooth right-hand side. Keeps the observed convergence
  /// order at the method's nominal order; see the solver tests.
  bool localize_valve_events = true;

  std::vector<std::string> validate() const;
  void ensure_valid() const;
};

struct Sample {
  double t = 0;
  CirculationState c1;
  DerivedState c2;
};

/// Recorded trajectory. Samples are strictly increasing in time and, in
/// monolithic mode, each c2 equals derived_state(t, c1). beat_marks are
/// sample indices at t = k·t_beat, k = 0..n_beats.
struct Trajectory {
  std::vector<Sample> samples;
  std::vector<std::size_t> beat_marks;
  double t_beat = 0;
  double stride = 0;     ///< nominal sample spacing [s]; 0 when step-resolved
  bool coupled = false;  ///< c2.p_lv imposed by an external chamber

  std::size_t beats() const { return beat_marks.empty() ? 0 : beat_marks.size() - 1; }
};

/// Advance one step of the configured explicit scheme, evaluating the
/// algebraic state at every stage point. Throws IntegrationError when the
/// result has a non-finite component (the message names it and the time).
CirculationState step(double t, const CirculationState& c1, double dt, const ModelParams& params,
                      const SolverConfig& config);

/// Integrate n_beats heartbeats from c1_0, recording samples at the
/// configured stride (beat boundaries are always recorded). Rejects
/// negative chamber volumes as unphysiological.
Trajectory simulate(const ModelParams& params, const CirculationState& c1_0, int n_beats,
                    const SolverConfig& config);

struct PeriodicRegime {
  bool converged = false;
  int beat_index = 0;  ///< first beat k with ‖c1(kT) − c1((k−1)T)‖ ≤ tol
  double residual = 0; ///< norm at the reported beat (or the last beat when not converged)
};

/// Beat-to-beat convergence in a componentwise norm where each component is
/// scaled by its max−min amplitude over the trailing beat. Requires at least
/// two complete beats.
PeriodicRegime detect_periodic_regime(const Trajectory& traj, double tol);

/// Keep every factor-th sample (plus all beat marks). Used to study how
/// analysis quadratures converge with the sampling stride.
Trajectory decimate(const Trajectory& traj, std::size_t factor);

}  // namespace circ
