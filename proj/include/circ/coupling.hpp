#pragma once

#include <memory>
#include <utility>

#include "circ/solver.hpp"
#include "circ/types.hpp"

namespace circ {

/// Pressure-driven chamber standing in for the left-ventricular elastance
/// element. The committed volume after advancing over [t, t+dt] must be
/// continuous and strictly increasing in p_lv over the admissible pressure
/// interval, and advance must be deterministic.
class ExternalChamber {
 public:
  virtual ~ExternalChamber() = default;

  /// Volume reached when advancing the committed state over [t, t+dt] under
  /// the multiplier p_lv. Does not mutate; dt = 0 returns the committed
  /// volume regardless of p_lv.
  virtual double trial_volume(double t, double dt, double p_lv) const = 0;

  /// Commit the step accepted by the coupling solver.
  virtual void accept(double t, double dt, double p_lv) = 0;

  /// Committed volume [mL].
  virtual double volume() const = 0;

  /// Pressure produced by the chamber law at a given volume; used to seed a
  /// consistent multiplier at the start of a coupled run.
  virtual double pressure_from_volume(double t, double v) const = 0;

  /// Admissible multiplier interval [p_lo, p_hi] for a step ending at time t.
  virtual std::pair<double, double> admissible_pressure(double t) const = 0;

  /// Set the committed volume (constraint value) at the start of a run.
  virtual void reset(double t0, double v0) = 0;
};

struct CouplingConfig {
  double tol = 1e-8;          ///< volume-residual tolerance [mL]
  int max_iter = 100;         ///< root-find iteration cap
  double bracket_init = 1.0;  ///< initial half-width of the p_lv bracket [mmHg]
  /// Ramp the multiplier linearly from its previous accepted value to the
  /// trial value across the step's stage evaluations (second-order accurate);
  /// false holds the trial value constant over the step.
  bool ramp_multiplier = true;
};

struct CoupledState {
  CirculationState c1;
  double p_lv = 0;  ///< multiplier accepted at the state's time
};

/// Volume mismatch V_lv(0D) − V(chamber) after advancing copies of both
/// sides over [t, t+dt] under the trial multiplier. Strictly decreasing in
/// p_lv_trial: a higher multiplier inflates the chamber and throttles 0D
/// inflow. dt = 0 returns the current mismatch independent of the trial.
double coupling_residual(double t, double dt, const CoupledState& state,
                         const ExternalChamber& chamber, double p_lv_trial,
                         const ModelParams& params, const CouplingConfig& config);

struct CoupledStepResult {
  CoupledState state;
  double residual = 0;  ///< accepted volume mismatch [mL]
  int iterations = 0;
};

/// Advance the coupled system one step: bracketed secant (bisection
/// fallback) on the multiplier until |residual| ≤ config.tol, then commit.
/// Brackets expand by doubling around the previous multiplier, clipped to
/// the chamber's admissible interval; exhaustion or hitting the iteration
/// cap throws CouplingError.
CoupledStepResult solve_coupled_step(double t, const CoupledState& state, ExternalChamber& chamber,
                                     double dt, const ModelParams& params,
                                     const CouplingConfig& config);

struct CoupledRun {
  Trajectory traj;               ///< c2.p_lv carries the accepted multiplier
  double max_abs_residual = 0;   ///< worst accepted constraint violation [mL]
  int max_iterations = 0;
};

/// Integrate n_beats of the coupled system at the solver's fixed step. The
/// chamber is reset so its committed volume equals c1_0.v_lv at t = 0.
CoupledRun simulate_coupled(const ModelParams& params, const CirculationState& c1_0,
                            ExternalChamber& chamber, int n_beats, const SolverConfig& solver,
                            const CouplingConfig& coupling);

/// Inverse of the time-varying elastance law: V(p, t) = v0 + (p − p_ex)/E(t).
/// Coupling against it must reproduce the monolithic model.
class ElastanceChamber final : public ExternalChamber {
 public:
  ElastanceChamber(const ChamberParams& params, double t_beat, const ExternalPressure& p_ex);

  double trial_volume(double t, double dt, double p_lv) const override;
  void accept(double t, double dt, double p_lv) override;
  double volume() const override { return v_committed_; }
  double pressure_from_volume(double t, double v) const override;
  std::pair<double, double> admissible_pressure(double t) const override;
  void reset(double t0, double v0) override { (void)t0; v_committed_ = v0; }

 private:
  ChamberParams params_;
  double t_beat_;
  ExternalPressure p_ex_;
  double v_committed_ = 0;
};

/// Exponential-passive test chamber:
///   p = p_ex + (e_pass + e_act_max·a(t))·(V − v0) + alpha·(exp(beta·(V − v0)) − 1),
/// inverted numerically for V given p. With alpha → 0 it degenerates to the
/// elastance chamber with the same linear parameters.
struct NonlinearChamberParams {
  ChamberParams lin;   ///< linear part; e_pass may be zero here
  double alpha = 0.5;  ///< passive exponential scale [mmHg]
  double beta = 0.025; ///< passive exponential rate [1/mL]

  std::vector<std::string> validate() const;
};

class NonlinearChamber final : public ExternalChamber {
 public:
  NonlinearChamber(const NonlinearChamberParams& params, double t_beat,
                   const ExternalPressure& p_ex);

  double trial_volume(double t, double dt, double p_lv) const override;
  void accept(double t, double dt, double p_lv) override;
  double volume() const override { return v_committed_; }
  double pressure_from_volume(double t, double v) const override;
  std::pair<double, double> admissible_pressure(double t) const override;
  void reset(double t0, double v0) override { (void)t0; v_committed_ = v0; }

  /// Solve p = law(t, V) for V; bracketed Newton, |ΔV| ≤ 1e-12 mL at exit.
  double invert(double t, double p_lv) const;

 private:
  NonlinearChamberParams params_;
  double t_beat_;
  ExternalPressure p_ex_;
  double v_committed_ = 0;
};

ElastanceChamber reference_elastance_chamber(const ChamberParams& params, double t_beat,
                                             const ExternalPressure& p_ex = {});

NonlinearChamber nonlinear_test_chamber(const NonlinearChamberParams& params, double t_beat,
                                        const ExternalPressure& p_ex = {});

}  // namespace circ
