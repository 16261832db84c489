#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace circ {

/// Exact conversion factor between the model's native energy unit and joules.
/// Applied only at report boundaries; everything internal is mmHg, mL, s.
inline constexpr double kJoulePerMmhgMl = 1.33322e-4;

inline constexpr double kSecondsPerDay = 86400.0;

/// Differential state vector of the closed loop: four chamber volumes [mL],
/// four compartment pressures [mmHg], four compartment flows [mL/s].
/// Component order is fixed and is the serialization contract.
struct CirculationState {
  double v_la = 0, v_lv = 0, v_ra = 0, v_rv = 0;
  double p_ar_sys = 0, p_ven_sys = 0, p_ar_pul = 0, p_ven_pul = 0;
  double q_ar_sys = 0, q_ven_sys = 0, q_ar_pul = 0, q_ven_pul = 0;

  static constexpr std::size_t kSize = 12;

  std::array<double, kSize> as_array() const {
    return {v_la,     v_lv,      v_ra,     v_rv,      p_ar_sys, p_ven_sys,
            p_ar_pul, p_ven_pul, q_ar_sys, q_ven_sys, q_ar_pul, q_ven_pul};
  }

  static CirculationState from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10], a[11]};
  }

  static std::string_view component_name(std::size_t i);
};

/// Algebraic state vector: chamber pressures [mmHg] and valve flows [mL/s].
/// In reduced (coupled) mode p_lv is externally imposed, never recomputed
/// from the elastance law.
struct DerivedState {
  double p_lv = 0, p_la = 0, p_rv = 0, p_ra = 0;
  double q_mv = 0, q_av = 0, q_tv = 0, q_pv = 0;

  static constexpr std::size_t kSize = 8;

  std::array<double, kSize> as_array() const {
    return {p_lv, p_la, p_rv, p_ra, q_mv, q_av, q_tv, q_pv};
  }

  static std::string_view component_name(std::size_t i);
};

/// Time-varying elastance chamber: passive and peak active elastance
/// [mmHg/mL], rest volume [mL], and the activation pulse timing [s].
struct ChamberParams {
  double e_pass = 0;     ///< elastance at rest
  double e_act_max = 0;  ///< active elastance added at full contraction
  double v0 = 0;         ///< unloaded volume
  double onset = 0;      ///< activation start within the beat
  double t_contract = 0; ///< half-cosine rise duration
  double t_relax = 0;    ///< half-cosine fall duration
};

/// Diode valve: open/closed resistances [mmHg·s/mL], 0 < r_min < r_max.
struct ValveParams {
  double r_min = 0;
  double r_max = 0;
};

/// RLC vascular compartment: resistance [mmHg·s/mL], compliance [mL/mmHg],
/// inertance [mmHg·s²/mL].
struct CompartmentParams {
  double r = 0;
  double c = 0;
  double l = 0;
};

/// Pressure exerted on the heart by surrounding organs; either constant
/// (amplitude = 0) or a sinusoid periodic with the heartbeat.
struct ExternalPressure {
  double base = 0;       ///< [mmHg]
  double amplitude = 0;  ///< [mmHg]
  double phase = 0;      ///< [rad]

  double value(double t, double t_beat) const {
    if (amplitude == 0.0) return base;
    return base + amplitude * std::sin(2.0 * std::numbers::pi * t / t_beat + phase);
  }

  bool is_constant() const { return amplitude == 0.0; }
};

/// Full parameter set of the closed-loop model.
struct ModelParams {
  ChamberParams la, lv, ra, rv;
  ValveParams mv, av, tv, pv;
  CompartmentParams ar_sys, ven_sys, ar_pul, ven_pul;
  double t_beat = 0.8;  ///< heartbeat period [s]
  ExternalPressure p_ex;

  /// Returns a list of violated invariants (empty when valid).
  std::vector<std::string> validate() const;

  /// Throws ConfigError when any invariant is violated.
  void ensure_valid() const;
};

}  // namespace circ
