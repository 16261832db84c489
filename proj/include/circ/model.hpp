#pragma once

#include "circ/types.hpp"

namespace circ {

/// Activation pulse a(t) in [0, 1]: half-cosine rise over t_contract,
/// half-cosine fall over t_relax, zero elsewhere; periodic with t_beat
/// and C¹ in t. The chamber's onset shifts the pulse within the beat.
double activation(const ChamberParams& chamber, double t, double t_beat);

/// Chamber elastance E(t) = e_pass + e_act_max · a(t) [mmHg/mL].
double elastance_at(const ChamberParams& chamber, double t, double t_beat);

/// Linear pressure–volume law p = p_ex + e·(v − v0) [mmHg].
double chamber_pressure(double e, double v, double v0, double p_ex);

/// Diode law: r_min when the upstream pressure is at least the downstream
/// pressure (open; equality counts as open), r_max otherwise.
double valve_resistance(double p_upstream, double p_downstream, const ValveParams& valve);

/// Flow through a diode valve, (p_up − p_down) / R(p_up, p_down) [mL/s].
double valve_flow(double p_upstream, double p_downstream, const ValveParams& valve);

/// Evaluates the full algebraic vector c2 = W(t, c1): all chamber pressures
/// from the elastance law, then all valve flows.
DerivedState derived_state(double t, const CirculationState& c1, const ModelParams& params);

/// Reduced form W̃(t, c1, p_lv): identical to derived_state except that the
/// left-ventricular pressure is the supplied multiplier.
DerivedState derived_state_reduced(double t, const CirculationState& c1, double p_lv,
                                   const ModelParams& params);

/// Right-hand side D(t, c1, c2) of the twelve differential equations.
/// Volumes: flux differences. Compartment pressures: flux difference / C.
/// Compartment flows: ((p_up − p_down) − R·Q) / L.
CirculationState rhs_full(double t, const CirculationState& c1, const DerivedState& c2,
                          const ModelParams& params);

/// Reduced right-hand side D̃(t, c1, p_lv) = D(t, c1, W̃(t, c1, p_lv)).
CirculationState rhs_reduced(double t, const CirculationState& c1, double p_lv,
                             const ModelParams& params);

/// Conserved total ΣV_i + Σ C_j^k·p_j^k [mL] (compartment rest volumes are
/// unknown constants and omitted; only the drift is meaningful).
double total_blood_volume(const CirculationState& c1, const ModelParams& params);

}  // namespace circ
