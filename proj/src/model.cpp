#include "circ/model.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "circ/errors.hpp"

namespace circ {

namespace {

std::string_view kC1Names[CirculationState::kSize] = {
    "v_la",     "v_lv",      "v_ra",     "v_rv",      "p_ar_sys", "p_ven_sys",
    "p_ar_pul", "p_ven_pul", "q_ar_sys", "q_ven_sys", "q_ar_pul", "q_ven_pul"};

std::string_view kC2Names[DerivedState::kSize] = {"p_lv", "p_la", "p_rv", "p_ra",
                                                  "q_mv", "q_av", "q_tv", "q_pv"};

void require(std::vector<std::string>& out, bool ok, const std::string& what) {
  if (!ok) out.push_back(what);
}

void validate_chamber(std::vector<std::string>& out, const ChamberParams& ch, double t_beat,
                      const std::string& name) {
  require(out, ch.e_pass > 0, name + ".e_pass must be > 0");
  require(out, ch.e_act_max >= 0, name + ".e_act_max must be >= 0");
  require(out, ch.v0 >= 0, name + ".v0 must be >= 0");
  require(out, ch.onset >= 0, name + ".onset must be >= 0");
  require(out, ch.t_contract > 0, name + ".t_contract must be > 0");
  require(out, ch.t_relax > 0, name + ".t_relax must be > 0");
  require(out, ch.onset + ch.t_contract + ch.t_relax <= t_beat,
          name + ": onset + t_contract + t_relax must fit within one beat");
}

void validate_valve(std::vector<std::string>& out, const ValveParams& v, const std::string& name) {
  require(out, v.r_min > 0, name + ".r_min must be > 0");
  require(out, std::isfinite(v.r_max) && v.r_max > v.r_min,
          name + ".r_max must be finite and > r_min");
}

void validate_compartment(std::vector<std::string>& out, const CompartmentParams& c,
                          const std::string& name) {
  require(out, c.r > 0, name + ".r must be > 0");
  require(out, c.c > 0, name + ".c must be > 0");
  require(out, c.l > 0, name + ".l must be > 0");
}

}  // namespace

std::string_view CirculationState::component_name(std::size_t i) { return kC1Names[i]; }

std::string_view DerivedState::component_name(std::size_t i) { return kC2Names[i]; }

std::vector<std::string> ModelParams::validate() const {
  std::vector<std::string> out;
  require(out, t_beat > 0, "model.t_beat must be > 0");
  if (t_beat > 0) {
    validate_chamber(out, la, t_beat, "chamber.la");
    validate_chamber(out, lv, t_beat, "chamber.lv");
    validate_chamber(out, ra, t_beat, "chamber.ra");
    validate_chamber(out, rv, t_beat, "chamber.rv");
  }
  validate_valve(out, mv, "valve.mv");
  validate_valve(out, av, "valve.av");
  validate_valve(out, tv, "valve.tv");
  validate_valve(out, pv, "valve.pv");
  validate_compartment(out, ar_sys, "compartment.ar_sys");
  validate_compartment(out, ven_sys, "compartment.ven_sys");
  validate_compartment(out, ar_pul, "compartment.ar_pul");
  validate_compartment(out, ven_pul, "compartment.ven_pul");
  return out;
}

void ModelParams::ensure_valid() const {
  auto violations = validate();
  if (violations.empty()) return;
  std::string msg = "invalid model parameters:";
  for (const auto& v : violations) msg += "\n  " + v;
  throw ConfigError(msg);
}

double activation(const ChamberParams& chamber, double t, double t_beat) {
  double tau = std::fmod(t - chamber.onset, t_beat);
  if (tau < 0) tau += t_beat;
  if (tau < chamber.t_contract) {
    return 0.5 * (1.0 - std::cos(std::numbers::pi * tau / chamber.t_contract));
  }
  tau -= chamber.t_contract;
  if (tau < chamber.t_relax) {
    return 0.5 * (1.0 + std::cos(std::numbers::pi * tau / chamber.t_relax));
  }
  return 0.0;
}

double elastance_at(const ChamberParams& chamber, double t, double t_beat) {
  return chamber.e_pass + chamber.e_act_max * activation(chamber, t, t_beat);
}

double chamber_pressure(double e, double v, double v0, double p_ex) {
  return p_ex + e * (v - v0);
}

double valve_resistance(double p_upstream, double p_downstream, const ValveParams& valve) {
  return p_upstream >= p_downstream ? valve.r_min : valve.r_max;
}

double valve_flow(double p_upstream, double p_downstream, const ValveParams& valve) {
  return (p_upstream - p_downstream) / valve_resistance(p_upstream, p_downstream, valve);
}

DerivedState derived_state(double t, const CirculationState& c1, const ModelParams& params) {
  const double p_ex = params.p_ex.value(t, params.t_beat);
  const double p_lv =
      chamber_pressure(elastance_at(params.lv, t, params.t_beat), c1.v_lv, params.lv.v0, p_ex);
  return derived_state_reduced(t, c1, p_lv, params);
}

DerivedState derived_state_reduced(double t, const CirculationState& c1, double p_lv,
                                   const ModelParams& params) {
  const double p_ex = params.p_ex.value(t, params.t_beat);
  DerivedState c2;
  c2.p_lv = p_lv;
  c2.p_la = chamber_pressure(elastance_at(params.la, t, params.t_beat), c1.v_la, params.la.v0, p_ex);
  c2.p_rv = chamber_pressure(elastance_at(params.rv, t, params.t_beat), c1.v_rv, params.rv.v0, p_ex);
  c2.p_ra = chamber_pressure(elastance_at(params.ra, t, params.t_beat), c1.v_ra, params.ra.v0, p_ex);
  c2.q_mv = valve_flow(c2.p_la, c2.p_lv, params.mv);
  c2.q_av = valve_flow(c2.p_lv, c1.p_ar_sys, params.av);
  c2.q_tv = valve_flow(c2.p_ra, c2.p_rv, params.tv);
  c2.q_pv = valve_flow(c2.p_rv, c1.p_ar_pul, params.pv);
  return c2;
}

CirculationState rhs_full(double /*t*/, const CirculationState& c1, const DerivedState& c2,
                          const ModelParams& params) {
  CirculationState d;
  d.v_la = c1.q_ven_pul - c2.q_mv;
  d.v_lv = c2.q_mv - c2.q_av;
  d.v_ra = c1.q_ven_sys - c2.q_tv;
  d.v_rv = c2.q_tv - c2.q_pv;

  d.p_ar_sys = (c2.q_av - c1.q_ar_sys) / params.ar_sys.c;
  d.p_ven_sys = (c1.q_ar_sys - c1.q_ven_sys) / params.ven_sys.c;
  d.p_ar_pul = (c2.q_pv - c1.q_ar_pul) / params.ar_pul.c;
  d.p_ven_pul = (c1.q_ar_pul - c1.q_ven_pul) / params.ven_pul.c;

  d.q_ar_sys = ((c1.p_ar_sys - c1.p_ven_sys) - params.ar_sys.r * c1.q_ar_sys) / params.ar_sys.l;
  d.q_ven_sys = ((c1.p_ven_sys - c2.p_ra) - params.ven_sys.r * c1.q_ven_sys) / params.ven_sys.l;
  d.q_ar_pul = ((c1.p_ar_pul - c1.p_ven_pul) - params.ar_pul.r * c1.q_ar_pul) / params.ar_pul.l;
  d.q_ven_pul = ((c1.p_ven_pul - c2.p_la) - params.ven_pul.r * c1.q_ven_pul) / params.ven_pul.l;
  return d;
}

CirculationState rhs_reduced(double t, const CirculationState& c1, double p_lv,
                             const ModelParams& params) {
  return rhs_full(t, c1, derived_state_reduced(t, c1, p_lv, params), params);
}

double total_blood_volume(const CirculationState& c1, const ModelParams& params) {
  return c1.v_la + c1.v_lv + c1.v_ra + c1.v_rv + params.ar_sys.c * c1.p_ar_sys +
         params.ven_sys.c * c1.p_ven_sys + params.ar_pul.c * c1.p_ar_pul +
         params.ven_pul.c * c1.p_ven_pul;
}

}  // namespace circ
