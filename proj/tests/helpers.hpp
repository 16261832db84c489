#pragma once

#include <random>

#include "circ/config.hpp"
#include "circ/types.hpp"

namespace circ::test {

inline RunConfig default_run_config() { return parse_config(default_config_text()); }

inline ModelParams default_params() { return default_run_config().model; }

inline CirculationState default_initial() { return default_run_config().initial; }

inline CirculationState random_state(std::mt19937& rng) {
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

}  // namespace circ::test
