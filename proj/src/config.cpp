#include "circ/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "circ/errors.hpp"

namespace circ {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class Binder {
 public:
  explicit Binder(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line =
          nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        error("line " + std::to_string(line_no) + ": expected key = value");
        continue;
      }
      const std::string key{trim(line.substr(0, eq))};
      const std::string value{trim(line.substr(eq + 1))};
      if (key.empty()) {
        error("line " + std::to_string(line_no) + ": empty key");
        continue;
      }
      auto [it, inserted] = entries_.try_emplace(key, Entry{value, line_no});
      if (!inserted) {
        error("duplicate key '" + key + "' at lines " + std::to_string(it->second.line) + " and " +
              std::to_string(line_no));
      }
    }
  }

  void error(std::string msg) { errors_.push_back(std::move(msg)); }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double required_real(const std::string& key) {
    Entry* e = find(key);
    if (!e) {
      error("missing required key: " + key);
      return 0.0;
    }
    return parse_real(key, *e);
  }

  double real(const std::string& key, double def) {
    Entry* e = find(key);
    return e ? parse_real(key, *e) : def;
  }

  int integer(const std::string& key, int def) {
    Entry* e = find(key);
    if (!e) return def;
    const char* begin = e->value.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') {
      error("line " + std::to_string(e->line) + ": value of '" + key + "' is not an integer");
      return def;
    }
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool def) {
    Entry* e = find(key);
    if (!e) return def;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    error("line " + std::to_string(e->line) + ": value of '" + key +
          "' must be true or false");
    return def;
  }

  std::string text(const std::string& key, std::string def) {
    Entry* e = find(key);
    return e ? e->value : std::move(def);
  }

  int enumeration(const std::string& key, const std::vector<std::string>& values, int def) {
    Entry* e = find(key);
    if (!e) return def;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (e->value == values[i]) return static_cast<int>(i);
    }
    std::string allowed;
    for (const auto& v : values) allowed += (allowed.empty() ? "" : ", ") + v;
    error("line " + std::to_string(e->line) + ": value of '" + key + "' must be one of: " +
          allowed);
    return def;
  }

  void finish() {
    for (const auto& [key, e] : entries_) {
      if (!e.used) error("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
    }
    if (errors_.empty()) return;
    std::sort(errors_.begin(), errors_.end());  // stable report order
    std::string msg = "configuration errors:";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw ConfigError(msg);
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  double parse_real(const std::string& key, Entry& e) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      error("line " + std::to_string(e.line) + ": value of '" + key + "' is not a number");
      return 0.0;
    }
    return v;
  }

  std::map<std::string, Entry> entries_;
  std::vector<std::string> errors_;
};

ChamberParams parse_chamber(Binder& b, const std::string& prefix) {
  ChamberParams ch;
  ch.e_pass = b.required_real(prefix + ".e_pass");
  ch.e_act_max = b.required_real(prefix + ".e_act_max");
  ch.v0 = b.required_real(prefix + ".v0");
  ch.onset = b.required_real(prefix + ".onset");
  ch.t_contract = b.required_real(prefix + ".t_contract");
  ch.t_relax = b.required_real(prefix + ".t_relax");
  return ch;
}

ValveParams parse_valve(Binder& b, const std::string& prefix) {
  ValveParams v;
  v.r_min = b.required_real(prefix + ".r_min");
  v.r_max = b.required_real(prefix + ".r_max");
  return v;
}

CompartmentParams parse_compartment(Binder& b, const std::string& prefix) {
  CompartmentParams c;
  c.r = b.required_real(prefix + ".r");
  c.c = b.required_real(prefix + ".c");
  c.l = b.required_real(prefix + ".l");
  return c;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  Binder b(text);
  RunConfig cfg;

  cfg.model.t_beat = b.required_real("model.t_beat");
  cfg.model.p_ex.base = b.real("model.p_ex", 0.0);
  cfg.model.p_ex.amplitude = b.real("model.p_ex_amplitude", 0.0);
  cfg.model.p_ex.phase = b.real("model.p_ex_phase", 0.0);

  cfg.model.la = parse_chamber(b, "chamber.la");
  cfg.model.lv = parse_chamber(b, "chamber.lv");
  cfg.model.ra = parse_chamber(b, "chamber.ra");
  cfg.model.rv = parse_chamber(b, "chamber.rv");

  cfg.model.mv = parse_valve(b, "valve.mv");
  cfg.model.av = parse_valve(b, "valve.av");
  cfg.model.tv = parse_valve(b, "valve.tv");
  cfg.model.pv = parse_valve(b, "valve.pv");

  cfg.model.ar_sys = parse_compartment(b, "compartment.ar_sys");
  cfg.model.ven_sys = parse_compartment(b, "compartment.ven_sys");
  cfg.model.ar_pul = parse_compartment(b, "compartment.ar_pul");
  cfg.model.ven_pul = parse_compartment(b, "compartment.ven_pul");

  // initial state (end-diastolic-ish guesses; flows at rest)
  cfg.initial.v_la = b.real("init.v_la", 65.0);
  cfg.initial.v_lv = b.real("init.v_lv", 120.0);
  cfg.initial.v_ra = b.real("init.v_ra", 65.0);
  cfg.initial.v_rv = b.real("init.v_rv", 120.0);
  cfg.initial.p_ar_sys = b.real("init.p_ar_sys", 80.0);
  cfg.initial.p_ven_sys = b.real("init.p_ven_sys", 8.0);
  cfg.initial.p_ar_pul = b.real("init.p_ar_pul", 16.0);
  cfg.initial.p_ven_pul = b.real("init.p_ven_pul", 10.0);
  cfg.initial.q_ar_sys = b.real("init.q_ar_sys", 0.0);
  cfg.initial.q_ven_sys = b.real("init.q_ven_sys", 0.0);
  cfg.initial.q_ar_pul = b.real("init.q_ar_pul", 0.0);
  cfg.initial.q_ven_pul = b.real("init.q_ven_pul", 0.0);

  cfg.solver.dt = b.real("solver.dt", 1e-4);
  cfg.solver.method = b.enumeration("solver.method", {"rk4", "dp54"}, 0) == 0
                          ? Method::fixed_rk4
                          : Method::adaptive_dp54;
  cfg.solver.abs_tol = b.real("solver.abs_tol", 1e-8);
  cfg.solver.rel_tol = b.real("solver.rel_tol", 1e-6);
  cfg.solver.max_beats = b.integer("solver.max_beats", 60);
  cfg.solver.periodicity_tol = b.real("solver.periodicity_tol", 1e-4);
  cfg.solver.sample_stride = b.real("solver.sample_stride", 0.0);
  cfg.solver.localize_valve_events = b.boolean("solver.valve_events", true);

  cfg.mode = b.enumeration("run.mode", {"monolithic", "coupled"}, 0) == 0 ? RunMode::monolithic
                                                                          : RunMode::coupled;
  cfg.chamber = b.enumeration("run.chamber", {"elastance", "nonlinear"}, 0) == 0
                    ? ChamberKind::elastance
                    : ChamberKind::nonlinear;
  cfg.beats = b.integer("run.beats", 20);
  cfg.analyze_beats = b.integer("run.analyze_beats", 1);
  cfg.out_dir = b.text("run.out_dir", ".");
  cfg.report_format = b.enumeration("run.report_format", {"text", "json"}, 0) == 0
                          ? ReportFormat::text
                          : ReportFormat::json;

  cfg.coupling.tol = b.real("coupling.tol", 1e-8);
  cfg.coupling.max_iter = b.integer("coupling.max_iter", 100);
  cfg.coupling.bracket_init = b.real("coupling.bracket_init", 1.0);
  cfg.coupling.ramp_multiplier = b.boolean("coupling.ramp_multiplier", true);

  // The nonlinear stand-in chamber defaults to the LV's activation with a
  // purely exponential passive law.
  cfg.ext_chamber.lin.e_pass = b.real("ext_chamber.e_lin_pass", 0.0);
  cfg.ext_chamber.lin.e_act_max = b.real("ext_chamber.e_act_max", cfg.model.lv.e_act_max);
  cfg.ext_chamber.lin.v0 = b.real("ext_chamber.v0", cfg.model.lv.v0);
  cfg.ext_chamber.lin.onset = b.real("ext_chamber.onset", cfg.model.lv.onset);
  cfg.ext_chamber.lin.t_contract = b.real("ext_chamber.t_contract", cfg.model.lv.t_contract);
  cfg.ext_chamber.lin.t_relax = b.real("ext_chamber.t_relax", cfg.model.lv.t_relax);
  cfg.ext_chamber.alpha = b.real("ext_chamber.alpha", 0.5);
  cfg.ext_chamber.beta = b.real("ext_chamber.beta", 0.025);

  // cross-field invariants
  for (auto& v : cfg.model.validate()) b.error(v);
  for (auto& v : cfg.solver.validate()) b.error(v);
  if (cfg.chamber == ChamberKind::nonlinear) {
    for (auto& v : cfg.ext_chamber.validate()) b.error(v);
  }
  if (cfg.beats < 1) b.error("run.beats must be >= 1");
  if (cfg.analyze_beats < 1) b.error("run.analyze_beats must be >= 1");
  if (cfg.analyze_beats > cfg.beats) b.error("run.analyze_beats must not exceed run.beats");
  if (cfg.coupling.tol <= 0) b.error("coupling.tol must be > 0");
  if (cfg.coupling.max_iter < 1) b.error("coupling.max_iter must be >= 1");
  if (cfg.coupling.bracket_init <= 0) b.error("coupling.bracket_init must be > 0");

  b.finish();
  return cfg;
}

std::unique_ptr<ExternalChamber> make_external_chamber(const RunConfig& cfg) {
  if (cfg.chamber == ChamberKind::elastance) {
    return std::make_unique<ElastanceChamber>(cfg.model.lv, cfg.model.t_beat, cfg.model.p_ex);
  }
  return std::make_unique<NonlinearChamber>(cfg.ext_chamber, cfg.model.t_beat, cfg.model.p_ex);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string_view default_config_text() {
  // Baseline closed-loop calibration. Produces systolic/diastolic systemic
  // arterial pressure near 120/80 mmHg and a stroke volume near 70 mL; the
  // LV elastance range is the standard 0.08..2.83 mmHg/mL. Values are this
  // project's own calibration, not a published table.
  static constexpr std::string_view kText = R"(# physiological-default
# Closed-loop baseline. Units: mmHg, mL, s.

model.t_beat = 0.8
model.p_ex = 0.0

# Atria activate at the start of the beat, ventricles after a 0.16 s delay.
chamber.la.e_pass = 0.15
chamber.la.e_act_max = 0.12
chamber.la.v0 = 4.0
chamber.la.onset = 0.0
chamber.la.t_contract = 0.14
chamber.la.t_relax = 0.14

chamber.lv.e_pass = 0.08
chamber.lv.e_act_max = 2.75
chamber.lv.v0 = 5.0
chamber.lv.onset = 0.16
chamber.lv.t_contract = 0.27
chamber.lv.t_relax = 0.15

chamber.ra.e_pass = 0.06
chamber.ra.e_act_max = 0.07
chamber.ra.v0 = 4.0
chamber.ra.onset = 0.0
chamber.ra.t_contract = 0.14
chamber.ra.t_relax = 0.14

chamber.rv.e_pass = 0.04
chamber.rv.e_act_max = 0.55
chamber.rv.v0 = 10.0
chamber.rv.onset = 0.16
chamber.rv.t_contract = 0.27
chamber.rv.t_relax = 0.15

valve.mv.r_min = 0.0075
valve.mv.r_max = 75000.0
valve.av.r_min = 0.0075
valve.av.r_max = 75000.0
valve.tv.r_min = 0.0075
valve.tv.r_max = 75000.0
valve.pv.r_min = 0.0075
valve.pv.r_max = 75000.0

compartment.ar_sys.r = 1.05
compartment.ar_sys.c = 1.5
compartment.ar_sys.l = 0.005
compartment.ven_sys.r = 0.06
compartment.ven_sys.c = 60.0
compartment.ven_sys.l = 0.0005
compartment.ar_pul.r = 0.07
compartment.ar_pul.c = 5.0
compartment.ar_pul.l = 0.0005
compartment.ven_pul.r = 0.025
compartment.ven_pul.c = 16.0
compartment.ven_pul.l = 0.0005

solver.dt = 1e-4
run.beats = 30
run.analyze_beats = 1
)";
  return kText;
}

}  // namespace circ
