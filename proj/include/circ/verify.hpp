#pragma once

#include <string>
#include <vector>

#include "circ/config.hpp"

namespace circ {

struct AuditResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Run the full invariant/audit suite against a configuration: randomized
/// algebraic identities of the model core, diode properties, reduced/full
/// consistency, elastance periodicity, and conservation/energy checks on a
/// short simulation of the configured model.
std::vector<AuditResult> run_audits(const RunConfig& cfg);

}  // namespace circ
