#pragma once

#include <stdexcept>
#include <string>

namespace circ {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad key, bad value, violated invariant).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Time integration failure (non-finite state, unphysiological volume).
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Coupled-step failure (bracket exhaustion, root-find divergence, chamber advance).
class CouplingError : public Error {
 public:
  using Error::Error;
};

/// Post-processing refused (e.g. clinical estimates on a non-periodic run).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// Process exit codes used by the CLI.
enum ExitCode {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIntegration = 3,
  kExitCoupling = 4,
};

}  // namespace circ
