#pragma once

#include <ostream>
#include <string>

#include "sdelap/cli/config.hpp"

namespace sdelap::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,         // bad command line
  kConfigError = 2,   // invalid config, data file or parameter values
  kRuntimeError = 3,  // numerical failure
  kNoConvergence = 4, // fit did not converge; the report is still written
};

/// Tables go to `out`, diagnostics to `err`. Each returns an exit code and
/// throws sdelap::Error for failures before any output is produced.

/// Writes <prefix>_path.csv (t,x1..xn) and <prefix>_obs.csv (t,y1..ym),
/// prefix = cfg.out (default "sim"); prints n_obs and T.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// CSV y,logp_<method>...[,logp_exact] to cfg.out, or `out` when cfg.out is
/// empty or "-". The y grid varies state component 0; other components of the
/// endpoint equal transition.x.
int cmd_transdens(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Reads cfg.data, prints an estimate / std.dev table and writes the JSON
/// report to cfg.out when set.
int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// CSV t,mean_1..n,sd_1..n at every grid time. `theta` is a fit report path
/// (*.json), an inline list "name=value,...", or empty for the config values.
int cmd_smooth(const RunConfig& cfg, const std::string& theta, std::ostream& out, std::ostream& err);

/// Applies a fit report or inline "name=value,..." list to the model
/// parameters (and "s" to a Gaussian observation sd).
void apply_theta(RunConfig& cfg, const std::string& theta);

}  // namespace sdelap::cli
