// Subcommand drivers shared by the command-line binary and the tests.  Each
// driver takes a RunConfig, runs the requested engines, and returns a fully
// assembled Report: config echo, hash, synthesis line, per-stage timings.

#pragma once

#include "boltz/report.hpp"

namespace boltz {

/// Analytic criterion battery over one potential.
[[nodiscard]] Report cmd_check(const RunConfig& cfg);

/// Stochastic estimators with confidence intervals, optional path dump.
[[nodiscard]] Report cmd_simulate(const RunConfig& cfg);

/// Spectral gap of the ground-state transform (one-dimensional).
[[nodiscard]] Report cmd_spectrum(const RunConfig& cfg);

/// Sweep over the oscillating quadratic family x^2 + beta x sin x.
[[nodiscard]] Report cmd_osc(const RunConfig& cfg);

/// Validates and dispatches on cfg.subcommand.
[[nodiscard]] Report run(const RunConfig& cfg);

}  // namespace boltz
