// Deterministic grid and shell scans of scalar quantities derived from a
// potential.  Criteria use them to estimate infima, suprema, oscillations
// and "liminf at infinity" behaviour, always reporting the trace that led
// to a verdict rather than a bare boolean.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "boltz/quadrature.hpp"

namespace boltz {

using PointFunction = std::function<double(const Eigen::VectorXd&)>;

/// Extrema of a quantity over the box [-radius, radius]^dim, with the
/// restriction to the outer shell |x|_inf >= 0.8 radius tracked separately.
struct GridScan {
    std::string quantity;
    double box_radius = 0.0;
    int resolution = 0;  // points per axis
    double min = 0.0, max = 0.0;
    Eigen::VectorXd argmin, argmax;
    double outer_min = 0.0, outer_max = 0.0;
    Eigen::VectorXd outer_argmin, outer_argmax;
    long invalid_points = 0;  // evaluations that raised domain errors
};

/// Per-shell extrema over annuli {0.8 R_j <= |x|_inf <= R_j}.
struct ShellTrace {
    std::string quantity;
    std::vector<double> radii;
    std::vector<double> shell_min;
    std::vector<double> shell_max;
    std::vector<Eigen::VectorXd> argmin;
};

[[nodiscard]] GridScan scan_grid(const PointFunction& f, int dim, double radius,
                                 int resolution, const std::string& quantity = "");

[[nodiscard]] ShellTrace scan_shells(const PointFunction& f, int dim,
                                     const std::vector<double>& radii, int resolution,
                                     const std::string& quantity = "");

// Trend tests on the last entries of a trace.  All are conservative: when a
// trace is too short or mixed they return false and the caller reports
// inconclusive.

/// Last increment within max(abs_tol, rel_tol |last|), previous within
/// four times that.
[[nodiscard]] bool stabilized(const std::vector<double>& trace, double rel_tol = 1e-3,
                              double abs_tol = 1e-9);

/// Strictly decreasing over the last three entries without slowing down,
/// the signature of a quantity drifting to -infinity under box growth.
[[nodiscard]] bool decreasing_unbounded(const std::vector<double>& trace);

/// Strictly increasing over the last three entries without slowing down.
[[nodiscard]] bool increasing_unbounded(const std::vector<double>& trace);

/// Positive entries shrinking towards zero: last entry below `floor_frac`
/// times the maximum of the trace and still decreasing.
[[nodiscard]] bool decaying_to_zero(const std::vector<double>& trace,
                                    double floor_frac = 0.25);

}  // namespace boltz
