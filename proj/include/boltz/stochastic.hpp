// Monte Carlo engine: Brownian path simulation, Feynman-Kac and Girsanov
// path weights, weighted means, exit times and the box-stay bound.  All
// weights are accumulated in log space; paths whose weight would overflow
// are excluded and counted, and estimators report the exclusion rate.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "boltz/potential.hpp"
#include "boltz/quadrature.hpp"

namespace boltz {

struct McConfig {
    double dt = 1e-3;
    long n_paths = 100000;  // at least 100
    std::uint64_t rng_seed = 12345;
    bool antithetic = true;
};

/// Simulated paths with step 0 equal to the start point.  The time grid has
/// spacing dt with a possibly shorter last step reaching the horizon
/// exactly.  Memory is bounded; batches beyond ~1.5 GB are refused.
struct PathBatch {
    int dimension = 1;
    Eigen::VectorXd start;
    double horizon = 0.0;
    double dt = 0.0;
    double last_dt = 0.0;
    int n_steps = 0;  // number of increments; positions hold n_steps + 1 points per path
    long n_paths = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;
    std::vector<double> positions;  // [path][step][coordinate]

    [[nodiscard]] double at(long path, int step, int coord) const {
        return positions[(std::size_t(path) * (n_steps + 1) + step) * dimension + coord];
    }
    [[nodiscard]] double step_length(int step) const {
        return step + 1 == n_steps ? last_dt : dt;
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_effective = 0;
    long n_excluded = 0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    bool reliable = true;  // cleared when the exclusion rate exceeds 0.1%
    // Largest log weight seen among surviving paths, for weight-based
    // estimators; tail diagnostics compare it against analytic bounds.
    double max_log_weight = -std::numeric_limits<double>::infinity();
    std::string note;
};

[[nodiscard]] PathBatch simulate_brownian(const Eigen::VectorXd& x, double t,
                                          const McConfig& cfg);

/// log M_t per path: the trapezoidal time integral of (1/2)dF - (1/2)|grad F|^2
/// along the path.  Excluded paths carry NaN.  When `well_floor` is given
/// (a scanned c with W >= -c), every weight is checked against the pathwise
/// bound log M_t <= c t, which the trapezoidal sum satisfies exactly.
[[nodiscard]] std::vector<double> feynman_kac_log_weights(
    const Potential& p, const PathBatch& batch,
    std::optional<double> well_floor = std::nullopt);

/// log Z_t per path computed two ways: the Ito-sum form
/// -sum grad F . dX - (1/2) int |grad F|^2 ds and the identity form
/// F(X_0) - F(X_t) + log M_t.  The RMS gap between the two shrinks like
/// sqrt(dt).
struct GirsanovWeights {
    std::vector<double> ito_log;
    std::vector<double> identity_log;
    double rms_log_gap = 0.0;
    long n_excluded = 0;
};
[[nodiscard]] GirsanovWeights girsanov_log_weights(const Potential& p, const PathBatch& batch);

/// Streaming Monte Carlo mean of M_t for paths started at x.  Memory use is
/// independent of n_paths.
[[nodiscard]] McEstimate feynman_kac_mean(const Potential& p, const Eigen::VectorXd& x,
                                          double t, const McConfig& cfg);

/// Streaming Monte Carlo mean of the Ito-form Z_t (equals 1 in expectation).
[[nodiscard]] McEstimate girsanov_mean(const Potential& p, const Eigen::VectorXd& x, double t,
                                       const McConfig& cfg);

/// Streaming RMS of log Z_t^{ito} - log Z_t^{identity} over paths.
[[nodiscard]] double girsanov_form_rms_gap(const Potential& p, const Eigen::VectorXd& x,
                                           double t, const McConfig& cfg);

/// Right-hand side of the well-method comparison
///   E_x[M_t] <= e^{-eps t W(x)} + e^{c t} e^{-(1-eps) F(x)}
/// with F normalized and c a scanned lower-bound constant for W (W >= -c).
/// At points with W(x) <= 0 the alternate bound e^{c t} e^{-eps t W(x)}
/// applies.
struct WellBound {
    double value = 0.0;
    double well_term = 0.0;
    double equilibrium_term = 0.0;
    bool alternate_branch = false;
};
[[nodiscard]] WellBound well_method_bound(const Potential& p, const Eigen::VectorXd& x,
                                          double t, double eps, double c);

/// Stopping rules for exit_time_probability.
struct ExitRule {
    enum Kind {
        well_exceeds,          // stop when W(X_s) >= factor * W(x); probability 0 when
                               // the well ratio W/F is nonpositive at the start
        well_or_potential_drops  // stop when W(X_s) <= eps W(x) or F(X_s) <= eps F(x)
    };
    Kind kind = well_exceeds;
    double factor = 2.0;
    double eps = 0.5;
};

/// Fraction of Brownian paths from x whose stopping time exceeds t under the
/// given rule.  Barrier monitoring is discrete in time (no bridge
/// correction); the bias is O(sqrt(dt)).
[[nodiscard]] McEstimate exit_time_probability(const Potential& p, const Eigen::VectorXd& x,
                                               double t, const ExitRule& rule,
                                               const McConfig& cfg);

/// Probability that Brownian motion started at the centre stays inside the
/// box [-A, A]^N up to time t, with the asymptotic decay rate in t/A^2.
/// Exact Dirichlet series for N = 1; coordinate product for N >= 2 (exact
/// for the box, conservative as a surrogate for the Euclidean ball, where
/// the product rate N pi^2/8 is not sharp).
struct BoxStay {
    double probability = 0.0;
    double rate = 0.0;  // N pi^2 / 8
    int dimension = 1;
};
[[nodiscard]] BoxStay box_stay_probability(int dim, double half_width, double t);

/// Monte Carlo cross-check of box_stay_probability.
[[nodiscard]] McEstimate box_stay_mc(int dim, double half_width, double t, const McConfig& cfg);

/// E[h(Y_t)] for the drifted diffusion dY = -grad F(Y) dt + dB from x,
/// estimated two independent ways: reweighted Brownian paths
/// e^{F(x)} E[h(X_t) e^{-F(X_t)} M_t], and direct Euler simulation of the
/// drifted equation.  Exploding Euler paths (|Y| > 1e6) are excluded.
struct PairedEstimate {
    McEstimate reweighted;
    McEstimate direct;
};
[[nodiscard]] PairedEstimate perturbed_expectation(const Potential& p, const ExprPtr& h,
                                                   const Eigen::VectorXd& x, double t,
                                                   const McConfig& cfg);

/// L^p integrability of the semigroup applied to e^F: assembles
///   int e^{(p-2) F} (E_x[M_t])^p dx   (F normalized)
/// over a fixed node grid with per-node Monte Carlo means, widening the
/// truncation radius until the trace stabilizes or grows past the
/// divergence threshold.  Nodes where the locally attainable path weight
/// exceeds every sampled weight by a wide margin are flagged and cap the
/// verdict at inconclusive: the Monte Carlo mean cannot certify absence of
/// unsampled heavy tails.  One-dimensional potentials only.
[[nodiscard]] IntegralResult semigroup_lp_condition(const Potential& p, double p_exp, double t,
                                                    const QuadratureConfig& qcfg,
                                                    const McConfig& cfg);

/// Analytic lower bound for E_y[M_t] when y lies in the oscillation window
/// of index k of the beta = -2 family, compared against the Monte Carlo
/// estimate.  eps and c are the window-scan constants; the stay rate uses
/// theta = pi^2/8.
struct WindowBound {
    McEstimate estimate;
    double bound_log = 0.0;
    double eps = 0.0;
    double c = 0.0;
    double theta = 0.0;
};
[[nodiscard]] WindowBound osc_mean_lower_bound(const Potential& p, double y, double t, int k,
                                               double eps, double c, const McConfig& cfg);

/// Binary path dump: header magic "BPATHv1\0", then little-endian u64
/// n_paths, u64 n_steps, u64 dimension, f64 dt, u64 seed, followed by the
/// positions array in path-major order as little-endian f64.
void write_path_dump(const PathBatch& batch, const std::string& path);

}  // namespace boltz
