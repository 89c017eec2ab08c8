#include "boltz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "boltz/expr.hpp"
#include "boltz/scan.hpp"

namespace boltz {

namespace {

constexpr double kBisectTol = 1e-10;
constexpr double kPivotFloor = 1e-300;

/// Number of eigenvalues strictly below sigma, from the sign count of the
/// LDL^T pivots of T - sigma I.
long sturm_count(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double sigma) {
    long count = 0;
    double q = diag[0] - sigma;
    if (q == 0.0) q = -kPivotFloor;
    if (q < 0.0) ++count;
    for (Eigen::Index i = 1; i < diag.size(); ++i) {
        q = diag[i] - sigma - off[i - 1] * off[i - 1] / q;
        if (q == 0.0) q = -kPivotFloor;
        if (q < 0.0) ++count;
    }
    return count;
}

double bisect_eigenvalue(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                         long index, double lo, double hi) {
    while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(diag, off, mid) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Discretization discretize(const Potential& p, double radius, int n) {
    if (p.dimension != 1) {
        throw std::invalid_argument("discretize requires a one-dimensional potential");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("discretize requires a positive radius");
    }
    if (n < 2) {
        throw std::invalid_argument("discretize requires at least two interior nodes");
    }
    Discretization d;
    d.radius = radius;
    d.n = n;
    d.h = 2.0 * radius / (n + 1);
    d.diag.resize(n);
    d.offdiag.setConstant(n - 1, -0.5 / (d.h * d.h));
    for (int i = 0; i < n; ++i) {
        const double x = -radius + (i + 1) * d.h;
        const double v = p.schrodinger->eval(&x, 1);
        if (!std::isfinite(v)) {
            throw std::domain_error("the Schrodinger potential is not finite on the grid");
        }
        d.diag[i] = 1.0 / (d.h * d.h) + 0.5 * v;
    }
    return d;
}

SpectrumResult smallest_eigs(const Discretization& d, int k) {
    if (k < 1 || k > 8) {
        throw std::invalid_argument("smallest_eigs supports 1 <= k <= 8");
    }
    if (d.n < 1 || d.diag.size() != d.n ||
        (d.n > 1 && d.offdiag.size() != d.n - 1)) {
        throw std::invalid_argument("inconsistent discretization");
    }
    if (k > d.n) {
        throw std::invalid_argument("more eigenvalues requested than matrix rows");
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < d.n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(d.offdiag[i - 1]);
        if (i + 1 < d.n) r += std::abs(d.offdiag[i]);
        lo = std::min(lo, d.diag[i] - r);
        hi = std::max(hi, d.diag[i] + r);
    }
    lo -= kBisectTol;
    hi += kBisectTol;

    SpectrumResult out;
    out.eigenvalues.resize(k);
    for (int j = 0; j < k; ++j) {
        double ev = bisect_eigenvalue(d.diag, d.offdiag, j, lo, hi);
        if (j > 0) ev = std::max(ev, out.eigenvalues[j - 1]);
        out.eigenvalues[j] = ev;
    }
    out.gap = k >= 2 ? out.eigenvalues[1] - out.eigenvalues[0] : 0.0;
    RefinementStep step;
    step.radius = d.radius;
    step.n = d.n;
    step.lambda0 = out.eigenvalues[0];
    step.lambda1 = k >= 2 ? out.eigenvalues[1] : out.eigenvalues[0];
    step.gap = out.gap;
    step.extrapolated_gap = out.gap;
    out.trace.push_back(step);
    out.converged = true;
    return out;
}

SpectrumResult spectral_gap(const Potential& p, const SpectralSchedule& schedule) {
    if (p.dimension != 1) {
        throw std::invalid_argument("spectral_gap requires a one-dimensional potential");
    }
    if (schedule.radii.empty() || schedule.sizes.empty()) {
        throw std::invalid_argument("the refinement schedule is empty");
    }

    SpectrumResult out;
    std::vector<double> radius_gaps;
    for (std::size_t ri = 0; ri < schedule.radii.size(); ++ri) {
        double prev_gap = 0.0, prev_h = 0.0, extrap = 0.0;
        bool have_prev = false;
        for (std::size_t ni = 0; ni < schedule.sizes.size(); ++ni) {
            const Discretization d = discretize(p, schedule.radii[ri], schedule.sizes[ni]);
            const bool finest = ri + 1 == schedule.radii.size() &&
                                ni + 1 == schedule.sizes.size();
            const int k = finest ? std::clamp(schedule.k, 2, 8) : 2;
            SpectrumResult solve = smallest_eigs(d, k);

            RefinementStep step;
            step.radius = d.radius;
            step.n = d.n;
            step.lambda0 = solve.eigenvalues[0];
            step.lambda1 = solve.eigenvalues[1];
            step.gap = step.lambda1 - step.lambda0;
            if (have_prev) {
                const double w = d.h * d.h / (prev_h * prev_h - d.h * d.h);
                extrap = step.gap + (step.gap - prev_gap) * w;
            } else {
                extrap = step.gap;
            }
            step.extrapolated_gap = extrap;
            out.trace.push_back(step);
            prev_gap = step.gap;
            prev_h = d.h;
            have_prev = true;
            if (finest) out.eigenvalues = solve.eigenvalues;
        }
        radius_gaps.push_back(extrap);
    }

    out.gap = radius_gaps.back();
    if (radius_gaps.size() >= 2) {
        const double a = radius_gaps[radius_gaps.size() - 2];
        const double b = radius_gaps.back();
        out.converged = std::abs(b - a) <=
                        schedule.rel_tol * std::max(std::abs(b), 1e-12);
    } else if (out.trace.size() >= 2) {
        const double a = out.trace[out.trace.size() - 2].gap;
        const double b = out.trace.back().gap;
        out.converged = std::abs(b - a) <=
                        schedule.rel_tol * std::max(std::abs(b), 1e-12);
    }
    if (!out.converged) {
        out.note = "the gap did not stabilize across the refinement schedule";
    }
    return out;
}

CriterionReport holley_stroock_crosscheck(const Potential& base, const Potential& bounded,
                                          const SpectralSchedule& schedule,
                                          const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "holley_stroock_gap";
    if (base.dimension != 1 || bounded.dimension != 1) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the gap cross-check is one-dimensional";
        return r;
    }

    auto twice = [&](const Eigen::VectorXd& x) { return 2.0 * bounded.value(x); };
    GridScan scan = scan_grid(twice, 1, cfg.box_radius, cfg.resolution, "perturbation_2G");
    r.scans.push_back(scan);
    ShellTrace tr = scan_shells(
        [&](const Eigen::VectorXd& x) { return std::abs(bounded.value(x)); }, 1,
        cfg.shell_radii, 1501, "perturbation_abs");
    if (increasing_unbounded(tr.shell_max)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the perturbation grows on the outer shells; its oscillation is unbounded";
        return r;
    }

    const double osc = scan.max - scan.min;
    r.witnesses["osc"] = osc;
    if (osc > 700.0) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "oscillation too large to compare gaps within double range";
        return r;
    }
    r.witnesses["factor"] = std::exp(osc);

    const SpectrumResult gap_base = spectral_gap(base, schedule);
    const Potential sum = make_potential(add(base.f, bounded.f), 1);
    const SpectrumResult gap_pert = spectral_gap(sum, schedule);
    r.witnesses["gap_base"] = gap_base.gap;
    r.witnesses["gap_perturbed"] = gap_pert.gap;
    if (!gap_base.converged || !gap_pert.converged) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "a gap did not stabilize, so the comparison is not meaningful";
        return r;
    }
    if (!(gap_base.gap > 0.0)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the base measure shows no positive gap to compare against";
        return r;
    }

    const double ratio = gap_pert.gap / gap_base.gap;
    r.witnesses["ratio"] = ratio;
    const double slack = 1e-6 + 2.0 * schedule.rel_tol;
    if (ratio >= std::exp(-osc) * (1.0 - slack) &&
        ratio <= std::exp(osc) * (1.0 + slack)) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::sgp;
        r.note = "both gaps computed; the ratio sits inside the two-sided "
                 "oscillation band";
    } else {
        r.verdict = CriterionVerdict::fails;
        r.note = "the gap ratio leaves the two-sided oscillation band";
    }
    return r;
}

}  // namespace boltz
