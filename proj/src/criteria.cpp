#include "boltz/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "boltz/stochastic.hpp"

namespace boltz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -kInf;

int grid_resolution(const CriteriaConfig& cfg, int dim) {
    if (dim <= 1) return int(std::max<long>(cfg.resolution, 9));
    if (dim == 2) return 201;
    if (dim == 3) return 61;
    return std::max(5, int(std::floor(std::pow(2.0e5, 1.0 / dim))));
}

constexpr int kShellResolution = 1501;

void store_min_trace(CriterionReport& r, const std::string& key, const ShellTrace& t) {
    r.traces[key + "_radius"] = t.radii;
    r.traces[key + "_min"] = t.shell_min;
}

void store_max_trace(CriterionReport& r, const std::string& key, const ShellTrace& t) {
    r.traces[key + "_radius"] = t.radii;
    r.traces[key + "_max"] = t.shell_max;
}

struct Normalized {
    Potential p;
    IntegralResult z;
    bool ok = false;
};

Normalized normalized_copy(const Potential& p, const CriteriaConfig& cfg) {
    Normalized n{p, normalization(p, cfg.quad), false};
    if (n.z.verdict == Verdict::finite) {
        apply_normalization(n.p, n.z);
        n.ok = true;
    }
    return n;
}

double min_hessian_eigenvalue(const Potential& p, const Eigen::VectorXd& x) {
    if (p.dimension == 1) return p.hessian[0][0]->eval(x.data(), 1);
    const Eigen::MatrixXd h = p.hessian_at(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::string format_pair(double beta, double lambda) {
    std::ostringstream os;
    os << "beta=" << beta << " lambda=" << lambda;
    return os.str();
}

}  // namespace

const char* to_string(CriterionVerdict v) {
    switch (v) {
        case CriterionVerdict::holds: return "holds";
        case CriterionVerdict::fails: return "fails";
        case CriterionVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* to_string(Conclusion c) {
    switch (c) {
        case Conclusion::none: return "none";
        case Conclusion::sgp: return "SGP";
        case Conclusion::dlsi: return "DLSI";
        case Conclusion::tlsi: return "TLSI";
        case Conclusion::hyperbounded: return "hyperbounded";
        case Conclusion::immediately_hyperbounded: return "immediately hyperbounded";
        case Conclusion::ultracontractive: return "ultracontractive";
    }
    return "none";
}

CriterionReport check_hypotheses(const Potential& p, const CriteriaConfig& cfg,
                                 const Potential* psi) {
    CriterionReport r;
    r.criterion = "hypotheses";
    const int dim = p.dimension;

    Normalized nz = normalized_copy(p, cfg);
    r.integrals.emplace_back("normalization", nz.z);
    if (nz.z.verdict == Verdict::divergent) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the density exp(-2F) is not normalizable";
        return r;
    }
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "normalization did not settle: " + nz.z.note;
        return r;
    }
    r.witnesses["Z"] = nz.z.value;
    const Potential& q = nz.p;

    IntegralResult energy = integrate_exp(
        [&](const double* xs, int d) {
            Eigen::Map<const Eigen::VectorXd> x(xs, d);
            const double g2 = q.gradient(x).squaredNorm();
            if (g2 <= 0.0) return kNegInf;
            return std::log(g2) - 2.0 * (q.value(xs) + q.normalization_shift);
        },
        dim, cfg.quad);
    r.integrals.emplace_back("gradient_moment", energy);
    if (energy.verdict == Verdict::divergent) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the energy moment of F is infinite";
        return r;
    }
    if (energy.verdict != Verdict::finite) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the energy moment of F did not settle";
        return r;
    }
    r.witnesses["gradient_moment"] = energy.value;

    auto drift = [&](const Eigen::VectorXd& x) {
        if (psi) {
            return psi->laplacian_at(x) - q.gradient(x).dot(psi->gradient(x));
        }
        const double r2 = x.squaredNorm();
        const double lap = 2.0 * dim / (1.0 + r2) - 4.0 * r2 / ((1.0 + r2) * (1.0 + r2));
        return lap - 2.0 * q.gradient(x).dot(x) / (1.0 + r2);
    };
    GridScan scan = scan_grid(drift, dim, cfg.box_radius, grid_resolution(cfg, dim),
                              "lyapunov_drift");
    r.scans.push_back(scan);
    r.witnesses["K_hat"] = scan.max;
    ShellTrace tr = scan_shells(drift, dim, cfg.shell_radii, kShellResolution,
                                "lyapunov_drift");
    store_max_trace(r, "lyapunov_drift", tr);
    if (increasing_unbounded(tr.shell_max)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the Lyapunov drift grows on the outer shells; no upper bound is evident";
        return r;
    }

    r.verdict = CriterionVerdict::holds;
    r.note = "normalization, energy moment and Lyapunov drift bound all verified";
    return r;
}

CriterionReport propagate_holley_stroock(const LSIConstants& base, const Potential& g,
                                         const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "holley_stroock";
    const int dim = g.dimension;

    // The oscillation is measured on 2G, the log ratio of the perturbed and
    // base probability densities.
    auto twice = [&](const Eigen::VectorXd& x) { return 2.0 * g.value(x); };
    GridScan scan = scan_grid(twice, dim, cfg.box_radius, grid_resolution(cfg, dim),
                              "perturbation_2G");
    r.scans.push_back(scan);

    ShellTrace tr = scan_shells(
        [&](const Eigen::VectorXd& x) { return std::abs(g.value(x)); }, dim,
        cfg.shell_radii, kShellResolution, "perturbation_abs");
    store_max_trace(r, "perturbation_abs", tr);
    if (increasing_unbounded(tr.shell_max)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the perturbation grows on the outer shells; its oscillation is unbounded";
        return r;
    }

    const double osc = scan.max - scan.min;
    r.witnesses["osc"] = osc;
    if (osc > 700.0) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "oscillation too large to transport constants within double range";
        return r;
    }
    const double factor = std::exp(osc);
    r.witnesses["factor"] = factor;
    r.constants = LSIConstants{base.a * factor, base.b * factor};
    r.verdict = CriterionVerdict::holds;
    r.conclusion = base.b == 0.0 ? Conclusion::tlsi : Conclusion::dlsi;
    r.note = "entropy-energy constants transported through the bounded perturbation";
    return r;
}

CriterionReport check_bakry_emery(const Potential& p, const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "bakry_emery";
    const int dim = p.dimension;

    auto eig = [&](const Eigen::VectorXd& x) { return min_hessian_eigenvalue(p, x); };
    GridScan scan = scan_grid(eig, dim, cfg.box_radius, grid_resolution(cfg, dim),
                              "hessian_min_eigenvalue");
    r.scans.push_back(scan);
    ShellTrace tr = scan_shells(eig, dim, cfg.shell_radii, kShellResolution,
                                "hessian_min_eigenvalue");
    store_min_trace(r, "hessian_min_eig", tr);

    const double K = scan.min;
    r.witnesses["K"] = K;
    const bool outer_decay = decaying_to_zero(tr.shell_min) ||
                             decreasing_unbounded(tr.shell_min) ||
                             tr.shell_min.back() < K - 1e-9 * (1.0 + std::abs(K));
    if (K > 0.0 && !outer_decay) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::tlsi;
        r.constants = LSIConstants{1.0 / K, 0.0};
        r.note = "uniform convexity on the scan box with no decay toward infinity";
    } else {
        r.verdict = CriterionVerdict::fails;
        r.note = K > 0.0 ? "the convexity lower bound decays on the outer shells"
                         : "the Hessian is not uniformly positive on the scan box";
    }
    return r;
}

CriterionReport check_wang(const Potential& p, const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "wang";
    const int dim = p.dimension;

    auto eig = [&](const Eigen::VectorXd& x) { return min_hessian_eigenvalue(p, x); };
    GridScan scan = scan_grid(eig, dim, cfg.box_radius, grid_resolution(cfg, dim),
                              "hessian_min_eigenvalue");
    r.scans.push_back(scan);
    ShellTrace tr = scan_shells(eig, dim, cfg.shell_radii, kShellResolution,
                                "hessian_min_eigenvalue");
    store_min_trace(r, "hessian_min_eig", tr);
    if (decreasing_unbounded(tr.shell_min)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the convexity defect grows with radius; no global Hessian lower bound "
                 "is evident on the scan";
        return r;
    }

    Normalized nz = normalized_copy(p, cfg);
    r.integrals.emplace_back("normalization", nz.z);
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the density exp(-2F) is not certifiably normalizable";
        return r;
    }
    const Potential& q = nz.p;

    const double K = std::max(0.0, -scan.min);
    r.witnesses["K"] = K;
    for (int j = 8; j >= 0; --j) {
        const double eps = K + 8.0 * std::pow(2.0, -j);
        IntegralResult m = integrate_exp(
            [&](const double* xs, int d) {
                Eigen::Map<const Eigen::VectorXd> x(xs, d);
                return eps * x.squaredNorm() -
                       2.0 * (q.value(xs) + q.normalization_shift);
            },
            dim, cfg.quad);
        if (m.verdict == Verdict::finite) {
            std::ostringstream os;
            os << "gaussian_moment_eps=" << eps;
            r.integrals.emplace_back(os.str(), m);
            r.witnesses["eps"] = eps;
            r.witnesses["moment"] = m.value;
            r.verdict = CriterionVerdict::holds;
            r.conclusion = Conclusion::tlsi;
            r.note = "a Gaussian moment beyond the convexity defect is finite";
            return r;
        }
        if (j == 0) r.integrals.emplace_back("gaussian_moment_last", m);
    }
    r.verdict = CriterionVerdict::inconclusive;
    r.note = "no finite Gaussian moment found in the searched window above the defect";
    return r;
}

CriterionReport check_malrieu_roberto(const Potential& p, const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "malrieu_roberto";
    if (p.dimension != 1) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "one-dimensional criterion";
        return r;
    }

    Normalized nz = normalized_copy(p, cfg);
    r.integrals.emplace_back("normalization", nz.z);
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the density exp(-2F) is not certifiably normalizable";
        return r;
    }
    const Potential& q = nz.p;

    ShellTrace s1 = scan_shells(
        [&](const Eigen::VectorXd& x) { return std::abs(q.grad[0]->eval(x.data(), 1)); },
        1, cfg.shell_radii, kShellResolution, "derivative_abs");
    store_min_trace(r, "derivative_abs", s1);
    bool positive = true;
    for (double v : s1.shell_min) positive = positive && v > 0.0;
    if (!positive || decaying_to_zero(s1.shell_min)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "side condition fails: the derivative approaches zero on outer shells";
        return r;
    }

    // |F'| staying away from zero at the sampled points is not enough: a sign
    // change between sample points means a critical point on the tail, where
    // the ratio below blows up in a spike the fixed-resolution sup scan can
    // straddle.  F' sgn(x) is positive on both tails of a confining potential,
    // so a nonpositive shell minimum flags the oscillation.
    ShellTrace s0 = scan_shells(
        [&](const Eigen::VectorXd& x) {
            const double v = q.grad[0]->eval(x.data(), 1);
            return x[0] < 0.0 ? -v : v;
        },
        1, cfg.shell_radii, kShellResolution, "signed_derivative");
    store_min_trace(r, "signed_derivative", s0);
    const std::size_t ns = s0.shell_min.size();
    if (ns >= 2 &&
        (s0.shell_min[ns - 1] <= 0.0 || s0.shell_min[ns - 2] <= 0.0)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "side condition fails: the derivative changes sign on the outer "
                 "shells, so the tail has critical points";
        return r;
    }

    ShellTrace s2 = scan_shells(
        [&](const Eigen::VectorXd& x) {
            const double d1 = q.grad[0]->eval(x.data(), 1);
            const double d2 = q.hessian[0][0]->eval(x.data(), 1);
            return std::abs(d2) / (d1 * d1);
        },
        1, cfg.shell_radii, kShellResolution, "curvature_over_slope_sq");
    store_max_trace(r, "curvature_over_slope_sq", s2);
    const double peak = *std::max_element(s2.shell_max.begin(), s2.shell_max.end());
    if (increasing_unbounded(s2.shell_max) ||
        (s2.shell_max.back() > 0.25 * peak && s2.shell_max.back() > 0.05)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "side condition fails: F''/F'^2 does not decay on outer shells";
        return r;
    }

    auto ratio_q = [&](double x) {
        const double xv[1] = {x};
        const double d1 = std::abs(q.grad[0]->eval(xv, 1));
        if (d1 == 0.0) return kNegInf;
        const double ft = q.value(xv) + q.normalization_shift;
        return (ft + std::log(d1)) / (d1 * d1);
    };

    double best_sup = kInf;
    double best_onset = 0.0;
    bool any_stabilized = false;
    bool all_grow = true;
    for (double A : cfg.tail_onsets) {
        std::vector<double> sups;
        double running = kNegInf;
        double prev_r = A;
        for (double R : cfg.shell_radii) {
            if (R <= 2.0 * A) continue;
            const long n = 2001;
            for (long i = 0; i < n; ++i) {
                const double x = prev_r + (R - prev_r) * double(i) / double(n - 1);
                running = std::max(running, std::max(ratio_q(x), ratio_q(-x)));
            }
            prev_r = R;
            sups.push_back(running);
        }
        {
            std::ostringstream os;
            os << "ratio_sup_onset=" << A;
            r.traces[os.str()] = sups;
        }
        if (stabilized(sups, 0.01, 1e-9)) {
            any_stabilized = true;
            all_grow = false;
            if (sups.back() < best_sup) {
                best_sup = sups.back();
                best_onset = A;
            }
        } else if (!increasing_unbounded(sups)) {
            all_grow = false;
        }
    }
    if (any_stabilized) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::tlsi;
        r.witnesses["sup"] = best_sup;
        r.witnesses["onset"] = best_onset;
        r.note = "the ratio (F + log|F'|)/F'^2 stabilizes on the tail";
    } else if (all_grow) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the ratio grows without bound on every tail; within the verified side "
                 "conditions the tight inequality cannot hold";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the tail ratio neither stabilized nor grew cleanly";
    }
    return r;
}

namespace {

CriterionReport liminf_positive_check(const Potential& p, const CriteriaConfig& cfg,
                                      const PointFunction& fn,
                                      const std::string& criterion,
                                      const std::string& quantity) {
    CriterionReport r;
    r.criterion = criterion;
    ShellTrace tr =
        scan_shells(fn, p.dimension, cfg.shell_radii, kShellResolution, quantity);
    store_min_trace(r, quantity, tr);

    const std::vector<double>& m = tr.shell_min;
    const double peak = *std::max_element(m.begin(), m.end());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] < 0.0) {
            r.witnesses["dip_radius"] = tr.argmin[i].norm();
            r.witnesses["dip_value"] = m[i];
            break;
        }
    }

    if (m.back() < 0.0) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the scanned quantity dips negative on the outermost shell";
        return r;
    }
    if (peak <= 0.0) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the scanned quantity never becomes positive on the shells";
        return r;
    }
    if (decaying_to_zero(m, 1e-3)) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the scanned quantity decays toward zero at infinity";
        return r;
    }
    bool all_pos = true;
    for (double v : m) all_pos = all_pos && v > 0.0;
    const std::size_t n = m.size();
    if (all_pos && n >= 2 && m[n - 1] >= 0.5 * m[n - 2]) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::sgp;
        r.witnesses["C"] = std::min(m[n - 1], m[n - 2]);
        r.note = "the outer-shell minima stay positive across the radius schedule";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the outer-shell minima change sign or trend unclearly";
    }
    return r;
}

}  // namespace

CriterionReport check_sgp_1d(const Potential& p, const CriteriaConfig& cfg) {
    if (p.dimension != 1) {
        CriterionReport r;
        r.criterion = "sgp_1d";
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "one-dimensional criterion";
        return r;
    }
    return liminf_positive_check(
        p, cfg,
        [&](const Eigen::VectorXd& x) {
            const double d = p.grad[0]->eval(x.data(), 1);
            return d * d;
        },
        "sgp_1d", "derivative_squared");
}

CriterionReport check_sgp_nd(const Potential& p, const CriteriaConfig& cfg) {
    return liminf_positive_check(
        p, cfg,
        [&](const Eigen::VectorXd& x) {
            return p.schrodinger->eval(x.data(), p.dimension);
        },
        "sgp_nd", "schrodinger_potential");
}

namespace {

// Oscillating wells can hide the divergence of exp(beta F - lambda W) in
// spikes that narrow as |x| grows, which adaptive panels eventually straddle.
// A finite quadrature verdict is therefore only trusted when the integrand's
// outer-shell maxima do not keep growing.
IntegralResult certificate_integral(const Potential& p, double beta, double lambda,
                                    const CriteriaConfig& cfg, ShellTrace* trace_out) {
    const int dim = p.dimension;
    IntegralResult cert = integrate_exp(
        [&](const double* xs, int d) {
            return beta * p.f->eval(xs, d) - lambda * p.well->eval(xs, d);
        },
        dim, cfg.quad);
    auto integrand = [&](const Eigen::VectorXd& x) {
        return beta * p.f->eval(x.data(), dim) - lambda * p.well->eval(x.data(), dim);
    };
    ShellTrace tr = scan_shells(integrand, dim, cfg.shell_radii, kShellResolution,
                                "certificate_integrand");
    if (trace_out) *trace_out = tr;
    if (cert.verdict == Verdict::finite && increasing_unbounded(tr.shell_max)) {
        if (tr.shell_max.back() >= std::log(cfg.quad.divergence_threshold)) {
            cert.verdict = Verdict::divergent;
            cert.note = "outer-shell integrand maxima grow without bound; the "
                        "finite quadrature value misses narrow outer spikes";
        } else {
            cert.verdict = Verdict::inconclusive;
            cert.note = "outer-shell integrand maxima keep growing";
        }
    }
    return cert;
}

}  // namespace

CriterionReport check_well_method(const Potential& p, double beta, double lambda,
                                  const CriteriaConfig& cfg) {
    if (!(beta > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("check_well_method: beta and lambda must be positive");
    }
    CriterionReport r;
    r.criterion = "well_method";
    r.witnesses["beta"] = beta;
    r.witnesses["lambda"] = lambda;
    const int dim = p.dimension;

    auto well = [&](const Eigen::VectorXd& x) { return p.well->eval(x.data(), dim); };
    GridScan wscan =
        scan_grid(well, dim, cfg.box_radius, grid_resolution(cfg, dim), "well_term");
    r.scans.push_back(wscan);
    ShellTrace wtr =
        scan_shells(well, dim, cfg.shell_radii, kShellResolution, "well_term");
    store_min_trace(r, "well_term", wtr);
    r.witnesses["c"] = std::max(0.0, -wscan.min);
    if (decreasing_unbounded(wtr.shell_min)) {
        r.note = "well term lower bound unverified: the shell minima keep falling; ";
    }

    ShellTrace ctr;
    IntegralResult cert = certificate_integral(p, beta, lambda, cfg, &ctr);
    store_max_trace(r, "certificate_integrand", ctr);
    r.integrals.emplace_back("certificate", cert);

    if (cert.verdict == Verdict::finite) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::tlsi;
        r.witnesses["value"] = cert.value;
        r.note += "certificate integral finite: the defective inequality holds and "
                  "tightens through the always-present weak gap";
    } else if (cert.verdict == Verdict::divergent) {
        r.verdict = CriterionVerdict::fails;
        r.note += "certificate integral diverges at this pair";
        if (!cert.note.empty()) r.note += " (" + cert.note + ")";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note += "certificate integral did not settle: " + cert.note;
    }
    return r;
}

CriterionReport well_method_search(const Potential& p, const CriteriaConfig& cfg) {
    long n_fails = 0;
    long n_open = 0;
    for (int i = -4; i <= 2; ++i) {
        const double beta = std::pow(2.0, i);
        for (int j = 4; j >= -4; --j) {
            const double lambda = std::pow(2.0, j);
            CriterionReport rep = check_well_method(p, beta, lambda, cfg);
            if (rep.verdict == CriterionVerdict::holds) {
                rep.criterion = "well_method_search";
                rep.note = "first certifying pair on the search grid (" +
                           format_pair(beta, lambda) + "); " + rep.note;
                return rep;
            }
            if (rep.verdict == CriterionVerdict::fails) {
                ++n_fails;
            } else {
                ++n_open;
            }
        }
    }
    CriterionReport r;
    r.criterion = "well_method_search";
    r.verdict = CriterionVerdict::inconclusive;
    r.witnesses["pairs_divergent"] = double(n_fails);
    r.witnesses["pairs_unsettled"] = double(n_open);
    r.note = "no pair on the search grid certifies the integral condition";
    return r;
}

CriterionReport check_immediate_hyper(const Potential& p, const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "immediate_hyper";

    long n_finite = 0;
    long n_open = 0;
    for (double beta : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        for (double lambda : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
            IntegralResult cert = certificate_integral(p, beta, lambda, cfg, nullptr);
            if (cert.verdict == Verdict::divergent) {
                r.integrals.emplace_back("certificate " + format_pair(beta, lambda),
                                         cert);
                r.witnesses["beta"] = beta;
                r.witnesses["lambda"] = lambda;
                r.verdict = CriterionVerdict::fails;
                r.note = "the certificate diverges at " + format_pair(beta, lambda) +
                         "; the all-pairs condition is refuted at the witness pair";
                return r;
            }
            if (cert.verdict == Verdict::finite) {
                ++n_finite;
            } else {
                ++n_open;
            }
        }
    }
    r.witnesses["pairs_finite"] = double(n_finite);
    r.witnesses["pairs_unsettled"] = double(n_open);
    if (n_open == 0) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::immediately_hyperbounded;
        r.note = "all sampled (beta, lambda) certificates are finite (finite-grid "
                 "evidence for the all-pairs condition)";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "some certificates did not settle and none diverged";
    }
    return r;
}

CriterionReport check_well_growth(const Potential& p, const CriteriaConfig& cfg) {
    CriterionReport r;
    r.criterion = "well_growth";
    const int dim = p.dimension;

    Normalized nz = normalized_copy(p, cfg);
    r.integrals.emplace_back("normalization", nz.z);
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the density exp(-2F) is not certifiably normalizable";
        return r;
    }
    const Potential& q = nz.p;
    auto ftil = [&](const Eigen::VectorXd& x) { return q.shifted_value(x); };
    auto vpot = [&](const Eigen::VectorXd& x) {
        return q.schrodinger->eval(x.data(), dim);
    };

    ShellTrace ftr =
        scan_shells(ftil, dim, cfg.shell_radii, kShellResolution, "potential");
    store_min_trace(r, "potential", ftr);
    if (!(ftr.shell_min.back() > ftr.shell_min.front() && ftr.shell_min.back() > 10.0)) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the potential does not grow at infinity on the scan";
        return r;
    }

    bool linear_ok = false;
    for (double eta : cfg.eta_schedule) {
        auto gap = [&](const Eigen::VectorXd& x) { return vpot(x) - eta * ftil(x); };
        ShellTrace tr = scan_shells(gap, dim, cfg.shell_radii, kShellResolution, "gap");
        {
            std::ostringstream os;
            os << "gap_eta=" << eta;
            store_min_trace(r, os.str(), tr);
        }
        // Rounding jitter on a flat trace is not a falling trend; only a
        // material drop disqualifies this eta.
        const bool material_drop =
            tr.shell_min.front() - tr.shell_min.back() >
            1e-6 * (1.0 + std::abs(tr.shell_min.front()));
        if (decreasing_unbounded(tr.shell_min) && material_drop) continue;
        GridScan scan = scan_grid(gap, dim, cfg.box_radius, grid_resolution(cfg, dim),
                                  "V_minus_eta_F");
        r.scans.push_back(scan);
        const double shell_floor =
            *std::min_element(tr.shell_min.begin(), tr.shell_min.end());
        r.witnesses["eta"] = eta;
        r.witnesses["c"] = std::max(0.0, -std::min(scan.min, shell_floor));
        linear_ok = true;
        break;
    }

    // Growth exponent of V against F, decided by where theta log F - log V
    // attains its maximum: an interior maximum means F^theta stays below V
    // out to the scan boundary, a rim maximum means it does not.
    double theta = 0.0;
    bool theta_valid = false;
    std::string fit_note;
    {
        std::vector<double> tail_f, tail_v, tail_r;
        Eigen::VectorXd x(dim);
        double fmax = kNegInf;
        auto consider = [&](const Eigen::VectorXd& pt) {
            const double f = ftil(pt);
            fmax = std::max(fmax, f);
            if (f >= 10.0) {
                tail_f.push_back(f);
                tail_v.push_back(vpot(pt));
                tail_r.push_back(pt.norm());
            }
        };
        if (dim == 1) {
            const long n = grid_resolution(cfg, 1);
            for (long i = 0; i < n; ++i) {
                x[0] = -cfg.box_radius + 2.0 * cfg.box_radius * double(i) / double(n - 1);
                consider(x);
            }
        } else {
            std::mt19937_64 rng(0x7e57ab1eULL);
            std::uniform_real_distribution<double> u(-cfg.box_radius, cfg.box_radius);
            for (long i = 0; i < 20000; ++i) {
                for (int d = 0; d < dim; ++d) x[d] = u(rng);
                consider(x);
            }
        }
        bool v_positive = !tail_f.empty();
        for (double v : tail_v) v_positive = v_positive && v > 0.0;
        if (fmax < 1000.0) {
            fit_note = "scan too shallow for a growth exponent fit";
        } else if (!v_positive) {
            fit_note = "the Schrodinger potential is not positive on the deep tail";
        } else {
            auto feasible = [&](double th) {
                double inner = kNegInf, rim = kNegInf;
                for (std::size_t i = 0; i < tail_f.size(); ++i) {
                    const double h = th * std::log(tail_f[i]) - std::log(tail_v[i]);
                    double& slot = tail_r[i] > 0.9 * cfg.box_radius ? rim : inner;
                    slot = std::max(slot, h);
                }
                return inner >= rim;
            };
            double lo = 0.25, hi = 4.0;
            if (!feasible(lo)) {
                fit_note = "no positive growth exponent fits";
            } else if (feasible(hi)) {
                theta = hi;
                theta_valid = true;
            } else {
                while (hi - lo > 1e-3) {
                    const double mid = 0.5 * (lo + hi);
                    (feasible(mid) ? lo : hi) = mid;
                }
                theta = lo;
                theta_valid = true;
            }
        }
        if (theta_valid) r.witnesses["theta"] = theta;
    }

    if (linear_ok) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::hyperbounded;
        r.note = "the Schrodinger potential dominates a linear function of F";
        if (theta_valid && theta >= 1.05) {
            r.conclusion = Conclusion::ultracontractive;
            r.note = "superlinear growth of the Schrodinger potential relative to F: "
                     "immediate regularization, and the power-growth integral test "
                     "gives ultracontractivity";
        } else if (theta_valid && theta > 0.95) {
            r.note += "; the growth exponent sits at the linear boundary";
        }
    } else if (theta_valid && theta <= 0.95) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "weak hypercontractivity regime: sublinear growth exponent and no "
                 "linear minorization";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = fit_note.empty() ? "no linear minorization found on the schedule"
                                  : fit_note;
    }
    return r;
}

CriterionReport check_gong_wu(const Potential& p, double rho, double eps,
                              const CriteriaConfig& cfg) {
    if (!(rho > 0.0) || !(eps > 0.0)) {
        throw std::invalid_argument("check_gong_wu: rho and eps must be positive");
    }
    CriterionReport r;
    r.criterion = "gong_wu";
    r.witnesses["rho"] = rho;
    r.witnesses["eps"] = eps;
    const int dim = p.dimension;
    const double c1 = 1.0 / (2.0 * rho);
    const double a = 2.0 * c1 + eps;
    const double log_zrho = 0.5 * dim * std::log(M_PI / (2.0 * rho));

    auto gshift = [&](const Eigen::VectorXd& x) {
        return 0.5 * p.schrodinger->eval(x.data(), dim) -
               2.0 * rho * rho * x.squaredNorm() + rho * dim;
    };
    GridScan scan = scan_grid(gshift, dim, cfg.box_radius, grid_resolution(cfg, dim),
                              "comparison_well_term");
    r.scans.push_back(scan);

    IntegralResult m = integrate_exp(
        [&](const double* xs, int d) {
            Eigen::Map<const Eigen::VectorXd> x(xs, d);
            const double g = 0.5 * p.schrodinger->eval(xs, d) -
                             2.0 * rho * rho * x.squaredNorm() + rho * d;
            return a * std::max(0.0, -g) - 2.0 * rho * x.squaredNorm() - log_zrho;
        },
        dim, cfg.quad);
    r.integrals.emplace_back("negative_part_moment", m);

    if (m.verdict == Verdict::finite) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::sgp;
        r.witnesses["value"] = m.value;
        r.note = "the negative part of the comparison well term is exponentially "
                 "integrable under the Gaussian reference";
    } else if (m.verdict == Verdict::divergent) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the comparison moment diverges at this rho; the criterion certifies "
                 "nothing here";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the comparison moment did not settle: " + m.note;
    }
    return r;
}

CriterionReport check_well_method_tight(const Potential& p, double beta, double lambda,
                                        double rho, const CriteriaConfig& cfg) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("check_well_method_tight: rho must be positive");
    }
    CriterionReport r = check_well_method(p, beta, lambda, cfg);
    r.criterion = "well_method_tight";
    r.witnesses["rho"] = rho;
    const CriterionVerdict base_verdict = r.verdict;
    const std::string base_note = r.note;
    r.conclusion = Conclusion::none;
    r.note.clear();

    Normalized nz = normalized_copy(p, cfg);
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the density exp(-2F) is not certifiably normalizable";
        return r;
    }
    const Potential& q = nz.p;

    bool branch1 = false;
    std::string diag;
    if (decreasing_unbounded(r.traces["well_term_min"])) {
        diag = "well term unbounded below on the scan, branch one unavailable";
    } else {
        for (double lr : cfg.lr_exponents) {
            IntegralResult nrm = boltzmann_lr_norm(q, lr, cfg.quad);
            if (nrm.verdict == Verdict::finite) {
                std::ostringstream os;
                os << "lr_norm_r=" << lr;
                r.integrals.emplace_back(os.str(), nrm);
                r.witnesses["r"] = lr;
                r.witnesses["lr_norm"] = nrm.value;
                branch1 = true;
                break;
            }
        }
        if (!branch1) diag = "no finite L^r norm of exp(F) in the schedule";
    }

    bool branch2 = false;
    ShellTrace ftr = scan_shells(
        [&](const Eigen::VectorXd& x) { return q.shifted_value(x); }, p.dimension,
        cfg.shell_radii, kShellResolution, "potential");
    store_min_trace(r, "potential", ftr);
    if (!decreasing_unbounded(ftr.shell_min) && lambda > 1.0 / rho) {
        branch2 = true;
        if (!diag.empty())
            diag += "; branch two hypotheses met: F bounded below and lambda exceeds "
                    "the reference threshold";
    } else if (!diag.empty()) {
        diag += "; branch two unavailable as well";
    }

    if (base_verdict == CriterionVerdict::holds && (branch1 || branch2)) {
        r.verdict = CriterionVerdict::holds;
        r.conclusion = Conclusion::tlsi;
        r.witnesses["branch"] = branch1 ? 1.0 : 2.0;
        r.note = branch1 ? "certificate finite, well term bounded below and exp(F) "
                           "integrable: the inequality is tight"
                         : "certificate finite, F bounded below and lambda large "
                           "enough: the inequality is tight";
    } else if (base_verdict == CriterionVerdict::fails) {
        r.verdict = CriterionVerdict::fails;
        r.note = base_note;
        if (!diag.empty()) r.note += " (" + diag + ")";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = diag.empty() ? base_note : diag + "; " + base_note;
    }
    return r;
}

CriterionReport check_well_method_necessary(const Potential& p, double beta,
                                            double lambda, double t,
                                            const CriteriaConfig& cfg) {
    if (!(beta > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument(
            "check_well_method_necessary: beta and lambda must be positive");
    }
    CriterionReport r;
    r.criterion = "well_method_necessary";
    r.witnesses["beta"] = beta;
    r.witnesses["lambda"] = lambda;
    if (p.dimension != 1) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the probability node schedule is one-dimensional";
        return r;
    }

    Normalized nz = normalized_copy(p, cfg);
    r.integrals.emplace_back("normalization", nz.z);
    if (!nz.ok) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the density exp(-2F) is not certifiably normalizable";
        return r;
    }
    const Potential& q = nz.p;

    IntegralResult pre = boltzmann_lr_norm(q, 1.5, cfg.quad);
    r.integrals.emplace_back("lr_norm_r=1.5", pre);
    if (pre.verdict != Verdict::finite) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "exp(F) lacks the integrability required by the necessary condition";
        return r;
    }

    const double t_star = t > 0.0 ? t : lambda / (2.0 * (2.0 + beta));
    r.witnesses["t_star"] = t_star;

    const std::vector<double> radii = {8, 16, 32, 64};
    const double node_width = 0.25;
    struct Node {
        double x = 0.0;
        double env = 0.0;  // log of width * exp(beta F - lambda W), the
                           // probability-free upper envelope of the node term
        double contrib = kNegInf;
    };
    std::vector<Node> nodes;
    for (double xv = 0.5 * node_width; xv < radii.back(); xv += node_width) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            Node nd;
            nd.x = sgn * xv;
            const double xs[1] = {nd.x};
            const double ft = q.value(xs) + q.normalization_shift;
            const double w = q.well->eval(xs, 1);
            nd.env = std::log(node_width) + beta * ft - lambda * w;
            nodes.push_back(nd);
        }
    }

    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return nodes[a].env > nodes[b].env;
    });

    // Monte Carlo effort goes to the nodes that can matter.  A node far
    // below the top envelope can still carry the divergence when the top
    // nodes sit next to steep exit barriers (their measured stay-probability
    // is zero), so the cutoff also keeps every node whose envelope alone
    // could push the assembled sum over the divergence threshold.  Sampling
    // runs in descending envelope order and stops as soon as the assembled
    // lower bound already certifies divergence.
    const double max_env = nodes[order.front()].env;
    const double log_thresh = std::log(cfg.quad.divergence_threshold);
    const double cutoff =
        std::min(max_env - 40.0, log_thresh - std::log(double(nodes.size())) - 10.0);
    double skipped_log_mass = kNegInf;
    double assembled = kNegInf;
    long sampled = 0, failed = 0, undefined_ratio = 0;
    for (std::size_t idx : order) {
        Node& nd = nodes[idx];
        if (nd.env < cutoff || assembled >= log_thresh) {
            skipped_log_mass = log_add_exp(skipped_log_mass, nd.env);
            continue;
        }
        McConfig mc;
        mc.dt = cfg.mc_dt;
        mc.n_paths = cfg.mc_paths;
        mc.rng_seed = cfg.mc_seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(idx + 1);
        Eigen::VectorXd x0(1);
        x0[0] = nd.x;
        ExitRule rule;
        rule.kind = ExitRule::well_exceeds;
        rule.factor = 2.0;
        try {
            const McEstimate est = exit_time_probability(q, x0, t_star, rule, mc);
            ++sampled;
            if (!est.reliable) {
                ++failed;
                continue;
            }
            if (est.mean > 0.0) {
                nd.contrib = nd.env + (2.0 + beta) * std::log(est.mean);
                assembled = log_add_exp(assembled, nd.contrib);
            }
        } catch (const UndefinedRatioError&) {
            ++undefined_ratio;
        }
    }
    r.witnesses["nodes_total"] = double(nodes.size());
    r.witnesses["nodes_sampled"] = double(sampled);
    r.witnesses["nodes_failed"] = double(failed);
    r.witnesses["nodes_ratio_undefined"] = double(undefined_ratio);
    r.witnesses["skipped_log_mass"] = skipped_log_mass;
    r.witnesses["max_log_envelope"] = max_env;

    std::vector<double> trace;
    for (double R : radii) {
        double total = kNegInf;
        for (const Node& nd : nodes) {
            if (std::abs(nd.x) <= R) total = log_add_exp(total, nd.contrib);
        }
        trace.push_back(total);
    }
    r.traces["radius"] = radii;
    r.traces["log_partial_sum"] = trace;

    if (sampled > 0 && failed > sampled / 20) {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "more than 5% of the probability nodes failed their Monte Carlo "
                 "estimate";
        return r;
    }

    // The assembled sum is a lower bound for the necessary integral: skipped
    // nodes contribute zero and every probability power is <= 1.
    if (trace.back() >= log_thresh) {
        r.verdict = CriterionVerdict::fails;
        r.witnesses["log_value"] = trace.back();
        r.note = "the necessary integral exceeds the divergence threshold: this "
                 "pair cannot witness the finiteness the defective inequality "
                 "requires";
        return r;
    }
    const std::size_t n = trace.size();
    const bool settled = std::isfinite(trace[n - 1])
                             ? std::abs(trace[n - 1] - trace[n - 2]) <= 0.01
                             : trace[n - 1] == trace[n - 2];
    if (settled) {
        r.verdict = CriterionVerdict::inconclusive;
        r.witnesses["log_value"] = trace.back();
        r.note = "the necessary condition is satisfied at this pair; nothing follows "
                 "from a necessary condition holding";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the node schedule ended without stabilization or divergence";
    }
    return r;
}

std::vector<double> osc_series_log_partial_sums(double q, double eps, double t,
                                                double theta, int k_terms) {
    if (!(q - 2.0 - eps > 0.0)) {
        throw std::invalid_argument(
            "osc_series_log_partial_sums: requires q - 2 - eps > 0");
    }
    if (!(t > 0.0) || !(theta > 0.0) || k_terms < 1) {
        throw std::invalid_argument("osc_series_log_partial_sums: bad parameters");
    }
    std::vector<double> sums;
    sums.reserve(std::size_t(k_terms));
    double acc = kNegInf;
    for (int k = 1; k <= k_terms; ++k) {
        const double lk = -std::log(2.0) - 0.5 * std::log(double(k)) +
                          4.0 * M_PI * M_PI * (q - 2.0 - eps) * double(k) * double(k) -
                          4.0 * q * theta * t * double(k);
        acc = log_add_exp(acc, lk);
        sums.push_back(acc);
    }
    return sums;
}

CriterionReport osc_window_scan(const Potential& p, int k_min, int k_max, double eps,
                                const CriteriaConfig& cfg) {
    (void)cfg;
    if (p.dimension != 1) {
        throw std::invalid_argument("osc_window_scan: one-dimensional potentials only");
    }
    if (k_min < 10 || k_max < k_min) {
        throw std::invalid_argument(
            "osc_window_scan: windows are asymptotic, k_min >= 10 required");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("osc_window_scan: eps must lie in (0, 1)");
    }
    CriterionReport r;
    r.criterion = "osc_window";

    std::vector<double> ks, ratios, grads;
    for (int k = k_min; k <= k_max; ++k) {
        const double xk = 2.0 * M_PI * double(k);
        const double scale = 1.0 / std::sqrt(double(k));
        double min_curv = kInf;
        double max_grad = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double y = xk + (0.5 + double(i) / 99.0) * scale;
            const double yv[1] = {y};
            min_curv = std::min(min_curv, p.hessian[0][0]->eval(yv, 1));
            max_grad = std::max(max_grad, std::abs(p.grad[0]->eval(yv, 1)));
        }
        ks.push_back(double(k));
        ratios.push_back(min_curv * scale);
        grads.push_back(max_grad);
    }
    r.traces["k"] = ks;
    r.traces["curvature_ratio"] = ratios;
    r.traces["grad_max"] = grads;

    const double c2_ref = ratios.back();
    const double grad_ref = grads.back();
    r.witnesses["curvature_scale"] = c2_ref;
    r.witnesses["grad_bound"] = grad_ref;
    bool ok = c2_ref > 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        ok = ok && ratios[i] >= (1.0 - eps) * c2_ref &&
             grads[i] <= (1.0 + eps) * grad_ref;
    }
    if (ok) {
        r.verdict = CriterionVerdict::holds;
        r.note = "window curvature scales like sqrt(k) and the derivative stays "
                 "bounded, matching the empirical constants at the largest k";
    } else {
        r.verdict = CriterionVerdict::fails;
        r.note = "the window scaling of curvature or derivative deviates from the "
                 "reference constants";
    }
    return r;
}

}  // namespace boltz
