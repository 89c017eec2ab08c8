#include "boltz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace boltz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

// G7/K15 nodes and weights on [-1, 1], positive half.  The odd-index
// Kronrod abscissae are the embedded Gauss points.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    if (m == kInf) return kInf;
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_diff_exp(double a, double b) {
    if (b == kNegInf) return a;
    if (a <= b) return kNegInf;
    if (a == kInf) return kInf;
    return a + std::log1p(-std::exp(b - a));
}

namespace {

double log_sum(const double* v, int n) {
    double m = kNegInf;
    for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
    if (m == kNegInf || m == kInf) return m;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

// Signed quantity kept as log magnitudes of positive and negative parts.
struct SLog {
    double lp = kNegInf;
    double ln = kNegInf;

    void accumulate(const SLog& o) {
        lp = log_add_exp(lp, o.lp);
        ln = log_add_exp(ln, o.ln);
    }
    [[nodiscard]] double log_abs() const {
        return lp >= ln ? log_diff_exp(lp, ln) : log_diff_exp(ln, lp);
    }
    [[nodiscard]] double sign() const { return lp >= ln ? 1.0 : -1.0; }
    [[nodiscard]] double to_double() const {
        const double m = log_abs();
        return sign() * std::exp(m);
    }
    [[nodiscard]] static SLog from_log(double l) { return SLog{l, kNegInf}; }
};

// |a - b| in log space for signed quantities.
double log_abs_diff(const SLog& a, const SLog& b) {
    SLog d;
    d.lp = log_add_exp(a.lp, b.ln);
    d.ln = log_add_exp(a.ln, b.lp);
    return d.log_abs();
}

struct NodeStats {
    long invalid = 0;
    long total = 0;
    bool overflow = false;
    // Largest log |integrand| over the nodes of the region currently being
    // integrated; reset by the region driver, read back as decay evidence.
    double region_max_lv = kNegInf;
};

// One integrand evaluation.  Returns the node contribution in log form:
// for the exp path the field `lv` is log g; for the linear path `lv` is
// log |g| and `negative` carries the sign.  NaN and domain errors are
// excluded and counted; +-inf marks overflow evidence.
struct NodeValue {
    double lv = kNegInf;
    bool negative = false;
    bool valid = true;
};

NodeValue eval_node(const ScalarField& g, bool log_space, const double* x, int dim,
                    NodeStats& stats) {
    ++stats.total;
    NodeValue out;
    double v;
    try {
        v = g(x, dim);
    } catch (const ExprDomainError&) {
        out.valid = false;
        ++stats.invalid;
        return out;
    }
    if (std::isnan(v)) {
        out.valid = false;
        ++stats.invalid;
        return out;
    }
    if (log_space) {
        if (v == kInf) stats.overflow = true;
        out.lv = v;
    } else {
        if (std::isinf(v)) stats.overflow = true;
        out.negative = v < 0.0;
        out.lv = v == 0.0 ? kNegInf : std::log(std::abs(v));
    }
    stats.region_max_lv = std::max(stats.region_max_lv, out.lv);
    return out;
}

struct Panel {
    double a = 0.0, b = 0.0;
    SLog value;
    double err_log = kNegInf;
};

Panel eval_panel(const ScalarField& g, bool log_space, double a, double b, NodeStats& stats) {
    Panel p;
    p.a = a;
    p.b = b;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double log_h = std::log(h);

    double kron_pos[15], kron_neg[15], gauss_pos[7], gauss_neg[7];
    int nkp = 0, nkn = 0, ngp = 0, ngn = 0;
    for (int i = 0; i < 8; ++i) {
        const int copies = (i == 7) ? 1 : 2;
        for (int s = 0; s < copies; ++s) {
            const double x = c + (s == 0 ? h * kXgk[i] : -h * kXgk[i]);
            const NodeValue nv = eval_node(g, log_space, &x, 1, stats);
            if (!nv.valid) continue;
            const double wk = nv.lv + std::log(kWgk[i]);
            (nv.negative ? kron_neg[nkn++] : kron_pos[nkp++]) = wk;
            if (i % 2 == 1 || i == 7) {
                const double wg = nv.lv + std::log(kWg[i == 7 ? 3 : i / 2]);
                (nv.negative ? gauss_neg[ngn++] : gauss_pos[ngp++]) = wg;
            }
        }
    }
    SLog kron{log_sum(kron_pos, nkp) + log_h, log_sum(kron_neg, nkn) + log_h};
    SLog gauss{log_sum(gauss_pos, ngp) + log_h, log_sum(gauss_neg, ngn) + log_h};
    p.value = kron;
    p.err_log = log_abs_diff(kron, gauss);
    return p;
}

struct RegionResult {
    SLog value;
    double err_log = kNegInf;
    double sample_max_log = kNegInf;  // largest log |integrand| seen at region nodes
};

// Adaptive panels over a union of intervals.  `budget_total_log` lets the
// refinement stop once the target relative tolerance is met against the
// running global total.
RegionResult integrate_region(const ScalarField& g, bool log_space,
                              const std::vector<std::pair<double, double>>& intervals,
                              const QuadratureConfig& cfg, NodeStats& stats,
                              double prior_total_log) {
    const auto order = [](const Panel& x, const Panel& y) {
        if (x.err_log != y.err_log) return x.err_log < y.err_log;
        return x.a > y.a;  // deterministic tie break
    };
    std::vector<Panel> panels;
    stats.region_max_lv = kNegInf;

    for (const auto& [a, b] : intervals) {
        const double width = b - a;
        const int n0 = std::max(1, int(std::ceil(width / cfg.init_panel_width)));
        for (int i = 0; i < n0; ++i) {
            const double pa = a + width * double(i) / n0;
            const double pb = a + width * double(i + 1) / n0;
            panels.push_back(eval_panel(g, log_space, pa, pb, stats));
            if (stats.overflow) break;
        }
        if (stats.overflow) break;
    }
    std::make_heap(panels.begin(), panels.end(), order);

    const auto totals = [&panels](SLog& total, double& err) {
        total = SLog{};
        err = kNegInf;
        for (const auto& p : panels) {
            total.accumulate(p.value);
            err = log_add_exp(err, p.err_log);
        }
    };

    int splits = 0;
    SLog total;
    double err = kNegInf;
    while (!stats.overflow && !panels.empty() && splits < cfg.max_refine) {
        if (splits % 8 == 0) totals(total, err);
        const double scale = std::max(total.log_abs(), prior_total_log);
        if (err <= std::log(cfg.rel_tol) + scale) break;

        std::pop_heap(panels.begin(), panels.end(), order);
        Panel worst = panels.back();
        panels.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.err_log == kNegInf || mid <= worst.a || mid >= worst.b) {
            // Nothing left to gain from this panel; put it back and stop.
            panels.push_back(worst);
            std::push_heap(panels.begin(), panels.end(), order);
            break;
        }
        Panel lo = eval_panel(g, log_space, worst.a, mid, stats);
        Panel hi = eval_panel(g, log_space, mid, worst.b, stats);
        // Between periodic refreshes, grow the error bound monotonically;
        // totals() re-tightens it every few splits.
        err = log_add_exp(err, log_add_exp(lo.err_log, hi.err_log));
        panels.push_back(std::move(lo));
        std::push_heap(panels.begin(), panels.end(), order);
        panels.push_back(std::move(hi));
        std::push_heap(panels.begin(), panels.end(), order);
        ++splits;
    }

    RegionResult r;
    std::vector<Panel> done = std::move(panels);
    std::sort(done.begin(), done.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : done) {
        r.value.accumulate(p.value);
        r.err_log = log_add_exp(r.err_log, p.err_log);
    }
    r.sample_max_log = stats.region_max_lv;
    return r;
}

void finish_result(IntegralResult& res, const SLog& total, double err_log) {
    res.log_value = total.log_abs();
    res.value = total.to_double();
    res.error_estimate = std::exp(err_log);
}

bool growth_step(double cur_log, double prev_log) {
    if (prev_log == kNegInf) return cur_log > kNegInf;
    return cur_log - prev_log >= std::log(1.5);
}

IntegralResult drive_1d(const ScalarField& g, bool log_space, const QuadratureConfig& cfg) {
    IntegralResult res;
    NodeStats stats;
    SLog total;
    double err_log = kNegInf;
    const double log_thresh = std::log(cfg.divergence_threshold);

    double r_prev = 0.0;
    std::vector<double> trace_log;
    double last_ann_log = kNegInf;
    double ann_max_prev = kNegInf, ann_max_cur = kNegInf;
    bool growth_pending = false;

    for (std::size_t k = 0; k < cfg.r_schedule.size(); ++k) {
        const double R = cfg.r_schedule[k];
        std::vector<std::pair<double, double>> intervals;
        if (r_prev == 0.0)
            intervals = {{-R, R}};
        else
            intervals = {{-R, -r_prev}, {r_prev, R}};
        const SLog before = total;
        const RegionResult ann =
            integrate_region(g, log_space, intervals, cfg, stats, total.log_abs());
        total.accumulate(ann.value);
        err_log = log_add_exp(err_log, ann.err_log);
        ann_max_prev = ann_max_cur;
        ann_max_cur = ann.sample_max_log;

        TruncationPoint tp;
        tp.radius = R;
        tp.log_value = total.log_abs();
        tp.value = total.to_double();
        res.diagnostics.push_back(tp);
        trace_log.push_back(tp.log_value);
        r_prev = R;

        if (stats.overflow) {
            res.overflow_evidence = true;
            res.verdict = Verdict::divergent;
            res.note = "integrand overflow at a quadrature node";
            finish_result(res, total, err_log);
            res.invalid_nodes = stats.invalid;
            return res;
        }

        if (k >= 1) {
            const double cur = trace_log[k];
            const double prev = trace_log[k - 1];
            const double delta = log_abs_diff(total, before.lp == kNegInf && before.ln == kNegInf
                                                         ? SLog{}
                                                         : before);
            last_ann_log = ann.value.log_abs();
            const double tol_log = std::log(cfg.rel_tol) + cur;
            // An everywhere-invalid integrand carries no information: it must
            // not stabilize at zero, it runs the schedule out and raises below.
            const bool informed = stats.invalid < stats.total;
            const bool zero_case = cur == kNegInf && prev == kNegInf;
            // The panel-error gate allows for the per-annulus budgets adding up.
            const bool refined = err_log <= tol_log + std::log(100.0);
            if (informed &&
                (zero_case || (delta <= tol_log && last_ann_log <= tol_log && refined))) {
                res.verdict = Verdict::finite;
                finish_result(res, total, err_log);
                res.error_estimate =
                    std::exp(log_add_exp(err_log, log_add_exp(delta, last_ann_log)));
                res.invalid_nodes = stats.invalid;
                return res;
            }
            // Declare divergence only after two consecutive steps of confirmed
            // growth past the threshold: a large interior peak swallowed by one
            // radius step looks like growth once, never twice.
            const bool growing = k >= 2 && cur > log_thresh && growth_step(cur, prev) &&
                                 growth_step(prev, trace_log[k - 2]);
            if (growing && growth_pending) {
                res.verdict = Verdict::divergent;
                finish_result(res, total, err_log);
                res.invalid_nodes = stats.invalid;
                return res;
            }
            growth_pending = growing;
        }
    }

    if (stats.invalid == stats.total)
        throw std::runtime_error("integrand invalid at every quadrature node");
    // Schedule exhausted: divergent only if the value is past the threshold
    // and the largest integrand samples do not collapse across the outermost
    // annuli (a closing tail decays there even when the total is huge).
    if (total.log_abs() > log_thresh && ann_max_cur != kNegInf && ann_max_prev != kNegInf &&
        ann_max_cur >= ann_max_prev - std::log(2.0)) {
        res.verdict = Verdict::divergent;
    } else {
        res.verdict = Verdict::inconclusive;
        res.note = "truncation schedule exhausted without stabilization";
    }
    finish_result(res, total, err_log);
    res.invalid_nodes = stats.invalid;
    return res;
}

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

SLog tensor_box(const ScalarField& g, bool log_space, int dim, double R, int pts,
                NodeStats& stats) {
    std::vector<double> xs, ws;
    gauss_legendre(pts, xs, ws);
    std::vector<double> node(dim), logw(dim);
    std::vector<int> idx(dim, 0);
    SLog total;
    for (;;) {
        double lw = 0.0;
        for (int d = 0; d < dim; ++d) {
            node[d] = R * xs[idx[d]];
            lw += std::log(R * ws[idx[d]]);
        }
        const NodeValue nv = eval_node(g, log_space, node.data(), dim, stats);
        if (nv.valid) {
            SLog c;
            (nv.negative ? c.ln : c.lp) = nv.lv + lw;
            total.accumulate(c);
        }
        if (stats.overflow) break;
        int d = 0;
        for (; d < dim; ++d) {
            if (++idx[d] < pts) break;
            idx[d] = 0;
        }
        if (d == dim) break;
    }
    return total;
}

IntegralResult drive_tensor(const ScalarField& g, bool log_space, int dim,
                            const QuadratureConfig& cfg) {
    IntegralResult res;
    NodeStats stats;
    const int pts = dim == 2 ? cfg.tensor_points_2d : cfg.tensor_points_3d;
    const double log_thresh = std::log(cfg.divergence_threshold);
    std::vector<double> trace_log;
    SLog total;
    double err_log = kNegInf;
    bool growth_pending = false;

    for (std::size_t k = 0; k < cfg.r_schedule.size(); ++k) {
        const double R = cfg.r_schedule[k];
        const SLog coarse = tensor_box(g, log_space, dim, R, pts, stats);
        const SLog fine = tensor_box(g, log_space, dim, R, 2 * pts, stats);
        const SLog prev_total = total;
        total = fine;
        err_log = log_abs_diff(fine, coarse);

        TruncationPoint tp;
        tp.radius = R;
        tp.log_value = total.log_abs();
        tp.value = total.to_double();
        res.diagnostics.push_back(tp);
        trace_log.push_back(tp.log_value);

        if (stats.overflow) {
            res.overflow_evidence = true;
            res.verdict = Verdict::divergent;
            res.note = "integrand overflow at a quadrature node";
            finish_result(res, total, err_log);
            res.invalid_nodes = stats.invalid;
            return res;
        }
        if (k >= 1) {
            const double cur = trace_log[k];
            const double prev = trace_log[k - 1];
            const double delta = log_abs_diff(total, prev_total);
            const double tol_log = std::log(cfg.rel_tol) + cur;
            const bool informed = stats.invalid < stats.total;
            const bool zero_case = cur == kNegInf && prev == kNegInf;
            if (informed && (zero_case || (delta <= tol_log && err_log <= tol_log))) {
                res.verdict = Verdict::finite;
                finish_result(res, total, log_add_exp(err_log, delta));
                res.invalid_nodes = stats.invalid;
                return res;
            }
            const bool growing = k >= 2 && cur > log_thresh && growth_step(cur, prev) &&
                                 growth_step(prev, trace_log[k - 2]);
            if (growing && growth_pending) {
                res.verdict = Verdict::divergent;
                finish_result(res, total, err_log);
                res.invalid_nodes = stats.invalid;
                return res;
            }
            growth_pending = growing;
        }
    }
    if (stats.invalid == stats.total && stats.total > 0)
        throw std::runtime_error("integrand invalid at every quadrature node");
    res.verdict = Verdict::inconclusive;
    res.note = "truncation schedule exhausted without stabilization";
    finish_result(res, total, err_log);
    res.invalid_nodes = stats.invalid;
    return res;
}

IntegralResult drive_montecarlo(const ScalarField& g, bool log_space, int dim,
                                const QuadratureConfig& cfg) {
    IntegralResult res;
    NodeStats stats;
    std::mt19937_64 rng(cfg.mc_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = cfg.mc_sigma;
    const double log_norm = 0.5 * dim * std::log(2.0 * M_PI * s * s);

    const long n = std::max<long>(2, cfg.mc_samples);
    std::vector<double> lw(n, kNegInf);
    std::vector<double> x(dim);
    for (long i = 0; i < n; ++i) {
        double q = 0.0;
        for (int d = 0; d < dim; ++d) {
            x[d] = s * normal(rng);
            q += x[d] * x[d];
        }
        const NodeValue nv = eval_node(g, log_space, x.data(), dim, stats);
        if (!nv.valid) continue;
        if (nv.negative)
            throw std::invalid_argument("Monte Carlo integration requires a non-negative integrand");
        lw[i] = nv.lv + q / (2.0 * s * s) + log_norm;
    }
    if (stats.overflow) {
        res.overflow_evidence = true;
        res.verdict = Verdict::divergent;
        res.note = "integrand overflow at a sample point";
        return res;
    }
    if (stats.invalid == stats.total)
        throw std::runtime_error("integrand invalid at every sample point");

    const double lmax = *std::max_element(lw.begin(), lw.end());
    double mean = 0.0;
    for (double v : lw) mean += v == kNegInf ? 0.0 : std::exp(v - lmax);
    mean /= double(n);
    double var = 0.0;
    for (double v : lw) {
        const double d = (v == kNegInf ? 0.0 : std::exp(v - lmax)) - mean;
        var += d * d;
    }
    var /= double(n - 1);
    const double se = std::sqrt(var / double(n));

    // Split-half agreement as the truncation-style diagnostic.
    double h1 = 0.0, h2 = 0.0;
    for (long i = 0; i < n / 2; ++i) h1 += lw[i] == kNegInf ? 0.0 : std::exp(lw[i] - lmax);
    for (long i = n / 2; i < n; ++i) h2 += lw[i] == kNegInf ? 0.0 : std::exp(lw[i] - lmax);
    h1 /= double(n / 2);
    h2 /= double(n - n / 2);

    res.log_value = lmax + std::log(mean);
    res.value = std::exp(res.log_value);
    res.error_estimate = 3.0 * se * std::exp(lmax);
    res.diagnostics.push_back({0.0, h1 * std::exp(lmax), lmax + std::log(h1)});
    res.diagnostics.push_back({0.0, h2 * std::exp(lmax), lmax + std::log(h2)});
    res.invalid_nodes = stats.invalid;
    const bool halves_agree = std::abs(h1 - h2) <= 3.0 * se * std::sqrt(2.0) + cfg.mc_rel_tol * mean;
    if (3.0 * se <= cfg.mc_rel_tol * mean && halves_agree)
        res.verdict = Verdict::finite;
    else
        res.verdict = Verdict::inconclusive;
    res.note = "importance-sampled Monte Carlo estimate";
    return res;
}

IntegralResult drive(const ScalarField& g, bool log_space, int dim,
                     const QuadratureConfig& cfg) {
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
    if (cfg.r_schedule.size() < 2)
        throw std::invalid_argument("truncation schedule needs at least two radii");
    if (dim == 1) return drive_1d(g, log_space, cfg);
    if (dim <= 3) return drive_tensor(g, log_space, dim, cfg);
    return drive_montecarlo(g, log_space, dim, cfg);
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::finite: return "finite";
        case Verdict::divergent: return "divergent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

IntegralResult integrate(const ScalarField& g, int dim, const QuadratureConfig& cfg) {
    return drive(g, false, dim, cfg);
}

IntegralResult integrate_exp(const ScalarField& log_g, int dim, const QuadratureConfig& cfg) {
    return drive(log_g, true, dim, cfg);
}

IntegralResult normalization(const Potential& p, const QuadratureConfig& cfg) {
    const ScalarField log_g = [&p](const double* x, int n) { return -2.0 * p.f->eval(x, n); };
    return integrate_exp(log_g, p.dimension, cfg);
}

void apply_normalization(Potential& p, const IntegralResult& z) {
    if (z.verdict != Verdict::finite)
        throw std::invalid_argument("cannot normalize: integral of exp(-2F) is not finite");
    p.normalization_shift = 0.5 * z.log_value;
}

IntegralResult boltzmann_lr_norm(const Potential& p, double r, const QuadratureConfig& cfg) {
    if (r <= 0.0) throw std::invalid_argument("r must be positive");
    if (r == 2.0) {
        // The numerator integrand is exp(0) = 1, whose integral over R^N is
        // infinite regardless of F; no quadrature needed.
        IntegralResult out;
        out.verdict = Verdict::divergent;
        out.value = kInf;
        out.log_value = kInf;
        out.note = "r = 2 integrand is constant 1; integral over R^N is infinite";
        return out;
    }
    const IntegralResult z = normalization(p, cfg);
    const ScalarField log_g = [&p, r](const double* x, int n) {
        return (r - 2.0) * p.f->eval(x, n);
    };
    IntegralResult num = integrate_exp(log_g, p.dimension, cfg);
    if (z.verdict != Verdict::finite) {
        num.verdict = Verdict::inconclusive;
        num.note = "normalization integral not finite";
        return num;
    }
    if (num.verdict != Verdict::finite) return num;

    IntegralResult out = num;
    out.log_value = (num.log_value - z.log_value) / r;
    out.value = std::exp(out.log_value);
    const double rel_num = num.value > 0.0 ? num.error_estimate / num.value : 0.0;
    const double rel_z = z.value > 0.0 ? z.error_estimate / z.value : 0.0;
    out.error_estimate = out.value * (rel_num + rel_z) / r;
    out.note = "r-th root of Z^{-1} integral exp((r-2)F)";
    return out;
}

}  // namespace boltz
