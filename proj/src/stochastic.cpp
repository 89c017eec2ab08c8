#include "boltz/stochastic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace boltz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Path log-weights beyond this magnitude are excluded; sums of surviving
// weights then stay inside double range even for 10^6 paths.
constexpr double kWeightCap = 600.0;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct PathGrid {
    int n_steps = 0;
    double dt = 0.0;
    double last_dt = 0.0;

    static PathGrid make(double t, double dt) {
        if (t <= 0.0) throw std::invalid_argument("horizon must be positive");
        if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
        PathGrid g;
        g.dt = dt;
        g.n_steps = std::max(1, int(std::ceil(t / dt - 1e-12)));
        g.last_dt = t - dt * (g.n_steps - 1);
        return g;
    }
    [[nodiscard]] double step(int i) const { return i + 1 == n_steps ? last_dt : dt; }
};

void validate(const McConfig& cfg) {
    if (cfg.n_paths < 100) throw std::invalid_argument("n_paths must be at least 100");
    if (cfg.dt <= 0.0) throw std::invalid_argument("dt must be positive");
}

// Increments of base path `pair`, already scaled by sqrt(step length).
// Each pair owns an independent generator derived from (seed, pair), so
// batches are reproducible and order-independent.
void fill_increments(std::uint64_t seed, long pair, const PathGrid& g, int dim,
                     std::vector<double>& inc) {
    std::mt19937_64 rng(splitmix64(seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(pair + 1)));
    std::normal_distribution<double> normal(0.0, 1.0);
    inc.resize(std::size_t(g.n_steps) * dim);
    for (int i = 0; i < g.n_steps; ++i) {
        const double sd = std::sqrt(g.step(i));
        for (int d = 0; d < dim; ++d) inc[std::size_t(i) * dim + d] = sd * normal(rng);
    }
}

struct RunningStat {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / double(n);
        m2 += d * (v - mean);
    }
    [[nodiscard]] double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

void finish_estimate(McEstimate& e, const RunningStat& stat, long effective, long excluded) {
    e.mean = stat.mean;
    e.std_error = stat.n > 1 ? std::sqrt(stat.variance() / double(stat.n)) : 0.0;
    e.n_effective = effective;
    e.n_excluded = excluded;
    e.ci95_lo = e.mean - 1.96 * e.std_error;
    e.ci95_hi = e.mean + 1.96 * e.std_error;
    const long total = effective + excluded;
    if (total > 0 && double(excluded) > 0.001 * double(total)) {
        e.reliable = false;
        e.note = "path exclusion rate above 0.1%";
    }
}

// Streams paths one at a time and averages eval(positions); eval returns
// NaN to exclude a path.  Antithetic pairs share increments with flipped
// signs and enter the statistics through their pair mean.
template <typename Eval>
McEstimate stream_mean(int dim, const Eigen::VectorXd& x0, double t, const McConfig& cfg,
                       Eval&& eval) {
    validate(cfg);
    const PathGrid g = PathGrid::make(t, cfg.dt);
    const int members = cfg.antithetic ? 2 : 1;
    const long n_pairs = cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;

    std::vector<double> inc;
    std::vector<double> pos(std::size_t(g.n_steps + 1) * dim);
    RunningStat stat;
    long excluded = 0, effective = 0;

    for (long pr = 0; pr < n_pairs; ++pr) {
        fill_increments(cfg.rng_seed, pr, g, dim, inc);
        double acc = 0.0;
        int ok = 0;
        for (int m = 0; m < members; ++m) {
            const double sgn = m == 0 ? 1.0 : -1.0;
            for (int d = 0; d < dim; ++d) pos[d] = x0[d];
            for (int i = 0; i < g.n_steps; ++i)
                for (int d = 0; d < dim; ++d)
                    pos[std::size_t(i + 1) * dim + d] =
                        pos[std::size_t(i) * dim + d] + sgn * inc[std::size_t(i) * dim + d];
            const double v = eval(pos.data(), g);
            if (std::isnan(v)) {
                ++excluded;
            } else {
                acc += v;
                ++ok;
            }
        }
        if (ok == members) {
            stat.add(acc / members);
            effective += members;
        } else {
            // A broken antithetic pair drops its surviving member too, so the
            // pair-mean statistics stay unbiased.
            excluded += ok;
        }
    }

    McEstimate e;
    finish_estimate(e, stat, effective, excluded);
    return e;
}

// Trapezoidal log M along a discrete path; NaN on a domain error.
double path_log_m_raw(const Potential& p, const double* pos, int dim, const PathGrid& g) {
    double acc = 0.0;
    double w_prev;
    try {
        w_prev = p.well->eval(pos, dim);
        for (int i = 0; i < g.n_steps; ++i) {
            const double w = p.well->eval(pos + std::size_t(i + 1) * dim, dim);
            acc -= 0.5 * (w_prev + w) * g.step(i);
            w_prev = w;
        }
    } catch (const ExprDomainError&) {
        return kNan;
    }
    return acc;
}

// As above but with the overflow cap applied: NaN on exclusion.
double path_log_m(const Potential& p, const double* pos, int dim, const PathGrid& g) {
    const double acc = path_log_m_raw(p, pos, dim, g);
    if (std::isnan(acc) || std::abs(acc) > kWeightCap) return kNan;
    return acc;
}

struct ZForms {
    double ito = 0.0;
    double identity = 0.0;
    bool ok = false;
};

ZForms path_log_z(const Potential& p, const double* pos, int dim, const PathGrid& g) {
    ZForms z;
    double ito = 0.0;
    std::vector<double> grad(dim);
    try {
        for (int i = 0; i < g.n_steps; ++i) {
            const double* x = pos + std::size_t(i) * dim;
            const double* xn = pos + std::size_t(i + 1) * dim;
            double g2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                grad[d] = p.grad[d]->eval(x, dim);
                g2 += grad[d] * grad[d];
                ito -= grad[d] * (xn[d] - x[d]);
            }
            ito -= 0.5 * g2 * g.step(i);
        }
        const double lm = path_log_m(p, pos, dim, g);
        if (std::isnan(lm)) return z;
        z.identity = p.f->eval(pos, dim) -
                     p.f->eval(pos + std::size_t(g.n_steps) * dim, dim) + lm;
    } catch (const ExprDomainError&) {
        return z;
    }
    if (std::isnan(ito) || std::abs(ito) > kWeightCap || std::abs(z.identity) > kWeightCap)
        return z;
    z.ito = ito;
    z.ok = true;
    return z;
}

}  // namespace

PathBatch simulate_brownian(const Eigen::VectorXd& x, double t, const McConfig& cfg) {
    validate(cfg);
    const int dim = int(x.size());
    if (dim < 1) throw std::invalid_argument("start point must have positive dimension");
    const PathGrid g = PathGrid::make(t, cfg.dt);

    PathBatch b;
    b.dimension = dim;
    b.start = x;
    b.horizon = t;
    b.dt = g.dt;
    b.last_dt = g.last_dt;
    b.n_steps = g.n_steps;
    b.n_paths = cfg.antithetic ? 2 * ((cfg.n_paths + 1) / 2) : cfg.n_paths;
    b.seed = cfg.rng_seed;
    b.antithetic = cfg.antithetic;

    const std::size_t doubles =
        std::size_t(b.n_paths) * std::size_t(g.n_steps + 1) * std::size_t(dim);
    if (doubles > 187500000)  // 1.5 GB of f64
        throw std::invalid_argument("path batch too large; lower n_paths or raise dt");
    b.positions.resize(doubles);

    const int members = cfg.antithetic ? 2 : 1;
    const long n_pairs = cfg.antithetic ? b.n_paths / 2 : b.n_paths;
    std::vector<double> inc;
    for (long pr = 0; pr < n_pairs; ++pr) {
        fill_increments(cfg.rng_seed, pr, g, dim, inc);
        for (int m = 0; m < members; ++m) {
            const double sgn = m == 0 ? 1.0 : -1.0;
            const long path = pr * members + m;
            double* pos = b.positions.data() +
                          std::size_t(path) * std::size_t(g.n_steps + 1) * std::size_t(dim);
            for (int d = 0; d < dim; ++d) pos[d] = x[d];
            for (int i = 0; i < g.n_steps; ++i)
                for (int d = 0; d < dim; ++d)
                    pos[std::size_t(i + 1) * dim + d] =
                        pos[std::size_t(i) * dim + d] + sgn * inc[std::size_t(i) * dim + d];
        }
    }
    return b;
}

std::vector<double> feynman_kac_log_weights(const Potential& p, const PathBatch& batch,
                                            std::optional<double> well_floor) {
    if (p.dimension != batch.dimension)
        throw std::invalid_argument("potential and batch dimensions differ");
    PathGrid g;
    g.n_steps = batch.n_steps;
    g.dt = batch.dt;
    g.last_dt = batch.last_dt;
    std::vector<double> out(batch.n_paths, kNan);
    for (long i = 0; i < batch.n_paths; ++i) {
        const double* pos =
            batch.positions.data() +
            std::size_t(i) * std::size_t(batch.n_steps + 1) * std::size_t(batch.dimension);
        const double raw = path_log_m_raw(p, pos, batch.dimension, g);
        if (well_floor && !std::isnan(raw) &&
            raw > *well_floor * batch.horizon + 1e-9 * (1.0 + std::abs(*well_floor)))
            throw std::logic_error(
                "path weight exceeds the certified bound exp(c t); the well floor c is wrong");
        out[i] = std::isnan(raw) || std::abs(raw) > kWeightCap ? kNan : raw;
    }
    return out;
}

GirsanovWeights girsanov_log_weights(const Potential& p, const PathBatch& batch) {
    if (p.dimension != batch.dimension)
        throw std::invalid_argument("potential and batch dimensions differ");
    PathGrid g;
    g.n_steps = batch.n_steps;
    g.dt = batch.dt;
    g.last_dt = batch.last_dt;
    GirsanovWeights w;
    w.ito_log.assign(batch.n_paths, kNan);
    w.identity_log.assign(batch.n_paths, kNan);
    double sq = 0.0;
    long used = 0;
    for (long i = 0; i < batch.n_paths; ++i) {
        const double* pos =
            batch.positions.data() +
            std::size_t(i) * std::size_t(batch.n_steps + 1) * std::size_t(batch.dimension);
        const ZForms z = path_log_z(p, pos, batch.dimension, g);
        if (!z.ok) {
            ++w.n_excluded;
            continue;
        }
        w.ito_log[i] = z.ito;
        w.identity_log[i] = z.identity;
        const double d = z.ito - z.identity;
        sq += d * d;
        ++used;
    }
    w.rms_log_gap = used > 0 ? std::sqrt(sq / double(used)) : 0.0;
    return w;
}

McEstimate feynman_kac_mean(const Potential& p, const Eigen::VectorXd& x, double t,
                            const McConfig& cfg) {
    if (p.dimension != int(x.size()))
        throw std::invalid_argument("potential and start point dimensions differ");
    double max_log = kNegInf;
    McEstimate e =
        stream_mean(p.dimension, x, t, cfg, [&](const double* pos, const PathGrid& g) {
            const double lm = path_log_m(p, pos, p.dimension, g);
            if (std::isnan(lm)) return kNan;
            max_log = std::max(max_log, lm);
            return std::exp(lm);
        });
    e.max_log_weight = max_log;
    return e;
}

McEstimate girsanov_mean(const Potential& p, const Eigen::VectorXd& x, double t,
                         const McConfig& cfg) {
    if (p.dimension != int(x.size()))
        throw std::invalid_argument("potential and start point dimensions differ");
    double max_log = kNegInf;
    McEstimate e =
        stream_mean(p.dimension, x, t, cfg, [&](const double* pos, const PathGrid& g) {
            const ZForms z = path_log_z(p, pos, p.dimension, g);
            if (!z.ok) return kNan;
            max_log = std::max(max_log, z.ito);
            return std::exp(z.ito);
        });
    e.max_log_weight = max_log;
    return e;
}

double girsanov_form_rms_gap(const Potential& p, const Eigen::VectorXd& x, double t,
                             const McConfig& cfg) {
    if (p.dimension != int(x.size()))
        throw std::invalid_argument("potential and start point dimensions differ");
    double sq = 0.0;
    long used = 0;
    stream_mean(p.dimension, x, t, cfg, [&](const double* pos, const PathGrid& g) {
        const ZForms z = path_log_z(p, pos, p.dimension, g);
        if (!z.ok) return kNan;
        const double d = z.ito - z.identity;
        sq += d * d;
        ++used;
        return 0.0;
    });
    return used > 0 ? std::sqrt(sq / double(used)) : 0.0;
}

WellBound well_method_bound(const Potential& p, const Eigen::VectorXd& x, double t, double eps,
                            double c) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("eps must lie in (0, 1)");
    if (t <= 0.0) throw std::invalid_argument("t must be positive");
    const double w = p.well->eval(x.data(), p.dimension);
    WellBound b;
    if (w <= 0.0) {
        b.alternate_branch = true;
        b.well_term = std::exp(c * t - eps * t * w);
        b.value = b.well_term;
        return b;
    }
    const double f = p.shifted_value(x);
    b.well_term = std::exp(-eps * t * w);
    b.equilibrium_term = std::exp(c * t - (1.0 - eps) * f);
    b.value = b.well_term + b.equilibrium_term;
    return b;
}

McEstimate exit_time_probability(const Potential& p, const Eigen::VectorXd& x, double t,
                                 const ExitRule& rule, const McConfig& cfg) {
    if (p.dimension != int(x.size()))
        throw std::invalid_argument("potential and start point dimensions differ");
    validate(cfg);
    const int dim = p.dimension;
    const double w0 = p.well->eval(x.data(), dim);
    const double f0 = p.shifted_value(x);

    if (rule.kind == ExitRule::well_exceeds) {
        // Where the well ratio is nonpositive the stopping time is zero and
        // no path survives any positive horizon.
        const double lambda = well_ratio(p, x);
        if (lambda <= 0.0) {
            McEstimate e;
            e.mean = 0.0;
            e.n_effective = cfg.n_paths;
            e.note = "nonpositive well ratio at the start point: stopping time is zero";
            return e;
        }
    }

    const double threshold = rule.factor * w0;
    return stream_mean(dim, x, t, cfg, [&](const double* pos, const PathGrid& g) {
        try {
            for (int i = 1; i <= g.n_steps; ++i) {
                const double* xs = pos + std::size_t(i) * dim;
                if (rule.kind == ExitRule::well_exceeds) {
                    if (p.well->eval(xs, dim) >= threshold) return 0.0;
                } else {
                    if (p.well->eval(xs, dim) <= rule.eps * w0) return 0.0;
                    if (p.value(xs) + p.normalization_shift <= rule.eps * f0) return 0.0;
                }
            }
        } catch (const ExprDomainError&) {
            return kNan;
        }
        return 1.0;
    });
}

BoxStay box_stay_probability(int dim, double half_width, double t) {
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
    if (half_width <= 0.0 || t <= 0.0)
        throw std::invalid_argument("half width and t must be positive");
    const double u = t / (half_width * half_width);

    double p1;
    if (u >= 0.5) {
        // Dirichlet eigenfunction series, fast for diffuse times.
        p1 = 0.0;
        for (int k = 0;; ++k) {
            const double term = (4.0 / M_PI) / (2 * k + 1) *
                                std::exp(-(2 * k + 1) * (2 * k + 1) * M_PI * M_PI * u / 8.0);
            p1 += (k % 2 == 0 ? term : -term);
            if (term < 1e-16) break;
        }
    } else {
        // Reflection series, fast for short times.
        const auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
        const double s = 1.0 / std::sqrt(u);
        p1 = 0.0;
        for (int j = -8; j <= 8; ++j) {
            const double term = Phi((2 * j + 1) * s) - Phi((2 * j - 1) * s);
            p1 += (j % 2 == 0 ? term : -term);
        }
    }

    BoxStay out;
    out.dimension = dim;
    out.probability = std::pow(std::clamp(p1, 0.0, 1.0), dim);
    out.rate = dim * M_PI * M_PI / 8.0;
    return out;
}

McEstimate box_stay_mc(int dim, double half_width, double t, const McConfig& cfg) {
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
    if (half_width <= 0.0) throw std::invalid_argument("half width must be positive");
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    return stream_mean(dim, x0, t, cfg, [&](const double* pos, const PathGrid& g) {
        for (int i = 1; i <= g.n_steps; ++i)
            for (int d = 0; d < dim; ++d)
                if (std::abs(pos[std::size_t(i) * dim + d]) >= half_width) return 0.0;
        return 1.0;
    });
}

PairedEstimate perturbed_expectation(const Potential& p, const ExprPtr& h,
                                     const Eigen::VectorXd& x, double t, const McConfig& cfg) {
    if (p.dimension != int(x.size()))
        throw std::invalid_argument("potential and start point dimensions differ");
    const int dim = p.dimension;
    PairedEstimate pe;

    const double fx = p.f->eval(x.data(), dim);
    pe.reweighted = stream_mean(dim, x, t, cfg, [&](const double* pos, const PathGrid& g) {
        const double lm = path_log_m(p, pos, dim, g);
        if (std::isnan(lm)) return kNan;
        const double* xt = pos + std::size_t(g.n_steps) * dim;
        double hv, ft;
        try {
            hv = h->eval(xt, dim);
            ft = p.f->eval(xt, dim);
        } catch (const ExprDomainError&) {
            return kNan;
        }
        const double ex = fx - ft + lm;
        if (std::abs(ex) > kWeightCap) return kNan;
        return hv * std::exp(ex);
    });

    // Direct Euler simulation of the drifted equation, on increments from an
    // independent stream.
    McConfig direct_cfg = cfg;
    direct_cfg.rng_seed = splitmix64(cfg.rng_seed ^ 0x517cc1b727220a95ULL);
    std::vector<double> y(dim), grad(dim);
    pe.direct = stream_mean(dim, x, t, direct_cfg, [&](const double* pos, const PathGrid& g) {
        for (int d = 0; d < dim; ++d) y[d] = x[d];
        try {
            for (int i = 0; i < g.n_steps; ++i) {
                const double ds = g.step(i);
                for (int d = 0; d < dim; ++d) grad[d] = p.grad[d]->eval(y.data(), dim);
                for (int d = 0; d < dim; ++d) {
                    const double db = pos[std::size_t(i + 1) * dim + d] -
                                      pos[std::size_t(i) * dim + d];
                    y[d] += -grad[d] * ds + db;
                }
                double norm2 = 0.0;
                for (int d = 0; d < dim; ++d) norm2 += y[d] * y[d];
                if (norm2 > 1e12) return kNan;  // drift explosion
            }
            return h->eval(y.data(), dim);
        } catch (const ExprDomainError&) {
            return kNan;
        }
    });
    return pe;
}

IntegralResult semigroup_lp_condition(const Potential& p, double p_exp, double t,
                                      const QuadratureConfig& qcfg, const McConfig& cfg) {
    if (p_exp <= 2.0) throw std::invalid_argument("the exponent must exceed 2");
    IntegralResult res;
    if (p.dimension != 1) {
        res.verdict = Verdict::inconclusive;
        res.note = "outer quadrature for the L^p condition is implemented in dimension 1";
        return res;
    }
    const IntegralResult z = normalization(p, qcfg);
    if (z.verdict != Verdict::finite)
        throw std::invalid_argument("normalization integral is not finite");
    Potential q = p;
    apply_normalization(q, z);

    const double node_width = 0.5;
    const double log_thresh = std::log(qcfg.divergence_threshold);
    double total_log = kNegInf;
    double err_log = kNegInf;
    std::vector<double> trace;
    long failed_nodes = 0, nodes = 0;
    double flag_contrib = kNegInf;
    double r_prev = 0.0;
    bool growth_pending = false;
    bool stable_pending = false;

    std::vector<double> radii;
    for (double R : qcfg.r_schedule) {
        if (R > 32.0) break;
        radii.push_back(R);
    }

    const double scan_reach = 4.0 * std::sqrt(t);
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double R = radii[k];
        for (double xm = r_prev + node_width / 2; xm < R; xm += node_width) {
            for (double sgn : {1.0, -1.0}) {
                const double xv = sgn * xm;
                ++nodes;
                Eigen::VectorXd x0(1);
                x0[0] = xv;
                McConfig node_cfg = cfg;
                node_cfg.rng_seed =
                    splitmix64(cfg.rng_seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(nodes));
                const McEstimate em = feynman_kac_mean(q, x0, t, node_cfg);
                if (!em.reliable || em.n_effective == 0 || em.mean <= 0.0) {
                    ++failed_nodes;
                    continue;
                }
                // Locally attainable weight: paths can migrate into a nearby
                // dip of the well term and hold there, gaining -t W at a
                // travel cost d^2/(2t) and a confinement cost theta t / A^2
                // for a dip of half-width A.  When the best such weight
                // dwarfs every sampled one, the node mean may be missing
                // heavy mass; record the contribution it could reach.
                const int n_scan = 81;
                const double step = 2.0 * scan_reach / (n_scan - 1);
                std::array<double, n_scan> wv{};
                for (int j = 0; j < n_scan; ++j) {
                    const double xs = xv - scan_reach + step * j;
                    wv[j] = q.well->eval(&xs, 1);
                }
                const double theta1 = M_PI * M_PI / 8.0;
                double best = kNegInf;
                for (int j = 0; j < n_scan; ++j) {
                    if (wv[j] >= 0.0) continue;
                    int lo = j, hi = j;
                    while (lo > 0 && wv[lo - 1] < 0.0) --lo;
                    while (hi + 1 < n_scan && wv[hi + 1] < 0.0) ++hi;
                    const double half_width = 0.5 * step * double(hi - lo + 1);
                    const double d = std::abs(step * j - scan_reach);
                    const double net = -t * wv[j] - theta1 * t / (half_width * half_width) -
                                       d * d / (2.0 * t);
                    best = std::max(best, net);
                }
                if (best > em.max_log_weight + 40.0) {
                    const double attainable =
                        std::log(node_width) +
                        (p_exp - 2.0) * (q.value(&xv) + q.normalization_shift) +
                        p_exp * best;
                    flag_contrib = std::max(flag_contrib, attainable);
                }

                const double contrib_log =
                    std::log(node_width) + (p_exp - 2.0) * (q.value(&xv) + q.normalization_shift) +
                    p_exp * std::log(em.mean);
                total_log = log_add_exp(total_log, contrib_log);
                const double node_err_log =
                    contrib_log + std::log(p_exp) + std::log(em.std_error / em.mean);
                err_log = log_add_exp(err_log, node_err_log);
            }
        }
        r_prev = R;
        trace.push_back(total_log);
        res.diagnostics.push_back({R, std::exp(total_log), total_log});

        if (k >= 1) {
            const double cur = trace[k];
            const double prev = trace[k - 1];
            const double band = log_diff_exp(cur, prev);
            // The band is negligible when it is below both the relative
            // tolerance and three standard errors of the running total.
            const double allow =
                std::max(cur + std::log(1e-3), std::log(3.0) + err_log);
            const bool settled = band <= allow;
            if (settled && stable_pending) {
                if (flag_contrib > total_log + std::log(1e-3)) {
                    res.verdict = Verdict::inconclusive;
                    res.note = "trace stabilized but some nodes may hide unsampled heavy "
                               "path weights";
                } else if (double(failed_nodes) > 0.05 * double(nodes)) {
                    res.verdict = Verdict::inconclusive;
                    res.note = "more than 5% of outer nodes failed their Monte Carlo estimate";
                } else {
                    res.verdict = Verdict::finite;
                }
                res.value = std::exp(total_log);
                res.log_value = total_log;
                res.error_estimate = std::exp(err_log);
                return res;
            }
            const bool growing = cur > log_thresh && cur - prev >= std::log(1.5);
            if (growing && growth_pending) {
                res.verdict = Verdict::divergent;
                res.value = std::exp(total_log);
                res.log_value = total_log;
                res.error_estimate = std::exp(err_log);
                return res;
            }
            stable_pending = settled;
            growth_pending = growing;
        }
    }
    res.verdict = Verdict::inconclusive;
    res.note = "truncation schedule exhausted without stabilization";
    res.value = std::exp(total_log);
    res.log_value = total_log;
    res.error_estimate = std::exp(err_log);
    return res;
}

WindowBound osc_mean_lower_bound(const Potential& p, double y, double t, int k, double eps,
                                 double c, const McConfig& cfg) {
    if (k < 10) throw std::invalid_argument("window index k must be at least 10");
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("eps must lie in (0, 1)");
    const double centre = 2.0 * M_PI * double(k);
    const double scale = 1.0 / std::sqrt(double(k));
    if (y < centre + 0.5 * scale || y > centre + 1.5 * scale)
        throw std::invalid_argument("y must lie in the oscillation window of index k");

    WindowBound wb;
    wb.eps = eps;
    wb.c = c;
    wb.theta = M_PI * M_PI / 8.0;
    wb.bound_log = 0.5 * t * ((1.0 - eps) * std::sqrt(double(k)) - c * c) -
                   4.0 * wb.theta * t * double(k);
    Eigen::VectorXd x0(1);
    x0[0] = y;
    wb.estimate = feynman_kac_mean(p, x0, t, cfg);
    return wb;
}

void write_path_dump(const PathBatch& batch, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open path dump file for writing");
    const char magic[8] = {'B', 'P', 'A', 'T', 'H', 'v', '1', '\0'};
    out.write(magic, 8);
    const auto put_u64 = [&out](std::uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), 8);
    };
    const auto put_f64 = [&out](double v) {
        out.write(reinterpret_cast<const char*>(&v), 8);
    };
    put_u64(std::uint64_t(batch.n_paths));
    put_u64(std::uint64_t(batch.n_steps));
    put_u64(std::uint64_t(batch.dimension));
    put_f64(batch.dt);
    put_u64(batch.seed);
    out.write(reinterpret_cast<const char*>(batch.positions.data()),
              std::streamsize(batch.positions.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write while dumping paths");
}

}  // namespace boltz
