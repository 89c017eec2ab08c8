#include "boltz/scan.hpp"

#include <cmath>
#include <limits>

namespace boltz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Extrema {
    double min = kInf, max = -kInf;
    Eigen::VectorXd argmin, argmax;
    long invalid = 0;

    void feed(const PointFunction& f, const Eigen::VectorXd& x) {
        double v;
        try {
            v = f(x);
        } catch (const ExprDomainError&) {
            ++invalid;
            return;
        }
        if (std::isnan(v)) {
            ++invalid;
            return;
        }
        if (v < min) {
            min = v;
            argmin = x;
        }
        if (v > max) {
            max = v;
            argmax = x;
        }
    }
};

// Walk the tensor grid with `resolution` points per axis on [-R, R]^dim,
// feeding every point to `visit`.
template <typename Visit>
void walk_grid(int dim, double radius, int resolution, Visit&& visit) {
    std::vector<int> idx(dim, 0);
    Eigen::VectorXd x(dim);
    for (;;) {
        for (int d = 0; d < dim; ++d)
            x[d] = resolution == 1 ? 0.0
                                   : -radius + 2.0 * radius * double(idx[d]) / (resolution - 1);
        visit(x);
        int d = 0;
        for (; d < dim; ++d) {
            if (++idx[d] < resolution) break;
            idx[d] = 0;
        }
        if (d == dim) break;
    }
}

}  // namespace

GridScan scan_grid(const PointFunction& f, int dim, double radius, int resolution,
                   const std::string& quantity) {
    if (dim < 1 || resolution < 2) throw std::invalid_argument("bad grid scan parameters");
    // Keep full tensor grids affordable in higher dimension.
    if (dim == 2) resolution = std::min(resolution, 600);
    if (dim >= 3) resolution = std::min(resolution, 60);

    Extrema all, outer;
    const double shell = 0.8 * radius;
    walk_grid(dim, radius, resolution, [&](const Eigen::VectorXd& x) {
        all.feed(f, x);
        if (x.lpNorm<Eigen::Infinity>() >= shell) outer.feed(f, x);
    });

    GridScan g;
    g.quantity = quantity;
    g.box_radius = radius;
    g.resolution = resolution;
    g.min = all.min;
    g.max = all.max;
    g.argmin = all.argmin;
    g.argmax = all.argmax;
    g.outer_min = outer.min;
    g.outer_max = outer.max;
    g.outer_argmin = outer.argmin;
    g.outer_argmax = outer.argmax;
    g.invalid_points = all.invalid;
    return g;
}

ShellTrace scan_shells(const PointFunction& f, int dim, const std::vector<double>& radii,
                       int resolution, const std::string& quantity) {
    if (dim < 1 || resolution < 2) throw std::invalid_argument("bad shell scan parameters");
    ShellTrace t;
    t.quantity = quantity;
    for (double R : radii) {
        Extrema e;
        const double lo = 0.8 * R;
        if (dim == 1) {
            Eigen::VectorXd x(1);
            for (int i = 0; i < resolution; ++i) {
                const double r = lo + (R - lo) * double(i) / (resolution - 1);
                x[0] = r;
                e.feed(f, x);
                x[0] = -r;
                e.feed(f, x);
            }
        } else {
            const int res = std::min(resolution, dim == 2 ? 400 : 40);
            walk_grid(dim, R, res, [&](const Eigen::VectorXd& x) {
                if (x.lpNorm<Eigen::Infinity>() >= lo) e.feed(f, x);
            });
        }
        t.radii.push_back(R);
        t.shell_min.push_back(e.min);
        t.shell_max.push_back(e.max);
        t.argmin.push_back(e.argmin);
    }
    return t;
}

bool stabilized(const std::vector<double>& trace, double rel_tol, double abs_tol) {
    const std::size_t n = trace.size();
    if (n < 3) return false;
    const double tol = std::max(abs_tol, rel_tol * std::abs(trace[n - 1]));
    return std::abs(trace[n - 1] - trace[n - 2]) <= tol &&
           std::abs(trace[n - 2] - trace[n - 3]) <= 4.0 * tol;
}

bool decreasing_unbounded(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 3) return false;
    const double d1 = trace[n - 3] - trace[n - 2];
    const double d2 = trace[n - 2] - trace[n - 1];
    return d1 > 0.0 && d2 > 0.0 && d2 >= 0.5 * d1;
}

bool increasing_unbounded(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 3) return false;
    const double d1 = trace[n - 2] - trace[n - 3];
    const double d2 = trace[n - 1] - trace[n - 2];
    return d1 > 0.0 && d2 > 0.0 && d2 >= 0.5 * d1;
}

bool decaying_to_zero(const std::vector<double>& trace, double floor_frac) {
    const std::size_t n = trace.size();
    if (n < 3) return false;
    double peak = -kInf;
    for (double v : trace) peak = std::max(peak, v);
    if (peak <= 0.0) return false;
    return trace[n - 1] >= 0.0 && trace[n - 1] <= floor_frac * peak &&
           trace[n - 1] <= trace[n - 2] && trace[n - 2] <= trace[n - 3];
}

}  // namespace boltz
