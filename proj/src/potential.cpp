#include "boltz/potential.hpp"

#include <cmath>

namespace boltz {

Eigen::VectorXd Potential::gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(dimension);
    for (int i = 0; i < dimension; ++i) g[i] = grad[i]->eval(x.data(), dimension);
    return g;
}

double Potential::laplacian_at(const Eigen::VectorXd& x) const {
    return laplacian->eval(x.data(), dimension);
}

Eigen::MatrixXd Potential::hessian_at(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd h(dimension, dimension);
    for (int i = 0; i < dimension; ++i)
        for (int j = 0; j < dimension; ++j) h(i, j) = hessian[i][j]->eval(x.data(), dimension);
    return h;
}

Potential make_potential(ExprPtr f, int dimension) {
    if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
    Potential p;
    p.dimension = dimension;
    p.f = std::move(f);
    p.grad.reserve(dimension);
    for (int i = 0; i < dimension; ++i) p.grad.push_back(derivative(p.f, i));

    // Mixed partials are derived independently for every (i, j); symmetry of
    // the Hessian is a property test, not a construction shortcut.
    p.hessian.assign(dimension, {});
    ExprPtr lap = constant(0.0);
    for (int i = 0; i < dimension; ++i) {
        p.hessian[i].reserve(dimension);
        for (int j = 0; j < dimension; ++j) p.hessian[i].push_back(derivative(p.grad[i], j));
        lap = add(lap, p.hessian[i][i]);
    }
    p.laplacian = lap;

    ExprPtr grad_sq = constant(0.0);
    for (int i = 0; i < dimension; ++i) grad_sq = add(grad_sq, powi(p.grad[i], 2));
    p.schrodinger = sub(grad_sq, p.laplacian);
    p.well = mul(constant(0.5), p.schrodinger);
    return p;
}

Potential parse_potential(const std::string& text, int dimension) {
    return make_potential(parse(text, dimension), dimension);
}

Potential make_osc_quadratic(double beta) {
    const ExprPtr x = variable(0);
    const ExprPtr f = add(powi(x, 2), mul(constant(beta), mul(x, sin(x))));
    return make_potential(f, 1);
}

DiffBundle diff_bundle(const Potential& p, const Eigen::VectorXd& x) {
    DiffBundle d;
    d.x = x;
    d.f = p.value(x);
    d.grad = p.gradient(x);
    d.laplacian = p.laplacian_at(x);
    d.hessian = p.hessian_at(x);
    return d;
}

double well_term(const Potential& p, const Eigen::VectorXd& x) {
    return p.well->eval(x.data(), p.dimension);
}

double schrodinger_potential(const Potential& p, const Eigen::VectorXd& x) {
    return p.schrodinger->eval(x.data(), p.dimension);
}

double well_ratio(const Potential& p, const Eigen::VectorXd& x, double tol) {
    const double denom = p.shifted_value(x);
    if (std::abs(denom) < tol)
        throw UndefinedRatioError("well ratio undefined: |F(x) + shift| < tolerance");
    return well_term(p, x) / denom;
}

}  // namespace boltz
