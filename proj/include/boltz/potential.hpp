// Potentials F : R^N -> R defining Boltzmann measures with density
// proportional to exp(-2 F).  A Potential owns the expression tree of F
// together with symbolically derived gradient, Laplacian and Hessian, plus
// combined trees for the quantities that drive the analytic and stochastic
// machinery:
//
//   well term            W   = |grad F|^2 / 2 - (Laplacian F) / 2
//   Schrodinger potential V  = |grad F|^2 - Laplacian F  (= 2 W)
//   well ratio           W(x) / (F(x) + normalization_shift)
//
// The normalization shift is log(Z)/2 where Z = integral of exp(-2F); adding
// it to F makes exp(-2(F+shift)) a probability density.  Derivative based
// quantities are unaffected by the shift.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "boltz/expr.hpp"

namespace boltz {

/// Thrown by well_ratio when |F(x) + shift| falls below its tolerance.
class UndefinedRatioError : public std::runtime_error {
  public:
    explicit UndefinedRatioError(const std::string& what) : std::runtime_error(what) {}
};

struct Potential {
    int dimension = 1;
    ExprPtr f;
    std::vector<ExprPtr> grad;
    ExprPtr laplacian;
    std::vector<std::vector<ExprPtr>> hessian;  // dimension x dimension, row major
    ExprPtr well;         // |grad F|^2/2 - Laplacian F/2
    ExprPtr schrodinger;  // |grad F|^2 - Laplacian F

    /// Set by apply_normalization(); zero until then.
    double normalization_shift = 0.0;

    [[nodiscard]] double value(const double* x) const { return f->eval(x, dimension); }
    [[nodiscard]] double value(const Eigen::VectorXd& x) const { return value(x.data()); }
    /// F(x) + normalization_shift.
    [[nodiscard]] double shifted_value(const Eigen::VectorXd& x) const {
        return value(x) + normalization_shift;
    }
    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    [[nodiscard]] double laplacian_at(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::MatrixXd hessian_at(const Eigen::VectorXd& x) const;
};

/// All derivative data of F at one point.
struct DiffBundle {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd grad;
    double laplacian = 0.0;
    Eigen::MatrixXd hessian;
};

/// Build a Potential from an expression tree, deriving gradient, Laplacian,
/// Hessian and the combined well / Schrodinger trees symbolically.
[[nodiscard]] Potential make_potential(ExprPtr f, int dimension);

/// Parse the expression text (see parse() in expr.hpp) and build a Potential.
[[nodiscard]] Potential parse_potential(const std::string& text, int dimension);

/// The one dimensional family x^2 + beta x sin x, constructed directly from
/// expression nodes.  Its measure has a spectral gap for every beta; the
/// stronger log-Sobolev properties hold iff |beta| < 2.
[[nodiscard]] Potential make_osc_quadratic(double beta);

[[nodiscard]] DiffBundle diff_bundle(const Potential& p, const Eigen::VectorXd& x);

/// W(x) = |grad F(x)|^2/2 - Laplacian F(x)/2.
[[nodiscard]] double well_term(const Potential& p, const Eigen::VectorXd& x);

/// V(x) = |grad F(x)|^2 - Laplacian F(x) = 2 W(x).
[[nodiscard]] double schrodinger_potential(const Potential& p, const Eigen::VectorXd& x);

/// W(x) / (F(x) + shift).  Throws UndefinedRatioError when the shifted
/// potential is closer to zero than `tol`.
[[nodiscard]] double well_ratio(const Potential& p, const Eigen::VectorXd& x,
                                double tol = 1e-12);

}  // namespace boltz
