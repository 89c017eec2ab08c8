#include <doctest.h>

#include <cmath>

#include "boltz/potential.hpp"

using namespace boltz;

namespace {

Eigen::VectorXd pt(double x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return v;
}

Eigen::VectorXd pt(double x, double y) {
    Eigen::VectorXd v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_CASE("quadratic potential has the closed-form well term") {
    const Potential p = parse_potential("x^2", 1);
    for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0, 10.0}) {
        // F' = 2x, F'' = 2, so W = 2x^2 - 1 and V = 4x^2 - 2.
        CHECK(well_term(p, pt(x)) == doctest::Approx(2.0 * x * x - 1.0).epsilon(1e-14));
        CHECK(schrodinger_potential(p, pt(x)) ==
              doctest::Approx(4.0 * x * x - 2.0).epsilon(1e-14));
    }
}

TEST_CASE("schrodinger potential is exactly twice the well term") {
    for (const char* text : {"x^2", "x^4 - x^2", "x^2 + sin(x)"}) {
        const Potential p = parse_potential(text, 1);
        for (double x = -6.0; x <= 6.0; x += 0.17)
            CHECK(schrodinger_potential(p, pt(x)) == 2.0 * well_term(p, pt(x)));
    }
    const Potential q = parse_potential("x1^2 + x2^4 + x1*x2", 2);
    for (double x = -3.0; x <= 3.0; x += 0.5)
        for (double y = -3.0; y <= 3.0; y += 0.5)
            CHECK(schrodinger_potential(q, pt(x, y)) == 2.0 * well_term(q, pt(x, y)));
}

TEST_CASE("well ratio and its undefined locus") {
    Potential p = parse_potential("x^2", 1);

    // Shift is zero until normalization is applied, so F(0) = 0 is undefined.
    CHECK_THROWS_AS((void)well_ratio(p, pt(0.0)), UndefinedRatioError);
    CHECK(well_ratio(p, pt(1.0)) == doctest::Approx(1.0));
    CHECK(well_ratio(p, pt(2.0)) == doctest::Approx(7.0 / 4.0));

    p.normalization_shift = 0.5;
    CHECK(well_ratio(p, pt(0.0)) == doctest::Approx(-2.0));
    CHECK(p.shifted_value(pt(3.0)) == doctest::Approx(9.5));

    // A negative shift moves the undefined locus to F(x) = -shift.
    p.normalization_shift = -1.0;
    CHECK_THROWS_AS((void)well_ratio(p, pt(1.0)), UndefinedRatioError);
    CHECK_THROWS_AS((void)well_ratio(p, pt(-1.0)), UndefinedRatioError);
    CHECK(well_ratio(p, pt(2.0)) == doctest::Approx(7.0 / 3.0));

    // The tolerance widens the locus.
    p.normalization_shift = 0.0;
    CHECK_THROWS_AS((void)well_ratio(p, pt(0.01), 1e-3), UndefinedRatioError);
    CHECK(well_ratio(p, pt(0.01), 1e-6) == doctest::Approx((2e-4 - 1.0) / 1e-4));
}

TEST_CASE("diff bundle matches the individual accessors") {
    const Potential p = parse_potential("x1^2*x2 + cos(x1) + exp(x2/3)", 2);
    const Eigen::VectorXd x = pt(0.7, -1.2);
    const DiffBundle d = diff_bundle(p, x);
    CHECK(d.f == p.value(x));
    CHECK((d.grad - p.gradient(x)).norm() == 0.0);
    CHECK(d.laplacian == p.laplacian_at(x));
    CHECK((d.hessian - p.hessian_at(x)).norm() == 0.0);
    CHECK((d.x - x).norm() == 0.0);

    // The Laplacian tree is assembled from the same diagonal derivative
    // trees, so it agrees with the Hessian trace bitwise.
    CHECK(d.laplacian == d.hessian(0, 0) + d.hessian(1, 1));
}

TEST_CASE("oscillating family well structure") {
    // At multiples of 2 pi with beta = -2: F' = 0 and F'' = -2, so V = 2.
    const Potential p = make_osc_quadratic(-2.0);
    for (int k = 1; k <= 5; ++k) {
        const double x = 2.0 * M_PI * double(k);
        CHECK(schrodinger_potential(p, pt(x)) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(well_term(p, pt(x)) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Near odd multiples of pi the curvature term dominates and V grows
    // linearly in |x|; check the closed form V = F'^2 - F'' directly.
    for (double x : {M_PI, 3.0 * M_PI, 25.0, -40.0}) {
        const double fp = (2.0 - 2.0 * std::cos(x)) * x - 2.0 * std::sin(x);
        const double fpp = 2.0 * x * std::sin(x) + 2.0 * (1.0 - 2.0 * std::cos(x));
        CHECK(schrodinger_potential(p, pt(x)) == doctest::Approx(fp * fp - fpp).epsilon(1e-10));
    }
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS((void)make_potential(variable(0), 0), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_potential("x1 + x2", 1), ParseError);
}
