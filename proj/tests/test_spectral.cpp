#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "boltz/expr.hpp"
#include "boltz/potential.hpp"
#include "boltz/spectral.hpp"
#include "boltz/stochastic.hpp"

using namespace boltz;

namespace {

Discretization hand_matrix() {
    Discretization d;
    d.radius = 1.5;
    d.n = 2;
    d.h = 1.0;
    d.diag.resize(2);
    d.diag << 2.0, 2.0;
    d.offdiag.resize(1);
    d.offdiag << -1.0;
    return d;
}

}  // namespace

TEST_CASE("two by two eigenvalues by hand") {
    SpectrumResult s = smallest_eigs(hand_matrix(), 2);
    CHECK(std::abs(s.eigenvalues[0] - 1.0) < 1e-9);
    CHECK(std::abs(s.eigenvalues[1] - 3.0) < 1e-9);
    CHECK(s.gap == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("free laplacian matches the tridiagonal closed form") {
    Potential zero = parse_potential("0", 1);
    Discretization d = discretize(zero, 1.0, 50);
    CHECK(d.h == doctest::Approx(2.0 / 51.0).epsilon(1e-15));
    CHECK(d.offdiag[0] == doctest::Approx(-0.5 / (d.h * d.h)).epsilon(1e-15));

    SpectrumResult s = smallest_eigs(d, 8);
    for (int j = 1; j <= 8; ++j) {
        const double sj = std::sin(j * M_PI / (2.0 * 51.0));
        const double exact = 2.0 / (d.h * d.h) * sj * sj;
        CHECK(std::abs(s.eigenvalues[j - 1] - exact) < 1e-8);
    }
}

TEST_CASE("free laplacian converges to the continuum dirichlet spectrum") {
    Potential zero = parse_potential("0", 1);
    SpectrumResult s = smallest_eigs(discretize(zero, 2.0, 2000), 4);
    for (int j = 1; j <= 4; ++j) {
        const double continuum = 0.5 * std::pow(j * M_PI / 4.0, 2.0);
        CHECK(std::abs(s.eigenvalues[j - 1] - continuum) < 1e-4);
    }
    CHECK(std::abs(s.eigenvalues[0] - 0.5 * std::pow(M_PI / 4.0, 2.0)) < 1e-6);
}

TEST_CASE("gaussian measure reproduces the full equally spaced ladder") {
    SpectrumResult s = spectral_gap(parse_potential("x^2", 1));
    CHECK(s.converged);
    CHECK(s.gap == doctest::Approx(2.0).epsilon(5e-4));
    CHECK(s.trace.size() == 9);
    CHECK(std::abs(s.eigenvalues[0]) <= 1e-3);
    REQUIRE(s.eigenvalues.size() == 6);
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(s.eigenvalues[j] - 2.0 * j) <= 5e-3 * (1.0 + 2.0 * j));
        if (j > 0) CHECK(s.eigenvalues[j] >= s.eigenvalues[j - 1]);
    }
}

TEST_CASE("gap scales linearly in the quadratic coefficient") {
    SpectrumResult half = spectral_gap(parse_potential("0.5*x^2", 1));
    CHECK(half.converged);
    CHECK(half.gap == doctest::Approx(1.0).epsilon(1e-3));
    SpectrumResult twice = spectral_gap(parse_potential("2*x^2", 1));
    CHECK(twice.converged);
    CHECK(twice.gap == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("quartic gaps agree with an independent dense solve") {
    SpectrumResult q = spectral_gap(parse_potential("x^4", 1));
    CHECK(q.converged);
    CHECK(q.gap == doctest::Approx(1.9354821022).epsilon(1e-6));
    CHECK(std::abs(q.eigenvalues[0]) <= 1e-3);

    SpectrumResult dw = spectral_gap(parse_potential("x^4-x^2", 1));
    CHECK(dw.converged);
    CHECK(dw.gap == doctest::Approx(0.8458892893).epsilon(1e-6));
    CHECK(std::abs(dw.eigenvalues[0]) <= 1e-3);
}

TEST_CASE("heavy tail never stabilizes and the trace decays with the box") {
    SpectrumResult s = spectral_gap(parse_potential("1.1*log(1+x^2)", 1));
    CHECK_FALSE(s.converged);
    CHECK(s.note.find("did not stabilize") != std::string::npos);
    REQUIRE(s.trace.size() == 9);
    const double g8 = s.trace[2].extrapolated_gap;
    const double g12 = s.trace[5].extrapolated_gap;
    const double g16 = s.trace[8].extrapolated_gap;
    CHECK(g12 < 0.6 * g8);
    CHECK(g16 < 0.6 * g12);
    CHECK(s.gap == doctest::Approx(0.06922319).epsilon(1e-5));
}

TEST_CASE("constant shifts leave the spectrum exactly unchanged") {
    SpectrumResult a = spectral_gap(parse_potential("x^2", 1));
    SpectrumResult b = spectral_gap(parse_potential("x^2+5", 1));
    CHECK(a.gap == b.gap);
    for (std::size_t j = 0; j < a.eigenvalues.size(); ++j) {
        CHECK(a.eigenvalues[j] == b.eigenvalues[j]);
    }
}

TEST_CASE("empirical convergence order in h is second order") {
    Potential g = parse_potential("x^2", 1);
    const double g1 = smallest_eigs(discretize(g, 8.0, 999), 2).gap;
    const double g2 = smallest_eigs(discretize(g, 8.0, 1999), 2).gap;
    const double g3 = smallest_eigs(discretize(g, 8.0, 3999), 2).gap;
    const double order = std::log2(std::abs(g1 - g2) / std::abs(g2 - g3));
    CHECK(order >= 1.9);
    CHECK(order <= 2.2);
}

TEST_CASE("enlarging the box never raises the first excited level") {
    Potential g = parse_potential("x^2", 1);
    const double narrow = smallest_eigs(discretize(g, 8.0, 4000), 2).eigenvalues[1];
    const double wide = smallest_eigs(discretize(g, 12.0, 4000), 2).eigenvalues[1];
    CHECK(wide <= narrow + 1e-9);
}

TEST_CASE("single radius schedules fall back to the mesh ladder") {
    SpectralSchedule sched;
    sched.radii = {8.0};
    sched.sizes = {2000, 4000};
    SpectrumResult s = spectral_gap(parse_potential("x^2", 1), sched);
    CHECK(s.converged);
    CHECK(s.trace.size() == 2);
    CHECK(s.gap == doctest::Approx(2.0).epsilon(5e-4));
}

TEST_CASE("bounded perturbation keeps the gap inside the oscillation band") {
    Potential g = parse_potential("x^2", 1);

    CriterionReport s = holley_stroock_crosscheck(g, parse_potential("sin(x)", 1));
    CHECK(s.verdict == CriterionVerdict::holds);
    CHECK(s.conclusion == Conclusion::sgp);
    CHECK(s.witnesses.at("osc") == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(s.witnesses.at("gap_perturbed") == doctest::Approx(2.28744651).epsilon(1e-6));
    CHECK(s.witnesses.at("ratio") == doctest::Approx(1.14372325).epsilon(1e-6));
    CHECK(s.witnesses.at("ratio") < s.witnesses.at("factor"));

    CriterionReport z = holley_stroock_crosscheck(g, parse_potential("0", 1));
    CHECK(z.verdict == CriterionVerdict::holds);
    CHECK(z.witnesses.at("ratio") == 1.0);

    CriterionReport c = holley_stroock_crosscheck(g, parse_potential("2", 1));
    CHECK(c.verdict == CriterionVerdict::holds);
    CHECK(c.witnesses.at("osc") == 0.0);
    CHECK(c.witnesses.at("gap_base") == c.witnesses.at("gap_perturbed"));

    CriterionReport u = holley_stroock_crosscheck(g, parse_potential("x", 1));
    CHECK(u.verdict == CriterionVerdict::inconclusive);
    CHECK(u.note.find("unbounded") != std::string::npos);

    CriterionReport d2 = holley_stroock_crosscheck(parse_potential("x1^2+x2^2", 2),
                                                   parse_potential("0", 2));
    CHECK(d2.verdict == CriterionVerdict::inconclusive);
    CHECK(d2.note.find("one-dimensional") != std::string::npos);
}

TEST_CASE("drifted simulation relaxes at the spectral rate") {
    Potential g = parse_potential("x^2", 1);
    SpectrumResult sg = spectral_gap(g);
    REQUIRE(sg.converged);

    const ExprPtr h = parse("x", 1);
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    McConfig mc;
    mc.dt = 2e-3;
    mc.n_paths = 20000;
    mc.rng_seed = 812;
    const double t1 = 0.15, t2 = 0.3;
    const PairedEstimate e1 = perturbed_expectation(g, h, x0, t1, mc);
    const PairedEstimate e2 = perturbed_expectation(g, h, x0, t2, mc);
    const double rate = -std::log(e2.direct.mean / e1.direct.mean) / (t2 - t1);
    CHECK(std::abs(rate - sg.gap) / sg.gap <= 0.1);
}

TEST_CASE("solves are deterministic") {
    Potential g = parse_potential("x^4", 1);
    SpectrumResult a = smallest_eigs(discretize(g, 8.0, 2000), 4);
    SpectrumResult b = smallest_eigs(discretize(g, 8.0, 2000), 4);
    for (int j = 0; j < 4; ++j) CHECK(a.eigenvalues[j] == b.eigenvalues[j]);
}

TEST_CASE("spectral argument validation") {
    Potential g2 = parse_potential("x1^2+x2^2", 2);
    Potential g1 = parse_potential("x^2", 1);
    CHECK_THROWS_AS((void)discretize(g2, 8.0, 100), std::invalid_argument);
    CHECK_THROWS_AS((void)discretize(g1, -1.0, 100), std::invalid_argument);
    CHECK_THROWS_AS((void)discretize(g1, 8.0, 1), std::invalid_argument);
    Discretization d = discretize(g1, 8.0, 100);
    CHECK_THROWS_AS((void)smallest_eigs(d, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)smallest_eigs(d, 9), std::invalid_argument);
    CHECK_THROWS_AS((void)smallest_eigs(hand_matrix(), 3), std::invalid_argument);
    CHECK_THROWS_AS((void)spectral_gap(g2), std::invalid_argument);
    SpectralSchedule empty;
    empty.radii.clear();
    CHECK_THROWS_AS((void)spectral_gap(g1, empty), std::invalid_argument);
}
