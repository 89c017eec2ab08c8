#include <doctest.h>

#include <cmath>

#include "boltz/potential.hpp"
#include "boltz/quadrature.hpp"

using namespace boltz;

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrtHalfPi = 1.2533141373155002512;  // integral of exp(-2 x^2)

ScalarField gaussian(double a) {
    return [a](const double* x, int) { return std::exp(-a * x[0] * x[0]); };
}

ScalarField log_gaussian(double a) {
    return [a](const double* x, int) { return -a * x[0] * x[0]; };
}

}  // namespace

TEST_CASE("log space helpers") {
    CHECK(log_add_exp(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
    CHECK(log_add_exp(-INFINITY, 1.5) == 1.5);
    CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_diff_exp(std::log(5.0), std::log(3.0)) == doctest::Approx(std::log(2.0)));
    CHECK(log_diff_exp(2.5, 2.5) == -INFINITY);
    CHECK(log_diff_exp(3.0, -INFINITY) == 3.0);
}

TEST_CASE("gaussian integrals to relative 1e-8 on both paths") {
    for (double a : {0.5, 1.0, 2.0, 5.0}) {
        const double want = std::sqrt(M_PI / a);
        const IntegralResult lin = integrate(gaussian(a), 1);
        CHECK(lin.verdict == Verdict::finite);
        CHECK(std::abs(lin.value - want) <= 1e-8 * want);
        CHECK(lin.invalid_nodes == 0);

        const IntegralResult lg = integrate_exp(log_gaussian(a), 1);
        CHECK(lg.verdict == Verdict::finite);
        CHECK(std::abs(lg.value - want) <= 1e-8 * want);
        CHECK(std::abs(lg.log_value - std::log(want)) <= 1e-8);
    }
}

TEST_CASE("linear scaling is exact to near machine precision") {
    const double base = integrate(gaussian(1.0), 1).value;
    for (double c : {2.0, 10.0}) {
        const ScalarField g = [c](const double* x, int) {
            return c * std::exp(-x[0] * x[0]);
        };
        const IntegralResult r = integrate(g, 1);
        CHECK(r.verdict == Verdict::finite);
        CHECK(std::abs(r.value - c * base) <= 1e-12 * c * base);
    }
}

TEST_CASE("translation invariance") {
    const ScalarField g = [](const double* x, int) {
        const double u = x[0] - 3.0;
        return std::exp(-u * u);
    };
    const IntegralResult r = integrate(g, 1);
    CHECK(r.verdict == Verdict::finite);
    CHECK(std::abs(r.value - kSqrtPi) <= 1e-8 * kSqrtPi);
}

TEST_CASE("negative integrands keep their sign") {
    const ScalarField g = [](const double* x, int) { return -std::exp(-x[0] * x[0]); };
    const IntegralResult r = integrate(g, 1);
    CHECK(r.verdict == Verdict::finite);
    CHECK(std::abs(r.value + kSqrtPi) <= 1e-8 * kSqrtPi);
}

TEST_CASE("identically zero log integrand is finite zero") {
    const ScalarField g = [](const double*, int) { return -INFINITY; };
    const IntegralResult r = integrate_exp(g, 1);
    CHECK(r.verdict == Verdict::finite);
    CHECK(r.value == 0.0);
}

TEST_CASE("exponential growth is flagged divergent") {
    const ScalarField g = [](const double* x, int) { return std::exp(x[0]); };
    const IntegralResult lin = integrate(g, 1);
    CHECK(lin.verdict == Verdict::divergent);

    const ScalarField lg = [](const double* x, int) { return x[0]; };
    const IntegralResult le = integrate_exp(lg, 1);
    CHECK(le.verdict == Verdict::divergent);
    // The verdict should land before the schedule is exhausted.
    CHECK(le.diagnostics.size() < 10);
}

TEST_CASE("super-gaussian growth diverges with a growing trace") {
    const IntegralResult r = integrate_exp(log_gaussian(-0.1), 1);
    CHECK(r.verdict == Verdict::divergent);
    REQUIRE(r.diagnostics.size() >= 3);
    for (std::size_t i = 1; i < r.diagnostics.size(); ++i)
        CHECK(r.diagnostics[i].log_value > r.diagnostics[i - 1].log_value);
    CHECK(r.diagnostics.back().log_value > std::log(1e12));
}

TEST_CASE("far-out divergence is decided in log space without overflow") {
    // exp(x^2) reaches e^1024 well outside double range; the log path must
    // still conclude divergence.
    const IntegralResult r = integrate_exp(log_gaussian(-1.0), 1);
    CHECK(r.verdict == Verdict::divergent);
    CHECK(std::isfinite(r.log_value));
}

TEST_CASE("a huge interior peak is finite, not divergent") {
    // exp(16 x^4 - 0.5 x^6) peaks near e^2431 around |x| = 4.6; swallowing the
    // peak makes truncations grow past every threshold for two radius steps,
    // yet the integral is finite and the trace flattens right after.
    const ScalarField lg = [](const double* x, int) {
        const double x2 = x[0] * x[0];
        return 16.0 * x2 * x2 - 0.5 * x2 * x2 * x2;
    };
    const IntegralResult r = integrate_exp(lg, 1);
    CHECK(r.verdict == Verdict::finite);
    CHECK(r.log_value > std::log(1e12));
    CHECK(r.log_value < 2440.0);
    CHECK(r.log_value > 2420.0);
}

TEST_CASE("slowly growing and heavy-tailed integrands stay inconclusive") {
    const ScalarField one = [](const double*, int) { return 1.0; };
    const IntegralResult r1 = integrate(one, 1);
    CHECK(r1.verdict == Verdict::inconclusive);
    CHECK(!r1.note.empty());

    const ScalarField cauchy = [](const double* x, int) { return 1.0 / (1.0 + x[0] * x[0]); };
    const IntegralResult r2 = integrate(cauchy, 1);
    CHECK(r2.verdict == Verdict::inconclusive);
    // The truncated value is still a decent estimate of pi.
    CHECK(r2.value == doctest::Approx(M_PI).epsilon(1e-2));
}

TEST_CASE("domain errors are excluded and counted") {
    const ScalarField g = [](const double* x, int) {
        if (x[0] < 0.0) throw ExprDomainError("sqrt of a negative number");
        return std::sqrt(x[0]) * std::exp(-x[0]);
    };
    const IntegralResult r = integrate(g, 1);
    CHECK(r.verdict == Verdict::finite);
    CHECK(r.invalid_nodes > 0);
    CHECK(std::abs(r.value - 0.5 * kSqrtPi) <= 1e-7);
}

TEST_CASE("an everywhere-invalid integrand throws") {
    const ScalarField g = [](const double*, int) -> double {
        throw ExprDomainError("nope");
    };
    CHECK_THROWS_AS((void)integrate(g, 1), std::runtime_error);
}

TEST_CASE("two dimensional tensor quadrature") {
    const ScalarField g = [](const double* x, int) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
    };
    const IntegralResult r = integrate(g, 2);
    CHECK(r.verdict == Verdict::finite);
    CHECK(std::abs(r.value - M_PI) <= 1e-8 * M_PI);

    const ScalarField lg = [](const double* x, int) { return x[0] * x[0] + x[1] * x[1]; };
    CHECK(integrate_exp(lg, 2).verdict == Verdict::divergent);
}

TEST_CASE("three dimensional tensor quadrature") {
    const ScalarField g = [](const double* x, int) {
        return std::exp(-2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    };
    const IntegralResult r = integrate(g, 3);
    CHECK(r.verdict == Verdict::finite);
    const double want = std::pow(M_PI / 2.0, 1.5);
    CHECK(std::abs(r.value - want) <= 1e-8 * want);
}

TEST_CASE("high dimensional monte carlo fallback") {
    const ScalarField lg = [](const double* x, int n) {
        double q = 0.0;
        for (int d = 0; d < n; ++d) q += x[d] * x[d];
        return -q;
    };
    QuadratureConfig cfg;
    cfg.mc_sigma = 0.8;  // close to the optimal proposal for exp(-|x|^2)
    const IntegralResult r = integrate_exp(lg, 4, cfg);
    const double want = M_PI * M_PI;
    CHECK(std::abs(r.value - want) <= 0.05 * want);
    CHECK(r.verdict != Verdict::divergent);
}

TEST_CASE("normalization of the standard quadratic potential") {
    Potential p = parse_potential("x^2", 1);
    const IntegralResult z = normalization(p);
    CHECK(z.verdict == Verdict::finite);
    CHECK(std::abs(z.value - kSqrtHalfPi) <= 1e-8 * kSqrtHalfPi);

    apply_normalization(p, z);
    CHECK(p.normalization_shift == doctest::Approx(0.25 * std::log(M_PI / 2.0)).epsilon(1e-8));
    CHECK(p.shifted_value(Eigen::VectorXd::Zero(1)) == p.normalization_shift);

    IntegralResult bad;
    bad.verdict = Verdict::inconclusive;
    CHECK_THROWS_AS(apply_normalization(p, bad), std::invalid_argument);
}

TEST_CASE("normalization in two dimensions") {
    const Potential p = parse_potential("x1^2 + x2^2", 2);
    const IntegralResult z = normalization(p);
    CHECK(z.verdict == Verdict::finite);
    const double want = M_PI / 2.0;
    CHECK(std::abs(z.value - want) <= 1e-8 * want);
}

TEST_CASE("lr norms of exp(F) for the quadratic potential") {
    const Potential p = parse_potential("x^2", 1);

    const IntegralResult r1 = boltzmann_lr_norm(p, 1.0);
    CHECK(r1.verdict == Verdict::finite);
    CHECK(std::abs(r1.value - std::sqrt(2.0)) <= 1e-7);

    const IntegralResult r15 = boltzmann_lr_norm(p, 1.5);
    CHECK(r15.verdict == Verdict::finite);
    CHECK(std::abs(r15.value - std::pow(2.0, 2.0 / 3.0)) <= 1e-7);

    // At r = 2 the compensating factor vanishes and the integral is the
    // Lebesgue measure of the line.
    const IntegralResult r2 = boltzmann_lr_norm(p, 2.0);
    CHECK(r2.verdict == Verdict::divergent);

    // Above r = 2 the integrand grows like exp((r-2) x^2).
    const IntegralResult r3 = boltzmann_lr_norm(p, 3.0);
    CHECK(r3.verdict == Verdict::divergent);

    CHECK_THROWS_AS((void)boltzmann_lr_norm(p, -1.0), std::invalid_argument);
}

TEST_CASE("determinism: repeated runs give identical results") {
    const IntegralResult a = integrate(gaussian(1.3), 1);
    const IntegralResult b = integrate(gaussian(1.3), 1);
    CHECK(a.value == b.value);
    CHECK(a.error_estimate == b.error_estimate);
    REQUIRE(a.diagnostics.size() == b.diagnostics.size());
    for (std::size_t i = 0; i < a.diagnostics.size(); ++i)
        CHECK(a.diagnostics[i].value == b.diagnostics[i].value);
}
