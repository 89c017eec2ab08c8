#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "boltz/criteria.hpp"
#include "boltz/potential.hpp"

using namespace boltz;

namespace {

constexpr double kESqrtPi = 4.8180290946987216;     // e * sqrt(pi)
constexpr double kGaussZ = 1.2533141373155003;      // integral of exp(-2 x^2)
constexpr double kOscZ = 10.891166266187705;        // same for x^2 - 2 x sin x
constexpr double kOscGradMoment = 1.2672550015531272;
constexpr double kGaussWangMoment = 1.0079052613579393;
constexpr double kWellWangMoment = 3.635213845904204;
constexpr double kGaussMrSup = 0.2612714234318834;  // (64 + s + log 16) / 256
constexpr double kQuarticCertificate = 4.0533072239992134;
constexpr double kGongWuHalf = 1.8953350895910028;
constexpr double kGrowthFloor = 2.4515827052894549;  // 2 + log(pi/2)
constexpr double kSeriesLog1 = 4.241655019984734;
constexpr double kSeriesLog2 = 48.30830123460688;
constexpr double kE4 = 54.598150033144236;

double w(const CriterionReport& r, const char* key) { return r.witnesses.at(key); }

bool mentions(const CriterionReport& r, const char* text) {
    return r.note.find(text) != std::string::npos;
}

}  // namespace

TEST_CASE("verdicts and conclusions print by name") {
    CHECK(std::string(to_string(CriterionVerdict::holds)) == "holds");
    CHECK(std::string(to_string(CriterionVerdict::fails)) == "fails");
    CHECK(std::string(to_string(CriterionVerdict::inconclusive)) == "inconclusive");
    CHECK(std::string(to_string(Conclusion::none)) == "none");
    CHECK(std::string(to_string(Conclusion::sgp)) == "SGP");
    CHECK(std::string(to_string(Conclusion::tlsi)) == "TLSI");
    CHECK(std::string(to_string(Conclusion::ultracontractive)) == "ultracontractive");
}

TEST_CASE("gaussian hypotheses gate verifies all three conditions") {
    Potential p = parse_potential("x^2", 1);
    CriterionReport r = check_hypotheses(p);
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::none);
    CHECK(w(r, "Z") == doctest::Approx(kGaussZ).epsilon(1e-8));
    CHECK(w(r, "gradient_moment") == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(w(r, "K_hat") == doctest::Approx(2.0).epsilon(1e-9));

    Potential psi = parse_potential("log(1+x^2)", 1);
    CriterionReport rc = check_hypotheses(p, {}, &psi);
    CHECK(rc.verdict == CriterionVerdict::holds);
    CHECK(w(rc, "K_hat") == doctest::Approx(w(r, "K_hat")));
}

TEST_CASE("linear potential is not normalizable") {
    CriterionReport r = check_hypotheses(parse_potential("0.5*x", 1));
    CHECK(r.verdict == CriterionVerdict::fails);
    CHECK(mentions(r, "not normalizable"));
}

TEST_CASE("uniform convexity on the gaussian") {
    CriterionReport r = check_bakry_emery(parse_potential("x^2", 1));
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::tlsi);
    CHECK(w(r, "K") == doctest::Approx(2.0).epsilon(1e-12));
    REQUIRE(r.constants.has_value());
    CHECK(r.constants->a == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.constants->b == 0.0);

    CHECK(check_bakry_emery(parse_potential("x^4", 1)).verdict ==
          CriterionVerdict::fails);
}

TEST_CASE("convexity defect criterion with a gaussian moment") {
    CriterionReport g = check_wang(parse_potential("x^2", 1));
    CHECK(g.verdict == CriterionVerdict::holds);
    CHECK(g.conclusion == Conclusion::tlsi);
    CHECK(w(g, "K") == 0.0);
    CHECK(w(g, "eps") == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(w(g, "moment") == doctest::Approx(kGaussWangMoment).epsilon(1e-7));

    CriterionReport d = check_wang(parse_potential("x^4-x^2", 1));
    CHECK(d.verdict == CriterionVerdict::holds);
    CHECK(w(d, "K") == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(w(d, "eps") == doctest::Approx(2.03125).epsilon(1e-9));
    CHECK(w(d, "moment") == doctest::Approx(kWellWangMoment).epsilon(1e-7));
}

TEST_CASE("tail ratio criterion on the gaussian attains the onset supremum") {
    CriterionReport r = check_malrieu_roberto(parse_potential("x^2", 1));
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::tlsi);
    CHECK(w(r, "onset") == 8.0);
    CHECK(w(r, "sup") == doctest::Approx(kGaussMrSup).epsilon(1e-6));
}

TEST_CASE("tail ratio criterion refutes the heavy sub-quadratic tail") {
    CriterionReport r =
        check_malrieu_roberto(parse_potential("exp(0.75*log(1+x^2))", 1));
    CHECK(r.verdict == CriterionVerdict::fails);
    CHECK(mentions(r, "grows without bound"));
}

TEST_CASE("liminf criteria hold for coercive derivatives and fail for flat ones") {
    CriterionReport g = check_sgp_1d(parse_potential("x^2", 1));
    CHECK(g.verdict == CriterionVerdict::holds);
    CHECK(g.conclusion == Conclusion::sgp);
    CHECK(w(g, "C") == doctest::Approx(41943.04).epsilon(1e-9));

    CriterionReport s = check_sgp_1d(parse_potential("x^2+sin(x)", 1));
    CHECK(s.verdict == CriterionVerdict::holds);
    CHECK(w(s, "C") == doctest::Approx(41822.77064).epsilon(1e-6));

    CriterionReport h = check_sgp_1d(parse_potential("log(1+x^2)", 1));
    CHECK(h.verdict == CriterionVerdict::fails);
    CHECK(mentions(h, "decays toward zero"));

    CriterionReport n = check_sgp_nd(parse_potential("x^2", 1));
    CHECK(n.verdict == CriterionVerdict::holds);
    CHECK(w(n, "C") == doctest::Approx(41941.04).epsilon(1e-9));
}

TEST_CASE("two dimensional scans") {
    CriterionReport b = check_bakry_emery(parse_potential("x1^2+x2^2+0.5*x1*x2", 2));
    CHECK(b.verdict == CriterionVerdict::holds);
    CHECK(w(b, "K") == doctest::Approx(1.5).epsilon(1e-9));
    REQUIRE(b.constants.has_value());
    CHECK(b.constants->a == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    CriterionReport s = check_sgp_nd(parse_potential("x1^2+x2^2", 2));
    CHECK(s.verdict == CriterionVerdict::holds);
    CHECK(w(s, "C") > 1000.0);

    CriterionReport z = check_sgp_nd(parse_potential("0", 2));
    CHECK(z.verdict == CriterionVerdict::fails);
    CHECK(mentions(z, "never becomes positive"));

    CHECK(check_malrieu_roberto(parse_potential("x1^2+x2^2", 2)).verdict ==
          CriterionVerdict::inconclusive);
    CHECK(check_well_method_necessary(parse_potential("x1^2+x2^2", 2), 1.0, 1.0)
              .verdict == CriterionVerdict::inconclusive);
}

TEST_CASE("well-method certificate at the unit pair reproduces e sqrt pi") {
    CriterionReport r = check_well_method(parse_potential("x^2", 1), 1.0, 1.0);
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::tlsi);
    CHECK(w(r, "value") == doctest::Approx(kESqrtPi).epsilon(1e-6));
    CHECK(w(r, "c") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mentions(r, "certificate integral finite"));
}

TEST_CASE("well-method certificate on the quartic and monotonicity in beta") {
    Potential p = parse_potential("x^4", 1);
    CriterionReport r1 = check_well_method(p, 1.0, 0.1);
    CHECK(r1.verdict == CriterionVerdict::holds);
    CHECK(w(r1, "value") == doctest::Approx(kQuarticCertificate).epsilon(1e-6));
    CHECK(w(r1, "c") == doctest::Approx(1.998808).epsilon(1e-6));

    CriterionReport r2 = check_well_method(p, 0.5, 0.1);
    CriterionReport r3 = check_well_method(p, 0.25, 0.1);
    CHECK(r2.verdict == CriterionVerdict::holds);
    CHECK(r3.verdict == CriterionVerdict::holds);
    CHECK(w(r1, "value") > w(r2, "value"));
    CHECK(w(r2, "value") > w(r3, "value"));
}

TEST_CASE("all-pairs certificate grid separates gaussian from quartic") {
    CriterionReport q = check_immediate_hyper(parse_potential("x^4", 1));
    CHECK(q.verdict == CriterionVerdict::holds);
    CHECK(q.conclusion == Conclusion::immediately_hyperbounded);
    CHECK(w(q, "pairs_finite") == 25.0);

    CriterionReport g = check_immediate_hyper(parse_potential("x^2", 1));
    CHECK(g.verdict == CriterionVerdict::fails);
    CHECK(w(g, "beta") == 1.0);
    CHECK(w(g, "lambda") == 0.25);
}

TEST_CASE("growth comparison fits the exponent of the schrodinger potential") {
    CriterionReport g = check_well_growth(parse_potential("x^2", 1));
    CHECK(g.verdict == CriterionVerdict::holds);
    CHECK(g.conclusion == Conclusion::hyperbounded);
    CHECK(w(g, "eta") == 4.0);
    CHECK(w(g, "c") == doctest::Approx(kGrowthFloor).epsilon(1e-8));
    CHECK(w(g, "theta") > 0.98);
    CHECK(w(g, "theta") < 1.06);
    CHECK(mentions(g, "linear boundary"));

    CriterionReport q = check_well_growth(parse_potential("x^4", 1));
    CHECK(q.verdict == CriterionVerdict::holds);
    CHECK(q.conclusion == Conclusion::ultracontractive);
    CHECK(w(q, "theta") == doctest::Approx(1.50793457).epsilon(1e-6));
    CHECK(w(q, "c") == doctest::Approx(6.025665281).epsilon(1e-6));
    CHECK(mentions(q, "superlinear"));

    CriterionReport h = check_well_growth(parse_potential("log(1+x^2)", 1));
    CHECK(h.verdict == CriterionVerdict::inconclusive);
    CHECK(mentions(h, "too shallow"));
}

TEST_CASE("gaussian reference comparison") {
    Potential p = parse_potential("x^2", 1);
    CriterionReport u = check_gong_wu(p, 1.0);
    CHECK(u.verdict == CriterionVerdict::holds);
    CHECK(u.conclusion == Conclusion::sgp);
    CHECK(w(u, "value") == doctest::Approx(1.0).epsilon(1e-6));

    CriterionReport h = check_gong_wu(p, 0.5, 0.5);
    CHECK(h.verdict == CriterionVerdict::holds);
    CHECK(w(h, "value") == doctest::Approx(kGongWuHalf).epsilon(1e-6));
}

TEST_CASE("tight certificate takes the bounded-well branch on the gaussian") {
    CriterionReport r =
        check_well_method_tight(parse_potential("x^2", 1), 1.0, 1.0, 1.0);
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::tlsi);
    CHECK(w(r, "branch") == 1.0);
    CHECK(w(r, "r") == 0.5);
    CHECK(w(r, "lr_norm") == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(mentions(r, "exp(F) integrable"));
}

TEST_CASE("tight certificate reports both branch diagnostics when the base diverges") {
    CriterionReport r = check_well_method_tight(
        parse_potential("x^2+10*sin(x^3)", 1), 1.0, 4.0, 1.0);
    CHECK(r.verdict == CriterionVerdict::fails);
    CHECK(mentions(r, "branch one unavailable"));
    CHECK(mentions(r, "branch two hypotheses met"));
}

TEST_CASE("quartic tight certificate settles on the first branch") {
    CriterionReport r =
        check_well_method_tight(parse_potential("x^4", 1), 1.0, 4.0, 1.0);
    CHECK(r.verdict == CriterionVerdict::holds);
    CHECK(r.conclusion == Conclusion::tlsi);
    CHECK(w(r, "branch") == 1.0);
    CHECK(w(r, "lr_norm") == doctest::Approx(1.154700538).epsilon(1e-6));
    CHECK(mentions(r, "tight"));
}

TEST_CASE("necessary condition is satisfied where certificates hold") {
    CriterionReport g =
        check_well_method_necessary(parse_potential("x^2", 1), 1.0, 1.0);
    CHECK(g.verdict == CriterionVerdict::inconclusive);
    CHECK(mentions(g, "satisfied"));
    CHECK(w(g, "log_value") < 0.0);
    CHECK(w(g, "nodes_failed") == 0.0);

    CriterionReport q =
        check_well_method_necessary(parse_potential("x^4", 1), 1.0, 0.1);
    CHECK(q.verdict == CriterionVerdict::inconclusive);
    CHECK(mentions(q, "satisfied"));
    CHECK(w(q, "log_value") == doctest::Approx(-0.6798949097).epsilon(1e-6));
}

TEST_CASE("necessary condition runs at an explicit horizon") {
    CriterionReport r =
        check_well_method_necessary(parse_potential("x^2", 1), 1.0, 1.0, 0.05);
    CHECK(r.verdict == CriterionVerdict::inconclusive);
    CHECK(w(r, "t_star") == 0.05);
}

TEST_CASE("oscillating family: holds side of the dichotomy") {
    for (double beta : {0.0, 1.0, -1.0, 1.9, -1.9}) {
        CAPTURE(beta);
        Potential p = make_osc_quadratic(beta);

        CriterionReport mr = check_malrieu_roberto(p);
        CHECK(mr.verdict == CriterionVerdict::holds);
        CHECK(mr.conclusion == Conclusion::tlsi);

        CriterionReport sr = well_method_search(p);
        CHECK(sr.verdict == CriterionVerdict::holds);
        CHECK(sr.conclusion == Conclusion::tlsi);
        CHECK(w(sr, "beta") == 0.0625);
        CHECK(w(sr, "lambda") == 16.0);
        CHECK(mentions(sr, "first certifying pair"));
    }

    CriterionReport m1 = check_malrieu_roberto(make_osc_quadratic(1.0));
    CHECK(w(m1, "onset") == 4.0);
    CHECK(w(m1, "sup") == doctest::Approx(1.027400786).epsilon(1e-6));
    CriterionReport m9 = check_malrieu_roberto(make_osc_quadratic(-1.9));
    CHECK(w(m9, "onset") == 8.0);
    CHECK(w(m9, "sup") == doctest::Approx(112.5877241).epsilon(1e-6));
}

TEST_CASE("oscillating family: fails side of the dichotomy") {
    for (double beta : {-2.0, 2.0, 3.0, -3.0}) {
        CAPTURE(beta);
        Potential p = make_osc_quadratic(beta);

        CriterionReport sg = check_sgp_nd(p);
        CHECK(sg.verdict == CriterionVerdict::fails);
        CHECK(w(sg, "dip_radius") <= 60.0 * M_PI);
        CHECK(w(sg, "dip_value") < 0.0);

        CriterionReport mr = check_malrieu_roberto(p);
        CHECK(mr.verdict == CriterionVerdict::inconclusive);
        CHECK(mentions(mr, "critical points"));

        CriterionReport nc = check_well_method_necessary(p, 1.0, 1.0);
        CHECK(nc.verdict == CriterionVerdict::fails);
        CHECK(w(nc, "log_value") >= std::log(1e12));
        CHECK(w(nc, "nodes_failed") == 0.0);
        CHECK(mentions(nc, "cannot witness"));

        CriterionReport sr = well_method_search(p);
        CHECK(sr.verdict == CriterionVerdict::inconclusive);
        CHECK(w(sr, "pairs_divergent") == 63.0);
        CHECK(mentions(sr, "no pair"));
    }

    CriterionReport d2 = check_sgp_nd(make_osc_quadratic(-2.0));
    CHECK(w(d2, "dip_radius") == doctest::Approx(6.868).epsilon(1e-2));
}

TEST_CASE("oscillating family: gate and scaffolding checks at beta -2") {
    Potential p = make_osc_quadratic(-2.0);

    CriterionReport h = check_hypotheses(p);
    CHECK(h.verdict == CriterionVerdict::holds);
    CHECK(w(h, "Z") == doctest::Approx(kOscZ).epsilon(1e-8));
    CHECK(w(h, "gradient_moment") == doctest::Approx(kOscGradMoment).epsilon(1e-6));
    CHECK(w(h, "K_hat") == doctest::Approx(2.0).epsilon(1e-9));

    CHECK(check_bakry_emery(p).verdict == CriterionVerdict::fails);
    CHECK(check_wang(p).verdict == CriterionVerdict::inconclusive);
    CHECK(check_gong_wu(p).verdict == CriterionVerdict::inconclusive);

    CriterionReport win = osc_window_scan(p, 10, 100);
    CHECK(win.verdict == CriterionVerdict::holds);
    CHECK(win.conclusion == Conclusion::none);
    CHECK(w(win, "curvature_scale") == doctest::Approx(6.081567328).epsilon(1e-6));
    CHECK(std::abs(w(win, "curvature_scale") - 2.0 * M_PI) < 0.25);
    CHECK(w(win, "grad_bound") == doctest::Approx(13.81517204).epsilon(1e-6));
    CHECK(w(win, "grad_bound") < 14.3);
}

TEST_CASE("divergent series partial sums") {
    std::vector<double> s = osc_series_log_partial_sums(3.0, 0.5, 1.0, M_PI * M_PI / 8.0, 50);
    REQUIRE(s.size() == 50);
    CHECK(s[0] == doctest::Approx(kSeriesLog1).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(kSeriesLog2).epsilon(1e-12));
    for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] > s[k - 1]);
    CHECK(s[1] > std::log(1e12));

    std::vector<double> slow = osc_series_log_partial_sums(2.5, 0.1, 1.0, 1.0, 30);
    for (std::size_t k = 1; k < slow.size(); ++k) CHECK(slow[k] > slow[k - 1]);

    CHECK_THROWS_AS((void)osc_series_log_partial_sums(2.5, 0.5, 1.0, 1.0, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)osc_series_log_partial_sums(3.0, 0.5, -1.0, 1.0, 10),
                    std::invalid_argument);
}

TEST_CASE("constant-shift invariance of normalized criteria") {
    Potential a = parse_potential("x^4-x^2", 1);
    Potential b = parse_potential("x^4-x^2+5", 1);

    CriterionReport wa = check_wang(a), wb = check_wang(b);
    CHECK(wa.verdict == wb.verdict);
    CHECK(w(wa, "eps") == w(wb, "eps"));
    CHECK(w(wa, "moment") == doctest::Approx(w(wb, "moment")).epsilon(1e-9));

    CriterionReport ma = check_malrieu_roberto(a), mb = check_malrieu_roberto(b);
    CHECK(ma.verdict == mb.verdict);
    CHECK(w(ma, "sup") == doctest::Approx(w(mb, "sup")).epsilon(1e-9));
    CHECK(w(ma, "sup") == doctest::Approx(0.000978477465122).epsilon(1e-6));

    CriterionReport ga = check_well_growth(a), gb = check_well_growth(b);
    CHECK(ga.conclusion == Conclusion::ultracontractive);
    CHECK(gb.conclusion == Conclusion::ultracontractive);
    CHECK(w(ga, "theta") == w(gb, "theta"));
    CHECK(w(ga, "c") == doctest::Approx(w(gb, "c")).epsilon(1e-8));

    CriterionReport na = check_well_method_necessary(a, 1.0, 0.1);
    CriterionReport nb = check_well_method_necessary(b, 1.0, 0.1);
    CHECK(w(na, "log_value") == doctest::Approx(w(nb, "log_value")).epsilon(1e-9));

    CHECK(check_sgp_1d(a).verdict == check_sgp_1d(b).verdict);
    CHECK(check_bakry_emery(a).verdict == check_bakry_emery(b).verdict);
}

TEST_CASE("bounded perturbations transport entropy-energy constants") {
    CriterionReport base = check_bakry_emery(parse_potential("x^2", 1));
    REQUIRE(base.constants.has_value());

    CriterionReport s = propagate_holley_stroock(*base.constants,
                                                 parse_potential("sin(x)", 1));
    CHECK(s.verdict == CriterionVerdict::holds);
    CHECK(s.conclusion == Conclusion::tlsi);
    CHECK(w(s, "osc") == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(w(s, "factor") == doctest::Approx(kE4).epsilon(1e-5));
    REQUIRE(s.constants.has_value());
    CHECK(s.constants->a == doctest::Approx(0.5 * kE4).epsilon(1e-5));
    CHECK(s.constants->b == 0.0);

    CriterionReport d = propagate_holley_stroock(LSIConstants{2.0, 0.5},
                                                 parse_potential("sin(x)", 1));
    CHECK(d.conclusion == Conclusion::dlsi);
    CHECK(d.constants->a == doctest::Approx(2.0 * kE4).epsilon(1e-5));
    CHECK(d.constants->b == doctest::Approx(0.5 * kE4).epsilon(1e-5));

    CriterionReport g = propagate_holley_stroock(*base.constants,
                                                 parse_potential("x", 1));
    CHECK(g.verdict == CriterionVerdict::inconclusive);
    CHECK(mentions(g, "unbounded"));

    CriterionReport z = propagate_holley_stroock(*base.constants,
                                                 parse_potential("0", 1));
    CHECK(z.verdict == CriterionVerdict::holds);
    CHECK(w(z, "factor") == 1.0);
    CHECK(z.constants->a == base.constants->a);
}

TEST_CASE("criterion reports are deterministic") {
    Potential p = parse_potential("x^4", 1);
    CriterionReport a = check_well_method_necessary(p, 1.0, 0.1);
    CriterionReport b = check_well_method_necessary(p, 1.0, 0.1);
    CHECK(w(a, "log_value") == w(b, "log_value"));
    CHECK(w(a, "nodes_sampled") == w(b, "nodes_sampled"));

    CriterionReport g1 = check_well_growth(p);
    CriterionReport g2 = check_well_growth(p);
    CHECK(w(g1, "theta") == w(g2, "theta"));
    CHECK(w(g1, "c") == w(g2, "c"));
}

TEST_CASE("parameter validation throws") {
    Potential p = parse_potential("x^2", 1);
    CHECK_THROWS_AS((void)check_well_method(p, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)check_well_method(p, 1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)check_well_method_necessary(p, -1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)check_gong_wu(p, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)check_gong_wu(p, 1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)osc_window_scan(p, 5, 100), std::invalid_argument);
    CHECK_THROWS_AS((void)osc_window_scan(p, 10, 100, 1.5), std::invalid_argument);
}
