#include "boltz/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace boltz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_beta(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Potential config_potential(const RunConfig& cfg) {
    if (cfg.builtin == "osc-quadratic") {
        if (cfg.dimension != 1) {
            throw ConfigError("dimension: the osc-quadratic builtin is one-dimensional");
        }
        return make_osc_quadratic(cfg.beta);
    }
    if (cfg.potential_text.empty()) {
        throw ConfigError("potential: an expression or a builtin name is required");
    }
    try {
        return parse_potential(cfg.potential_text, cfg.dimension);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    }
}

CriteriaConfig criteria_config(const RunConfig& cfg) {
    CriteriaConfig cc = cfg.criteria_cfg;
    cc.mc_seed = cfg.seed;
    return cc;
}

void finalize(Report& r, const RunConfig& cfg) {
    r.subcommand = cfg.subcommand;
    r.config_echo = config_echo(cfg);
    std::string joined;
    for (const auto& [key, value] : r.config_echo) joined += key + "=" + value + "\n";
    r.config_hash = fnv1a_hex(joined);
}

int conclusion_rank(Conclusion c) {
    switch (c) {
        case Conclusion::tlsi: return 6;
        case Conclusion::dlsi: return 5;
        case Conclusion::ultracontractive: return 4;
        case Conclusion::immediately_hyperbounded: return 3;
        case Conclusion::hyperbounded: return 2;
        case Conclusion::sgp: return 1;
        case Conclusion::none: return 0;
    }
    return 0;
}

/// Strongest conclusion among holds verdicts wins.  With no holds verdict,
/// a failed necessary condition is still worth a line: the defective
/// inequality has been refuted for the examined witnesses.
void synthesize(Report& r) {
    int best = 0;
    for (const CriterionReport& c : r.criteria) {
        if (c.verdict != CriterionVerdict::holds) continue;
        const int rank = conclusion_rank(c.conclusion);
        if (rank > best) {
            best = rank;
            r.conclusion = c.conclusion;
            r.synthesis_criterion = c.criterion;
        }
    }
    if (best > 0) {
        r.synthesis = std::string(to_string(r.conclusion)) + " (" + r.synthesis_criterion + ")";
        return;
    }
    for (const CriterionReport& c : r.criteria) {
        if (c.criterion == "well_method_necessary" && c.verdict == CriterionVerdict::fails) {
            r.synthesis = "DLSI fails (well_method_necessary)";
            r.synthesis_criterion = c.criterion;
            return;
        }
    }
    r.synthesis = "none";
}

CriterionReport osc_series_report(const RunConfig& cfg, double beta) {
    CriterionReport r;
    r.criterion = "osc_series";
    const double theta = M_PI * M_PI / 8.0;
    const std::vector<double> sums = osc_series_log_partial_sums(
        cfg.series_q, cfg.series_eps, cfg.series_t, theta, cfg.series_terms);
    r.traces["series_log_partial_sums"] = sums;
    r.witnesses["family_beta"] = beta;
    r.witnesses["q"] = cfg.series_q;
    r.witnesses["eps"] = cfg.series_eps;
    r.witnesses["t"] = cfg.series_t;
    r.witnesses["theta"] = theta;
    const double log_threshold = std::log(cfg.criteria_cfg.quad.divergence_threshold);
    long k_exceed = -1;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (sums[i] > log_threshold) {
            k_exceed = long(i) + 1;
            break;
        }
    }
    r.witnesses["final_log"] = sums.back();
    r.witnesses["k_exceed"] = double(k_exceed);
    if (k_exceed >= 0) {
        r.verdict = CriterionVerdict::fails;
        r.note = "the window lower bound on the semigroup acting on exp(F) exceeds "
                 "the divergence threshold, so the evolved density leaves every "
                 "L^q space: the defective inequality fails for this potential";
    } else {
        r.verdict = CriterionVerdict::inconclusive;
        r.note = "the window lower-bound series stayed below the divergence "
                 "threshold over the computed terms";
    }
    return r;
}

}  // namespace

Report cmd_check(const RunConfig& cfg) {
    Report r;
    const Potential p = config_potential(cfg);
    const CriteriaConfig cc = criteria_config(cfg);
    std::vector<std::string> names = cfg.criteria;
    if (names.empty()) {
        names = {"hypotheses", "bakry_emery", "wang"};
        if (cfg.dimension == 1) {
            names.push_back("malrieu_roberto");
            names.push_back("sgp_1d");
        }
        names.insert(names.end(), {"sgp_nd", "well_method_search", "immediate_hyper",
                                   "well_growth", "gong_wu", "well_method_necessary"});
    }
    double pair_beta = cfg.well_beta;
    double pair_lambda = cfg.well_lambda;
    for (const std::string& name : names) {
        const auto t0 = Clock::now();
        CriterionReport rep;
        try {
            if (name == "hypotheses") rep = check_hypotheses(p, cc);
            else if (name == "bakry_emery") rep = check_bakry_emery(p, cc);
            else if (name == "wang") rep = check_wang(p, cc);
            else if (name == "malrieu_roberto") rep = check_malrieu_roberto(p, cc);
            else if (name == "sgp_1d") rep = check_sgp_1d(p, cc);
            else if (name == "sgp_nd") rep = check_sgp_nd(p, cc);
            else if (name == "well_method") rep = check_well_method(p, pair_beta, pair_lambda, cc);
            else if (name == "well_method_search") rep = well_method_search(p, cc);
            else if (name == "immediate_hyper") rep = check_immediate_hyper(p, cc);
            else if (name == "well_growth") rep = check_well_growth(p, cc);
            else if (name == "gong_wu") rep = check_gong_wu(p, cfg.gong_wu_rho, cfg.gong_wu_eps, cc);
            else if (name == "well_method_tight")
                rep = check_well_method_tight(p, pair_beta, pair_lambda, cfg.tight_rho, cc);
            else if (name == "well_method_necessary")
                rep = check_well_method_necessary(p, pair_beta, pair_lambda, cfg.necessary_t, cc);
            else if (name == "osc_window")
                rep = osc_window_scan(p, cfg.window_k_min, cfg.window_k_max, cfg.window_eps, cc);
            else
                throw ConfigError("criteria: unknown name '" + name + "'");
        } catch (const std::invalid_argument& e) {
            throw ConfigError("criteria." + name + ": " + e.what());
        }
        // A certifying pair found by the search feeds the fixed-pair checks
        // that come after it.
        if (name == "well_method_search" && rep.verdict == CriterionVerdict::holds) {
            pair_beta = rep.witnesses.at("beta");
            pair_lambda = rep.witnesses.at("lambda");
        }
        r.criteria.push_back(std::move(rep));
        r.timings.push_back({name, seconds_since(t0)});
    }
    synthesize(r);
    finalize(r, cfg);
    return r;
}

Report cmd_simulate(const RunConfig& cfg) {
    Report r;
    const Potential p = config_potential(cfg);
    McConfig mc = cfg.mc;
    mc.rng_seed = cfg.seed;
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(cfg.dimension, cfg.sim_x);
    std::vector<std::string> names = cfg.estimators;
    if (names.empty())
        names = {"feynman_kac", "girsanov", "girsanov_gap", "perturbed", "box_stay"};
    for (const std::string& name : names) {
        const auto t0 = Clock::now();
        try {
            if (name == "feynman_kac") {
                r.estimates.emplace_back(name, feynman_kac_mean(p, x, cfg.sim_t, mc));
            } else if (name == "girsanov") {
                r.estimates.emplace_back(name, girsanov_mean(p, x, cfg.sim_t, mc));
            } else if (name == "girsanov_gap") {
                McEstimate e;
                e.mean = girsanov_form_rms_gap(p, x, cfg.sim_t, mc);
                e.ci95_lo = e.ci95_hi = e.mean;
                e.n_effective = mc.n_paths;
                e.reliable = true;
                e.note = "RMS gap between the Ito and identity forms of log Z_t";
                r.estimates.emplace_back(name, e);
            } else if (name == "perturbed") {
                ExprPtr h;
                try {
                    h = parse(cfg.sim_h, cfg.dimension);
                } catch (const std::exception& pe) {
                    throw ConfigError(std::string("mc.h: ") + pe.what());
                }
                PairedEstimate pe = perturbed_expectation(p, h, x, cfg.sim_t, mc);
                r.estimates.emplace_back("perturbed_reweighted", std::move(pe.reweighted));
                r.estimates.emplace_back("perturbed_direct", std::move(pe.direct));
            } else if (name == "box_stay") {
                const BoxStay exact =
                    box_stay_probability(cfg.dimension, cfg.sim_half_width, cfg.sim_t);
                McEstimate series;
                series.mean = exact.probability;
                series.ci95_lo = series.ci95_hi = exact.probability;
                series.reliable = true;
                char buf[96];
                std::snprintf(buf, sizeof buf,
                              "exact eigenfunction series; decay rate %.12g", exact.rate);
                series.note = buf;
                r.estimates.emplace_back("box_stay_series", series);
                r.estimates.emplace_back(
                    "box_stay_mc",
                    box_stay_mc(cfg.dimension, cfg.sim_half_width, cfg.sim_t, mc));
            } else {
                throw ConfigError("mc.estimators: unknown name '" + name + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("mc." + name + ": " + e.what());
        }
        r.timings.push_back({name, seconds_since(t0)});
    }
    if (!cfg.path_dump.empty()) {
        McConfig dump_cfg = mc;
        dump_cfg.n_paths = std::clamp<long>(mc.n_paths, 100, 200);
        write_path_dump(simulate_brownian(x, cfg.sim_t, dump_cfg), cfg.path_dump);
    }
    synthesize(r);
    finalize(r, cfg);
    return r;
}

Report cmd_spectrum(const RunConfig& cfg) {
    Report r;
    if (cfg.dimension != 1) {
        throw ConfigError("dimension: the spectrum subcommand is one-dimensional");
    }
    const Potential p = config_potential(cfg);
    const auto t0 = Clock::now();
    const IntegralResult norm = normalization(p, cfg.criteria_cfg.quad);
    if (norm.verdict != Verdict::finite) {
        throw ConfigError(
            "potential: the measure exp(-2F) dx is not normalizable, so the "
            "spectral gap is undefined");
    }
    SpectrumResult s;
    try {
        s = spectral_gap(p, cfg.spectral);
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("spectral: ") + e.what());
    }
    CriterionReport rep;
    rep.criterion = "spectral_gap";
    rep.witnesses["gap"] = s.gap;
    rep.witnesses["lambda0"] = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.front();
    rep.witnesses["converged"] = s.converged ? 1.0 : 0.0;
    if (s.converged && s.gap > 1e-9) {
        rep.verdict = CriterionVerdict::holds;
        rep.conclusion = Conclusion::sgp;
        rep.note = "the discretized operator shows a stable positive gap";
    } else {
        rep.verdict = CriterionVerdict::inconclusive;
        rep.note = s.note.empty() ? "the gap did not stabilize" : s.note;
    }
    r.criteria.push_back(std::move(rep));
    r.spectra.emplace_back("spectral_gap", std::move(s));
    r.timings.push_back({"spectral_gap", seconds_since(t0)});
    synthesize(r);
    finalize(r, cfg);
    return r;
}

Report cmd_osc(const RunConfig& cfg) {
    Report r;
    if (cfg.betas.empty()) throw ConfigError("osc.betas: at least one beta is required");
    if (cfg.series_terms < 1) throw ConfigError("osc.series_terms: must be at least 1");
    const CriteriaConfig cc = criteria_config(cfg);
    std::vector<double> holds_betas, fails_betas, open_betas;
    for (const double beta : cfg.betas) {
        const auto t0 = Clock::now();
        const Potential p = make_osc_quadratic(beta);
        OscRow row;
        row.beta = beta;

        CriterionReport mr = check_malrieu_roberto(p, cc);
        mr.witnesses["family_beta"] = beta;
        row.mr_verdict = to_string(mr.verdict);
        const bool mr_holds = mr.verdict == CriterionVerdict::holds;
        r.criteria.push_back(std::move(mr));

        CriterionReport sg = check_sgp_nd(p, cc);
        sg.witnesses["family_beta"] = beta;
        row.sgp_verdict = to_string(sg.verdict);
        if (sg.witnesses.count("dip_radius")) {
            row.dip_radius = sg.witnesses.at("dip_radius");
            row.dip_value = sg.witnesses.at("dip_value");
        }
        r.criteria.push_back(std::move(sg));

        CriterionReport search = well_method_search(p, cc);
        search.witnesses["family_beta"] = beta;
        row.search_verdict = to_string(search.verdict);
        double pair_beta = cfg.well_beta;
        double pair_lambda = cfg.well_lambda;
        const bool search_holds = search.verdict == CriterionVerdict::holds;
        if (search_holds) {
            pair_beta = search.witnesses.at("beta");
            pair_lambda = search.witnesses.at("lambda");
            row.search_beta = pair_beta;
            row.search_lambda = pair_lambda;
        }
        r.criteria.push_back(std::move(search));

        CriterionReport nec =
            check_well_method_necessary(p, pair_beta, pair_lambda, cfg.necessary_t, cc);
        nec.witnesses["family_beta"] = beta;
        row.necessary_verdict = to_string(nec.verdict);
        if (nec.witnesses.count("log_value")) {
            row.necessary_log_value = nec.witnesses.at("log_value");
        }
        const bool nec_fails = nec.verdict == CriterionVerdict::fails;
        r.criteria.push_back(std::move(nec));

        bool series_diverged = false;
        if (std::abs(beta) >= 2.0) {
            CriterionReport ser = osc_series_report(cfg, beta);
            row.series_final_log = ser.witnesses.at("final_log");
            if (ser.witnesses.at("k_exceed") >= 0.0) {
                row.series_k_exceed = long(ser.witnesses.at("k_exceed"));
                series_diverged = true;
            }
            r.criteria.push_back(std::move(ser));
        }
        if (beta == -2.0) {
            CriterionReport win =
                osc_window_scan(p, cfg.window_k_min, cfg.window_k_max, cfg.window_eps, cc);
            win.witnesses["family_beta"] = beta;
            r.criteria.push_back(std::move(win));
        }

        if (mr_holds && search_holds) {
            row.synthesis = "TLSI";
            holds_betas.push_back(beta);
        } else if (nec_fails && series_diverged) {
            row.synthesis = "DLSI fails";
            fails_betas.push_back(beta);
        } else {
            row.synthesis = "inconclusive";
            open_betas.push_back(beta);
        }
        r.osc_rows.push_back(std::move(row));
        r.timings.push_back({"beta=" + fmt_beta(beta), seconds_since(t0)});
    }
    if (fails_betas.empty() && open_betas.empty()) {
        r.synthesis = "TLSI";
        r.conclusion = Conclusion::tlsi;
        r.synthesis_criterion = "malrieu_roberto";
    } else if (holds_betas.empty() && open_betas.empty()) {
        r.synthesis = "DLSI fails";
        r.synthesis_criterion = "well_method_necessary";
    } else {
        auto listed = [](const std::vector<double>& v) {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ", ";
                out += fmt_beta(v[i]);
            }
            return out;
        };
        std::string line;
        if (!holds_betas.empty()) line += "TLSI for beta in {" + listed(holds_betas) + "}";
        if (!fails_betas.empty()) {
            if (!line.empty()) line += "; ";
            line += "DLSI fails for beta in {" + listed(fails_betas) + "}";
        }
        if (!open_betas.empty()) {
            if (!line.empty()) line += "; ";
            line += "inconclusive for beta in {" + listed(open_betas) + "}";
        }
        r.synthesis = line;
    }
    finalize(r, cfg);
    return r;
}

Report run(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.subcommand == "check") return cmd_check(cfg);
    if (cfg.subcommand == "simulate") return cmd_simulate(cfg);
    if (cfg.subcommand == "spectrum") return cmd_spectrum(cfg);
    return cmd_osc(cfg);
}

}  // namespace boltz
