// boltzcheck: verify and falsify functional-inequality criteria for
// Boltzmann measures exp(-2F) dx.
//
//   boltzcheck check    --potential "x^2"          analytic criterion battery
//   boltzcheck simulate --potential "x^2" --seed 7 stochastic estimators
//   boltzcheck spectrum --potential "x^4 - x^2"    Schrodinger spectral gap
//   boltzcheck osc --beta -2                       oscillating family sweep
//
// Exit codes: 0 the run completed (whatever the verdicts), 1 configuration
// error, 2 internal error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "boltz/runner.hpp"

namespace {

struct FlagValues {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    std::string potential;
    std::string builtin;
    double beta = 0.0;
    int dimension = 1;
};

void add_common(CLI::App* sub, FlagValues& v) {
    sub->add_option("--config", v.config, "Plain-text config file (flags override it)");
    sub->add_option("--seed", v.seed, "Seed for every stochastic stage");
    sub->add_option("--out", v.out, "Output path (default stdout)");
    sub->add_option("--format", v.format, "Report format: json or csv");
    sub->add_option("--potential", v.potential, "Potential F as an expression in x1..xN");
    sub->add_option("--builtin", v.builtin, "Builtin potential family (osc-quadratic)");
    sub->add_option("--beta", v.beta, "Family parameter beta");
    sub->add_option("--dimension", v.dimension, "Ambient dimension N");
}

boltz::RunConfig assemble(const CLI::App* sub, const FlagValues& v,
                          const std::string& subcommand) {
    boltz::RunConfig cfg;
    if (sub->count("--config") > 0) cfg = boltz::load_config_file(v.config);
    cfg.subcommand = subcommand;
    if (sub->count("--seed") > 0) cfg.seed = v.seed;
    if (sub->count("--out") > 0) cfg.out_path = v.out;
    if (sub->count("--format") > 0) cfg.format = v.format;
    if (sub->count("--potential") > 0) cfg.potential_text = v.potential;
    if (sub->count("--builtin") > 0) cfg.builtin = v.builtin;
    if (sub->count("--dimension") > 0) cfg.dimension = v.dimension;
    if (sub->count("--beta") > 0) {
        if (subcommand == "osc") cfg.betas = {v.beta};
        else cfg.beta = v.beta;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Criterion checks for Boltzmann measures exp(-2F) dx"};
    app.set_version_flag("--version", boltz::kToolVersion);
    app.require_subcommand(1);

    FlagValues flags;
    CLI::App* check = app.add_subcommand("check", "Analytic criterion battery");
    CLI::App* simulate = app.add_subcommand("simulate", "Stochastic estimators");
    CLI::App* spectrum = app.add_subcommand("spectrum", "Spectral gap (1D)");
    CLI::App* osc = app.add_subcommand("osc", "Oscillating family sweep");
    for (CLI::App* sub : {check, simulate, spectrum, osc}) add_common(sub, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        const boltz::RunConfig cfg = assemble(sub, flags, sub->get_name());
        const boltz::Report report = boltz::run(cfg);
        boltz::write_report(report, cfg);
        std::cerr << report.synthesis << "\n";
    } catch (const boltz::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
