// Run configuration and report assembly for the command-line driver.  The
// config is a plain-text file of key = value lines under [section] headers;
// command-line flags override file values.  Reports serialize to JSON or to
// a flat path,value CSV carrying the same payload, built from the same tree.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boltz/criteria.hpp"
#include "boltz/spectral.hpp"
#include "boltz/stochastic.hpp"

namespace boltz {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed configs, unknown names, out-of-range parameters.  The driver
/// maps this to exit code 1; every other exception maps to 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string subcommand = "check";
    std::string potential_text;
    std::string builtin;
    double beta = 0.0;
    int dimension = 1;
    std::uint64_t seed = 99;

    std::vector<std::string> criteria;  // empty selects the standard battery
    double well_beta = 1.0;
    double well_lambda = 1.0;
    double tight_rho = 1.0;
    double gong_wu_rho = 1.0;
    double gong_wu_eps = 0.5;
    double necessary_t = 0.0;  // <= 0 selects the canonical horizon
    int window_k_min = 10;
    int window_k_max = 100;
    double window_eps = 0.5;
    CriteriaConfig criteria_cfg;

    std::vector<std::string> estimators;  // empty selects the standard set
    double sim_x = 0.0;
    double sim_t = 0.5;
    std::string sim_h = "x";
    double sim_half_width = 1.0;
    std::string path_dump;
    McConfig mc;

    SpectralSchedule spectral;

    std::vector<double> betas = {0.0, 1.0, -1.0, 1.9, -1.9, -2.0, 2.0, 3.0};
    int series_terms = 50;
    double series_q = 3.0;
    double series_eps = 0.5;
    double series_t = 1.0;

    std::string format = "json";
    std::string out_path;
};

[[nodiscard]] RunConfig parse_config_text(const std::string& text);
[[nodiscard]] RunConfig load_config_file(const std::string& path);

/// Cross-field checks independent of any engine: known output format,
/// known builtin, sane dimension.
void validate(const RunConfig& cfg);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

/// One line of the oscillating-family sweep table.  Fields that do not
/// apply to a row stay NaN (or -1 for the series index) and are omitted
/// from the serialized output.
struct OscRow {
    double beta = 0.0;
    std::string mr_verdict;
    std::string search_verdict;
    double search_beta = std::numeric_limits<double>::quiet_NaN();
    double search_lambda = std::numeric_limits<double>::quiet_NaN();
    std::string sgp_verdict;
    double dip_radius = std::numeric_limits<double>::quiet_NaN();
    double dip_value = std::numeric_limits<double>::quiet_NaN();
    std::string necessary_verdict;
    double necessary_log_value = std::numeric_limits<double>::quiet_NaN();
    double series_final_log = std::numeric_limits<double>::quiet_NaN();
    long series_k_exceed = -1;
    std::string synthesis;
};

struct Report {
    std::string version = kToolVersion;
    std::string subcommand;
    std::string config_hash;
    std::map<std::string, std::string> config_echo;
    std::vector<CriterionReport> criteria;
    std::vector<std::pair<std::string, McEstimate>> estimates;
    std::vector<std::pair<std::string, SpectrumResult>> spectra;
    std::vector<OscRow> osc_rows;
    std::vector<StageTiming> timings;
    Conclusion conclusion = Conclusion::none;
    std::string synthesis_criterion;
    std::string synthesis = "none";
};

/// Flat echo of every effective setting; feeds both the report and the hash.
[[nodiscard]] std::map<std::string, std::string> config_echo(const RunConfig& cfg);
[[nodiscard]] std::string fnv1a_hex(const std::string& text);

[[nodiscard]] std::string to_json(const Report& r);
[[nodiscard]] std::string to_csv(const Report& r);

/// Serializes in cfg.format and writes to cfg.out_path, or stdout when the
/// path is empty.
void write_report(const Report& r, const RunConfig& cfg);

}  // namespace boltz
