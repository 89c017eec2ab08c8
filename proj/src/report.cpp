#include "boltz/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace boltz {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& field, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": cannot parse number '" + s + "'");
    }
}

long parse_long(const std::string& field, const std::string& s) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": cannot parse integer '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& field, const std::string& s) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": cannot parse unsigned integer '" + s + "'");
    }
}

bool parse_bool(const std::string& field, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(field + ": cannot parse boolean '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& field, const std::string& s) {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) out.push_back(parse_double(field, item));
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

std::string join(const std::vector<double>& items) {
    std::vector<std::string> s;
    s.reserve(items.size());
    for (double v : items) s.push_back(fmt(v));
    return join(s);
}

std::string join(const std::vector<int>& items) {
    std::vector<std::string> s;
    s.reserve(items.size());
    for (int v : items) s.push_back(std::to_string(v));
    return join(s);
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string field = section.empty() ? key : section + "." + key;
    if (section.empty()) {
        if (key == "potential") cfg.potential_text = value;
        else if (key == "builtin") cfg.builtin = value;
        else if (key == "beta") cfg.beta = parse_double(field, value);
        else if (key == "dimension") cfg.dimension = int(parse_long(field, value));
        else if (key == "seed") cfg.seed = parse_u64(field, value);
        else throw ConfigError("unknown key '" + key + "'");
    } else if (section == "criteria") {
        if (key == "names") cfg.criteria = split_list(value);
        else if (key == "well_beta") cfg.well_beta = parse_double(field, value);
        else if (key == "well_lambda") cfg.well_lambda = parse_double(field, value);
        else if (key == "tight_rho") cfg.tight_rho = parse_double(field, value);
        else if (key == "gong_wu_rho") cfg.gong_wu_rho = parse_double(field, value);
        else if (key == "gong_wu_eps") cfg.gong_wu_eps = parse_double(field, value);
        else if (key == "necessary_t") cfg.necessary_t = parse_double(field, value);
        else if (key == "window_k_min") cfg.window_k_min = int(parse_long(field, value));
        else if (key == "window_k_max") cfg.window_k_max = int(parse_long(field, value));
        else if (key == "window_eps") cfg.window_eps = parse_double(field, value);
        else if (key == "box_radius") cfg.criteria_cfg.box_radius = parse_double(field, value);
        else if (key == "resolution") cfg.criteria_cfg.resolution = parse_long(field, value);
        else throw ConfigError("unknown key '" + field + "'");
    } else if (section == "mc") {
        if (key == "dt") cfg.mc.dt = parse_double(field, value);
        else if (key == "n_paths") cfg.mc.n_paths = parse_long(field, value);
        else if (key == "antithetic") cfg.mc.antithetic = parse_bool(field, value);
        else if (key == "estimators") cfg.estimators = split_list(value);
        else if (key == "x") cfg.sim_x = parse_double(field, value);
        else if (key == "t") cfg.sim_t = parse_double(field, value);
        else if (key == "h") cfg.sim_h = value;
        else if (key == "half_width") cfg.sim_half_width = parse_double(field, value);
        else if (key == "path_dump") cfg.path_dump = value;
        else throw ConfigError("unknown key '" + field + "'");
    } else if (section == "spectral") {
        if (key == "radii") cfg.spectral.radii = parse_double_list(field, value);
        else if (key == "sizes") {
            cfg.spectral.sizes.clear();
            for (const std::string& item : split_list(value))
                cfg.spectral.sizes.push_back(int(parse_long(field, item)));
        } else if (key == "k") cfg.spectral.k = int(parse_long(field, value));
        else if (key == "rel_tol") cfg.spectral.rel_tol = parse_double(field, value);
        else throw ConfigError("unknown key '" + field + "'");
    } else if (section == "osc") {
        if (key == "betas") cfg.betas = parse_double_list(field, value);
        else if (key == "series_terms") cfg.series_terms = int(parse_long(field, value));
        else if (key == "series_q") cfg.series_q = parse_double(field, value);
        else if (key == "series_eps") cfg.series_eps = parse_double(field, value);
        else if (key == "series_t") cfg.series_t = parse_double(field, value);
        else throw ConfigError("unknown key '" + field + "'");
    } else if (section == "output") {
        if (key == "format") cfg.format = value;
        else if (key == "out") cfg.out_path = value;
        else throw ConfigError("unknown key '" + field + "'");
    } else {
        throw ConfigError("unknown section '[" + section + "]'");
    }
}

ordered_json scan_json(const GridScan& s) {
    ordered_json j;
    j["quantity"] = s.quantity;
    j["box_radius"] = s.box_radius;
    j["resolution"] = s.resolution;
    j["min"] = s.min;
    j["max"] = s.max;
    j["argmin"] = std::vector<double>(s.argmin.data(), s.argmin.data() + s.argmin.size());
    j["argmax"] = std::vector<double>(s.argmax.data(), s.argmax.data() + s.argmax.size());
    j["outer_min"] = s.outer_min;
    j["outer_max"] = s.outer_max;
    j["invalid_points"] = s.invalid_points;
    return j;
}

ordered_json integral_json(const std::string& name, const IntegralResult& r) {
    ordered_json j;
    j["name"] = name;
    j["verdict"] = to_string(r.verdict);
    j["value"] = r.value;
    j["log_value"] = r.log_value;
    j["error_estimate"] = r.error_estimate;
    j["invalid_nodes"] = r.invalid_nodes;
    j["overflow_evidence"] = r.overflow_evidence;
    if (!r.note.empty()) j["note"] = r.note;
    ordered_json diag = ordered_json::array();
    for (const TruncationPoint& t : r.diagnostics) {
        diag.push_back({{"radius", t.radius}, {"value", t.value}, {"log_value", t.log_value}});
    }
    j["diagnostics"] = std::move(diag);
    return j;
}

ordered_json criterion_json(const CriterionReport& c) {
    ordered_json j;
    j["criterion"] = c.criterion;
    j["verdict"] = to_string(c.verdict);
    j["conclusion"] = to_string(c.conclusion);
    j["witnesses"] = c.witnesses;
    if (c.constants) j["constants"] = {{"a", c.constants->a}, {"b", c.constants->b}};
    if (!c.integrals.empty()) {
        ordered_json arr = ordered_json::array();
        for (const auto& [name, res] : c.integrals) arr.push_back(integral_json(name, res));
        j["integrals"] = std::move(arr);
    }
    if (!c.scans.empty()) {
        ordered_json arr = ordered_json::array();
        for (const GridScan& s : c.scans) arr.push_back(scan_json(s));
        j["scans"] = std::move(arr);
    }
    if (!c.traces.empty()) j["traces"] = c.traces;
    j["note"] = c.note;
    return j;
}

ordered_json estimate_json(const std::string& name, const McEstimate& e) {
    ordered_json j;
    j["name"] = name;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["ci95"] = {e.ci95_lo, e.ci95_hi};
    j["n_effective"] = e.n_effective;
    j["n_excluded"] = e.n_excluded;
    j["reliable"] = e.reliable;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

ordered_json spectrum_json(const std::string& name, const SpectrumResult& s) {
    ordered_json j;
    j["name"] = name;
    j["eigenvalues"] = s.eigenvalues;
    j["gap"] = s.gap;
    j["converged"] = s.converged;
    if (!s.note.empty()) j["note"] = s.note;
    ordered_json tr = ordered_json::array();
    for (const RefinementStep& st : s.trace) {
        tr.push_back({{"radius", st.radius},
                      {"n", st.n},
                      {"lambda0", st.lambda0},
                      {"lambda1", st.lambda1},
                      {"gap", st.gap},
                      {"extrapolated_gap", st.extrapolated_gap}});
    }
    j["trace"] = std::move(tr);
    return j;
}

ordered_json osc_row_json(const OscRow& r) {
    ordered_json j;
    j["beta"] = r.beta;
    j["malrieu_roberto"] = r.mr_verdict;
    j["well_method_search"] = r.search_verdict;
    if (std::isfinite(r.search_beta)) {
        j["search_beta"] = r.search_beta;
        j["search_lambda"] = r.search_lambda;
    }
    j["sgp_nd"] = r.sgp_verdict;
    if (std::isfinite(r.dip_radius)) {
        j["dip_radius"] = r.dip_radius;
        j["dip_value"] = r.dip_value;
    }
    j["well_method_necessary"] = r.necessary_verdict;
    if (std::isfinite(r.necessary_log_value)) j["necessary_log_value"] = r.necessary_log_value;
    if (std::isfinite(r.series_final_log)) j["series_final_log"] = r.series_final_log;
    if (r.series_k_exceed >= 0) j["series_k_exceed"] = r.series_k_exceed;
    j["synthesis"] = r.synthesis;
    return j;
}

ordered_json report_json(const Report& r) {
    ordered_json j;
    j["version"] = r.version;
    j["subcommand"] = r.subcommand;
    j["config_hash"] = r.config_hash;
    j["config"] = r.config_echo;
    j["synthesis"] = {{"line", r.synthesis},
                      {"conclusion", to_string(r.conclusion)},
                      {"criterion", r.synthesis_criterion}};
    ordered_json crit = ordered_json::array();
    for (const CriterionReport& c : r.criteria) crit.push_back(criterion_json(c));
    j["criteria"] = std::move(crit);
    ordered_json est = ordered_json::array();
    for (const auto& [name, e] : r.estimates) est.push_back(estimate_json(name, e));
    j["estimates"] = std::move(est);
    ordered_json spec = ordered_json::array();
    for (const auto& [name, s] : r.spectra) spec.push_back(spectrum_json(name, s));
    j["spectra"] = std::move(spec);
    ordered_json osc = ordered_json::array();
    for (const OscRow& row : r.osc_rows) osc.push_back(osc_row_json(row));
    j["osc"] = std::move(osc);
    ordered_json tim = ordered_json::array();
    for (const StageTiming& t : r.timings)
        tim.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    j["timings"] = std::move(tim);
    return j;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void flatten(const ordered_json& j, const std::string& path, std::string& out) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            flatten(value, path.empty() ? key : path + "." + key, out);
        }
    } else if (j.is_array()) {
        std::size_t i = 0;
        for (const auto& value : j) {
            flatten(value, path + "." + std::to_string(i++), out);
        }
        if (j.empty()) return;
    } else if (j.is_string()) {
        out += csv_quote(path) + "," + csv_quote(j.get<std::string>()) + "\n";
    } else {
        out += csv_quote(path) + "," + j.dump() + "\n";
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        apply_key(cfg, section, key, value);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate(const RunConfig& cfg) {
    if (cfg.format != "json" && cfg.format != "csv") {
        throw ConfigError("output.format: must be json or csv, got '" + cfg.format + "'");
    }
    if (!cfg.builtin.empty() && cfg.builtin != "osc-quadratic") {
        throw ConfigError("builtin: unknown name '" + cfg.builtin + "'");
    }
    if (cfg.dimension < 1 || cfg.dimension > 8) {
        throw ConfigError("dimension: must lie in [1, 8]");
    }
    if (cfg.subcommand != "check" && cfg.subcommand != "simulate" &&
        cfg.subcommand != "spectrum" && cfg.subcommand != "osc") {
        throw ConfigError("subcommand: unknown '" + cfg.subcommand + "'");
    }
}

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
    std::map<std::string, std::string> e;
    e["subcommand"] = cfg.subcommand;
    e["potential"] = cfg.potential_text;
    e["builtin"] = cfg.builtin;
    e["beta"] = fmt(cfg.beta);
    e["dimension"] = std::to_string(cfg.dimension);
    e["seed"] = std::to_string(cfg.seed);
    e["output.format"] = cfg.format;
    e["output.out"] = cfg.out_path;
    e["criteria.names"] = join(cfg.criteria);
    e["criteria.well_beta"] = fmt(cfg.well_beta);
    e["criteria.well_lambda"] = fmt(cfg.well_lambda);
    e["criteria.tight_rho"] = fmt(cfg.tight_rho);
    e["criteria.gong_wu_rho"] = fmt(cfg.gong_wu_rho);
    e["criteria.gong_wu_eps"] = fmt(cfg.gong_wu_eps);
    e["criteria.necessary_t"] = fmt(cfg.necessary_t);
    e["criteria.window_k_min"] = std::to_string(cfg.window_k_min);
    e["criteria.window_k_max"] = std::to_string(cfg.window_k_max);
    e["criteria.window_eps"] = fmt(cfg.window_eps);
    e["criteria.box_radius"] = fmt(cfg.criteria_cfg.box_radius);
    e["criteria.resolution"] = std::to_string(cfg.criteria_cfg.resolution);
    e["mc.dt"] = fmt(cfg.mc.dt);
    e["mc.n_paths"] = std::to_string(cfg.mc.n_paths);
    e["mc.antithetic"] = cfg.mc.antithetic ? "true" : "false";
    e["mc.estimators"] = join(cfg.estimators);
    e["mc.x"] = fmt(cfg.sim_x);
    e["mc.t"] = fmt(cfg.sim_t);
    e["mc.h"] = cfg.sim_h;
    e["mc.half_width"] = fmt(cfg.sim_half_width);
    e["mc.path_dump"] = cfg.path_dump;
    e["spectral.radii"] = join(cfg.spectral.radii);
    e["spectral.sizes"] = join(cfg.spectral.sizes);
    e["spectral.k"] = std::to_string(cfg.spectral.k);
    e["spectral.rel_tol"] = fmt(cfg.spectral.rel_tol);
    e["osc.betas"] = join(cfg.betas);
    e["osc.series_terms"] = std::to_string(cfg.series_terms);
    e["osc.series_q"] = fmt(cfg.series_q);
    e["osc.series_eps"] = fmt(cfg.series_eps);
    e["osc.series_t"] = fmt(cfg.series_t);
    return e;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_json(const Report& r) { return report_json(r).dump(2) + "\n"; }

std::string to_csv(const Report& r) {
    std::string out = "path,value\n";
    flatten(report_json(r), "", out);
    return out;
}

void write_report(const Report& r, const RunConfig& cfg) {
    const std::string payload = cfg.format == "csv" ? to_csv(r) : to_json(r);
    if (cfg.out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(cfg.out_path);
    if (!out) throw ConfigError("output.out: cannot open '" + cfg.out_path + "'");
    out << payload;
}

}  // namespace boltz
