// config.hpp — run configuration: flat key = value files with [experiment] sections,
// --param overrides, per-experiment defaults and validation.
//
// Grammar (one statement per line):
//   line     := blank | comment | section | entry
//   comment  := ('#' | ';') anything
//   section  := '[' name ']'          name is an experiment or "common"
//   entry    := key '=' value [comment]
//   value    := scalar | scalar (',' scalar)*
//   scalar   := number | number? '*'? 'pi' ('/' number)? | word
// Entries before any section, or under [common], apply to every experiment; entries
// under [<experiment>] apply only when that experiment runs. Precedence:
// --param > file section > file common > defaults.

#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qthermo/errors.hpp"
#include "qthermo/experiments.hpp"

namespace qthermo::config {

using experiments::Experiment;
using experiments::Params;

struct Entry {
    std::string section;  // "" for common
    std::string key;
    std::string value;
    std::string origin;   // "file.cfg:12" or "--param"
};

struct RunConfig {
    Experiment experiment;
    Params params;
    std::string out_dir{"out"};
};

// ---- lexical helpers ----

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline bool parse_plain_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        out = std::stod(s, &used);
    } catch (...) {
        return false;
    }
    return used == s.size() && std::isfinite(out);
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, const std::string& origin,
                                   const std::string& what) {
    throw Error(ErrorKind::ParseError, origin + ": key '" + key + "': cannot parse '" + value + "' as " + what);
}

}  // namespace detail

// number | [number ['*']] pi [/ number], optional leading '-'
inline double parse_real(const std::string& raw, const std::string& key = "", const std::string& origin = "") {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    double v = 0.0;
    if (detail::parse_plain_number(s, v)) return v;
    const auto pos = s.find("pi");
    if (pos == std::string::npos) detail::bad_value(key, raw, origin, "a real number");
    std::string head = s.substr(0, pos);
    std::string tail = s.substr(pos + 2);
    double factor = 1.0;
    if (!head.empty() && head.back() == '*') head.pop_back();
    if (head == "-")
        factor = -1.0;
    else if (!head.empty() && !detail::parse_plain_number(head, factor))
        detail::bad_value(key, raw, origin, "a real number");
    double divisor = 1.0;
    if (!tail.empty()) {
        if (tail.front() != '/' || !detail::parse_plain_number(tail.substr(1), divisor) || divisor == 0.0)
            detail::bad_value(key, raw, origin, "a real number");
    }
    return factor * std::numbers::pi / divisor;
}

inline int parse_int(const std::string& raw, const std::string& key, const std::string& origin) {
    const std::string s = detail::trim(raw);
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (...) {
        detail::bad_value(key, raw, origin, "an integer");
    }
    if (used != s.size()) detail::bad_value(key, raw, origin, "an integer");
    return static_cast<int>(v);
}

inline std::vector<double> parse_list(const std::string& raw, const std::string& key, const std::string& origin) {
    std::vector<double> out;
    for (const auto& item : detail::split(raw, ',')) {
        if (item.empty()) detail::bad_value(key, raw, origin, "a comma-separated list");
        out.push_back(parse_real(item, key, origin));
    }
    return out;
}

// ---- key table ----

using Setter = std::function<void(Params&, const std::string& value, const std::string& origin)>;

inline const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto real = [&t](const std::string& k, double Params::*field) {
            t[k] = [k, field](Params& p, const std::string& v, const std::string& o) { p.*field = parse_real(v, k, o); };
        };
        auto integer = [&t](const std::string& k, int Params::*field) {
            t[k] = [k, field](Params& p, const std::string& v, const std::string& o) { p.*field = parse_int(v, k, o); };
        };
        auto list = [&t](const std::string& k, std::vector<double> Params::*field) {
            t[k] = [k, field](Params& p, const std::string& v, const std::string& o) { p.*field = parse_list(v, k, o); };
        };
        auto word = [&t](const std::string& k, std::string Params::*field) {
            t[k] = [field](Params& p, const std::string& v, const std::string&) { p.*field = detail::trim(v); };
        };
        word("model", &Params::model);
        word("topology", &Params::topology);
        word("zero_rate", &Params::zero_rate);
        real("omega_p", &Params::omega_p);
        real("omega_a", &Params::omega_a);
        real("omega0", &Params::omega0);
        real("kappa", &Params::kappa);
        real("theta", &Params::theta);
        real("eta", &Params::eta);
        real("eta2", &Params::eta2);
        real("cutoff", &Params::cutoff);
        real("temperature", &Params::temperature);
        real("t_max", &Params::t_max);
        integer("n_points", &Params::n_points);
        real("t", &Params::t);
        real("t_compare", &Params::t_compare);
        list("theta_list", &Params::theta_list);
        list("kappa_list", &Params::kappa_list);
        real("ratio_min", &Params::ratio_min);
        real("ratio_max", &Params::ratio_max);
        integer("ratio_points", &Params::ratio_points);
        list("temperature_list", &Params::temperature_list);
        real("fd_step", &Params::fd_step);
        real("opt_tol", &Params::opt_tol);
        // aliases
        t["T"] = t["temperature"];
        t["omega_cutoff"] = t["cutoff"];
        t["eta1"] = t["eta"];
        return t;
    }();
    return table;
}

inline void apply(Params& p, const Entry& e) {
    const auto& table = key_table();
    const auto it = table.find(e.key);
    if (it == table.end())
        throw Error(ErrorKind::ValidationError, e.origin + ": unknown key '" + e.key + "'");
    it->second(p, e.value, e.origin);
}

// ---- file parsing ----

inline bool is_section_name(const std::string& name) {
    if (name == "common") return true;
    for (Experiment e : experiments::kAllExperiments)
        if (experiments::to_string(e) == name) return true;
    return false;
}

inline std::vector<Entry> parse_text(const std::string& text, const std::string& origin) {
    std::vector<Entry> out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto hash = line.find_first_of("#;");
        std::string s = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw Error(ErrorKind::ParseError, where + ": unterminated section header '" + s + "'");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!is_section_name(section))
                throw Error(ErrorKind::ValidationError, where + ": unknown section '" + section + "'");
            if (section == "common") section.clear();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, where + ": expected 'key = value', got '" + s + "'");
        Entry e{section, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)), where};
        if (e.key.empty()) throw Error(ErrorKind::ParseError, where + ": empty key");
        if (e.value.empty()) throw Error(ErrorKind::ParseError, where + ": key '" + e.key + "' has no value");
        if (!key_table().count(e.key))
            throw Error(ErrorKind::ValidationError, where + ": unknown key '" + e.key + "'");
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<Entry> parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

// "key=value" from the command line
inline Entry parse_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw Error(ErrorKind::ParseError, "--param expects key=value, got '" + kv + "'");
    Entry e{"", detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), "--param " + kv};
    if (e.key.empty() || e.value.empty())
        throw Error(ErrorKind::ParseError, "--param expects key=value, got '" + kv + "'");
    return e;
}

// ---- validation ----

namespace detail {

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ValidationError, key + " " + what);
}

}  // namespace detail

inline void validate(Experiment e, const Params& p) {
    using detail::require;
    auto finite = [](double x) { return std::isfinite(x); };
    require(p.temperature > 0.0 && finite(p.temperature), "temperature", "must be > 0");
    require(p.eta >= 0.0 && finite(p.eta), "eta", "must be >= 0");
    require(p.eta2 >= 0.0 && finite(p.eta2), "eta2", "must be >= 0");
    require(p.cutoff > 0.0 && finite(p.cutoff), "cutoff", "must be > 0");
    require(p.omega_p > 0.0 && finite(p.omega_p), "omega_p", "must be > 0");
    require(p.omega_a > 0.0 && finite(p.omega_a), "omega_a", "must be > 0");
    require(p.omega0 > 0.0 && finite(p.omega0), "omega0", "must be > 0");
    require(p.kappa >= 0.0 && finite(p.kappa), "kappa", "must be >= 0");
    require(p.theta >= 0.0 && p.theta <= std::numbers::pi, "theta", "must lie in [0, pi]");
    require(p.t_max > 0.0 && finite(p.t_max), "t_max", "must be > 0");
    require(p.n_points >= 2, "n_points", "must be >= 2");
    require(p.t >= 0.0 && finite(p.t), "t", "must be >= 0");
    require(p.t_compare > 0.0 && finite(p.t_compare), "t_compare", "must be > 0");
    require(p.fd_step >= 0.0 && finite(p.fd_step), "fd_step", "must be >= 0 (0 selects the default)");
    require(p.fd_step < p.temperature, "fd_step", "must be smaller than the temperature");
    require(p.opt_tol > 0.0, "opt_tol", "must be > 0");
    require(p.model == "direct" || p.model == "probe_ancilla" || p.model == "two_qubit", "model",
            "must be one of direct, probe_ancilla, two_qubit");
    require(p.topology == "local" || p.topology == "common", "topology", "must be local or common");
    require(p.zero_rate == "auto" || p.zero_rate == "ohmic_limit" || p.zero_rate == "drop", "zero_rate",
            "must be one of auto, ohmic_limit, drop");
    switch (e) {
        case Experiment::ThetaScan:
            require(!p.theta_list.empty(), "theta_list", "must not be empty");
            for (double th : p.theta_list) require(th >= 0.0 && th <= std::numbers::pi, "theta_list", "values must lie in [0, pi]");
            break;
        case Experiment::KappaSweep:
        case Experiment::CoherenceParametric:
            require(!p.kappa_list.empty(), "kappa_list", "must not be empty");
            for (double k : p.kappa_list) require(k > 0.0 && std::isfinite(k), "kappa_list", "values must be > 0");
            break;
        case Experiment::TwoQubitConfigs:
            require(p.n_points >= 3, "n_points", "must be >= 3");
            require(p.t_max > 1e-3, "t_max", "must exceed 1e-3 for the log grid");
            break;
        case Experiment::SteadyQsnr:
            require(p.ratio_min > 0.0, "ratio_min", "must be > 0");
            require(p.ratio_max > p.ratio_min, "ratio_max", "must exceed ratio_min");
            require(p.ratio_points >= 3, "ratio_points", "must be >= 3");
            for (double T : p.temperature_list) require(T > 0.0, "temperature_list", "values must be > 0");
            break;
        case Experiment::DirectVsAncilla:
        case Experiment::Evolve:
        case Experiment::QfiPoint:
            break;
    }
}

// ---- resolution ----

inline RunConfig resolve(Experiment e, const std::vector<Entry>& file_entries,
                         const std::vector<std::string>& overrides) {
    RunConfig rc{e, experiments::defaults_for(e)};
    const std::string name = experiments::to_string(e);
    for (const auto& entry : file_entries)
        if (entry.section.empty()) apply(rc.params, entry);
    for (const auto& entry : file_entries)
        if (entry.section == name) apply(rc.params, entry);
    for (const auto& kv : overrides) apply(rc.params, parse_override(kv));
    validate(e, rc.params);
    return rc;
}

}  // namespace qthermo::config
