// output.hpp — CSV table, JSON summary and gnuplot companion for a ScanResult.
// Numbers are written with 17 significant digits so they round-trip exactly.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qthermo/errors.hpp"
#include "qthermo/experiments.hpp"

namespace qthermo::output {

using experiments::json;
using experiments::ScanResult;

inline std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const ScanResult& r) {
    std::ostringstream os;
    os << "series";
    for (const auto& n : r.sweep_names) os << ',' << n;
    os << ",t,qfi,cfi,qsnr,qfi_per_t,coherence_abs\n";
    for (const auto& row : r.rows) {
        os << csv_quote(row.series);
        for (double v : row.sweep) os << ',' << number(v);
        const auto& e = row.record;
        os << ',' << number(e.t) << ',' << number(e.qfi) << ',' << number(e.cfi) << ',' << number(e.qsnr) << ','
           << number(e.qfi_per_t) << ',' << number(e.coherence_abs) << '\n';
    }
    return os.str();
}

inline json summary_json(const ScanResult& r, double wall_seconds, unsigned workers) {
    json j;
    j["experiment"] = r.label;
    j["version"] = QTHERMO_VERSION;
    j["params"] = r.params;
    j["results"] = r.summary;
    j["rows"] = r.rows.size();
    j["invariants_ok"] = r.violations.empty();
    j["violations"] = r.violations;
    j["workers"] = workers;
    j["wall_time_s"] = wall_seconds;
    return j;
}

// x/y columns for the companion plot
inline std::pair<std::string, std::string> plot_axes(const std::string& label) {
    if (label == "coherence_parametric") return {"max_coherence", "qsnr"};
    if (label == "steady_qsnr") return {"ratio", "qsnr"};
    return {"t", "qfi"};
}

inline std::string to_gnuplot(const ScanResult& r) {
    const auto [x, y] = plot_axes(r.label);
    const std::string csv = r.label + ".csv";
    std::vector<std::string> series;
    for (const auto& row : r.rows)
        if (series.empty() || series.back() != row.series) series.push_back(row.series);
    std::ostringstream os;
    os << "# " << r.label << ": regenerate with `gnuplot " << r.label << ".gp`\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnheader\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << r.label << ".png'\n"
       << "set xlabel '" << x << "'\n"
       << "set ylabel '" << y << "'\n"
       << "plot ";
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i) os << ", \\\n     ";
        os << "'" << csv << "' using (strcol(1) eq \"" << series[i] << "\" ? column(\"" << x
           << "\") : NaN):(column(\"" << y << "\")) with linespoints pt 7 ps 0.3 title \"" << series[i] << "\"";
    }
    os << '\n';
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ValidationError, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::ValidationError, "write failed for '" + path.string() + "'");
}

inline void write_all(const ScanResult& r, const std::filesystem::path& dir, double wall_seconds, unsigned workers) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::ValidationError, "cannot create output directory '" + dir.string() + "'");
    write_file(dir / (r.label + ".csv"), to_csv(r));
    write_file(dir / (r.label + ".summary.json"), summary_json(r, wall_seconds, workers).dump(2) + "\n");
    write_file(dir / (r.label + ".gp"), to_gnuplot(r));
}

}  // namespace qthermo::output
