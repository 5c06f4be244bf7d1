// qthermo.cpp — command-line front end: one subcommand per experiment, plus
// `validate` (config check) and `selftest` (invariant suite).

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "qthermo/analytic.hpp"
#include "qthermo/config.hpp"
#include "qthermo/evolve.hpp"
#include "qthermo/experiments.hpp"
#include "qthermo/gme.hpp"
#include "qthermo/log.hpp"
#include "qthermo/metrology.hpp"
#include "qthermo/output.hpp"

using namespace qthermo;

namespace {

struct CommonFlags {
    std::string config;
    std::string out{"out"};
    std::vector<std::string> params;
    bool quiet{false};
};

void add_common_flags(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "config file (key = value, [experiment] sections)");
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--param", f.params, "override, key=value (repeatable)")->take_all();
    sub->add_flag("--quiet", f.quiet, "suppress warnings");
}

std::vector<config::Entry> load_entries(const CommonFlags& f) {
    return f.config.empty() ? std::vector<config::Entry>{} : config::parse_file(f.config);
}

int run_experiment(experiments::Experiment e, const CommonFlags& f) {
    const auto rc = config::resolve(e, load_entries(f), f.params);
    const auto start = std::chrono::steady_clock::now();
    const auto result = experiments::run(e, rc.params);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    output::write_all(result, f.out, wall, experiments::worker_count());
    if (!f.quiet)
        std::cout << result.label << ": " << result.rows.size() << " rows -> " << f.out << "/" << result.label
                  << ".{csv,summary.json,gp} (" << wall << " s)\n";
    if (!result.violations.empty()) {
        for (const auto& v : result.violations) std::cerr << "invariant violation: " << v << '\n';
        return exit_code(ErrorKind::InvariantViolation);
    }
    return 0;
}

int run_validate(const CommonFlags& f) {
    const auto entries = load_entries(f);
    for (auto e : experiments::kAllExperiments) {
        config::resolve(e, entries, f.params);
        if (!f.quiet) std::cout << experiments::to_string(e) << ": ok\n";
    }
    return 0;
}

// ---- selftest ----

struct Check {
    std::string name;
    bool ok;
    std::string detail;
};

std::vector<Check> selftest_checks() {
    std::vector<Check> out;
    auto add = [&out](std::string name, bool ok, double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", value);
        out.push_back({std::move(name), ok, buf});
    };

    // generator checks on seeded random models
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_trace = 0.0, worst_choi = 0.0;
    for (int k = 0; k < 20; ++k) {
        models::TwoQubitModel m;
        m.kappa = 0.05 + 1.5 * u(rng);
        m.topology = k % 2 ? models::BathTopology::Common : models::BathTopology::Local;
        const double T = 0.1 + 2.0 * u(rng);
        m.bath1 = {0.1 * u(rng), 5.0 + 10.0 * u(rng), T};
        m.bath2 = {0.1 * u(rng), m.bath1.cutoff, T};
        m.theta = std::numbers::pi * u(rng);
        for (auto z : {gme::ZeroFrequencyRate::OhmicLimit, gme::ZeroFrequencyRate::Drop}) {
            const auto L = gme::build_liouvillian(m, gme::Options{z});
            const auto g = gme::check_generator(L);
            worst_trace = std::max({worst_trace, g.trace_error, g.hermiticity_error});
            const Matrix choi = gme::choi_matrix(qmat::expm(L.superop * (0.5 + 5.0 * u(rng))), L.dim);
            worst_choi = std::min(worst_choi, qmat::min_eigenvalue(choi));
        }
    }
    add("generator trace/Hermiticity preservation", worst_trace < 1e-10, worst_trace);
    add("Choi positivity of exp(Lt)", worst_choi >= -1e-8, worst_choi);

    // steady-state QFI identity
    double worst_qfi = 0.0;
    for (double kappa : {0.1, 0.6, 1.5})
        for (double T : {0.2, 0.4, 1.8}) {
            const auto rho = analytic::steady_two_qubit(kappa, T);
            const Matrix d = metrology::d_rho_dT([&](double x) { return analytic::steady_two_qubit(kappa, x); }, T);
            const double exact = analytic::steady_qfi(kappa, T);
            worst_qfi = std::max(worst_qfi, std::abs(metrology::qfi_spectral(rho, d) - exact) / exact);
        }
    add("steady-state QFI closed form", worst_qfi < 1e-6, worst_qfi);

    // Bloch vs spectral QFI
    double worst_bloch = 0.0;
    std::normal_distribution<double> g;
    for (int k = 0; k < 100; ++k) {
        metrology::BlochVector r{g(rng), g(rng), g(rng)};
        const double s = 0.95 * u(rng) / std::sqrt(r.norm2());
        r = {r.rx * s, r.ry * s, r.rz * s};
        const metrology::BlochVector dr{0.3 * g(rng), 0.3 * g(rng), 0.3 * g(rng)};
        const double fb = metrology::qfi_bloch(r, dr);
        const double fs = metrology::qfi_spectral(r.state_matrix(), dr.derivative_matrix());
        worst_bloch = std::max(worst_bloch, std::abs(fb - fs) / std::max(1.0, fs));
    }
    add("Bloch QFI equals spectral QFI", worst_bloch < 1e-9, worst_bloch);

    // optimum of the steady QSNR
    const auto opt = analytic::optimal_ratio();
    add("optimal ratio kappa/T", std::abs(opt.x_star - 1.19968) < 1e-4, opt.x_star);

    // closed-form probe state against the master equation
    models::ProbeAncillaModel pa;
    const auto L = gme::build_liouvillian(pa);
    const auto tr = evolve::trajectory(L, models::initial_state(pa), 50.0, 101, true);
    double worst_probe = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        worst_probe = std::max(worst_probe,
                               qmat::max_abs(tr.reduced[k].mat() -
                                             analytic::probe_state_closed_form(tr.times[k], pa.kappa, pa.bath).mat()));
    add("probe closed form vs master equation", worst_probe < 1e-6, worst_probe);
    return out;
}

int run_selftest(const CommonFlags& f) {
    int failures = 0;
    for (const auto& c : selftest_checks()) {
        if (!c.ok) ++failures;
        if (!f.quiet || !c.ok) std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    }
    return failures ? exit_code(ErrorKind::InvariantViolation) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qthermo: ancilla-assisted quantum thermometry simulations"};
    app.set_version_flag("--version", std::string(QTHERMO_VERSION));
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<std::pair<CLI::App*, experiments::Experiment>> runners;
    for (auto e : experiments::kAllExperiments) {
        auto* sub = app.add_subcommand(experiments::to_string(e), "run the " + experiments::to_string(e) + " experiment");
        add_common_flags(sub, flags);
        runners.emplace_back(sub, e);
    }
    auto* validate = app.add_subcommand("validate", "check the config for every experiment and exit");
    add_common_flags(validate, flags);
    auto* selftest = app.add_subcommand("selftest", "run the built-in invariant suite");
    add_common_flags(selftest, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code(ErrorKind::ParseError);
    }
    log::set_quiet(flags.quiet);

    try {
        if (validate->parsed()) return run_validate(flags);
        if (selftest->parsed()) return run_selftest(flags);
        for (auto& [sub, e] : runners)
            if (sub->parsed()) return run_experiment(e, flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
