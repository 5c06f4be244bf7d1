// experiments.hpp — scan runners: theta scan, direct probe vs
// ancilla, kappa sweep with optimal times, coherence/QSNR parametric curve, the four
// two-qubit configurations and the steady-state QSNR curve. Plus evolve / qfi_point.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qthermo/analytic.hpp"
#include "qthermo/errors.hpp"
#include "qthermo/evolve.hpp"
#include "qthermo/gme.hpp"
#include "qthermo/log.hpp"
#include "qthermo/metrology.hpp"
#include "qthermo/models.hpp"

namespace qthermo::experiments {

using json = nlohmann::ordered_json;
using metrology::EstimateRecord;

// ---- experiment kinds and parameters ----

enum class Experiment {
    ThetaScan,
    DirectVsAncilla,
    KappaSweep,
    CoherenceParametric,
    TwoQubitConfigs,
    SteadyQsnr,
    Evolve,
    QfiPoint,
};

inline constexpr Experiment kAllExperiments[] = {
    Experiment::ThetaScan,  Experiment::DirectVsAncilla, Experiment::KappaSweep,
    Experiment::CoherenceParametric, Experiment::TwoQubitConfigs, Experiment::SteadyQsnr,
    Experiment::Evolve,     Experiment::QfiPoint,
};

inline std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::ThetaScan: return "theta_scan";
        case Experiment::DirectVsAncilla: return "direct_vs_ancilla";
        case Experiment::KappaSweep: return "kappa_sweep";
        case Experiment::CoherenceParametric: return "coherence_parametric";
        case Experiment::TwoQubitConfigs: return "two_qubit_configs";
        case Experiment::SteadyQsnr: return "steady_qsnr";
        case Experiment::Evolve: return "evolve";
        case Experiment::QfiPoint: return "qfi_point";
    }
    return "?";
}

inline Experiment parse_experiment(const std::string& s) {
    for (Experiment e : kAllExperiments)
        if (to_string(e) == s) return e;
    throw Error(ErrorKind::ValidationError, "unknown experiment '" + s + "'");
}

// One flat record for every experiment; unused fields are ignored by a runner but
// still echoed so a summary is self-describing.
struct Params {
    std::string model{"probe_ancilla"};  // direct | probe_ancilla | two_qubit (evolve, qfi_point)
    std::string topology{"local"};       // local | common (two_qubit model)
    std::string zero_rate{"auto"};       // auto | ohmic_limit | drop
    double omega_p{1.0};
    double omega_a{1.0};
    double omega0{1.0};
    double kappa{0.8};
    double theta{std::numbers::pi / 2};
    double eta{0.01};
    double eta2{0.05};
    double cutoff{10.0};
    double temperature{0.4};
    double t_max{50.0};
    int n_points{500};
    double t{1.0};
    double t_compare{1000.0};
    std::vector<double> theta_list{0.0, std::numbers::pi / 4, std::numbers::pi / 2,
                                   3 * std::numbers::pi / 4, std::numbers::pi};
    std::vector<double> kappa_list{0.6, 0.7, 0.8, 0.9};
    double ratio_min{0.01};
    double ratio_max{6.0};
    int ratio_points{600};
    std::vector<double> temperature_list{0.1, 0.2, 0.4, 0.8, 1.2, 1.6, 2.0};
    double fd_step{0.0};  // 0: default_step(T)
    double opt_tol{1e-6};

    json to_json() const {
        json j;
        j["model"] = model;
        j["topology"] = topology;
        j["zero_rate"] = zero_rate;
        j["omega_p"] = omega_p;
        j["omega_a"] = omega_a;
        j["omega0"] = omega0;
        j["kappa"] = kappa;
        j["theta"] = theta;
        j["eta"] = eta;
        j["eta2"] = eta2;
        j["cutoff"] = cutoff;
        j["temperature"] = temperature;
        j["t_max"] = t_max;
        j["n_points"] = n_points;
        j["t"] = t;
        j["t_compare"] = t_compare;
        j["theta_list"] = theta_list;
        j["kappa_list"] = kappa_list;
        j["ratio_min"] = ratio_min;
        j["ratio_max"] = ratio_max;
        j["ratio_points"] = ratio_points;
        j["temperature_list"] = temperature_list;
        j["fd_step"] = fd_step;
        j["opt_tol"] = opt_tol;
        return j;
    }
};

// Defaults per experiment.
inline Params defaults_for(Experiment e) {
    Params p;
    switch (e) {
        case Experiment::ThetaScan:
        case Experiment::DirectVsAncilla:
        case Experiment::Evolve:
        case Experiment::QfiPoint:
            break;
        case Experiment::KappaSweep:
            p.t_max = 4000.0;
            p.n_points = 4001;
            break;
        case Experiment::CoherenceParametric:
            p.eta = 0.1;
            p.kappa_list = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
            p.t_max = 2000.0;
            p.n_points = 2001;
            break;
        case Experiment::TwoQubitConfigs:
            p.model = "two_qubit";
            p.kappa = 0.6;
            p.eta = 0.01;
            p.eta2 = 0.05;
            p.t_max = 2000.0;
            p.n_points = 2000;
            break;
        case Experiment::SteadyQsnr:
            break;
    }
    return p;
}

// ---- results ----

struct Row {
    std::string series;
    std::vector<double> sweep;  // values for ScanResult::sweep_names
    EstimateRecord record;
};

struct OptSearchResult {
    double argmax{0.0};
    double value{0.0};
    double bracket_lo{0.0};
    double bracket_hi{0.0};
    double value_lo{0.0};
    double value_hi{0.0};
    double tolerance{0.0};
    int evaluations{0};

    bool interior() const { return value_lo < value && value_hi < value; }

    json to_json() const {
        return json{{"argmax", argmax},       {"value", value},       {"bracket", {bracket_lo, bracket_hi}},
                    {"bracket_values", {value_lo, value_hi}},        {"tolerance", tolerance},
                    {"evaluations", evaluations}};
    }
};

struct ScanResult {
    std::string label;
    json params;
    std::vector<std::string> sweep_names;
    std::vector<Row> rows;
    json summary = json::object();
    std::vector<std::string> violations;

    void check_records(double T) {
        for (const Row& r : rows) {
            const std::string v = r.record.invariant_violation(T);
            if (!v.empty()) violations.push_back(r.series + ": " + v);
        }
        if (rows.empty()) violations.push_back("no rows produced");
    }
};

// ---- work queue ----

// QTHERMO_WORKERS overrides the worker count; default is the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("QTHERMO_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) return static_cast<unsigned>(n);
        throw Error(ErrorKind::ValidationError, std::string("QTHERMO_WORKERS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs job(0..n-1) on a pool; results come back in index order. The first failing
// index (lowest) is rethrown after every worker has stopped.
template <class Job>
auto parallel_map(std::size_t n, Job&& job) -> std::vector<decltype(job(std::size_t{0}))> {
    using R = decltype(job(std::size_t{0}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(job(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---- one-dimensional maximization ----

// Golden-section search for a maximum inside [a, b].
inline OptSearchResult golden_section_max(const std::function<double(double)>& f, double a, double b,
                                          double tol) {
    if (!(b > a)) throw Error(ErrorKind::ValidationError, "golden section needs a < b");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    OptSearchResult r;
    r.bracket_lo = a;
    r.bracket_hi = b;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    r.evaluations = 2;
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++r.evaluations;
    }
    if (fc >= fd) {
        r.argmax = c;
        r.value = fc;
    } else {
        r.argmax = d;
        r.value = fd;
    }
    r.tolerance = b - a;
    return r;
}

// Grid argmax, then golden section on the bracketing triple. A maximum on the grid
// boundary is an error: the caller's window is too small.
inline OptSearchResult grid_then_golden(const std::function<double(double)>& f, const std::vector<double>& grid,
                                        const std::vector<double>& values, double tol) {
    if (grid.size() != values.size() || grid.size() < 3)
        throw Error(ErrorKind::ValidationError, "grid search needs at least three points");
    const auto k = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    if (k == 0 || k + 1 == grid.size()) {
        std::ostringstream os;
        os << "maximum sits on the grid boundary t = " << grid[k] << "; widen the window";
        throw Error(ErrorKind::NoConvergence, os.str());
    }
    OptSearchResult r = golden_section_max(f, grid[k - 1], grid[k + 1], tol);
    if (values[k] > r.value) {
        r.argmax = grid[k];
        r.value = values[k];
    }
    r.bracket_lo = grid[k - 1];
    r.bracket_hi = grid[k + 1];
    r.value_lo = values[k - 1];
    r.value_hi = values[k + 1];
    return r;
}

// ---- model construction ----

inline std::optional<gme::ZeroFrequencyRate> zero_rate_option(const Params& p) {
    if (p.zero_rate == "auto") return std::nullopt;
    return gme::parse_zero_frequency_rate(p.zero_rate);
}

inline models::BathSpec primary_bath(const Params& p) { return {p.eta, p.cutoff, p.temperature}; }

inline models::DirectProbeModel direct_model(const Params& p) {
    return {p.omega_p, primary_bath(p)};
}

inline models::ProbeAncillaModel probe_ancilla_model(const Params& p, double kappa, double theta) {
    models::ProbeAncillaModel m;
    m.omega_p = p.omega_p;
    m.omega_a = p.omega_a;
    m.kappa = kappa;
    m.theta = theta;
    m.bath = primary_bath(p);
    return m;
}

inline models::BathTopology parse_topology(const std::string& s) {
    if (s == "local") return models::BathTopology::Local;
    if (s == "common") return models::BathTopology::Common;
    throw Error(ErrorKind::ValidationError, "topology must be 'local' or 'common', got '" + s + "'");
}

inline models::TwoQubitModel two_qubit_model(const Params& p, models::BathTopology topo, double theta) {
    models::TwoQubitModel m;
    m.omega0 = p.omega0;
    m.kappa = p.kappa;
    m.topology = topo;
    m.bath1 = {p.eta, p.cutoff, p.temperature};
    m.bath2 = {p.eta2, p.cutoff, p.temperature};
    m.theta = theta;
    return m;
}

inline models::Model model_from_params(const Params& p) {
    if (p.model == "direct") return direct_model(p);
    if (p.model == "probe_ancilla") return probe_ancilla_model(p, p.kappa, p.theta);
    if (p.model == "two_qubit") return two_qubit_model(p, parse_topology(p.topology), p.theta);
    throw Error(ErrorKind::ValidationError,
                "model must be 'direct', 'probe_ancilla' or 'two_qubit', got '" + p.model + "'");
}

// ---- temperature-estimation core ----

// The state that is measured: the reduced probe for probe+ancilla, the full state otherwise.
inline bool reduces_to_probe(const models::Model& m) {
    return std::holds_alternative<models::ProbeAncillaModel>(m);
}

// sigma_x on a qubit; the energy observable for the two-qubit register.
inline Matrix measured_observable(const models::Model& m) {
    if (std::holds_alternative<models::TwoQubitModel>(m)) return models::hamiltonian(m);
    return qmat::sigma_x();
}

inline double coherence_of(const Matrix& rho) {
    return rho.rows() == 2 ? std::abs(rho(0, 1)) : std::abs(rho(1, 2));
}

inline EstimateRecord make_record(double t, double T, const Matrix& rho, const Matrix& drho,
                                  const Matrix& observable) {
    EstimateRecord r;
    r.t = t;
    if (rho.rows() == 2)
        r.qfi = metrology::qfi_bloch(metrology::BlochVector::from_matrix(rho),
                                     metrology::BlochVector::from_matrix(drho));
    else
        r.qfi = metrology::qfi_spectral(rho, drho);
    try {
        r.cfi = metrology::measurement_fi(observable, rho, drho);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroVariance) throw;
        r.cfi = 0.0;  // deterministic outcome carries no information
    }
    r.qsnr = metrology::qsnr(T, r.qfi);
    r.qfi_per_t = t > 0.0 ? r.qfi / t : 0.0;
    r.coherence_abs = coherence_of(rho);
    return r;
}

inline metrology::DerivativeSettings derivative_settings(const Params& p) {
    metrology::DerivativeSettings s;
    s.h = p.fd_step;
    return s;
}

inline gme::Options gme_options(const Params& p) { return gme::Options{zero_rate_option(p)}; }

// Measured states along a time grid at temperature T. A uniform grid reuses the step
// propagator.
inline std::vector<Matrix> measured_states(const models::Model& m, const gme::Options& opts, double T,
                                           const std::vector<double>& times, bool uniform) {
    const models::Model mt = models::with_temperature(m, T);
    const auto L = gme::build_liouvillian(mt, opts);
    const bool reduce = reduces_to_probe(m);
    const evolve::Trajectory tr =
        uniform ? evolve::trajectory(L, models::initial_state(mt), times.back(), static_cast<int>(times.size()), reduce)
                : evolve::trajectory_at(L, models::initial_state(mt), times, reduce);
    std::vector<Matrix> out;
    out.reserve(times.size());
    for (const auto& s : reduce ? tr.reduced : tr.states) out.push_back(s.mat());
    return out;
}

// Derivative with the default step first; when the h vs h/2 check fails, retry with
// h/4 and h/16 before giving up. An explicit fd_step is never changed.
template <class Fn>
auto with_step_retry(Fn&& derivative, double T, const metrology::DerivativeSettings& ds) {
    metrology::DerivativeSettings s = ds;
    for (int attempt = 0;; ++attempt) {
        try {
            return derivative(s);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::StepTooLarge || ds.h > 0.0 || attempt == 2) throw;
            s.h = metrology::default_step(T) / std::pow(4.0, attempt + 1);
            std::ostringstream os;
            os << e.what() << "; retrying with h = " << s.h;
            log::warn(os.str());
        }
    }
}

inline std::vector<EstimateRecord> estimate_series(const models::Model& m, const gme::Options& opts,
                                                   const std::vector<double>& times, bool uniform,
                                                   const metrology::DerivativeSettings& ds) {
    models::validate(m);
    const double T = models::temperature(m);
    auto series = [&](double x) { return measured_states(m, opts, x, times, uniform); };
    const auto states = series(T);
    const auto derivs = with_step_retry(
        [&](const metrology::DerivativeSettings& s) { return metrology::d_rho_dT_series(series, T, s); }, T, ds);
    const Matrix obs = measured_observable(m);
    std::vector<EstimateRecord> out;
    out.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        out.push_back(make_record(times[k], T, states[k], derivs[k], obs));
    return out;
}

// Estimate at one arbitrary time.
inline EstimateRecord estimate_at(const models::Model& m, const gme::Options& opts, double t,
                                  const metrology::DerivativeSettings& ds) {
    const double T = models::temperature(m);
    auto state = [&](double x) {
        const models::Model mt = models::with_temperature(m, x);
        const auto L = gme::build_liouvillian(mt, opts);
        const DensityMatrix rho = evolve::propagate(L, models::initial_state(mt), t);
        return reduces_to_probe(m) ? qmat::partial_trace(rho.mat(), 1) : rho.mat();
    };
    const Matrix rho = state(T);
    const Matrix drho = with_step_retry(
        [&](const metrology::DerivativeSettings& s) { return metrology::d_rho_dT(state, T, s); }, T, ds);
    return make_record(t, T, rho, drho, measured_observable(m));
}

inline std::vector<double> uniform_grid(double t_max, int n) {
    if (!(t_max > 0.0)) throw Error(ErrorKind::ValidationError, "t_max must be > 0");
    if (n < 2) throw Error(ErrorKind::ValidationError, "n_points must be >= 2");
    std::vector<double> g(n);
    const double dt = t_max / (n - 1);
    for (int k = 0; k < n; ++k) g[k] = k == n - 1 ? t_max : dt * k;
    return g;
}

// {0} followed by n-1 log-spaced times from 1e-3 to t_max.
inline std::vector<double> log_grid(double t_max, int n) {
    if (!(t_max > 1e-3)) throw Error(ErrorKind::ValidationError, "t_max must exceed 1e-3");
    if (n < 3) throw Error(ErrorKind::ValidationError, "n_points must be >= 3");
    std::vector<double> g{0.0};
    const double a = std::log(1e-3), b = std::log(t_max);
    for (int k = 0; k < n - 1; ++k) g.push_back(k == n - 2 ? t_max : std::exp(a + (b - a) * k / (n - 2)));
    return g;
}

namespace detail {

inline std::size_t argmax_qfi(const std::vector<EstimateRecord>& recs) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < recs.size(); ++k)
        if (recs[k].qfi > recs[best].qfi) best = k;
    return best;
}

inline json peak_json(const EstimateRecord& r) {
    return json{{"t", r.t}, {"qfi", r.qfi}, {"cfi", r.cfi}, {"qsnr", r.qsnr}};
}

inline void append_rows(ScanResult& out, const std::string& series, const std::vector<double>& sweep,
                        const std::vector<EstimateRecord>& recs) {
    for (const auto& r : recs) out.rows.push_back({series, sweep, r});
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Optimal QSNR over time: grid scan of the records, then golden section in t.
inline OptSearchResult optimal_time(const models::Model& m, const gme::Options& opts,
                                    const std::vector<EstimateRecord>& recs,
                                    const metrology::DerivativeSettings& ds, double tol) {
    std::vector<double> grid, values;
    for (const auto& r : recs) {
        grid.push_back(r.t);
        values.push_back(r.qsnr);
    }
    return grid_then_golden([&](double t) { return estimate_at(m, opts, t, ds).qsnr; }, grid, values, tol);
}

}  // namespace detail

// ---- runners ----

inline ScanResult run_theta_scan(const Params& p) {
    for (double th : p.theta_list) models::detail::require_theta(th);
    if (p.theta_list.empty()) throw Error(ErrorKind::ValidationError, "theta_list must not be empty");
    const auto grid = uniform_grid(p.t_max, p.n_points);
    const auto opts = gme_options(p);
    const auto ds = derivative_settings(p);
    const auto curves = parallel_map(p.theta_list.size(), [&](std::size_t i) {
        return estimate_series(probe_ancilla_model(p, p.kappa, p.theta_list[i]), opts, grid, true, ds);
    });

    ScanResult out;
    out.label = "theta_scan";
    out.params = p.to_json();
    out.sweep_names = {"theta"};
    json peaks = json::array();
    std::size_t best = 0;
    std::vector<double> peak_values;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        detail::append_rows(out, "theta=" + detail::fmt(p.theta_list[i]), {p.theta_list[i]}, curves[i]);
        const auto& peak = curves[i][detail::argmax_qfi(curves[i])];
        json j = detail::peak_json(peak);
        j["theta"] = p.theta_list[i];
        peaks.push_back(j);
        peak_values.push_back(peak.qfi);
        if (peak.qfi > peak_values[best]) best = i;
    }
    out.summary["peaks"] = peaks;
    out.summary["best_theta"] = p.theta_list[best];
    out.summary["best_peak_qfi"] = peak_values[best];
    out.check_records(p.temperature);
    return out;
}

inline ScanResult run_direct_vs_ancilla(const Params& p) {
    const auto grid = uniform_grid(p.t_max, p.n_points);
    const auto opts = gme_options(p);
    const auto ds = derivative_settings(p);
    const auto curves = parallel_map(2, [&](std::size_t i) {
        if (i == 0) return estimate_series(direct_model(p), opts, grid, true, ds);
        return estimate_series(probe_ancilla_model(p, p.kappa, p.theta), opts, grid, true, ds);
    });
    const auto& direct = curves[0];
    const auto& ancilla = curves[1];

    ScanResult out;
    out.label = "direct_vs_ancilla";
    out.params = p.to_json();
    detail::append_rows(out, "direct", {}, direct);
    detail::append_rows(out, "ancilla", {}, ancilla);

    // t_cross: last sampled time at which the ancilla curve is not above the direct one
    std::optional<double> last_not_above;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (ancilla[k].qfi <= direct[k].qfi) last_not_above = grid[k];
    const bool crossed = !last_not_above || *last_not_above < grid.back();
    out.summary["direct_peak"] = detail::peak_json(direct[detail::argmax_qfi(direct)]);
    out.summary["ancilla_peak"] = detail::peak_json(ancilla[detail::argmax_qfi(ancilla)]);
    out.summary["ancilla_exceeds_direct_at_end"] = crossed;
    if (crossed)
        out.summary["t_cross"] = last_not_above ? *last_not_above : 0.0;
    else
        out.summary["t_cross"] = nullptr;
    out.check_records(p.temperature);
    return out;
}

struct KappaSweepResult {
    ScanResult scan;
    std::vector<OptSearchResult> optima;
};

inline KappaSweepResult run_kappa_sweep(const Params& p) {
    if (p.kappa_list.empty()) throw Error(ErrorKind::ValidationError, "kappa_list must not be empty");
    for (double k : p.kappa_list)
        if (!(k > 0.0)) throw Error(ErrorKind::ValidationError, "kappa_list values must be > 0");
    const auto grid = uniform_grid(p.t_max, p.n_points);
    const auto opts = gme_options(p);
    const auto ds = derivative_settings(p);
    struct PerKappa {
        std::vector<EstimateRecord> recs;
        OptSearchResult opt;
        EstimateRecord at_compare;
    };
    const auto per = parallel_map(p.kappa_list.size(), [&](std::size_t i) {
        const auto m = probe_ancilla_model(p, p.kappa_list[i], p.theta);
        PerKappa r;
        r.recs = estimate_series(m, opts, grid, true, ds);
        r.opt = detail::optimal_time(m, opts, r.recs, ds, p.opt_tol);
        r.at_compare = estimate_at(m, opts, p.t_compare, ds);
        return r;
    });

    KappaSweepResult out;
    out.scan.label = "kappa_sweep";
    out.scan.params = p.to_json();
    out.scan.sweep_names = {"kappa"};
    json optima = json::array();
    for (std::size_t i = 0; i < per.size(); ++i) {
        detail::append_rows(out.scan, "kappa=" + detail::fmt(p.kappa_list[i]), {p.kappa_list[i]}, per[i].recs);
        out.optima.push_back(per[i].opt);
        json j = per[i].opt.to_json();
        j["kappa"] = p.kappa_list[i];
        j["t_opt"] = per[i].opt.argmax;
        j["qsnr_opt"] = per[i].opt.value;
        j["qfi_per_t_at_t_compare"] = per[i].at_compare.qfi_per_t;
        optima.push_back(j);
        if (!per[i].opt.interior())
            out.scan.violations.push_back("optimum for kappa=" + detail::fmt(p.kappa_list[i]) + " is not interior");
    }
    out.scan.summary["optima"] = optima;
    out.scan.summary["t_compare"] = p.t_compare;
    out.scan.check_records(p.temperature);
    return out;
}

inline ScanResult run_coherence_parametric(const Params& p) {
    if (p.kappa_list.empty()) throw Error(ErrorKind::ValidationError, "kappa_list must not be empty");
    for (double k : p.kappa_list)
        if (!(k > 0.0)) throw Error(ErrorKind::ValidationError, "kappa_list values must be > 0");
    const auto grid = uniform_grid(p.t_max, p.n_points);
    const auto opts = gme_options(p);
    const auto ds = derivative_settings(p);
    struct Point {
        double max_coherence;
        double t_max_coherence;
        OptSearchResult opt;
        EstimateRecord at_opt;
    };
    const auto pts = parallel_map(p.kappa_list.size(), [&](std::size_t i) {
        const auto m = probe_ancilla_model(p, p.kappa_list[i], p.theta);
        const auto recs = estimate_series(m, opts, grid, true, ds);
        std::vector<double> coh;
        for (const auto& r : recs) coh.push_back(r.coherence_abs);
        const auto L = gme::build_liouvillian(m, opts);
        const auto rho0 = models::initial_state(m);
        auto coherence_at = [&](double t) {
            return coherence_of(qmat::partial_trace(evolve::propagate(L, rho0, t).mat(), 1));
        };
        const auto cmax = grid_then_golden(coherence_at, grid, coh, p.opt_tol);
        Point pt{cmax.value, cmax.argmax, detail::optimal_time(m, opts, recs, ds, p.opt_tol), {}};
        pt.at_opt = estimate_at(m, opts, pt.opt.argmax, ds);
        return pt;
    });

    ScanResult out;
    out.label = "coherence_parametric";
    out.params = p.to_json();
    out.sweep_names = {"kappa", "max_coherence", "t_max_coherence"};
    json curve = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.rows.push_back({"parametric", {p.kappa_list[i], pts[i].max_coherence, pts[i].t_max_coherence},
                            pts[i].at_opt});
        curve.push_back(json{{"kappa", p.kappa_list[i]},
                             {"max_coherence", pts[i].max_coherence},
                             {"qsnr_opt", pts[i].opt.value},
                             {"t_opt", pts[i].opt.argmax}});
        if (pts[i].max_coherence > 0.5 + 1e-12)
            out.violations.push_back("coherence exceeds the Bloch bound");
    }
    out.summary["curve"] = curve;
    out.check_records(p.temperature);
    return out;
}

struct TwoQubitConfig {
    std::string name;
    models::BathTopology topology;
    double theta;
};

inline const std::vector<TwoQubitConfig>& two_qubit_configs() {
    static const std::vector<TwoQubitConfig> configs{
        {"local_separable", models::BathTopology::Local, 0.0},
        {"local_entangled", models::BathTopology::Local, std::numbers::pi / 2},
        {"common_separable", models::BathTopology::Common, 0.0},
        {"common_entangled", models::BathTopology::Common, std::numbers::pi / 2},
    };
    return configs;
}

// First time the curve reaches `fraction` of `target`, linearly interpolated.
inline std::optional<double> time_to_fraction(const std::vector<EstimateRecord>& recs, double target,
                                              double fraction) {
    const double level = fraction * target;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        if (recs[k].qfi >= level) {
            if (k == 0) return recs[0].t;
            const double f0 = recs[k - 1].qfi, f1 = recs[k].qfi;
            return recs[k - 1].t + (level - f0) / (f1 - f0) * (recs[k].t - recs[k - 1].t);
        }
    }
    return std::nullopt;
}

inline ScanResult run_two_qubit_configs(const Params& p) {
    const auto grid = log_grid(p.t_max, p.n_points);
    const auto opts = gme_options(p);
    const auto ds = derivative_settings(p);
    const auto& configs = two_qubit_configs();
    const auto curves = parallel_map(configs.size(), [&](std::size_t i) {
        return estimate_series(two_qubit_model(p, configs[i].topology, configs[i].theta), opts, grid, false, ds);
    });

    ScanResult out;
    out.label = "two_qubit_configs";
    out.params = p.to_json();
    const double steady = analytic::steady_qfi(p.kappa, p.temperature);
    json per = json::object();
    double spread = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        detail::append_rows(out, configs[i].name, {}, curves[i]);
        const auto& last = curves[i].back();
        double max_before = 0.0;
        for (std::size_t k = 0; k + 1 < curves[i].size(); ++k) max_before = std::max(max_before, curves[i][k].qfi);
        const auto t99 = time_to_fraction(curves[i], last.qfi, 0.99);
        per[configs[i].name] = json{{"final_qfi", last.qfi},
                                    {"max_qfi_before_end", max_before},
                                    {"t99", t99 ? json(*t99) : json(nullptr)}};
        for (std::size_t j = 0; j < i; ++j) spread = std::max(spread, std::abs(last.qfi - curves[j].back().qfi));
    }
    out.summary["configs"] = per;
    out.summary["steady_qfi_analytic"] = steady;
    out.summary["pairwise_spread_at_t_max"] = spread;
    out.check_records(p.temperature);
    return out;
}

inline ScanResult run_steady_qsnr_curve(const Params& p) {
    if (!(p.ratio_min > 0.0) || !(p.ratio_max > p.ratio_min) || p.ratio_points < 3)
        throw Error(ErrorKind::ValidationError, "ratio grid needs 0 < ratio_min < ratio_max and ratio_points >= 3");
    for (double T : p.temperature_list)
        if (!(T > 0.0)) throw Error(ErrorKind::ValidationError, "temperature_list values must be > 0");
    std::vector<double> xs(p.ratio_points), vals(p.ratio_points);
    ScanResult out;
    out.label = "steady_qsnr";
    out.params = p.to_json();
    out.sweep_names = {"ratio", "kappa"};
    const double T = p.temperature;
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.ratio_points; ++k) {
        xs[k] = p.ratio_min + (p.ratio_max - p.ratio_min) * k / (p.ratio_points - 1);
        vals[k] = analytic::steady_qsnr(xs[k]);
        EstimateRecord r;
        r.t = inf;
        r.qfi = analytic::steady_qfi(xs[k] * T, T);
        r.cfi = r.qfi;  // doublet-basis measurement is optimal at steady state
        r.qsnr = metrology::qsnr(T, r.qfi);
        out.rows.push_back({"steady", {xs[k], xs[k] * T}, r});
    }
    const auto opt = analytic::optimal_ratio();
    const auto located = grid_then_golden([](double x) { return analytic::steady_qsnr(x); }, xs, vals, 1e-10);
    out.summary["x_star"] = opt.x_star;
    out.summary["qsnr_star"] = opt.qsnr_star;
    out.summary["grid_search"] = located.to_json();
    json line = json::array();
    for (double Tl : p.temperature_list) line.push_back(json{{"temperature", Tl}, {"kappa", opt.x_star * Tl}});
    out.summary["optimal_line"] = line;
    out.check_records(T);
    return out;
}

inline ScanResult run_evolve(const Params& p) {
    const auto m = model_from_params(p);
    const auto grid = uniform_grid(p.t_max, p.n_points);
    const auto recs = estimate_series(m, gme_options(p), grid, true, derivative_settings(p));
    ScanResult out;
    out.label = "evolve";
    out.params = p.to_json();
    detail::append_rows(out, p.model, {}, recs);
    out.summary["zero_rate"] = std::string(gme::to_string(
        gme::build_liouvillian(m, gme_options(p)).zero_rate));
    out.summary["peak"] = detail::peak_json(recs[detail::argmax_qfi(recs)]);
    out.check_records(p.temperature);
    return out;
}

inline ScanResult run_qfi_point(const Params& p) {
    if (!(p.t >= 0.0)) throw Error(ErrorKind::ValidationError, "t must be >= 0");
    const auto m = model_from_params(p);
    models::validate(m);
    const auto r = estimate_at(m, gme_options(p), p.t, derivative_settings(p));
    ScanResult out;
    out.label = "qfi_point";
    out.params = p.to_json();
    out.rows.push_back({p.model, {}, r});
    out.summary["record"] = json{{"t", r.t},         {"qfi", r.qfi},
                                 {"cfi", r.cfi},     {"qsnr", r.qsnr},
                                 {"qfi_per_t", r.qfi_per_t}, {"coherence_abs", r.coherence_abs}};
    out.check_records(p.temperature);
    return out;
}

inline ScanResult run(Experiment e, const Params& p) {
    switch (e) {
        case Experiment::ThetaScan: return run_theta_scan(p);
        case Experiment::DirectVsAncilla: return run_direct_vs_ancilla(p);
        case Experiment::KappaSweep: return run_kappa_sweep(p).scan;
        case Experiment::CoherenceParametric: return run_coherence_parametric(p);
        case Experiment::TwoQubitConfigs: return run_two_qubit_configs(p);
        case Experiment::SteadyQsnr: return run_steady_qsnr_curve(p);
        case Experiment::Evolve: return run_evolve(p);
        case Experiment::QfiPoint: return run_qfi_point(p);
    }
    throw Error(ErrorKind::ValidationError, "unknown experiment");
}

}  // namespace qthermo::experiments
