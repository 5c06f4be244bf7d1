#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "oracles.hpp"
#include "qthermo/experiments.hpp"
#include "qthermo/output.hpp"

using namespace qthermo;
using namespace qthermo::experiments;

namespace {

struct WorkerEnv {
    explicit WorkerEnv(const char* value) { setenv("QTHERMO_WORKERS", value, 1); }
    ~WorkerEnv() { unsetenv("QTHERMO_WORKERS"); }
};

std::vector<EstimateRecord> series_of(const ScanResult& r, const std::string& name) {
    std::vector<EstimateRecord> out;
    for (const auto& row : r.rows)
        if (row.series == name) out.push_back(row.record);
    return out;
}

double peak_qfi(const std::vector<EstimateRecord>& recs) {
    double best = 0.0;
    for (const auto& r : recs) best = std::max(best, r.qfi);
    return best;
}

}  // namespace

// ---- optimization helpers ----

TEST(GoldenSection, FindsParabolaVertex) {
    const auto r = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 2.0, 1e-8);
    EXPECT_NEAR(r.argmax, 0.3, 1e-7);
    EXPECT_NEAR(r.value, 2.0, 1e-14);
    EXPECT_LE(r.tolerance, 1e-8);
}

TEST(GridThenGolden, InteriorAndBoundary) {
    auto f = [](double x) { return std::sin(x); };
    std::vector<double> grid, vals;
    for (int k = 0; k <= 30; ++k) {
        grid.push_back(0.1 * k);
        vals.push_back(f(0.1 * k));
    }
    const auto r = grid_then_golden(f, grid, vals, 1e-9);
    // a smooth maximum is only resolvable to about sqrt(machine epsilon)
    EXPECT_NEAR(r.argmax, std::numbers::pi / 2, 1e-7);
    EXPECT_NEAR(r.value, 1.0, 1e-15);
    EXPECT_TRUE(r.interior());
    auto kink = [](double x) { return -std::abs(x - 1.234567); };
    std::vector<double> kvals;
    for (double x : grid) kvals.push_back(kink(x));
    EXPECT_NEAR(grid_then_golden(kink, grid, kvals, 1e-9).argmax, 1.234567, 1e-8);
    std::vector<double> rising(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) rising[k] = grid[k];
    try {
        grid_then_golden([](double x) { return x; }, grid, rising, 1e-9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    }
}

// ---- work queue ----

TEST(WorkQueue, PreservesOrder) {
    WorkerEnv env("4");
    const auto out = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
}

TEST(WorkQueue, RethrowsLowestFailingJob) {
    WorkerEnv env("3");
    try {
        parallel_map(20, [](std::size_t i) -> int {
            if (i == 7 || i == 13) throw Error(ErrorKind::NoConvergence, "job " + std::to_string(i));
            return 0;
        });
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("job 7"), std::string::npos);
    }
}

TEST(WorkQueue, WorkerCountFromEnvironment) {
    {
        WorkerEnv env("5");
        EXPECT_EQ(worker_count(), 5u);
    }
    {
        WorkerEnv env("zero");
        EXPECT_THROW(worker_count(), Error);
    }
    EXPECT_GE(worker_count(), 1u);
}

TEST(WorkQueue, SerialAndParallelOutputsAreIdentical) {
    Params p = defaults_for(Experiment::ThetaScan);
    p.t_max = 20.0;
    p.n_points = 101;
    std::string serial, parallel;
    {
        WorkerEnv env("1");
        serial = output::to_csv(run_theta_scan(p));
    }
    {
        WorkerEnv env("4");
        parallel = output::to_csv(run_theta_scan(p));
    }
    EXPECT_EQ(serial, parallel);
    EXPECT_EQ(serial, output::to_csv(run_theta_scan(p)));
}

// ---- theta scan ----

TEST(ThetaScan, SuperpositionGivesTheLargestPeak) {
    const Params p = defaults_for(Experiment::ThetaScan);
    const auto r = run_theta_scan(p);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_DOUBLE_EQ(r.summary["best_theta"].get<double>(), std::numbers::pi / 2);
    EXPECT_EQ(r.rows.size(), p.theta_list.size() * static_cast<std::size_t>(p.n_points));
}

TEST(ThetaScan, AncillaEigenstatesCreateNoProbeCoherence) {
    Params p = defaults_for(Experiment::ThetaScan);
    p.theta_list = {0.0, std::numbers::pi};
    const auto r = run_theta_scan(p);
    for (const auto& row : r.rows) EXPECT_LT(row.record.coherence_abs, 1e-12);
    // |11> is stationary: nothing depends on T
    const auto pi_curve = series_of(r, "theta=3.14159");
    ASSERT_FALSE(pi_curve.empty());
    EXPECT_LT(peak_qfi(pi_curve), 1e-20);
}

TEST(ThetaScan, SupplementaryAnglesAreNotEquivalent) {
    // theta = 0 starts in |10>, which exchanges population with |01>; theta = pi
    // starts in the stationary |11>. The curves differ.
    Params p = defaults_for(Experiment::ThetaScan);
    p.theta_list = {0.0, std::numbers::pi, std::numbers::pi / 4, 3 * std::numbers::pi / 4};
    const auto r = run_theta_scan(p);
    EXPECT_GT(peak_qfi(series_of(r, "theta=0")), 1e-3);
    EXPECT_LT(peak_qfi(series_of(r, "theta=3.14159")), 1e-20);
    EXPECT_GT(std::abs(peak_qfi(series_of(r, "theta=0.785398")) - peak_qfi(series_of(r, "theta=2.35619"))), 1e-4);
}

// ---- direct vs ancilla ----

TEST(DirectVsAncilla, DirectCurveMatchesDephasingClosedForm) {
    const Params p = defaults_for(Experiment::DirectVsAncilla);
    const auto r = run_direct_vs_ancilla(p);
    const auto direct = series_of(r, "direct");
    ASSERT_EQ(direct.size(), static_cast<std::size_t>(p.n_points));
    for (const auto& rec : direct) {
        const double expected = oracle::direct_probe_qfi(rec.t, p.eta, p.temperature);
        EXPECT_NEAR(rec.qfi, expected, 1e-7 * std::max(1.0, expected)) << "t = " << rec.t;
    }
}

TEST(DirectVsAncilla, DirectProbePeaksFirst) {
    const auto r = run_direct_vs_ancilla(defaults_for(Experiment::DirectVsAncilla));
    EXPECT_LT(r.summary["direct_peak"]["t"].get<double>(), r.summary["ancilla_peak"]["t"].get<double>());
    EXPECT_NEAR(r.summary["direct_peak"]["qfi"].get<double>(), 1.0119, 1e-3);
}

TEST(DirectVsAncilla, AncillaOvertakesOnALongerWindow) {
    Params p = defaults_for(Experiment::DirectVsAncilla);
    p.t_max = 200.0;
    p.n_points = 2001;
    const auto r = run_direct_vs_ancilla(p);
    ASSERT_TRUE(r.summary["ancilla_exceeds_direct_at_end"].get<bool>());
    const double t_cross = r.summary["t_cross"].get<double>();
    EXPECT_GT(t_cross, 50.0);
    EXPECT_LT(t_cross, 80.0);
}

// ---- kappa sweep ----

TEST(KappaSweep, OptimaIncreaseWithCoupling) {
    const auto r = run_kappa_sweep(defaults_for(Experiment::KappaSweep));
    ASSERT_EQ(r.optima.size(), 4u);
    for (const auto& o : r.optima) {
        EXPECT_TRUE(o.interior());
        EXPECT_LE(o.tolerance, 1e-6);
    }
    for (std::size_t i = 1; i < r.optima.size(); ++i) {
        EXPECT_GT(r.optima[i].value, r.optima[i - 1].value);
        EXPECT_GT(r.optima[i].argmax, r.optima[i - 1].argmax);
    }
    const auto& optima = r.scan.summary["optima"];
    EXPECT_GT(optima[3]["qfi_per_t_at_t_compare"].get<double>(), optima[0]["qfi_per_t_at_t_compare"].get<double>());
    EXPECT_TRUE(r.scan.violations.empty());
}

TEST(KappaSweep, RejectsNonPositiveCoupling) {
    Params p = defaults_for(Experiment::KappaSweep);
    p.kappa_list = {0.6, 0.0};
    EXPECT_THROW(run_kappa_sweep(p), Error);
}

// ---- coherence parametric ----

TEST(CoherenceParametric, MonotoneCurveWithinBlochBound) {
    const auto r = run_coherence_parametric(defaults_for(Experiment::CoherenceParametric));
    const auto& curve = r.summary["curve"];
    ASSERT_EQ(curve.size(), 6u);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_LE(curve[i]["max_coherence"].get<double>(), 0.5);
        if (i == 0) continue;
        EXPECT_GT(curve[i]["max_coherence"].get<double>(), curve[i - 1]["max_coherence"].get<double>());
        EXPECT_GT(curve[i]["qsnr_opt"].get<double>(), curve[i - 1]["qsnr_opt"].get<double>());
    }
    EXPECT_TRUE(r.violations.empty());
}

TEST(CoherenceParametric, WeakCouplingKeepsAFiniteOptimum) {
    // The optimal QSNR does not vanish with kappa: population dynamics alone carry
    // temperature information while the generated coherence goes to zero.
    Params p = defaults_for(Experiment::CoherenceParametric);
    p.kappa_list = {0.02, 0.05};
    const auto r = run_coherence_parametric(p);
    const auto& curve = r.summary["curve"];
    EXPECT_LT(curve[0]["max_coherence"].get<double>(), curve[1]["max_coherence"].get<double>());
    EXPECT_GT(curve[0]["qsnr_opt"].get<double>(), 0.03);
}

// ---- two-qubit configurations ----

TEST(TwoQubitConfigs, AllConvergeToTheSteadyQfi) {
    const Params p = defaults_for(Experiment::TwoQubitConfigs);
    const auto r = run_two_qubit_configs(p);
    const double steady = analytic::steady_qfi(p.kappa, p.temperature);
    EXPECT_LT(r.summary["pairwise_spread_at_t_max"].get<double>(), 1e-6);
    for (const auto& cfg : two_qubit_configs()) {
        const auto& s = r.summary["configs"][cfg.name];
        EXPECT_NEAR(s["final_qfi"].get<double>(), steady, 1e-6 * steady) << cfg.name;
        EXPECT_LE(s["max_qfi_before_end"].get<double>(), s["final_qfi"].get<double>() + 1e-9) << cfg.name;
    }
    EXPECT_LE(r.summary["configs"]["local_separable"]["t99"].get<double>(),
              r.summary["configs"]["common_entangled"]["t99"].get<double>());
    EXPECT_TRUE(r.violations.empty());
}

TEST(TwoQubitConfigs, LogGridStartsAtZero) {
    const auto g = log_grid(2000.0, 50);
    ASSERT_EQ(g.size(), 50u);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_NEAR(g[1], 1e-3, 1e-15);
    EXPECT_EQ(g.back(), 2000.0);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_GT(g[k], g[k - 1]);
}

TEST(TwoQubitConfigs, TimeToFractionInterpolates) {
    std::vector<EstimateRecord> recs(3);
    recs[0].t = 0.0;
    recs[1].t = 1.0;
    recs[1].qfi = 0.5;
    recs[2].t = 2.0;
    recs[2].qfi = 1.5;
    EXPECT_DOUBLE_EQ(*time_to_fraction(recs, 1.0, 0.99), 1.49);
    EXPECT_FALSE(time_to_fraction(recs, 10.0, 0.99).has_value());
}

// ---- steady QSNR ----

TEST(SteadyQsnr, OptimumAndRatioDependence) {
    Params p = defaults_for(Experiment::SteadyQsnr);
    const auto r = run_steady_qsnr_curve(p);
    EXPECT_NEAR(r.summary["x_star"].get<double>(), 1.19968, 1e-5);
    EXPECT_NEAR(r.summary["qsnr_star"].get<double>(), 0.4392, 1e-4);
    EXPECT_NEAR(r.summary["grid_search"]["argmax"].get<double>(), 1.19968, 1e-5);
    EXPECT_DOUBLE_EQ(0.25 * analytic::steady_qfi(0.6, 0.5), 1.0 * analytic::steady_qfi(1.2, 1.0));
    EXPECT_LT(analytic::steady_qsnr(1e-4), 1e-7);
    EXPECT_LT(analytic::steady_qsnr(40.0), 1e-30);
    EXPECT_EQ(r.summary["optimal_line"].size(), p.temperature_list.size());
    EXPECT_TRUE(r.violations.empty());
}

// ---- evolve / qfi_point ----

TEST(Evolve, EveryModelRuns) {
    for (const char* model : {"direct", "probe_ancilla", "two_qubit"}) {
        Params p = defaults_for(Experiment::Evolve);
        p.model = model;
        p.n_points = 51;
        const auto r = run_evolve(p);
        EXPECT_EQ(r.rows.size(), 51u);
        EXPECT_TRUE(r.violations.empty()) << model;
    }
}

TEST(QfiPoint, MatchesTheTrajectory) {
    Params p = defaults_for(Experiment::QfiPoint);
    p.t = 10.0;
    const auto point = run_qfi_point(p);
    p.t_max = 10.0;
    p.n_points = 11;
    const auto traj = run_evolve(p);
    EXPECT_NEAR(point.rows[0].record.qfi, traj.rows.back().record.qfi, 1e-9);
}

TEST(QfiPoint, UnknownModelIsRejected) {
    Params p = defaults_for(Experiment::QfiPoint);
    p.model = "three_qubit";
    EXPECT_THROW(run_qfi_point(p), Error);
}
