#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dirint/config.hpp"
#include "dirint/harness.hpp"

using namespace dirint;

namespace {

RunConfig scalar_config() {
    RunConfig cfg;
    cfg.model_name = "exponential";
    cfg.theta = Eigen::VectorXd::Ones(1);
    cfg.xi = Eigen::VectorXd::Ones(1);
    cfg.t_end = 1.0;
    cfg.n = 201;
    cfg.sigma = 0.0;
    cfg.grid_n = 2001;
    cfg.seed = 3;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("full round trip with comments and arrays") {
        const std::string text =
            "# experiment\n"
            "model = lotka_volterra\n"
            "theta = 1, 1, 1, 1\n"
            "xi = 1, 2\n"
            "t_end = 5\n"
            "n = 100\n"
            "sigma = 0.1   # noise\n"
            "measured = 1\n"
            "grid = 501\n"
            "seed = 42\n"
            "n_list = 100, 400\n"
            "reps = 5\n"
            "exact_m = true\n";
        RunConfig cfg = parse_config_text(text);
        CHECK(cfg.model_name == "lotka_volterra");
        CHECK(cfg.theta.size() == 4);
        CHECK(cfg.xi[1] == 2.0);
        CHECK(cfg.t_end == 5.0);
        CHECK(cfg.sigma == 0.1);
        CHECK(cfg.measured == std::vector<int>{0});  // file is 1-based
        CHECK(cfg.grid_n == 501);
        CHECK(cfg.seed == 42);
        CHECK(cfg.n_list == std::vector<int>{100, 400});
        CHECK(cfg.reps == 5);
        CHECK(cfg.exact_m);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config_text("model = exponential\nbogus = 1\n"), ConfigError);
    }
    SUBCASE("malformed lines are rejected") {
        CHECK_THROWS_AS(parse_config_text("model exponential\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("model = exponential\nn = two\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("n = 100\n"), ConfigError);  // missing model
    }
}

TEST_CASE("run_estimation: fully observed scalar model") {
    RunConfig cfg = scalar_config();
    RunOutcome out = run_estimation(cfg);
    SUBCASE("recovers theta and xi to quadrature/smoothing accuracy") {
        CHECK(std::abs(out.estimate.theta[0] - 1.0) < 1e-4);
        CHECK(std::abs(out.estimate.xi[0] - 1.0) < 1e-4);
        CHECK(out.row.u_sup_err == 0.0);
        CHECK(out.estimate.evals == 0);  // optimizer bypassed
        CHECK(out.estimate.u_coeffs.size() == 0);
    }
    SUBCASE("deterministic across repeated runs") {
        RunOutcome again = run_estimation(cfg);
        CHECK(out.estimate.theta[0] == again.estimate.theta[0]);
        CHECK(out.estimate.xi[0] == again.estimate.xi[0]);
        CHECK(out.estimate.mn_value == again.estimate.mn_value);
        CHECK(out.row.theta_err == again.row.theta_err);
    }
    SUBCASE("criterion is nonnegative") { CHECK(out.estimate.mn_value >= 0.0); }
}

TEST_CASE("run_estimation rejects bad configurations") {
    RunConfig cfg = scalar_config();
    cfg.model_name = "nonsense";
    CHECK_THROWS(run_estimation(cfg));
    cfg = scalar_config();
    cfg.theta = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(run_estimation(cfg), ConfigError);
    cfg = scalar_config();
    cfg.data_path = "does_not_exist.csv";
    CHECK_THROWS(run_estimation(cfg));
}

TEST_CASE("consistency sweep accounting and failure policy") {
    RunConfig base = scalar_config();
    base.n = 0;  // overridden by the sweep
    SweepResult result = run_consistency_sweep(base, {50, 100}, 3);
    CHECK(result.rows.size() == 6);
    int idx = 0;
    for (int n : {50, 50, 50, 100, 100, 100}) {
        CHECK(result.rows[static_cast<std::size_t>(idx)].n == n);
        CHECK(result.rows[static_cast<std::size_t>(idx)].rep == idx % 3);
        CHECK(result.rows[static_cast<std::size_t>(idx)].failed == 0);
        ++idx;
    }
    CHECK(result.ns == std::vector<int>{50, 100});
    CHECK(result.median_theta_err.size() == 2);
    CHECK_THROWS_AS(run_consistency_sweep(base, {100, 50}, 3), ConfigError);
    CHECK_THROWS_AS(run_consistency_sweep(base, {50}, 2), ConfigError);
}

TEST_CASE("sweep records failed replications and keeps going") {
    RunConfig base;
    base.model_name = "exponential";
    base.theta = Eigen::VectorXd::Constant(1, 40.0);  // diverges past the overflow guard
    base.xi = Eigen::VectorXd::Ones(1);
    base.t_end = 1.0;
    base.sigma = 0.0;
    base.grid_n = 101;
    base.seed = 2;
    SweepResult result = run_consistency_sweep(base, {10}, 3);
    REQUIRE(result.rows.size() == 3);
    for (const SweepRow& row : result.rows) {
        CHECK(row.failed == 1);
        CHECK(row.theta_err == -1.0);
        CHECK(row.mn_value == -1.0);
    }
    CHECK(result.median_theta_err[0] == -1.0);  // no successful reps
}

TEST_CASE("sweep: exact-m beats the smoothed fit at sigma > 0") {
    RunConfig base;
    base.model_name = "lotka_volterra";
    base.theta = Eigen::VectorXd::Ones(4);
    base.xi = Eigen::VectorXd(2);
    base.xi << 1.0, 2.0;
    base.t_end = 2.0;
    base.n = 200;
    base.sigma = 0.05;
    base.grid_n = 401;
    base.seed = 7;
    base.max_evals = 1500;
    base.starts = 2;
    base.measured = {0, 1};  // fully observed keeps this test fast

    RunConfig noisy = base;
    RunConfig exact = base;
    exact.exact_m = true;
    SweepResult noisy_result = run_consistency_sweep(noisy, {200}, 5);
    SweepResult exact_result = run_consistency_sweep(exact, {200}, 5);
    CHECK(exact_result.median_theta_err[0] < noisy_result.median_theta_err[0]);
}

TEST_CASE("gap probe") {
    RunConfig base;
    base.model_name = "harmonic";
    base.theta = Eigen::VectorXd::Ones(2);
    base.xi = Eigen::VectorXd(2);
    base.xi << 1.0, 0.0;
    base.t_end = 1.0;
    base.sigma = 0.0;
    base.grid_n = 501;
    base.seed = 13;
    base.measured = {0};
    base.reps = 2;

    SUBCASE("noiseless dense data gives a tiny gap") {
        std::vector<GapRow> rows = run_gap_probe(base, {2001}, 10);
        REQUIRE(rows.size() == 2);
        for (const GapRow& row : rows) {
            CHECK(row.failed == 0);
            CHECK(row.max_gap >= 0.0);
            CHECK(row.max_gap < 1e-6);
        }
    }
    SUBCASE("fully observed configuration fails every replication") {
        RunConfig bad = base;
        bad.measured = {0, 1};
        std::vector<GapRow> rows = run_gap_probe(bad, {100}, 5);
        for (const GapRow& row : rows) CHECK(row.failed == 1);
    }
}

TEST_CASE("sweep CSV emission") {
    SUBCASE("empty results produce only the header") {
        write_sweep_csv("test_sweep_empty.csv", {});
        CHECK(slurp("test_sweep_empty.csv") ==
              "n,rep,theta_err,xi_err,m_sup_err,u_sup_err,mn_value,wall_ms,failed\n");
        std::remove("test_sweep_empty.csv");
    }
    SUBCASE("one row produces exactly two lines") {
        SweepRow row;
        row.n = 100;
        row.rep = 0;
        row.theta_err = 0.125;
        row.xi_err = 0.5;
        row.m_sup_err = 0.25;
        row.u_sup_err = 0.0625;
        row.mn_value = 1e-6;
        row.wall_ms = 12;
        write_sweep_csv("test_sweep_one.csv", {row});
        const std::string text = slurp("test_sweep_one.csv");
        CHECK(std::count(text.begin(), text.end(), '\n') == 2);
        CHECK(text.find("100,0,0.125,0.5,0.25,0.0625,") != std::string::npos);
        std::remove("test_sweep_one.csv");
    }
}

TEST_CASE("report JSON round trip preserves every numeric field") {
    Estimate est;
    est.theta = Eigen::VectorXd(2);
    est.theta << 1.0 / 3.0, -2.718281828459045;
    est.xi = Eigen::VectorXd(1);
    est.xi << 0.1;
    est.u_coeffs = Eigen::VectorXd(3);
    est.u_coeffs << 1e-17, -3.0, 0.4999999999999999;
    est.mn_value = 2.2250738585072014e-308;
    est.converged = true;
    est.evals = 4321;

    const std::string text = report_json(est, 99);
    const nlohmann::json parsed = nlohmann::json::parse(text);
    CHECK(parsed["theta_hat"][0].get<double>() == est.theta[0]);
    CHECK(parsed["theta_hat"][1].get<double>() == est.theta[1]);
    CHECK(parsed["xi_hat"][0].get<double>() == est.xi[0]);
    for (int i = 0; i < 3; ++i) CHECK(parsed["u_coeffs"][static_cast<std::size_t>(i)].get<double>() == est.u_coeffs[i]);
    CHECK(parsed["mn_value"].get<double>() == est.mn_value);
    CHECK(parsed["converged"].get<bool>() == true);
    CHECK(parsed["evals"].get<long>() == 4321);
    CHECK(parsed["seed"].get<std::uint64_t>() == 99);
}

TEST_CASE("SVG plot emission") {
    SweepResult result;
    result.ns = {100, 400, 1600};
    result.median_theta_err = {0.2, 0.1, 0.05};
    write_sweep_svg("test_sweep_plot.svg", result);
    const std::string text = slurp("test_sweep_plot.svg");
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("1600") != std::string::npos);
    std::remove("test_sweep_plot.svg");
}
