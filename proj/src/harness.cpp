#include "dirint/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dirint/quadrature.hpp"
#include "dirint/rng.hpp"
#include "dirint/smoother.hpp"

namespace dirint {

namespace {

constexpr std::uint64_t kObsStream = 1;
constexpr std::uint64_t kOptStream = 2;
constexpr std::uint64_t kCandidateStream = 3;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// run indexed jobs on a small worker pool; each job owns its output slot
void run_jobs(int count, const std::function<void(int)>& job) {
    const int workers = std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()),
                                                  count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

struct PreparedRun {
    OdeModel model;
    Eigen::VectorXd quad;        // quadrature grid
    Eigen::MatrixXd m_hat;       // r x N smoothed (or exact) measured rows
    Eigen::MatrixXd m_true;      // r x N true measured rows (simulated only)
    Eigen::MatrixXd u_true;      // (d-r) x N true unmeasured rows (simulated only)
    bool truth_known = false;
    int n = 0;
    double t_end = 0.0;
};

// shared front end of estimation and gap probing: data, smoothing, truth rows
PreparedRun prepare_run(const RunConfig& cfg, bool force_smoothing) {
    PreparedRun out;
    out.model = builtin_model(cfg.model_name);
    if (!cfg.measured.empty()) out.model.measured = cfg.measured;
    out.model.validate();
    const int r = out.model.r();

    Dataset data;
    Trajectory traj;
    if (!cfg.data_path.empty()) {
        data = read_dataset_csv(cfg.data_path);
        if (data.r() != r)
            throw ConfigError("data file has " + std::to_string(data.r()) + " observation columns, expected " +
                              std::to_string(r));
        if (data.times[0] < 0.0) throw ConfigError("data times must be nonnegative");
        out.t_end = data.times[data.times.size() - 1];
        out.truth_known = false;
    } else {
        if (cfg.theta.size() != out.model.p || cfg.xi.size() != out.model.d)
            throw ConfigError("theta/xi dimensions do not match model " + cfg.model_name);
        out.t_end = cfg.t_end;
        const int n_sim = cfg.sim_refine * (cfg.grid_n - 1) + 1;
        traj = simulate(out.model, cfg.theta, cfg.xi, uniform_grid(cfg.t_end, n_sim));
        data = generate_observations(traj, out.model.measured, uniform_grid(cfg.t_end, cfg.n), cfg.sigma,
                                     derive_seed(cfg.seed, kObsStream));
        data.meta = DatasetMeta{cfg.theta, cfg.xi, cfg.sigma, cfg.seed};
        out.truth_known = true;
    }
    out.n = data.n();
    out.quad = uniform_grid(out.t_end, cfg.grid_n);

    if (out.truth_known) {
        const std::vector<int> unmeasured = out.model.unmeasured();
        out.m_true.resize(r, out.quad.size());
        out.u_true.resize(static_cast<Eigen::Index>(unmeasured.size()), out.quad.size());
        for (Eigen::Index k = 0; k < out.quad.size(); ++k) {
            const Eigen::VectorXd state = interpolate_state(traj, out.quad[k]);
            for (int j = 0; j < r; ++j) out.m_true(j, k) = state[out.model.measured[j]];
            for (std::size_t j = 0; j < unmeasured.size(); ++j)
                out.u_true(static_cast<Eigen::Index>(j), k) = state[unmeasured[j]];
        }
    }

    if (cfg.exact_m && !force_smoothing) {
        if (!out.truth_known) throw ConfigError("exact_m requires simulated data");
        out.m_hat = out.m_true;
    } else {
        std::vector<SmoothEstimate> fits;
        fits.reserve(r);
        for (int j = 0; j < r; ++j) {
            const double h = cfg.bandwidth > 0.0
                                 ? cfg.bandwidth
                                 : select_bandwidth_cv(data, j, default_bandwidth_candidates(out.t_end, out.n));
            fits.push_back(fit_local_linear(data, j, h));
        }
        out.m_hat = evaluate_on_grid(fits, out.quad);
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) return -1.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

double sup_column_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double sup = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) sup = std::max(sup, (a.col(k) - b.col(k)).norm());
    return sup;
}

}  // namespace

RunOutcome run_estimation(const RunConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const PreparedRun run = prepare_run(cfg, false);
    const OdeModel& model = run.model;
    const int d = model.d, r = model.r();

    RunOutcome out;
    out.row.n = run.n;

    if (r == d) {
        // fully observed: closed form, no optimizer
        const StateGrid state = assemble_state(run.quad, run.m_hat, Eigen::MatrixXd(0, run.quad.size()),
                                               model.measured, d);
        const IntegralOperators ops = integral_operators(model, state);
        const ParamEstimate params = estimate_parameters(state, ops);
        out.estimate.theta = params.theta;
        out.estimate.xi = params.xi;
        out.estimate.u_coeffs.resize(0);
        out.estimate.mn_value = criterion_value(state, ops, params);
        out.estimate.converged = true;
        out.estimate.evals = 0;
        out.estimate.condition_b = params.condition_b;
        out.estimate.condition_outer = params.condition_outer;
    } else {
        SieveSchedule schedule = sieve_schedule(run.n, cfg.degree);
        if (cfg.sieve_k > 0) schedule.basis_count = cfg.sieve_k;
        if (cfg.sieve_delta > 0.0) schedule.delta = cfg.sieve_delta;
        const SieveSpec spec =
            make_sieve_spec(run.t_end, d - r, schedule.basis_count, schedule.delta, cfg.degree);
        const PipelineObjective objective = build_objective(model, run.m_hat, spec, run.quad);
        OptimizerConfig oc = cfg.optimizer_config();
        oc.seed = derive_seed(cfg.seed, kOptStream);
        const OptResult opt = minimize(std::cref(objective), spec, oc, objective.level_guess());
        out.estimate = final_estimate(objective, opt);

        if (run.truth_known) {
            const Eigen::MatrixXd u_vals = eval_u(spec, out.estimate.u_coeffs, run.quad);
            out.row.u_sup_err = sup_column_norm(u_vals, run.u_true);
        }
    }

    out.row.mn_value = out.estimate.mn_value;
    if (run.truth_known) {
        out.row.theta_err = (out.estimate.theta - cfg.theta).norm();
        out.row.xi_err = (out.estimate.xi - cfg.xi).norm();
        out.row.m_sup_err = sup_column_norm(run.m_hat, run.m_true);
        if (r == d) out.row.u_sup_err = 0.0;
    }
    out.row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                            t_start)
                          .count();
    return out;
}

SweepResult run_consistency_sweep(const RunConfig& base, const std::vector<int>& n_list, int reps) {
    if (reps < 3) throw ConfigError("sweep: need reps >= 3");
    if (n_list.empty()) throw ConfigError("sweep: empty n_list");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw ConfigError("sweep: n_list must be increasing");
    if (!base.data_path.empty()) throw ConfigError("sweep: requires simulated data");

    const int jobs = static_cast<int>(n_list.size()) * reps;
    SweepResult result;
    result.rows.resize(jobs);
    run_jobs(jobs, [&](int job) {
        const int n_idx = job / reps;
        const int rep = job % reps;
        RunConfig cfg = base;
        cfg.n = n_list[n_idx];
        cfg.seed = base.seed + static_cast<std::uint64_t>(rep);
        cfg.sieve_k = 0;      // sweep always follows the schedule
        cfg.sieve_delta = 0.0;
        SweepRow row;
        row.n = cfg.n;
        row.rep = rep;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            RunOutcome outcome = run_estimation(cfg);
            row = outcome.row;
            row.rep = rep;
        } catch (const std::exception&) {
            row.failed = 1;
            row.wall_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                    .count();
        }
        result.rows[job] = row;
    });

    for (std::size_t i = 0; i < n_list.size(); ++i) {
        std::vector<double> errs;
        for (int rep = 0; rep < reps; ++rep) {
            const SweepRow& row = result.rows[i * reps + rep];
            if (!row.failed && row.theta_err >= 0.0) errs.push_back(row.theta_err);
        }
        result.ns.push_back(n_list[i]);
        result.median_theta_err.push_back(median(std::move(errs)));
    }
    return result;
}

std::vector<GapRow> run_gap_probe(const RunConfig& base, const std::vector<int>& n_list, int candidate_count) {
    if (n_list.empty()) throw ConfigError("gap probe: empty n_list");
    if (candidate_count < 1) throw ConfigError("gap probe: need at least one candidate");
    if (!base.data_path.empty()) throw ConfigError("gap probe: requires simulated data");

    const int reps = base.reps;
    const int jobs = static_cast<int>(n_list.size()) * reps;
    std::vector<GapRow> rows(jobs);
    run_jobs(jobs, [&](int job) {
        const int n_idx = job / reps;
        const int rep = job % reps;
        RunConfig cfg = base;
        cfg.n = n_list[n_idx];
        cfg.seed = base.seed + static_cast<std::uint64_t>(rep);
        GapRow row;
        row.n = cfg.n;
        row.rep = rep;
        try {
            const PreparedRun run = prepare_run(cfg, /*force_smoothing=*/true);
            const int dr = run.model.d - run.model.r();
            if (dr < 1) throw ConfigError("gap probe: configuration is fully observed");
            SieveSchedule schedule = sieve_schedule(run.n, cfg.degree);
            if (cfg.sieve_k > 0) schedule.basis_count = cfg.sieve_k;
            if (cfg.sieve_delta > 0.0) schedule.delta = cfg.sieve_delta;
            const SieveSpec spec =
                make_sieve_spec(run.t_end, dr, schedule.basis_count, schedule.delta, cfg.degree);
            const PipelineObjective crit_hat = build_objective(run.model, run.m_hat, spec, run.quad);
            const PipelineObjective crit_true = build_objective(run.model, run.m_true, spec, run.quad);
            Rng rng(derive_seed(cfg.seed, kCandidateStream));
            double max_gap = 0.0;
            for (int c = 0; c < candidate_count; ++c) {
                const Eigen::VectorXd coeffs = sample_feasible(spec, rng);
                try {
                    double mn = 0.0, m = 0.0;
                    crit_hat.estimate_at(coeffs, &mn);
                    crit_true.estimate_at(coeffs, &m);
                    max_gap = std::max(max_gap, std::abs(mn - m));
                } catch (const SingularMatrixError&) {
                    // degenerate candidate: the gap is undefined, skip it
                }
            }
            row.max_gap = max_gap;
        } catch (const std::exception&) {
            row.failed = 1;
        }
        rows[job] = row;
    });
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,rep,theta_err,xi_err,m_sup_err,u_sup_err,mn_value,wall_ms,failed\n";
    for (const SweepRow& row : rows) {
        out << row.n << ',' << row.rep << ',' << fmt17(row.theta_err) << ',' << fmt17(row.xi_err) << ','
            << fmt17(row.m_sup_err) << ',' << fmt17(row.u_sup_err) << ',' << fmt17(row.mn_value) << ','
            << row.wall_ms << ',' << row.failed << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_gap_csv(const std::string& path, const std::vector<GapRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,rep,max_gap,failed\n";
    for (const GapRow& row : rows)
        out << row.n << ',' << row.rep << ',' << fmt17(row.max_gap) << ',' << row.failed << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string report_json(const Estimate& est, std::uint64_t seed) {
    nlohmann::json j;
    j["theta_hat"] = std::vector<double>(est.theta.data(), est.theta.data() + est.theta.size());
    j["xi_hat"] = std::vector<double>(est.xi.data(), est.xi.data() + est.xi.size());
    j["u_coeffs"] = std::vector<double>(est.u_coeffs.data(), est.u_coeffs.data() + est.u_coeffs.size());
    j["mn_value"] = est.mn_value;
    j["converged"] = est.converged;
    j["evals"] = est.evals;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const Estimate& est, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << report_json(est, seed);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_sweep_svg(const std::string& path, const SweepResult& result) {
    std::vector<double> xs, ys;
    std::vector<int> labels;
    for (std::size_t i = 0; i < result.ns.size(); ++i) {
        if (result.median_theta_err[i] > 0.0) {
            xs.push_back(std::log10(static_cast<double>(result.ns[i])));
            ys.push_back(std::log10(result.median_theta_err[i]));
            labels.push_back(result.ns[i]);
        }
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const int w = 480, h = 360, margin = 50;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << "median theta error vs n (log-log)</text>\n";
    if (xs.size() >= 1) {
        double x_lo = *std::min_element(xs.begin(), xs.end()), x_hi = *std::max_element(xs.begin(), xs.end());
        double y_lo = *std::min_element(ys.begin(), ys.end()), y_hi = *std::max_element(ys.begin(), ys.end());
        if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
        if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
        auto sx = [&](double x) { return margin + (w - 2 * margin) * (x - x_lo) / (x_hi - x_lo); };
        auto sy = [&](double y) { return h - margin - (h - 2 * margin) * (y - y_lo) / (y_hi - y_lo); };
        out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) out << sx(xs[i]) << ',' << sy(ys[i]) << ' ';
        out << "\"/>\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out << "<circle cx=\"" << sx(xs[i]) << "\" cy=\"" << sy(ys[i]) << "\" r=\"3\" fill=\"steelblue\"/>\n";
            out << "<text x=\"" << sx(xs[i]) << "\" y=\"" << h - margin + 18
                << "\" text-anchor=\"middle\" font-size=\"11\">" << labels[i] << "</text>\n";
        }
    }
    out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin << "\" y2=\""
        << h - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << h - margin
        << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dirint
