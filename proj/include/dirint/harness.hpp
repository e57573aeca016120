#pragma once

#include <string>
#include <vector>

#include "dirint/config.hpp"
#include "dirint/optimizer.hpp"

namespace dirint {

// One replication of the pipeline. Error fields are -1 when the truth is
// unknown (external data) or the replication failed.
struct SweepRow {
    int n = 0;
    int rep = 0;
    double theta_err = -1.0;
    double xi_err = -1.0;
    double m_sup_err = -1.0;
    double u_sup_err = -1.0;
    double mn_value = -1.0;
    long wall_ms = 0;
    int failed = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<int> ns;
    std::vector<double> median_theta_err;  // per entry of ns, failures excluded
};

struct GapRow {
    int n = 0;
    int rep = 0;
    double max_gap = -1.0;
    int failed = 0;
};

struct RunOutcome {
    Estimate estimate;
    SweepRow row;
};

// simulate (or load) -> smooth -> sieve-optimize -> estimate. Fully observed
// configurations bypass the optimizer and use the closed form directly.
RunOutcome run_estimation(const RunConfig& cfg);

// For each n in n_list and rep in 0..reps-1 runs run_estimation with the
// sieve schedule at n and seed = base seed + rep. Failed replications are
// recorded, not fatal. Replications execute concurrently.
SweepResult run_consistency_sweep(const RunConfig& base, const std::vector<int>& n_list, int reps);

// Samples feasible sieve candidates per n and reports, per replication, the
// maximum over candidates of |M_n(u) - M(u)| where M_n uses the smoothed
// measured components and M the true ones.
std::vector<GapRow> run_gap_probe(const RunConfig& base, const std::vector<int>& n_list, int candidate_count);

// Emission. Sweep CSV header:
//   n,rep,theta_err,xi_err,m_sup_err,u_sup_err,mn_value,wall_ms,failed
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_gap_csv(const std::string& path, const std::vector<GapRow>& rows);
std::string report_json(const Estimate& est, std::uint64_t seed);
void write_report_json(const std::string& path, const Estimate& est, std::uint64_t seed);
void write_sweep_svg(const std::string& path, const SweepResult& result);

}  // namespace dirint
