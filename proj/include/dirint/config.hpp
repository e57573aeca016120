#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirint/optimizer.hpp"

namespace dirint {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Experiment description, parsable from a flat `key = value` file
// (one key per line, `#` comments, comma-separated arrays).
struct RunConfig {
    std::string model_name;
    Eigen::VectorXd theta;       // true parameters (simulated data)
    Eigen::VectorXd xi;          // true initial values (simulated data)
    double t_end = 1.0;
    int n = 100;                 // sample size
    double sigma = 0.0;          // observation noise std
    std::vector<int> measured;   // 0-based state indices; empty = all
    int grid_n = 1001;           // quadrature grid size
    int sieve_k = 0;             // per-component basis size; 0 = schedule
    double sieve_delta = 0.0;    // L1 budget; 0 = schedule
    int degree = 3;
    bool exact_m = false;        // bypass smoothing, use true measured rows
    double bandwidth = 0.0;      // fixed smoother bandwidth; 0 = LOO-CV
    int max_evals = 5000;
    int starts = 5;
    double tol_f = 1e-9;
    double tol_x = 1e-7;
    std::uint64_t seed = 1;
    std::string data_path;       // external dataset; skips simulation
    std::vector<int> n_list;     // sweep sample sizes
    int reps = 25;
    int candidates = 50;         // gap-probe candidates per n
    int sim_refine = 4;          // simulation substeps per quadrature cell

    OptimizerConfig optimizer_config() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace dirint
