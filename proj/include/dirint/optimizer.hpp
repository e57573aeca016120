#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dirint/estimator.hpp"
#include "dirint/model.hpp"
#include "dirint/sieve.hpp"

namespace dirint {

struct OptimizerConfig {
    int max_evals = 5000;  // per start
    int starts = 5;
    double tol_f = 1e-9;
    double tol_x = 1e-7;
    std::uint64_t seed = 1;
};

struct StartTrace {
    int start = 0;
    double best_value = 0.0;
    long evals = 0;
    bool converged = false;
    std::vector<double> best_history;  // best-so-far value after each evaluation
};

struct OptResult {
    Eigen::VectorXd best_coeffs;
    double best_value = 0.0;
    long evals = 0;
    bool converged = false;
    std::vector<StartTrace> traces;
};

// Final estimators at the optimized candidate.
struct Estimate {
    Eigen::VectorXd theta;
    Eigen::VectorXd xi;
    Eigen::VectorXd u_coeffs;
    double mn_value = 0.0;
    bool converged = true;
    long evals = 0;
    double condition_b = 0.0;
    double condition_outer = 0.0;
};

constexpr double kSingularPenalty = 1e9;

// Criterion as a function of sieve coefficients: eval_u -> assemble_state ->
// integral_operators -> estimate_parameters -> criterion_value. A singular
// inner solve maps to the finite penalty 1e9 + ||coeffs||_1 so the search can
// route around degenerate candidates. Basis matrices are precomputed once.
class PipelineObjective {
  public:
    PipelineObjective(OdeModel model, Eigen::MatrixXd m_hat_grid, SieveSpec spec, Eigen::VectorXd grid);

    double operator()(const Eigen::VectorXd& coeffs) const;

    // Full pipeline at `coeffs`; throws SingularMatrixError instead of
    // applying the penalty.
    ParamEstimate estimate_at(const Eigen::VectorXd& coeffs, double* criterion = nullptr) const;

    // midrange of m-hat, the crude level guess used as an optimizer start
    double level_guess() const { return level_guess_; }
    const SieveSpec& spec() const { return spec_; }
    const Eigen::VectorXd& grid() const { return grid_; }

  private:
    OdeModel model_;
    Eigen::MatrixXd m_hat_;
    SieveSpec spec_;
    Eigen::VectorXd grid_;
    std::vector<Eigen::MatrixXd> basis_;  // per component, N x K_j
    double level_guess_ = 0.0;
};

PipelineObjective build_objective(const OdeModel& model, const Eigen::MatrixXd& m_hat_grid,
                                  const SieveSpec& spec, const Eigen::VectorXd& grid);

// Random element of the L1 ball (coefficients), used for multistart and for
// feasible-candidate sampling.
Eigen::VectorXd sample_feasible(const SieveSpec& spec, class Rng& rng);

// Projected Nelder-Mead over the sieve coefficients: every candidate vertex
// is passed through project_l1 before evaluation. Starts: all-zeros, the
// projected constant fit at `level_guess` (when provided), then random
// feasible points. Returns the best across starts.
OptResult minimize(const std::function<double(const Eigen::VectorXd&)>& objective, const SieveSpec& spec,
                   const OptimizerConfig& config, std::optional<double> level_guess = std::nullopt);

// Re-run the pipeline at the winner and package the final estimators.
// A singularity here is a hard error: the winner must not be a penalized point.
Estimate final_estimate(const PipelineObjective& objective, const OptResult& opt);

}  // namespace dirint
