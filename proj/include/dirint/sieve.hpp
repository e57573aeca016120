#pragma once

#include <Eigen/Core>
#include <vector>

namespace dirint {

// Sieve space: per unmeasured component j, u_j(t) = sum_k beta_{j,k} phi_{j,k}(t)
// over a clamped uniform B-spline basis, under the joint budget
// sum_{j,k} |beta_{j,k}| <= delta.
struct SieveSpec {
    int degree = 3;
    std::vector<int> basis_counts;         // K_j per component
    double delta = 0.0;                    // joint L1 budget
    double t_end = 0.0;
    std::vector<Eigen::VectorXd> knots;    // per-component clamped knot vectors

    int components() const { return static_cast<int>(basis_counts.size()); }
    int dim() const;                        // total coefficient count
    int offset(int component) const;        // start of component's coefficients
    void validate() const;
};

// Spec with the same K for every component.
SieveSpec make_sieve_spec(double t_end, int components, int basis_count, double delta, int degree = 3);

// Sieve growth schedule: K_n = max(4 + degree, ceil(2 n^{1/4})),
// delta_n = 10 (1 + log10 n). With strict_nesting the knot-interval count is
// rounded up to a power of two so consecutive levels are genuinely nested.
struct SieveSchedule {
    int basis_count;
    double delta;
};
SieveSchedule sieve_schedule(int n, int degree = 3, bool strict_nesting = false);

// Candidate components on a grid: rows follow ascending unmeasured indices.
Eigen::MatrixXd eval_u(const SieveSpec& spec, const Eigen::VectorXd& coeffs, const Eigen::VectorXd& grid);

// Euclidean projection onto the L1 ball of radius delta (exact threshold by
// sorting); identity when already feasible.
Eigen::VectorXd project_l1(const Eigen::VectorXd& coeffs, double delta);

// Least-squares basis fit of per-component targets (rows of `target` on
// `grid`), then project_l1 onto spec.delta. Requires grid size >= 2 max K.
Eigen::VectorXd fit_best_approximation(const SieveSpec& spec, const Eigen::MatrixXd& target,
                                       const Eigen::VectorXd& grid);

}  // namespace dirint
