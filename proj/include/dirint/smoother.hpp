#pragma once

#include <Eigen/Core>
#include <vector>

#include "dirint/model.hpp"

namespace dirint {

// Local linear estimate of one measured component, evaluable anywhere in
// [0, T]. Epanechnikov kernel K(z) = 0.75 (1 - z^2)_+; windows with fewer
// than 2 distinct sample times fall back to Nadaraya-Watson over the nearest
// 2 points.
class SmoothEstimate {
  public:
    SmoothEstimate(Eigen::VectorXd times, Eigen::VectorXd values, double bandwidth);

    double evaluate(double t) const { return evaluate_excluding(t, -1); }

    // Fit at t with sample `skip` removed (leave-one-out); skip < 0 keeps all.
    double evaluate_excluding(double t, Eigen::Index skip) const;

    double bandwidth() const { return bandwidth_; }
    double t_end() const { return times_[times_.size() - 1]; }

  private:
    Eigen::VectorXd times_;
    Eigen::VectorXd values_;
    double bandwidth_;
    double max_abs_y_;
};

// Fit component `component` (row index into data.obs) of the dataset.
SmoothEstimate fit_local_linear(const Dataset& data, int component, double bandwidth);

// Leave-one-out cross-validated bandwidth; ties break toward the larger
// candidate.
double select_bandwidth_cv(const Dataset& data, int component, const std::vector<double>& candidates);

// Geometric grid of 8 candidates spanning [2 T / n, T / 4].
std::vector<double> default_bandwidth_candidates(double t_end, int n);

// Stack the fitted components on a grid (row order = fit order). The grid must
// lie within [0, T]; an empty grid yields a 0-column matrix.
Eigen::MatrixXd evaluate_on_grid(const std::vector<SmoothEstimate>& fits, const Eigen::VectorXd& grid);

}  // namespace dirint
