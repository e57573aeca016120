#pragma once

#include <Eigen/Core>

namespace dirint {

// Composite trapezoid rule on a uniform grid. Grids are validated for
// uniformity (relative tolerance 1e-9 on the spacing) and rejected otherwise.

// Spacing of a uniform grid; throws std::invalid_argument if the grid has
// fewer than 2 points or is not uniformly spaced.
double uniform_spacing(const Eigen::VectorXd& times);

// Trapezoid weights (h/2, h, ..., h, h/2) for a uniform grid.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& times);

// Running integral of a scalar function sampled on a uniform grid.
// First entry is zero.
Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& times, const Eigen::VectorXd& samples);

// Running integral applied column-wise: column k of `samples` holds the
// (flattened) value at times[k]; the result has the same shape.
Eigen::MatrixXd cumulative_trapezoid(const Eigen::VectorXd& times, const Eigen::MatrixXd& samples);

// Definite integral over [times.front(), times.back()].
double definite_trapezoid(const Eigen::VectorXd& times, const Eigen::VectorXd& samples);

// Column-wise definite integral; returns the flattened integral vector.
Eigen::VectorXd definite_trapezoid(const Eigen::VectorXd& times, const Eigen::MatrixXd& samples);

// Uniform grid of n points on [0, t_end].
Eigen::VectorXd uniform_grid(double t_end, int n);

}  // namespace dirint
