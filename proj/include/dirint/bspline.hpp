#pragma once

#include <Eigen/Core>

namespace dirint {

// Clamped knot vector on [0, t_end] with uniform interior knots: endpoint
// multiplicity degree+1, n_basis - degree - 1 interior knots, total length
// n_basis + degree + 1.
Eigen::VectorXd clamped_uniform_knots(double t_end, int n_basis, int degree);

// All n_basis B-spline values at t via the Cox-de Boor recursion. Rejects t
// outside [knots.front(), knots.back()]; the right endpoint is handled so the
// last basis function evaluates to 1 there.
Eigen::VectorXd bspline_basis(const Eigen::VectorXd& knots, int degree, double t);

// Collocation matrix: row k holds the basis values at grid[k].
Eigen::MatrixXd bspline_basis_matrix(const Eigen::VectorXd& knots, int degree, const Eigen::VectorXd& grid);

}  // namespace dirint
