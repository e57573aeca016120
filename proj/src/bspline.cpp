#include "dirint/bspline.hpp"

#include <stdexcept>

namespace dirint {

Eigen::VectorXd clamped_uniform_knots(double t_end, int n_basis, int degree) {
    if (degree < 1) throw std::invalid_argument("clamped_uniform_knots: degree must be >= 1");
    if (n_basis < degree + 1)
        throw std::invalid_argument("clamped_uniform_knots: need n_basis >= degree + 1");
    if (!(t_end > 0.0)) throw std::invalid_argument("clamped_uniform_knots: t_end must be > 0");
    const int interior = n_basis - degree - 1;
    Eigen::VectorXd knots(n_basis + degree + 1);
    for (int i = 0; i <= degree; ++i) knots[i] = 0.0;
    for (int i = 1; i <= interior; ++i)
        knots[degree + i] = t_end * static_cast<double>(i) / static_cast<double>(interior + 1);
    for (int i = 0; i <= degree; ++i) knots[n_basis + i] = t_end;
    return knots;
}

Eigen::VectorXd bspline_basis(const Eigen::VectorXd& knots, int degree, double t) {
    const int n_basis = static_cast<int>(knots.size()) - degree - 1;
    if (n_basis < degree + 1) throw std::invalid_argument("bspline_basis: malformed knot vector");
    const double lo = knots[0], hi = knots[knots.size() - 1];
    if (t < lo || t > hi) throw std::invalid_argument("bspline_basis: t outside [0, T]");

    // knot span containing t, clamped so the right endpoint uses the last span
    int span = degree;
    while (span < n_basis - 1 && t >= knots[span + 1]) ++span;

    // Cox-de Boor triangle for the degree+1 nonzero functions on the span
    Eigen::VectorXd nonzero = Eigen::VectorXd::Zero(degree + 1);
    nonzero[0] = 1.0;
    Eigen::VectorXd left(degree + 1), right(degree + 1);
    for (int j = 1; j <= degree; ++j) {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        double saved = 0.0;
        for (int k = 0; k < j; ++k) {
            const double denom = right[k + 1] + left[j - k];
            const double tmp = denom != 0.0 ? nonzero[k] / denom : 0.0;
            nonzero[k] = saved + right[k + 1] * tmp;
            saved = left[j - k] * tmp;
        }
        nonzero[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis);
    out.segment(span - degree, degree + 1) = nonzero;
    return out;
}

Eigen::MatrixXd bspline_basis_matrix(const Eigen::VectorXd& knots, int degree, const Eigen::VectorXd& grid) {
    const int n_basis = static_cast<int>(knots.size()) - degree - 1;
    Eigen::MatrixXd out(grid.size(), n_basis);
    for (Eigen::Index k = 0; k < grid.size(); ++k) out.row(k) = bspline_basis(knots, degree, grid[k]).transpose();
    return out;
}

}  // namespace dirint
