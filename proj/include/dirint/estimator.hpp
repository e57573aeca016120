#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirint/model.hpp"

namespace dirint {

// Candidate full state on a uniform quadrature grid: measured rows hold m-hat
// (or the true m), the remaining rows hold the candidate u, all at their
// original state indices.
struct StateGrid {
    Eigen::VectorXd times;   // uniform grid on [0, T]
    Eigen::MatrixXd values;  // d x N

    double t_end() const { return times[times.size() - 1]; }
};

// G(t) = int_0^t g(x_u(s)) ds per grid point, A = int_0^T G(t) dt,
// B = int_0^T G(t)^T G(t) dt (symmetrized). G is stored flattened: column k
// is the column-major d x p matrix at times[k].
struct IntegralOperators {
    int d = 0;
    int p = 0;
    Eigen::MatrixXd g_flat;  // (d p) x N samples of g along the state
    Eigen::MatrixXd G_flat;  // (d p) x N running integrals, first column zero
    Eigen::MatrixXd A;       // d x p
    Eigen::MatrixXd B;       // p x p

    Eigen::Map<const Eigen::MatrixXd> G_at(Eigen::Index k) const {
        return Eigen::Map<const Eigen::MatrixXd>(G_flat.col(k).data(), d, p);
    }
};

struct ParamEstimate {
    Eigen::VectorXd xi;
    Eigen::VectorXd theta;
    double condition_b = 0.0;      // condition estimate of B
    double condition_outer = 0.0;  // condition estimate of T I_d - A B^{-1} A^T
};

// Raised when a matrix inverse required by the closed form fails the
// condition gate (1e12); carries the offending matrix name.
struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& matrix, double condition)
        : std::runtime_error("singular matrix " + matrix + " (condition estimate " +
                             std::to_string(condition) + ")"),
          matrix_name(matrix),
          condition(condition) {}
    std::string matrix_name;
    double condition;
};

constexpr double kConditionGate = 1e12;

// Place measured rows (m_vals, in measured order) and candidate rows (u_vals,
// ascending unmeasured order) at their original state indices.
StateGrid assemble_state(const Eigen::VectorXd& times, const Eigen::MatrixXd& m_vals,
                         const Eigen::MatrixXd& u_vals, const std::vector<int>& measured, int d);

// Trapezoid discretization of the G/A/B integrals along the state grid.
IntegralOperators integral_operators(const OdeModel& model, const StateGrid& state);

// Closed-form least-squares estimators
//   xi  = (T I_d - A B^{-1} A^T)^{-1} int_0^T {I_d - A B^{-1} G(t)^T} x(t) dt
//   theta = B^{-1} int_0^T G(t)^T {x(t) - xi} dt
// with inverses realized as linear solves behind the condition gate.
ParamEstimate estimate_parameters(const StateGrid& state, const IntegralOperators& ops);

// int_0^T || x(t) - xi - G(t) theta ||^2 dt, trapezoid discretized.
double criterion_value(const StateGrid& state, const IntegralOperators& ops, const ParamEstimate& est);

}  // namespace dirint
