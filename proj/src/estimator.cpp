#include "dirint/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "dirint/quadrature.hpp"

namespace dirint {

namespace {

// condition estimate of a symmetric matrix from its eigenvalue spread
double symmetric_condition(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd mags = eig.eigenvalues().cwiseAbs();
    const double hi = mags.maxCoeff();
    const double lo = mags.minCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

}  // namespace

StateGrid assemble_state(const Eigen::VectorXd& times, const Eigen::MatrixXd& m_vals,
                         const Eigen::MatrixXd& u_vals, const std::vector<int>& measured, int d) {
    const int r = static_cast<int>(measured.size());
    if (m_vals.rows() != r) throw std::invalid_argument("assemble_state: m row count != |measured|");
    if (u_vals.rows() != d - r) throw std::invalid_argument("assemble_state: u row count != d - r");
    if (m_vals.cols() != times.size() || (u_vals.rows() > 0 && u_vals.cols() != times.size()))
        throw std::invalid_argument("assemble_state: column counts must match the grid");

    std::vector<bool> taken(d, false);
    StateGrid state;
    state.times = times;
    state.values.resize(d, times.size());
    for (int j = 0; j < r; ++j) {
        const int idx = measured[j];
        if (idx < 0 || idx >= d || taken[idx])
            throw std::invalid_argument("assemble_state: bad or duplicate measured index");
        taken[idx] = true;
        state.values.row(idx) = m_vals.row(j);
    }
    int uj = 0;
    for (int i = 0; i < d; ++i) {
        if (taken[i]) continue;
        state.values.row(i) = u_vals.row(uj++);
    }
    return state;
}

IntegralOperators integral_operators(const OdeModel& model, const StateGrid& state) {
    if (state.values.rows() != model.d)
        throw std::invalid_argument("integral_operators: state dimension mismatch");
    const Eigen::Index n = state.times.size();
    IntegralOperators ops;
    ops.d = model.d;
    ops.p = model.p;
    ops.g_flat.resize(model.d * model.p, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Map<Eigen::MatrixXd> gk(ops.g_flat.col(k).data(), model.d, model.p);
        model.g(state.values.col(k), gk);
        if (!gk.allFinite()) {
            std::ostringstream msg;
            msg << "integral_operators: non-finite g at grid point " << k << " (t=" << state.times[k] << ")";
            throw std::runtime_error(msg.str());
        }
    }
    ops.G_flat = cumulative_trapezoid(state.times, ops.g_flat);
    const Eigen::VectorXd a_flat = definite_trapezoid(state.times, ops.G_flat);
    ops.A = Eigen::Map<const Eigen::MatrixXd>(a_flat.data(), model.d, model.p);

    const Eigen::VectorXd w = trapezoid_weights(state.times);
    ops.B = Eigen::MatrixXd::Zero(model.p, model.p);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto gk = ops.G_at(k);
        ops.B.noalias() += w[k] * (gk.transpose() * gk);
    }
    ops.B = 0.5 * (ops.B + ops.B.transpose()).eval();
    return ops;
}

ParamEstimate estimate_parameters(const StateGrid& state, const IntegralOperators& ops) {
    const Eigen::Index n = state.times.size();
    const int d = ops.d, p = ops.p;
    const double t_end = state.t_end();
    const Eigen::VectorXd w = trapezoid_weights(state.times);

    Eigen::VectorXd sx = Eigen::VectorXd::Zero(d);     // int x dt
    Eigen::VectorXd sgx = Eigen::VectorXd::Zero(p);    // int G^T x dt
    for (Eigen::Index k = 0; k < n; ++k) {
        sx.noalias() += w[k] * state.values.col(k);
        sgx.noalias() += w[k] * (ops.G_at(k).transpose() * state.values.col(k));
    }

    ParamEstimate est;
    est.condition_b = symmetric_condition(ops.B);
    if (!(est.condition_b < kConditionGate)) throw SingularMatrixError("B", est.condition_b);
    Eigen::LDLT<Eigen::MatrixXd> b_solver(ops.B);

    const Eigen::MatrixXd binv_at = b_solver.solve(ops.A.transpose());  // p x d
    Eigen::MatrixXd outer = t_end * Eigen::MatrixXd::Identity(d, d) - ops.A * binv_at;
    outer = 0.5 * (outer + outer.transpose()).eval();
    est.condition_outer = symmetric_condition(outer);
    if (!(est.condition_outer < kConditionGate))
        throw SingularMatrixError("T*I - A*B^-1*A^T", est.condition_outer);

    est.xi = outer.ldlt().solve(sx - ops.A * b_solver.solve(sgx));
    est.theta = b_solver.solve(sgx - ops.A.transpose() * est.xi);
    if (!est.xi.allFinite() || !est.theta.allFinite())
        throw SingularMatrixError("B", std::numeric_limits<double>::infinity());
    return est;
}

double criterion_value(const StateGrid& state, const IntegralOperators& ops, const ParamEstimate& est) {
    if (est.xi.size() != ops.d || est.theta.size() != ops.p)
        throw std::invalid_argument("criterion_value: estimate dimension mismatch");
    const Eigen::VectorXd w = trapezoid_weights(state.times);
    double total = 0.0;
    Eigen::VectorXd resid(ops.d);
    for (Eigen::Index k = 0; k < state.times.size(); ++k) {
        resid = state.values.col(k) - est.xi;
        resid.noalias() -= ops.G_at(k) * est.theta;
        total += w[k] * resid.squaredNorm();
    }
    return total;
}

}  // namespace dirint
