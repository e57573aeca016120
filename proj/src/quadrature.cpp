#include "dirint/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dirint {

double uniform_spacing(const Eigen::VectorXd& times) {
    const Eigen::Index n = times.size();
    if (n < 2) throw std::invalid_argument("uniform_spacing: grid needs at least 2 points");
    const double h = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw std::invalid_argument("uniform_spacing: grid must be increasing");
    const double tol = 1e-9 * std::max(1.0, std::abs(h));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (std::abs(times[k + 1] - times[k] - h) > tol)
            throw std::invalid_argument("uniform_spacing: grid is not uniform");
    }
    return h;
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& times) {
    const double h = uniform_spacing(times);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(times.size(), h);
    w[0] = 0.5 * h;
    w[times.size() - 1] = 0.5 * h;
    return w;
}

Eigen::MatrixXd cumulative_trapezoid(const Eigen::VectorXd& times, const Eigen::MatrixXd& samples) {
    if (samples.cols() != times.size())
        throw std::invalid_argument("cumulative_trapezoid: sample count does not match grid");
    const double h = uniform_spacing(times);
    Eigen::MatrixXd out(samples.rows(), samples.cols());
    out.col(0).setZero();
    for (Eigen::Index k = 1; k < samples.cols(); ++k)
        out.col(k) = out.col(k - 1) + (0.5 * h) * (samples.col(k - 1) + samples.col(k));
    return out;
}

Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& times, const Eigen::VectorXd& samples) {
    Eigen::MatrixXd m = cumulative_trapezoid(times, Eigen::MatrixXd(samples.transpose()));
    return m.row(0).transpose();
}

Eigen::VectorXd definite_trapezoid(const Eigen::VectorXd& times, const Eigen::MatrixXd& samples) {
    Eigen::MatrixXd running = cumulative_trapezoid(times, samples);
    return running.col(running.cols() - 1);
}

double definite_trapezoid(const Eigen::VectorXd& times, const Eigen::VectorXd& samples) {
    return definite_trapezoid(times, Eigen::MatrixXd(samples.transpose()))[0];
}

Eigen::VectorXd uniform_grid(double t_end, int n) {
    if (n < 2 || !(t_end > 0.0)) throw std::invalid_argument("uniform_grid: need n >= 2 and t_end > 0");
    Eigen::VectorXd t(n);
    for (int k = 0; k < n; ++k) t[k] = t_end * static_cast<double>(k) / static_cast<double>(n - 1);
    t[n - 1] = t_end;
    return t;
}

}  // namespace dirint
