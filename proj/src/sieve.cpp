#include "dirint/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "dirint/bspline.hpp"

namespace dirint {

int SieveSpec::dim() const {
    return std::accumulate(basis_counts.begin(), basis_counts.end(), 0);
}

int SieveSpec::offset(int component) const {
    int off = 0;
    for (int j = 0; j < component; ++j) off += basis_counts[j];
    return off;
}

void SieveSpec::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("SieveSpec: delta must be > 0");
    if (degree < 1) throw std::invalid_argument("SieveSpec: degree must be >= 1");
    if (basis_counts.size() != knots.size())
        throw std::invalid_argument("SieveSpec: knots/basis_counts size mismatch");
    for (std::size_t j = 0; j < basis_counts.size(); ++j) {
        if (basis_counts[j] < degree + 1)
            throw std::invalid_argument("SieveSpec: basis count below degree + 1");
        if (knots[j].size() != basis_counts[j] + degree + 1)
            throw std::invalid_argument("SieveSpec: knot vector has wrong length");
    }
}

SieveSpec make_sieve_spec(double t_end, int components, int basis_count, double delta, int degree) {
    SieveSpec spec;
    spec.degree = degree;
    spec.delta = delta;
    spec.t_end = t_end;
    spec.basis_counts.assign(components, basis_count);
    spec.knots.reserve(components);
    for (int j = 0; j < components; ++j)
        spec.knots.push_back(clamped_uniform_knots(t_end, basis_count, degree));
    spec.validate();
    return spec;
}

SieveSchedule sieve_schedule(int n, int degree, bool strict_nesting) {
    if (n < 2) throw std::invalid_argument("sieve_schedule: need n >= 2");
    int k = std::max(4 + degree, static_cast<int>(std::ceil(2.0 * std::pow(n, 0.25))));
    if (strict_nesting) {
        // round the interval count up to a power of two; dyadic refinement
        // keeps every coarse knot, so consecutive levels nest exactly
        int intervals = 1;
        while (intervals < k - degree) intervals *= 2;
        k = intervals + degree;
    }
    const double delta = 10.0 * (1.0 + std::log10(static_cast<double>(n)));
    return {k, delta};
}

Eigen::MatrixXd eval_u(const SieveSpec& spec, const Eigen::VectorXd& coeffs, const Eigen::VectorXd& grid) {
    spec.validate();
    if (coeffs.size() != spec.dim()) throw std::invalid_argument("eval_u: coefficient length mismatch");
    Eigen::MatrixXd out(spec.components(), grid.size());
    for (int j = 0; j < spec.components(); ++j) {
        const Eigen::MatrixXd basis =
            bspline_basis_matrix(spec.knots[j], spec.degree, grid);
        out.row(j) = (basis * coeffs.segment(spec.offset(j), spec.basis_counts[j]))
                         .transpose();
    }
    return out;
}

Eigen::VectorXd project_l1(const Eigen::VectorXd& coeffs, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("project_l1: delta must be > 0");
    const double l1 = coeffs.lpNorm<1>();
    if (l1 <= delta) return coeffs;
    // exact threshold: sort |beta| descending, find the largest rho with
    // |beta|_(rho) > (cumsum_rho - delta) / rho
    std::vector<double> mags(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) mags[i] = std::abs(coeffs[i]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double cumsum = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < mags.size(); ++i) {
        cumsum += mags[i];
        const double candidate = (cumsum - delta) / static_cast<double>(i + 1);
        if (mags[i] > candidate) tau = candidate;
    }
    Eigen::VectorXd out(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        const double mag = std::abs(coeffs[i]) - tau;
        out[i] = mag > 0.0 ? (coeffs[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

Eigen::VectorXd fit_best_approximation(const SieveSpec& spec, const Eigen::MatrixXd& target,
                                       const Eigen::VectorXd& grid) {
    spec.validate();
    if (target.rows() != spec.components())
        throw std::invalid_argument("fit_best_approximation: target row count mismatch");
    if (target.cols() != grid.size())
        throw std::invalid_argument("fit_best_approximation: target/grid size mismatch");
    const int max_k = *std::max_element(spec.basis_counts.begin(), spec.basis_counts.end());
    if (grid.size() < 2 * max_k)
        throw std::invalid_argument("fit_best_approximation: grid too sparse (need N >= 2 max K)");

    Eigen::VectorXd coeffs(spec.dim());
    for (int j = 0; j < spec.components(); ++j) {
        const Eigen::MatrixXd basis =
            bspline_basis_matrix(spec.knots[j], spec.degree, grid);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
        if (qr.rank() < basis.cols())
            throw std::runtime_error("fit_best_approximation: rank-deficient design");
        coeffs.segment(spec.offset(j), spec.basis_counts[j]) =
            qr.solve(target.row(j).transpose());
    }
    return project_l1(coeffs, spec.delta);
}

}  // namespace dirint
