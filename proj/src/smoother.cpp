#include "dirint/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dirint {

namespace {

inline double epanechnikov(double z) {
    const double q = 1.0 - z * z;
    return q > 0.0 ? 0.75 * q : 0.0;
}

}  // namespace

SmoothEstimate::SmoothEstimate(Eigen::VectorXd times, Eigen::VectorXd values, double bandwidth)
    : times_(std::move(times)), values_(std::move(values)), bandwidth_(bandwidth) {
    if (!(bandwidth_ > 0.0)) throw std::invalid_argument("SmoothEstimate: bandwidth must be > 0");
    if (times_.size() != values_.size() || times_.size() < 3)
        throw std::invalid_argument("SmoothEstimate: need at least 3 samples");
    for (Eigen::Index i = 0; i + 1 < times_.size(); ++i)
        if (!(times_[i + 1] > times_[i]))
            throw std::invalid_argument("SmoothEstimate: sample times must be strictly increasing");
    max_abs_y_ = values_.cwiseAbs().maxCoeff();
}

double SmoothEstimate::evaluate_excluding(double t, Eigen::Index skip) const {
    const Eigen::Index n = times_.size();
    const double h = bandwidth_;

    // in-window weighted sums for the local linear fit
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    Eigen::Index in_window = 0;
    double first_t = std::numeric_limits<double>::quiet_NaN();
    bool distinct = false;
    // window is [t-h, t+h]; restrict the scan to it
    const double* begin = times_.data();
    Eigen::Index lo = std::lower_bound(begin, begin + n, t - h) - begin;
    for (Eigen::Index i = lo; i < n && times_[i] < t + h; ++i) {
        if (i == skip) continue;
        const double dt = times_[i] - t;
        const double w = epanechnikov(dt / h);
        if (w <= 0.0) continue;
        if (in_window == 0)
            first_t = times_[i];
        else if (times_[i] != first_t)
            distinct = true;
        ++in_window;
        s0 += w;
        s1 += w * dt;
        s2 += w * dt * dt;
        t0 += w * values_[i];
        t1 += w * dt * values_[i];
    }

    const double denom = s0 * s2 - s1 * s1;
    if (in_window >= 2 && distinct && denom > 1e-14 * (s0 * s2 + s1 * s1 + 1e-300)) {
        const double fit = (s2 * t0 - s1 * t1) / denom;
        // degenerate-window guard: never exceed 10 x data range
        if (std::abs(fit) <= 10.0 * max_abs_y_) return fit;
        if (s0 > 0.0) return t0 / s0;  // Nadaraya-Watson over the window
    }

    // fallback: Nadaraya-Watson over the nearest 2 samples
    Eigen::Index a = -1, b = -1;
    double da = std::numeric_limits<double>::infinity(), db = da;
    Eigen::Index near = std::lower_bound(begin, begin + n, t) - begin;
    const Eigen::Index scan_lo = std::max<Eigen::Index>(0, near - 3);
    const Eigen::Index scan_hi = std::min<Eigen::Index>(n, near + 3);
    for (Eigen::Index i = scan_lo; i < scan_hi; ++i) {
        if (i == skip) continue;
        const double d = std::abs(times_[i] - t);
        if (d < da) {
            b = a;
            db = da;
            a = i;
            da = d;
        } else if (d < db) {
            b = i;
            db = d;
        }
    }
    if (a < 0) throw std::runtime_error("SmoothEstimate: no usable samples");
    if (b < 0) return values_[a];
    double wa = epanechnikov((times_[a] - t) / h);
    double wb = epanechnikov((times_[b] - t) / h);
    if (wa + wb <= 0.0) wa = wb = 1.0;
    return (wa * values_[a] + wb * values_[b]) / (wa + wb);
}

SmoothEstimate fit_local_linear(const Dataset& data, int component, double bandwidth) {
    if (component < 0 || component >= data.r())
        throw std::invalid_argument("fit_local_linear: component out of range");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("fit_local_linear: bandwidth must be > 0");
    if (data.n() < 3) throw std::invalid_argument("fit_local_linear: need n >= 3");
    return SmoothEstimate(data.times, data.obs.row(component).transpose(), bandwidth);
}

double select_bandwidth_cv(const Dataset& data, int component, const std::vector<double>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("select_bandwidth_cv: no candidates");
    std::vector<double> hs = candidates;
    std::sort(hs.begin(), hs.end());
    double best_h = hs.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double h : hs) {
        const SmoothEstimate fit = fit_local_linear(data, component, h);
        double score = 0.0;
        for (Eigen::Index i = 0; i < data.times.size(); ++i) {
            const double pred = fit.evaluate_excluding(data.times[i], i);
            const double e = data.obs(component, i) - pred;
            score += e * e;
        }
        if (score <= best_score) {  // ties -> larger bandwidth (hs ascending)
            best_score = score;
            best_h = h;
        }
    }
    return best_h;
}

std::vector<double> default_bandwidth_candidates(double t_end, int n) {
    const double h_max = t_end / 4.0;
    const double h_min = std::min(2.0 * t_end / static_cast<double>(n), h_max);
    std::vector<double> hs(8);
    for (int i = 0; i < 8; ++i) hs[i] = h_min * std::pow(h_max / h_min, i / 7.0);
    return hs;
}

Eigen::MatrixXd evaluate_on_grid(const std::vector<SmoothEstimate>& fits, const Eigen::VectorXd& grid) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(fits.size()), grid.size());
    for (std::size_t j = 0; j < fits.size(); ++j) {
        const double t_end = fits[j].t_end();
        for (Eigen::Index k = 0; k < grid.size(); ++k) {
            if (grid[k] < 0.0 || grid[k] > t_end)
                throw std::invalid_argument("evaluate_on_grid: grid point outside [0, T]");
            out(static_cast<Eigen::Index>(j), k) = fits[j].evaluate(grid[k]);
        }
    }
    return out;
}

}  // namespace dirint
