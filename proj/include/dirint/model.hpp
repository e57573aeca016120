#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirint {

// ODE system linear in the parameters: x'(t) = g(x(t)) * theta, x(0) = xi,
// with g mapping a state in R^d to a d x p matrix. Only the states listed in
// `measured` (0-based, ascending) are observed.
struct OdeModel {
    std::string name;
    int d = 0;
    int p = 0;
    // writes g(x) into a preallocated d x p block
    std::function<void(const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::MatrixXd>)> g;
    std::vector<int> measured;

    int r() const { return static_cast<int>(measured.size()); }
    std::vector<int> unmeasured() const;
    void validate() const;
};

// Solution of the initial-value problem sampled on a time grid.
struct Trajectory {
    Eigen::VectorXd times;   // strictly increasing, times[0] == 0
    Eigen::MatrixXd values;  // d x N, column k = state at times[k]

    double t_end() const { return times.size() ? times[times.size() - 1] : 0.0; }
};

struct DatasetMeta {
    Eigen::VectorXd theta;
    Eigen::VectorXd xi;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Noisy observations Y_j(t_i) of the measured components.
struct Dataset {
    Eigen::VectorXd times;  // strictly increasing sample times in [0, T]
    Eigen::MatrixXd obs;    // r x n
    std::optional<DatasetMeta> meta;

    int r() const { return static_cast<int>(obs.rows()); }
    int n() const { return static_cast<int>(obs.cols()); }
};

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// g(x) as a freshly allocated d x p matrix; rejects wrong-sized or non-finite
// input and non-finite model output.
Eigen::MatrixXd eval_g(const OdeModel& model, const Eigen::VectorXd& x);

// Classical RK4 for x' = g(x) theta, one step per grid interval. The grid must
// be strictly increasing and start at 0. Throws DivergenceError naming the
// first time at which any state exceeds 1e12 in magnitude.
Trajectory simulate(const OdeModel& model, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi,
                    const Eigen::VectorXd& grid);

// Y_j(t_i) = x_{measured[j]}(t_i) + N(0, sigma^2) noise, trajectory values
// linearly interpolated on the simulation grid. Same seed, same output.
Dataset generate_observations(const Trajectory& traj, const std::vector<int>& measured,
                              const Eigen::VectorXd& sample_times, double sigma, std::uint64_t seed);

// Linear interpolation of trajectory rows at time s (exact at grid nodes).
Eigen::VectorXd interpolate_state(const Trajectory& traj, double s);

// Built-in systems: "lotka_volterra" (d=2, p=4), "harmonic" (d=2, p=2),
// "exponential" (d=1, p=1). Measured set defaults to all states.
OdeModel builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

// Dataset CSV: header `t,y1,...,yr`, one row per sample time, doubles at
// 17 significant digits.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);

}  // namespace dirint
