#include "dirint/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dirint/bspline.hpp"
#include "dirint/rng.hpp"

namespace dirint {

PipelineObjective::PipelineObjective(OdeModel model, Eigen::MatrixXd m_hat_grid, SieveSpec spec,
                                     Eigen::VectorXd grid)
    : model_(std::move(model)), m_hat_(std::move(m_hat_grid)), spec_(std::move(spec)), grid_(std::move(grid)) {
    model_.validate();
    spec_.validate();
    if (m_hat_.rows() != model_.r())
        throw std::invalid_argument("PipelineObjective: m-hat row count != |measured|");
    if (m_hat_.cols() != grid_.size())
        throw std::invalid_argument("PipelineObjective: m-hat column count != grid size");
    if (!m_hat_.allFinite()) throw std::invalid_argument("PipelineObjective: m-hat has non-finite entries");
    if (spec_.components() != model_.d - model_.r())
        throw std::invalid_argument("PipelineObjective: sieve component count != d - r");
    basis_.reserve(spec_.components());
    for (int j = 0; j < spec_.components(); ++j)
        basis_.push_back(bspline_basis_matrix(spec_.knots[j], spec_.degree, grid_));
    level_guess_ = m_hat_.size() ? 0.5 * (m_hat_.minCoeff() + m_hat_.maxCoeff()) : 0.0;
}

ParamEstimate PipelineObjective::estimate_at(const Eigen::VectorXd& coeffs, double* criterion) const {
    if (coeffs.size() != spec_.dim())
        throw std::invalid_argument("PipelineObjective: coefficient length mismatch");
    Eigen::MatrixXd u_vals(spec_.components(), grid_.size());
    for (int j = 0; j < spec_.components(); ++j)
        u_vals.row(j) = (basis_[j] *
                         coeffs.segment(spec_.offset(j), spec_.basis_counts[j]))
                            .transpose();
    const StateGrid state = assemble_state(grid_, m_hat_, u_vals, model_.measured, model_.d);
    const IntegralOperators ops = integral_operators(model_, state);
    ParamEstimate est = estimate_parameters(state, ops);
    if (criterion) *criterion = criterion_value(state, ops, est);
    return est;
}

double PipelineObjective::operator()(const Eigen::VectorXd& coeffs) const {
    try {
        double value = 0.0;
        estimate_at(coeffs, &value);
        return value;
    } catch (const SingularMatrixError&) {
        return kSingularPenalty + coeffs.lpNorm<1>();
    }
}

PipelineObjective build_objective(const OdeModel& model, const Eigen::MatrixXd& m_hat_grid,
                                  const SieveSpec& spec, const Eigen::VectorXd& grid) {
    return PipelineObjective(model, m_hat_grid, spec, grid);
}

Eigen::VectorXd sample_feasible(const SieveSpec& spec, Rng& rng) {
    Eigen::VectorXd y(spec.dim());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.uniform(-1.0, 1.0);
    const double l1 = y.lpNorm<1>();
    if (l1 <= 0.0) return Eigen::VectorXd::Zero(spec.dim());
    return y * (spec.delta * rng.uniform() / l1);
}

namespace {

struct NelderMeadOutcome {
    Eigen::VectorXd best;     // projected, feasible
    double best_value;
    long evals;
    bool converged;
    std::vector<double> best_history;
};

// Nelder-Mead on raw vertices; every evaluation happens at the projection of
// the vertex onto the L1 ball, and the reported point is that projection.
NelderMeadOutcome nelder_mead_projected(const std::function<double(const Eigen::VectorXd&)>& objective,
                                        const SieveSpec& spec, const Eigen::VectorXd& x0, int max_evals,
                                        double tol_f, double tol_x) {
    const int dim = spec.dim();
    const double step = 0.1 * std::max(1.0, spec.delta / static_cast<double>(dim));

    NelderMeadOutcome out;
    out.evals = 0;
    out.converged = false;
    out.best_value = std::numeric_limits<double>::infinity();

    auto eval = [&](const Eigen::VectorXd& raw) {
        const Eigen::VectorXd projected = project_l1(raw, spec.delta);
        const double value = objective(projected);
        ++out.evals;
        if (value < out.best_value) {
            out.best_value = value;
            out.best = projected;
        }
        out.best_history.push_back(out.best_value);
        return value;
    };

    std::vector<Eigen::VectorXd> simplex(dim + 1);
    std::vector<double> values(dim + 1);
    simplex[0] = x0;
    values[0] = eval(simplex[0]);
    for (int i = 0; i < dim; ++i) {
        simplex[i + 1] = x0;
        simplex[i + 1][i] += step;
        values[i + 1] = eval(simplex[i + 1]);
    }

    std::vector<int> order(dim + 1);
    while (out.evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
        const int best = order[0];
        const int worst = order[dim];
        const int second_worst = order[dim - 1];

        double diameter = 0.0;
        for (int i = 1; i <= dim; ++i)
            diameter = std::max(diameter, (simplex[order[i]] - simplex[best]).norm());
        const double spread = values[worst] - values[best];
        if (diameter < tol_x || spread < tol_f) {
            out.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i <= dim; ++i)
            if (order[i] != worst) centroid += simplex[order[i]];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double f_reflected = eval(reflected);

        if (f_reflected < values[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < values[worst];
            const Eigen::VectorXd contracted = outside
                                                   ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                                   : Eigen::VectorXd(centroid - 0.5 * (centroid - simplex[worst]));
            const double f_contracted = eval(contracted);
            const double bar = outside ? f_reflected : values[worst];
            if (f_contracted <= bar) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                for (int i = 0; i <= dim; ++i) {
                    const int idx = order[i];
                    if (idx == best) continue;
                    simplex[idx] = simplex[best] + 0.5 * (simplex[idx] - simplex[best]);
                    values[idx] = eval(simplex[idx]);
                    if (out.evals >= max_evals) break;
                }
            }
        }
    }
    return out;
}

}  // namespace

OptResult minimize(const std::function<double(const Eigen::VectorXd&)>& objective, const SieveSpec& spec,
                   const OptimizerConfig& config, std::optional<double> level_guess) {
    spec.validate();
    const int dim = spec.dim();
    if (config.max_evals < dim + 2)
        throw std::invalid_argument("minimize: budget must be at least dimension + 2");
    if (config.starts < 1) throw std::invalid_argument("minimize: need at least one start");
    if (!(config.tol_f > 0.0) || !(config.tol_x > 0.0))
        throw std::invalid_argument("minimize: tolerances must be positive");

    OptResult result;
    result.best_value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < config.starts; ++s) {
        Eigen::VectorXd x0;
        if (s == 0) {
            x0 = Eigen::VectorXd::Zero(dim);
        } else if (s == 1 && level_guess.has_value()) {
            // constant at the level guess: by partition of unity the exact
            // coefficients are the constant itself, then project
            x0 = project_l1(Eigen::VectorXd::Constant(dim, *level_guess), spec.delta);
        } else {
            Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(s)));
            x0 = sample_feasible(spec, rng);
        }
        NelderMeadOutcome outcome =
            nelder_mead_projected(objective, spec, x0, config.max_evals, config.tol_f, config.tol_x);
        StartTrace trace;
        trace.start = s;
        trace.best_value = outcome.best_value;
        trace.evals = outcome.evals;
        trace.converged = outcome.converged;
        trace.best_history = std::move(outcome.best_history);
        result.traces.push_back(std::move(trace));
        result.evals += outcome.evals;
        if (outcome.best_value < result.best_value) {
            result.best_value = outcome.best_value;
            result.best_coeffs = outcome.best;
            result.converged = outcome.converged;
        }
    }
    return result;
}

Estimate final_estimate(const PipelineObjective& objective, const OptResult& opt) {
    Estimate est;
    double criterion = 0.0;
    const ParamEstimate params = objective.estimate_at(opt.best_coeffs, &criterion);
    est.theta = params.theta;
    est.xi = params.xi;
    est.u_coeffs = opt.best_coeffs;
    est.mn_value = criterion;
    est.converged = opt.converged;
    est.evals = opt.evals;
    est.condition_b = params.condition_b;
    est.condition_outer = params.condition_outer;
    return est;
}

}  // namespace dirint
