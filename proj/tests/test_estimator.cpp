#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dirint/estimator.hpp"
#include "dirint/quadrature.hpp"
#include "dirint/rng.hpp"
#include "dirint/sieve.hpp"

using namespace dirint;

namespace {

// scalar model x' = theta * x
OdeModel scalar_linear() {
    OdeModel m;
    m.name = "scalar";
    m.d = 1;
    m.p = 1;
    m.g = [](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = x[0]; };
    m.measured = {0};
    return m;
}

OdeModel lotka_volterra_partial() {
    OdeModel m;
    m.name = "lotka_volterra";
    m.d = 2;
    m.p = 4;
    m.g = [](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::MatrixXd> out) {
        const double xy = x[0] * x[1];
        out(0, 0) = x[0];
        out(0, 1) = -xy;
        out(0, 2) = 0.0;
        out(0, 3) = 0.0;
        out(1, 0) = 0.0;
        out(1, 1) = 0.0;
        out(1, 2) = xy;
        out(1, 3) = -x[1];
    };
    m.measured = {0};
    return m;
}

// random smooth model with affine g entries, used for oracle comparisons
struct RandomInstance {
    OdeModel model;
    StateGrid state;
};

RandomInstance random_instance(Rng& rng) {
    const int d = 1 + static_cast<int>(rng.uniform() * 3);
    const int p = 1 + static_cast<int>(rng.uniform() * 4);
    Eigen::MatrixXd bias(d, p);
    std::vector<Eigen::MatrixXd> slope(static_cast<std::size_t>(d), Eigen::MatrixXd(d, p));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < p; ++j) {
            bias(i, j) = rng.uniform(-1.0, 1.0);
            for (int k = 0; k < d; ++k) slope[static_cast<std::size_t>(k)](i, j) = rng.uniform(-1.0, 1.0);
        }
    RandomInstance inst;
    inst.model.name = "random_affine";
    inst.model.d = d;
    inst.model.p = p;
    inst.model.g = [bias, slope, d](const Eigen::Ref<const Eigen::VectorXd>& x,
                                    Eigen::Ref<Eigen::MatrixXd> out) {
        out = bias;
        for (int k = 0; k < d; ++k) out += x[k] * slope[static_cast<std::size_t>(k)];
    };
    inst.model.measured.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) inst.model.measured[static_cast<std::size_t>(i)] = i;

    inst.state.times = uniform_grid(1.0, 201);
    inst.state.values.resize(d, inst.state.times.size());
    for (int i = 0; i < d; ++i) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        const double c = rng.uniform(-1.0, 1.0), phase = rng.uniform(0.0, 6.28);
        for (Eigen::Index k = 0; k < inst.state.times.size(); ++k) {
            const double t = inst.state.times[k];
            inst.state.values(i, k) = a + b * t + c * std::sin(6.28318 * t + phase);
        }
    }
    return inst;
}

// independent oracle: minimize the discretized quadratic over the stacked
// unknown z = (xi, theta) by forming and solving the normal equations
Eigen::VectorXd stacked_least_squares(const StateGrid& state, const IntegralOperators& ops) {
    const int d = ops.d, p = ops.p;
    const Eigen::VectorXd w = trapezoid_weights(state.times);
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d + p, d + p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + p);
    Eigen::MatrixXd h(d, d + p);
    for (Eigen::Index k = 0; k < state.times.size(); ++k) {
        h.leftCols(d) = Eigen::MatrixXd::Identity(d, d);
        h.rightCols(p) = ops.G_at(k);
        normal.noalias() += w[k] * h.transpose() * h;
        rhs.noalias() += w[k] * h.transpose() * state.values.col(k);
    }
    return normal.ldlt().solve(rhs);
}

}  // namespace

TEST_CASE("assemble_state places rows by original state index") {
    Eigen::VectorXd times = uniform_grid(1.0, 3);
    Eigen::MatrixXd m(1, 3), u(1, 3);
    m << 1.0, 2.0, 3.0;
    u << 9.0, 8.0, 7.0;

    SUBCASE("measured = {0}") {
        StateGrid s = assemble_state(times, m, u, {0}, 2);
        CHECK(s.values.row(0) == m.row(0));
        CHECK(s.values.row(1) == u.row(0));
    }
    SUBCASE("measured = {1}") {
        StateGrid s = assemble_state(times, m, u, {1}, 2);
        CHECK(s.values.row(0) == u.row(0));
        CHECK(s.values.row(1) == m.row(0));
    }
    SUBCASE("fully observed requires empty u") {
        Eigen::MatrixXd m2(2, 3);
        m2 << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
        StateGrid s = assemble_state(times, m2, Eigen::MatrixXd(0, 3), {0, 1}, 2);
        CHECK(s.values == m2);
        CHECK_THROWS_AS(assemble_state(times, m2, u, {0, 1}, 2), std::invalid_argument);
    }
    SUBCASE("duplicate or out-of-range measured indices are rejected") {
        Eigen::MatrixXd m2(2, 3);
        m2.setZero();
        CHECK_THROWS_AS(assemble_state(times, m2, Eigen::MatrixXd(0, 3), {0, 0}, 2), std::invalid_argument);
        CHECK_THROWS_AS(assemble_state(times, m2, Eigen::MatrixXd(0, 3), {0, 2}, 2), std::invalid_argument);
    }
}

TEST_CASE("integral operators on analytic cases") {
    SUBCASE("g identically 1 on [0,1]") {
        OdeModel m;
        m.name = "unit";
        m.d = 1;
        m.p = 1;
        m.g = [](const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = 1.0; };
        m.measured = {0};
        StateGrid state;
        state.times = uniform_grid(1.0, 1001);
        state.values = Eigen::MatrixXd::Zero(1, 1001);
        IntegralOperators ops = integral_operators(m, state);
        // G(t) = t and A = 1/2 are exact for the trapezoid rule
        for (Eigen::Index k = 0; k < state.times.size(); ++k)
            CHECK(std::abs(ops.G_flat(0, k) - state.times[k]) < 1e-14);
        CHECK(std::abs(ops.A(0, 0) - 0.5) < 1e-14);
        CHECK(std::abs(ops.B(0, 0) - 1.0 / 3.0) < 1e-6);
    }
    SUBCASE("state constant 2 with g(x) = x") {
        OdeModel m = scalar_linear();
        StateGrid state;
        state.times = uniform_grid(1.0, 1001);
        state.values = Eigen::MatrixXd::Constant(1, 1001, 2.0);
        IntegralOperators ops = integral_operators(m, state);
        for (Eigen::Index k = 0; k < state.times.size(); ++k)
            CHECK(std::abs(ops.G_flat(0, k) - 2.0 * state.times[k]) < 1e-13);
        CHECK(std::abs(ops.A(0, 0) - 1.0) < 1e-13);
        CHECK(std::abs(ops.B(0, 0) - 4.0 / 3.0) < 1e-6);
    }
    SUBCASE("B is symmetric and G starts at zero on random instances") {
        Rng rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            RandomInstance inst = random_instance(rng);
            IntegralOperators ops = integral_operators(inst.model, inst.state);
            CHECK(ops.G_flat.col(0).cwiseAbs().maxCoeff() == 0.0);
            const double scale = std::max(1.0, ops.B.cwiseAbs().maxCoeff());
            CHECK((ops.B - ops.B.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
        }
    }
}

TEST_CASE("hand-derived estimate: constant state 2 with g(x) = x on [0,1]") {
    OdeModel m = scalar_linear();
    StateGrid state;
    state.times = uniform_grid(1.0, 1001);
    state.values = Eigen::MatrixXd::Constant(1, 1001, 2.0);
    IntegralOperators ops = integral_operators(m, state);
    ParamEstimate est = estimate_parameters(state, ops);
    CHECK(std::abs(est.xi[0] - 2.0) < 1e-8);
    CHECK(std::abs(est.theta[0]) < 1e-8);
}

TEST_CASE("fully observed exponential recovers theta = xi = 1") {
    OdeModel m = scalar_linear();
    StateGrid state;
    state.times = uniform_grid(1.0, 2001);
    state.values.resize(1, 2001);
    for (Eigen::Index k = 0; k < 2001; ++k) state.values(0, k) = std::exp(state.times[k]);
    IntegralOperators ops = integral_operators(m, state);
    ParamEstimate est = estimate_parameters(state, ops);
    CHECK(std::abs(est.theta[0] - 1.0) < 1e-5);
    CHECK(std::abs(est.xi[0] - 1.0) < 1e-5);
}

TEST_CASE("closed form equals the stacked normal-equations oracle") {
    Rng rng(29);
    int done = 0;
    while (done < 25) {
        RandomInstance inst = random_instance(rng);
        IntegralOperators ops = integral_operators(inst.model, inst.state);
        ParamEstimate est;
        try {
            est = estimate_parameters(inst.state, ops);
        } catch (const SingularMatrixError&) {
            continue;  // skip ill-conditioned draws; the oracle needs a clean solve
        }
        if (est.condition_b > 1e8 || est.condition_outer > 1e8) continue;
        const Eigen::VectorXd z = stacked_least_squares(inst.state, ops);
        Eigen::VectorXd closed(inst.model.d + inst.model.p);
        closed << est.xi, est.theta;
        CHECK((closed - z).norm() <= 1e-8 * std::max(1.0, z.norm()));
        ++done;
    }
}

TEST_CASE("criterion value") {
    SUBCASE("zero at the exact solution with the true parameters") {
        OdeModel m = scalar_linear();
        StateGrid state;
        state.times = uniform_grid(1.0, 2001);
        state.values.resize(1, 2001);
        for (Eigen::Index k = 0; k < 2001; ++k) state.values(0, k) = std::exp(state.times[k]);
        IntegralOperators ops = integral_operators(m, state);
        ParamEstimate truth;
        truth.xi = Eigen::VectorXd::Ones(1);
        truth.theta = Eigen::VectorXd::Ones(1);
        CHECK(criterion_value(state, ops, truth) < 1e-10);
    }
    SUBCASE("Lotka-Volterra at the exact state stays below 1e-8, shifts are worse") {
        OdeModel lv = lotka_volterra_partial();
        Eigen::VectorXd theta = Eigen::VectorXd::Ones(4);
        Eigen::VectorXd xi(2);
        xi << 1.0, 2.0;
        // exact trajectory on the quadrature grid (RK4 at this resolution is
        // orders tighter than the trapezoid floor being tested)
        StateGrid state;
        state.times = uniform_grid(2.0, 2001);
        {
            OdeModel full = lv;
            full.measured = {0, 1};
            state.values = simulate(full, theta, xi, state.times).values;
        }
        IntegralOperators ops = integral_operators(lv, state);
        ParamEstimate est = estimate_parameters(state, ops);
        const double at_truth = criterion_value(state, ops, est);
        CHECK(at_truth < 1e-8);

        StateGrid shifted = state;
        shifted.values.row(1).array() += 0.1;
        IntegralOperators ops_shifted = integral_operators(lv, shifted);
        ParamEstimate est_shifted = estimate_parameters(shifted, ops_shifted);
        CHECK(criterion_value(shifted, ops_shifted, est_shifted) > at_truth);
    }
    SUBCASE("the closed form minimizes the discretized quadratic") {
        Rng rng(31);
        RandomInstance inst = random_instance(rng);
        IntegralOperators ops = integral_operators(inst.model, inst.state);
        ParamEstimate est = estimate_parameters(inst.state, ops);
        const double at_min = criterion_value(inst.state, ops, est);
        for (int trial = 0; trial < 100; ++trial) {
            ParamEstimate perturbed = est;
            for (Eigen::Index i = 0; i < perturbed.xi.size(); ++i)
                perturbed.xi[i] += rng.uniform(-1.0, 1.0);
            for (Eigen::Index i = 0; i < perturbed.theta.size(); ++i)
                perturbed.theta[i] += rng.uniform(-1.0, 1.0);
            CHECK(criterion_value(inst.state, ops, perturbed) >= at_min - 1e-12);
        }
    }
}

TEST_CASE("singular B raises a named error") {
    // u identically zero makes the first column of G vanish for the harmonic
    // oscillator observed through component 1
    OdeModel ho;
    ho.name = "harmonic";
    ho.d = 2;
    ho.p = 2;
    ho.g = [](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::MatrixXd> out) {
        out(0, 0) = x[1];
        out(0, 1) = 0.0;
        out(1, 0) = 0.0;
        out(1, 1) = -x[0];
    };
    ho.measured = {0};
    StateGrid state;
    state.times = uniform_grid(1.0, 101);
    state.values.resize(2, 101);
    for (Eigen::Index k = 0; k < 101; ++k) {
        state.values(0, k) = std::cos(state.times[k]);
        state.values(1, k) = 0.0;
    }
    IntegralOperators ops = integral_operators(ho, state);
    try {
        estimate_parameters(state, ops);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.matrix_name == "B");
    }
}

TEST_CASE("criterion changes at most proportionally to sup-norm perturbations of u") {
    OdeModel lv = lotka_volterra_partial();
    Eigen::VectorXd theta = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd xi(2);
    xi << 1.0, 2.0;
    StateGrid state;
    state.times = uniform_grid(2.0, 1001);
    {
        OdeModel full = lv;
        full.measured = {0, 1};
        state.values = simulate(full, theta, xi, state.times).values;
    }
    // probe at a generic candidate away from the minimizer, where the
    // directional difference quotient is dominated by the first-order term
    state.values.row(1).array() += 0.3;
    auto mn_at = [&](double eps) {
        StateGrid s = state;
        s.values.row(1).array() += eps;
        IntegralOperators ops = integral_operators(lv, s);
        return criterion_value(s, ops, estimate_parameters(s, ops));
    };
    const double base = mn_at(0.0);
    const double c3 = std::abs(mn_at(1e-3) - base) / 1e-3;
    const double c4 = std::abs(mn_at(1e-4) - base) / 1e-4;
    // smoke check: the local Lipschitz estimate is stable across the scales
    CHECK(c4 <= 5.0 * c3 + 1e-9);
    CHECK(c3 <= 5.0 * c4 + 1e-9);
}

TEST_CASE("Frobenius norm is submultiplicative on random matrices") {
    Rng rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform() * 4);
        const int p = 1 + static_cast<int>(rng.uniform() * 4);
        const int s = 1 + static_cast<int>(rng.uniform() * 4);
        Eigen::MatrixXd a(m, p), b(p, s);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < p; ++j) a(i, j) = rng.uniform(-10.0, 10.0);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < s; ++j) b(i, j) = rng.uniform(-10.0, 10.0);
        CHECK((a * b).norm() <= a.norm() * b.norm() * (1.0 + 1e-12));
    }
}
