#include "dirint/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dirint/rng.hpp"

namespace dirint {

namespace {

constexpr double kOverflowGuard = 1e12;

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

std::vector<int> OdeModel::unmeasured() const {
    std::vector<int> u;
    for (int i = 0; i < d; ++i)
        if (std::find(measured.begin(), measured.end(), i) == measured.end()) u.push_back(i);
    return u;
}

void OdeModel::validate() const {
    if (d < 1 || p < 1) throw std::invalid_argument("OdeModel: d and p must be positive");
    if (!g) throw std::invalid_argument("OdeModel: missing g");
    if (measured.empty() || static_cast<int>(measured.size()) > d)
        throw std::invalid_argument("OdeModel: measured set must have size in 1..d");
    std::vector<int> m = measured;
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
        throw std::invalid_argument("OdeModel: measured indices must be distinct");
    if (m.front() < 0 || m.back() >= d)
        throw std::invalid_argument("OdeModel: measured index out of range");
}

Eigen::MatrixXd eval_g(const OdeModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.d) throw std::invalid_argument("eval_g: state has wrong dimension");
    if (!x.allFinite()) throw std::invalid_argument("eval_g: state has non-finite entries");
    Eigen::MatrixXd out(model.d, model.p);
    model.g(x, out);
    if (!out.allFinite()) throw std::runtime_error("eval_g: model produced non-finite output");
    return out;
}

Trajectory simulate(const OdeModel& model, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi,
                    const Eigen::VectorXd& grid) {
    model.validate();
    if (theta.size() != model.p || xi.size() != model.d)
        throw std::invalid_argument("simulate: theta/xi dimension mismatch");
    if (!theta.allFinite() || !xi.allFinite())
        throw std::invalid_argument("simulate: theta/xi must be finite");
    const Eigen::Index n = grid.size();
    if (n < 1 || grid[0] != 0.0) throw std::invalid_argument("simulate: grid must start at 0");
    for (Eigen::Index k = 0; k + 1 < n; ++k)
        if (!(grid[k + 1] > grid[k])) throw std::invalid_argument("simulate: grid must be strictly increasing");

    Trajectory traj;
    traj.times = grid;
    traj.values.resize(model.d, n);
    traj.values.col(0) = xi;

    Eigen::MatrixXd gx(model.d, model.p);
    Eigen::VectorXd x = xi, xs(model.d), k1(model.d), k2(model.d), k3(model.d), k4(model.d);
    auto rhs = [&](const Eigen::VectorXd& state, Eigen::VectorXd& dx) {
        model.g(state, gx);
        dx.noalias() = gx * theta;
    };
    auto check = [&](const Eigen::VectorXd& state, double t) {
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kOverflowGuard) {
            std::ostringstream msg;
            msg << "simulate: solution diverged at t=" << t << " for model " << model.name;
            throw DivergenceError(msg.str());
        }
    };
    check(x, grid[0]);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double h = grid[k + 1] - grid[k];
        rhs(x, k1);
        xs = x + (0.5 * h) * k1;
        rhs(xs, k2);
        xs = x + (0.5 * h) * k2;
        rhs(xs, k3);
        xs = x + h * k3;
        rhs(xs, k4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check(x, grid[k + 1]);
        traj.values.col(k + 1) = x;
    }
    return traj;
}

Eigen::VectorXd interpolate_state(const Trajectory& traj, double s) {
    const Eigen::Index n = traj.times.size();
    if (n == 0) throw std::invalid_argument("interpolate_state: empty trajectory");
    if (s < traj.times[0] || s > traj.times[n - 1])
        throw std::invalid_argument("interpolate_state: time outside trajectory range");
    // exact at nodes so that sigma = 0 observations reproduce stored values
    const double* begin = traj.times.data();
    const double* it = std::lower_bound(begin, begin + n, s);
    Eigen::Index k = it - begin;
    if (k < n && traj.times[k] == s) return traj.values.col(k);
    const Eigen::Index lo = k - 1;
    const double t0 = traj.times[lo], t1 = traj.times[lo + 1];
    const double w = (s - t0) / (t1 - t0);
    return (1.0 - w) * traj.values.col(lo) + w * traj.values.col(lo + 1);
}

Dataset generate_observations(const Trajectory& traj, const std::vector<int>& measured,
                              const Eigen::VectorXd& sample_times, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("generate_observations: sigma must be >= 0");
    if (measured.empty()) throw std::invalid_argument("generate_observations: empty measured set");
    const Eigen::Index n = sample_times.size();
    if (n < 2) throw std::invalid_argument("generate_observations: need at least 2 sample times");
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        if (!(sample_times[i + 1] > sample_times[i]))
            throw std::invalid_argument("generate_observations: sample times must be strictly increasing");
    const double t_end = traj.t_end();
    if (sample_times[0] < 0.0 || sample_times[n - 1] > t_end)
        throw std::invalid_argument("generate_observations: sample time outside [0, T]");

    Dataset data;
    data.times = sample_times;
    data.obs.resize(static_cast<Eigen::Index>(measured.size()), n);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd state = interpolate_state(traj, sample_times[i]);
        for (std::size_t j = 0; j < measured.size(); ++j) {
            const double noise = (sigma > 0.0) ? sigma * rng.normal() : 0.0;
            data.obs(static_cast<Eigen::Index>(j), i) = state[measured[j]] + noise;
        }
    }
    return data;
}

OdeModel builtin_model(const std::string& name) {
    OdeModel m;
    m.name = name;
    if (name == "lotka_volterra") {
        // x' = th1*x - th2*x*y ; y' = th3*x*y - th4*y
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
    } else if (name == "harmonic") {
        // x1' = th1*x2 ; x2' = -th2*x1
        m.d = 2;
        m.p = 2;
        m.g = [](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::MatrixXd> out) {
            out(0, 0) = x[1];
            out(0, 1) = 0.0;
            out(1, 0) = 0.0;
            out(1, 1) = -x[0];
        };
    } else if (name == "exponential") {
        // x' = th*x
        m.d = 1;
        m.p = 1;
        m.g = [](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::MatrixXd> out) {
            out(0, 0) = x[0];
        };
    } else {
        throw std::invalid_argument("unknown model: " + name);
    }
    m.measured.resize(m.d);
    for (int i = 0; i < m.d; ++i) m.measured[i] = i;
    return m;
}

std::vector<std::string> builtin_model_names() { return {"lotka_volterra", "harmonic", "exponential"}; }

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::string line = "t";
    for (int j = 1; j <= data.r(); ++j) line += ",y" + std::to_string(j);
    out << line << "\n";
    for (int i = 0; i < data.n(); ++i) {
        line.clear();
        format_double(line, data.times[i]);
        for (int j = 0; j < data.r(); ++j) {
            line += ',';
            format_double(line, data.obs(j, i));
        }
        out << line << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    if (cols.size() < 2 || cols[0] != "t")
        throw std::runtime_error("dataset header must be t,y1,...,yr: " + path);
    for (std::size_t j = 1; j < cols.size(); ++j)
        if (cols[j] != "y" + std::to_string(j))
            throw std::runtime_error("dataset header must be t,y1,...,yr: " + path);
    const int r = static_cast<int>(cols.size()) - 1;

    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        int field = 0;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::runtime_error("bad number in dataset: " + tok);
            if (field == 0)
                times.push_back(v);
            else
                values.push_back(v);
            ++field;
        }
        if (field != r + 1) throw std::runtime_error("dataset row has wrong column count: " + path);
    }
    const int n = static_cast<int>(times.size());
    if (n < 2) throw std::runtime_error("dataset needs at least 2 rows: " + path);
    Dataset data;
    data.times.resize(n);
    data.obs.resize(r, n);
    for (int i = 0; i < n; ++i) {
        data.times[i] = times[i];
        if (i > 0 && !(data.times[i] > data.times[i - 1]))
            throw std::runtime_error("dataset times must be strictly increasing: " + path);
        for (int j = 0; j < r; ++j) data.obs(j, i) = values[static_cast<std::size_t>(i) * r + j];
    }
    return data;
}

}  // namespace dirint
