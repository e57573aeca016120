#include "dirint/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dirint {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": " + value);
    }
}

long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": " + value);
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: bad boolean value for " + key + ": " + value);
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& value) {
    const std::vector<std::string> parts = split_csv(value);
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(key, parts[i]);
    return v;
}

}  // namespace

OptimizerConfig RunConfig::optimizer_config() const {
    OptimizerConfig oc;
    oc.max_evals = max_evals;
    oc.starts = starts;
    oc.tol_f = tol_f;
    oc.tol_x = tol_x;
    oc.seed = seed;
    return oc;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError("config: empty value for " + key);

        if (key == "model") {
            cfg.model_name = value;
        } else if (key == "theta") {
            cfg.theta = to_vector(key, value);
        } else if (key == "xi") {
            cfg.xi = to_vector(key, value);
        } else if (key == "t_end") {
            cfg.t_end = to_double(key, value);
        } else if (key == "n") {
            cfg.n = static_cast<int>(to_long(key, value));
        } else if (key == "sigma") {
            cfg.sigma = to_double(key, value);
        } else if (key == "measured") {
            cfg.measured.clear();
            for (const std::string& part : split_csv(value)) {
                const long idx = to_long(key, part);  // 1-based in the file
                if (idx < 1) throw ConfigError("config: measured indices are 1-based");
                cfg.measured.push_back(static_cast<int>(idx) - 1);
            }
        } else if (key == "grid") {
            cfg.grid_n = static_cast<int>(to_long(key, value));
        } else if (key == "k") {
            cfg.sieve_k = static_cast<int>(to_long(key, value));
        } else if (key == "delta") {
            cfg.sieve_delta = to_double(key, value);
        } else if (key == "degree") {
            cfg.degree = static_cast<int>(to_long(key, value));
        } else if (key == "exact_m") {
            cfg.exact_m = to_bool(key, value);
        } else if (key == "bandwidth") {
            cfg.bandwidth = to_double(key, value);
        } else if (key == "max_evals") {
            cfg.max_evals = static_cast<int>(to_long(key, value));
        } else if (key == "starts") {
            cfg.starts = static_cast<int>(to_long(key, value));
        } else if (key == "tol_f") {
            cfg.tol_f = to_double(key, value);
        } else if (key == "tol_x") {
            cfg.tol_x = to_double(key, value);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
        } else if (key == "data") {
            cfg.data_path = value;
        } else if (key == "n_list") {
            cfg.n_list.clear();
            for (const std::string& part : split_csv(value))
                cfg.n_list.push_back(static_cast<int>(to_long(key, part)));
        } else if (key == "reps") {
            cfg.reps = static_cast<int>(to_long(key, value));
        } else if (key == "candidates") {
            cfg.candidates = static_cast<int>(to_long(key, value));
        } else if (key == "sim_refine") {
            cfg.sim_refine = static_cast<int>(to_long(key, value));
        } else {
            throw ConfigError("config: unknown key: " + key);
        }
    }
    if (cfg.model_name.empty()) throw ConfigError("config: missing model");
    if (cfg.n < 2) throw ConfigError("config: n must be >= 2");
    if (!(cfg.t_end > 0.0)) throw ConfigError("config: t_end must be > 0");
    if (cfg.grid_n < 3) throw ConfigError("config: grid must be >= 3");
    if (cfg.sigma < 0.0) throw ConfigError("config: sigma must be >= 0");
    if (cfg.reps < 1) throw ConfigError("config: reps must be >= 1");
    if (cfg.sim_refine < 1) throw ConfigError("config: sim_refine must be >= 1");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

}  // namespace dirint
