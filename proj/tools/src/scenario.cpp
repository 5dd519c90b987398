#include "nmpc_tools/scenario.hpp"

#include "nmpc/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nmpc::tools {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string normalize_key(std::string_view key) {
    std::string out = trim(key);
    while (!out.empty() && out.front() == '-') out.erase(out.begin());
    for (char& c : out) {
        if (c == '-') c = '_';
    }
    return out;
}

double parse_real(const std::string& field, std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw UsageError(field, "expected a finite real number, got '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& field, std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || v < -1000000000L || v > 1000000000L) {
        throw UsageError(field, "expected an integer, got '" + s + "'");
    }
    return static_cast<int>(v);
}

std::vector<double> parse_vector(const std::string& field, std::string_view text) {
    std::vector<double> out;
    std::string s = trim(text);
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(field, item));
    if (out.empty()) throw UsageError(field, "expected a comma-separated list of reals");
    return out;
}

}  // namespace

std::string_view to_string(SystemKind kind) {
    return kind == SystemKind::syncgen ? "syncgen" : "linear_scalar";
}

void apply_setting(ScenarioConfig& c, std::string_view raw_key, std::string_view raw_value) {
    const std::string key = normalize_key(raw_key);
    const std::string value = trim(raw_value);
    if (key == "system") {
        if (value == "syncgen") {
            c.system = SystemKind::syncgen;
        } else if (value == "linear_scalar" || value == "linear-scalar") {
            c.system = SystemKind::linear_scalar;
        } else {
            throw UsageError(key, "unknown system '" + value + "' (syncgen | linear_scalar)");
        }
    } else if (key == "algorithm") {
        auto algorithm = parse_algorithm(value);
        if (!algorithm) throw UsageError(key, "unknown algorithm '" + value + "' (classical | basic | update_a | update_b)");
        c.algorithm = *algorithm;
    } else if (key == "x0") {
        c.x0 = parse_vector(key, value);
    } else if (key == "N") {
        c.N = parse_int(key, value);
    } else if (key == "alpha_bar") {
        c.alpha_bar = parse_real(key, value);
    } else if (key == "steps") {
        c.steps = parse_int(key, value);
    } else if (key == "T") {
        c.T = parse_real(key, value);
    } else if (key == "lambda") {
        c.lambda = parse_real(key, value);
    } else if (key == "output") {
        if (value.empty()) throw UsageError(key, "output path must not be empty");
        c.output = value;
    } else if (key == "substeps") {
        c.substeps = parse_int(key, value);
    } else if (key == "grad_tol") {
        c.grad_tol = parse_real(key, value);
    } else if (key == "max_iter") {
        c.max_iter = parse_int(key, value);
    } else if (key == "stop_tol") {
        if (value == "off" || value == "none") {
            c.stop_tol.reset();
        } else {
            c.stop_tol = parse_real(key, value);
        }
    } else if (key == "a") {
        c.a = parse_real(key, value);
    } else if (key == "b") {
        c.b = parse_real(key, value);
    } else if (key == "q") {
        c.q = parse_real(key, value);
    } else if (key == "r") {
        c.r = parse_real(key, value);
    } else {
        throw UsageError(key.empty() ? std::string("<empty>") : key, "unknown configuration key");
    }
}

ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("line " + std::to_string(lineno), "expected 'key = value'");
        }
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("config", "cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), std::move(base));
}

void validate(const ScenarioConfig& c) {
    if (c.N < 2) throw UsageError("N", "prediction horizon must be at least 2");
    if (!(c.alpha_bar > 0.0 && c.alpha_bar < 1.0)) throw UsageError("alpha_bar", "must lie in (0, 1)");
    if (c.steps < 1) throw UsageError("steps", "must be at least 1");
    if (c.substeps < 1) throw UsageError("substeps", "must be at least 1");
    if (!(c.grad_tol > 0.0)) throw UsageError("grad_tol", "must be positive");
    if (c.max_iter < 1) throw UsageError("max_iter", "must be at least 1");
    if (c.stop_tol && *c.stop_tol < 0.0) throw UsageError("stop_tol", "must be nonnegative (or 'off')");
    const std::size_t nx = c.system == SystemKind::syncgen ? 3 : 1;
    if (c.x0 && c.x0->size() != nx) {
        throw UsageError("x0", "expected " + std::to_string(nx) + " coordinates for system " +
                                   std::string(to_string(c.system)));
    }
    if (c.system == SystemKind::syncgen) {
        if (!(c.T > 0.0)) throw UsageError("T", "sampling period must be positive");
        if (!(c.lambda >= 0.0)) throw UsageError("lambda", "must be nonnegative");
    } else {
        if (c.b == 0.0) throw UsageError("b", "b = 0 makes the system uncontrollable");
        if (!(c.q > 0.0)) throw UsageError("q", "must be positive");
        if (!(c.r > 0.0)) throw UsageError("r", "must be positive");
    }
}

ControlSystem make_system(const ScenarioConfig& c) {
    validate(c);
    if (c.system == SystemKind::syncgen) return make_syncgen(SyncGenParams{}, c.T, c.lambda, c.substeps);
    return make_linear_scalar(c.a, c.b, c.q, c.r);
}

Vector initial_state(const ScenarioConfig& c) {
    if (c.x0) return Eigen::Map<const Vector>(c.x0->data(), static_cast<Eigen::Index>(c.x0->size()));
    if (c.system == SystemKind::syncgen) {
        Vector x(3);
        x << 1.02, 0.1, 1.014;
        return x;
    }
    return Vector::Ones(1);
}

RunOptions run_options(const ScenarioConfig& c) {
    RunOptions o;
    o.steps = c.steps;
    o.stop_tolerance = c.stop_tol;
    o.solver.gradient_tolerance = c.grad_tol;
    o.solver.max_iterations = c.max_iter;
    return o;
}

double lq_finite_value_coefficient(double a, double b, double q, double r, int N) {
    double P = q;  // one stage: u = 0 is optimal
    for (int k = 1; k < N; ++k) P = q + a * a * P - a * a * b * b * P * P / (r + b * b * P);
    return P;
}

double lq_infinite_value_coefficient(double a, double b, double q, double r) {
    // positive root of the scalar algebraic Riccati equation
    const double bb = b * b;
    const double lin = r * (1.0 - a * a) - q * bb;
    return (-lin + std::sqrt(lin * lin + 4.0 * bb * q * r)) / (2.0 * bb);
}

}  // namespace nmpc::tools
